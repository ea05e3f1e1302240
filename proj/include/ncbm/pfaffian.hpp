#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

#include "ncbm/special_fn.hpp"

namespace ncbm {

using cplx = std::complex<double>;

// A quaternion kept only as its 2x2 complex representation C(q).
struct Quaternion {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();

    Quaternion() = default;
    explicit Quaternion(const Eigen::Matrix2cd& c) : m(c) {}
    static Quaternion one();
    static Quaternion e1();
    static Quaternion e2();
    static Quaternion e3();
    // real 2x2 block [[a, b], [c, d]]
    static Quaternion from_block(double a, double b, double c, double d);

    Quaternion operator*(const Quaternion& o) const { return Quaternion(m * o.m); }
    Quaternion operator+(const Quaternion& o) const { return Quaternion(m + o.m); }
    Quaternion operator-(const Quaternion& o) const { return Quaternion(m - o.m); }
    cplx scalar_part() const { return 0.5 * (m(0, 0) + m(1, 1)); }
};

Quaternion dual(const Quaternion& q);

// Self-dual matrix of quaternions, one block per point.
struct QKernelMatrix {
    int n = 0;
    std::vector<Quaternion> blocks;  // row-major n x n
    std::vector<std::pair<int, int>> index;  // row -> (time index, particle index)

    explicit QKernelMatrix(int n_ = 0) : n(n_), blocks(size_t(n_) * n_) {}
    Quaternion& operator()(int i, int j) { return blocks[size_t(i) * n + j]; }
    const Quaternion& operator()(int i, int j) const { return blocks[size_t(i) * n + j]; }

    Eigen::MatrixXcd expand() const;            // C(Q), 2n x 2n
    double self_dual_residual(int* bi = nullptr, int* bj = nullptr) const;
};

// J = diag([[0, 1], [-1, 0]], ...)
Eigen::MatrixXd block_J(int n);

struct PfaffianResult {
    cplx value;
    int pivots_swapped = 0;
};

// Parlett-Reid elimination with pivoting. Throws on odd size or a non-skew
// argument (the message names the worst entry pair).
template <class Mat>
typename Mat::Scalar pfaffian(const Mat& A);

double pfaffian_real(const Eigen::MatrixXd& A);
cplx pfaffian_complex(const Eigen::MatrixXcd& A);

struct TdetResult {
    double value = 0.0;
    double imag = 0.0;
};

// Tdet Q = Pf(J C(Q)).
TdetResult tdet(const QKernelMatrix& Q, double self_dual_tol = 1e-8);

// Exponential-time references, small sizes only.
cplx pfaffian_permutation_sum(const Eigen::MatrixXcd& A);
cplx tdet_cycle_sum(const QKernelMatrix& Q);

}  // namespace ncbm
