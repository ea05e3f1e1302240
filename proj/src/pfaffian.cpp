#include "ncbm/pfaffian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ncbm {

Quaternion Quaternion::one() { return Quaternion(Eigen::Matrix2cd::Identity()); }

Quaternion Quaternion::e1() {
    Eigen::Matrix2cd c;
    c << 0, 1, -1, 0;
    return Quaternion(c);
}

Quaternion Quaternion::e2() {
    Eigen::Matrix2cd c;
    c << 0, cplx(0, 1), cplx(0, 1), 0;
    return Quaternion(c);
}

Quaternion Quaternion::e3() {
    Eigen::Matrix2cd c;
    c << cplx(0, 1), 0, 0, cplx(0, -1);
    return Quaternion(c);
}

Quaternion Quaternion::from_block(double a, double b, double c, double d) {
    Eigen::Matrix2cd m;
    m << a, b, c, d;
    return Quaternion(m);
}

Quaternion dual(const Quaternion& q) {
    Eigen::Matrix2cd c;
    c << q.m(1, 1), -q.m(0, 1), -q.m(1, 0), q.m(0, 0);
    return Quaternion(c);
}

Eigen::MatrixXcd QKernelMatrix::expand() const {
    Eigen::MatrixXcd C(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) C.block<2, 2>(2 * i, 2 * j) = (*this)(i, j).m;
    return C;
}

double QKernelMatrix::self_dual_residual(int* bi, int* bj) const {
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double r = ((*this)(j, i).m - dual((*this)(i, j)).m).cwiseAbs().maxCoeff();
            if (r > worst) {
                worst = r;
                if (bi) *bi = i;
                if (bj) *bj = j;
            }
        }
    return worst;
}

Eigen::MatrixXd block_J(int n) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k) {
        J(2 * k, 2 * k + 1) = 1;
        J(2 * k + 1, 2 * k) = -1;
    }
    return J;
}

namespace {

template <class Mat>
void check_skew(const Mat& A) {
    if (A.rows() != A.cols()) throw domain_error("pfaffian: matrix is not square");
    if (A.rows() % 2) throw domain_error("pfaffian: odd dimension " + std::to_string(A.rows()));
    if (A.rows() == 0) return;
    double amax = A.cwiseAbs().maxCoeff();
    double worst = 0;
    Eigen::Index wi = 0, wj = 0;
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = i; j < A.cols(); ++j) {
            double r = std::abs(A(i, j) + A(j, i));
            if (r > worst) worst = r, wi = i, wj = j;
        }
    if (worst > 1e-10 * amax) {
        std::ostringstream os;
        os << "pfaffian: matrix not skew-symmetric at (" << wi << ", " << wj << "), |a_ij + a_ji| = " << worst;
        throw domain_error(os.str());
    }
}

}  // namespace

template <class Mat>
typename Mat::Scalar pfaffian(const Mat& Ain) {
    using S = typename Mat::Scalar;
    check_skew(Ain);
    const Eigen::Index n = Ain.rows();
    if (n == 0) return S(1);
    Mat A = Ain;
    double amax = A.cwiseAbs().maxCoeff();
    S val(1);
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        // pivot: largest entry in column k below the diagonal
        Eigen::Index kp = k + 1;
        double best = std::abs(A(k + 1, k));
        for (Eigen::Index i = k + 2; i < n; ++i)
            if (std::abs(A(i, k)) > best) best = std::abs(A(i, k)), kp = i;
        if (kp != k + 1) {
            A.row(k + 1).swap(A.row(kp));
            A.col(k + 1).swap(A.col(kp));
            val = -val;
        }
        if (best <= 1e-13 * amax || best == 0.0) return S(0);
        val *= A(k, k + 1);
        if (k + 2 < n) {
            const Eigen::Index r = n - k - 2;
            Eigen::Matrix<S, Eigen::Dynamic, 1> tau = A.row(k).tail(r).transpose() / A(k, k + 1);
            Eigen::Matrix<S, Eigen::Dynamic, 1> col = A.col(k + 1).tail(r);
            A.bottomRightCorner(r, r) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return val;
}

template double pfaffian<Eigen::MatrixXd>(const Eigen::MatrixXd&);
template cplx pfaffian<Eigen::MatrixXcd>(const Eigen::MatrixXcd&);

double pfaffian_real(const Eigen::MatrixXd& A) { return pfaffian(A); }
cplx pfaffian_complex(const Eigen::MatrixXcd& A) { return pfaffian(A); }

TdetResult tdet(const QKernelMatrix& Q, double tol) {
    int bi = 0, bj = 0;
    double res = Q.self_dual_residual(&bi, &bj);
    double scale = 1.0;
    for (const auto& b : Q.blocks) scale = std::max(scale, b.m.cwiseAbs().maxCoeff());
    if (res > tol * scale) {
        std::ostringstream os;
        os << "tdet: Q is not self-dual at block (" << bi << ", " << bj << "), residual " << res;
        throw domain_error(os.str());
    }
    Eigen::MatrixXcd A = block_J(Q.n).cast<cplx>() * Q.expand();
    // J C(Q) is skew only up to the self-duality residual; symmetrize it
    A = 0.5 * (A - A.transpose()).eval();
    cplx p = pfaffian(A);
    return {p.real(), p.imag()};
}

cplx pfaffian_permutation_sum(const Eigen::MatrixXcd& A) {
    // sum over perfect matchings, sign from the crossing parity
    const int n = int(A.rows());
    if (n % 2) throw domain_error("pfaffian_permutation_sum: odd dimension");
    if (n == 0) return 1;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::function<cplx(std::vector<int>)> rec = [&](std::vector<int> rest) -> cplx {
        if (rest.empty()) return 1;
        int a = rest[0];
        cplx acc = 0;
        for (size_t j = 1; j < rest.size(); ++j) {
            std::vector<int> sub;
            for (size_t k = 1; k < rest.size(); ++k)
                if (k != j) sub.push_back(rest[k]);
            double sgn = (j % 2 == 1) ? 1.0 : -1.0;
            acc += sgn * A(a, rest[j]) * rec(sub);
        }
        return acc;
    };
    return rec(idx);
}

cplx tdet_cycle_sum(const QKernelMatrix& Q) {
    // Dyson: sum over permutations, (-1)^{n - cycles} times the product over
    // cycles of the scalar part of the ordered quaternion product.
    const int n = Q.n;
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    cplx total = 0;
    do {
        std::vector<bool> seen(n, false);
        cplx term = 1;
        int cycles = 0;
        for (int s = 0; s < n; ++s) {
            if (seen[s]) continue;
            ++cycles;
            Eigen::Matrix2cd prod = Eigen::Matrix2cd::Identity();
            int a = s;
            do {
                seen[a] = true;
                prod = prod * Q(a, perm[a]).m;
                a = perm[a];
            } while (a != s);
            term *= 0.5 * prod.trace();
        }
        total += (((n - cycles) % 2) ? -1.0 : 1.0) * term;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

}  // namespace ncbm
