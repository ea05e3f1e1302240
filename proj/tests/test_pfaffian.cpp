#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "ncbm/pfaffian.hpp"

using namespace ncbm;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;

namespace {

MatrixXd random_skew(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    MatrixXd A = MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            A(i, j) = U(rng);
            A(j, i) = -A(i, j);
        }
    return A;
}

// literal definition: 1/(2^n n!) sum over all permutations
double pf_definition(const MatrixXd& A) {
    const int m = int(A.rows()), n = m / 2;
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    double acc = 0;
    do {
        int inv = 0;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) inv += p[i] > p[j];
        double prod = (inv % 2) ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) prod *= A(p[2 * i], p[2 * i + 1]);
        acc += prod;
    } while (std::next_permutation(p.begin(), p.end()));
    double norm = std::pow(2.0, n) * std::tgamma(n + 1.0);
    return acc / norm;
}

QKernelMatrix random_self_dual(int n, std::mt19937& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    QKernelMatrix Q(n);
    for (int i = 0; i < n; ++i) {
        Q(i, i) = Quaternion::from_block(U(rng), 0, 0, 0);
        Q(i, i).m(1, 1) = Q(i, i).m(0, 0);
        for (int j = i + 1; j < n; ++j) {
            Q(i, j) = Quaternion::from_block(U(rng), U(rng), U(rng), U(rng));
            Q(j, i) = dual(Q(i, j));
        }
    }
    return Q;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("quaternion representation") {
    auto one = Quaternion::one(), e1 = Quaternion::e1(), e2 = Quaternion::e2(), e3 = Quaternion::e3();
    CHECK(one.m.isApprox(Eigen::Matrix2cd::Identity()));
    for (auto e : {e1, e2, e3}) CHECK((e * e).m.isApprox(-one.m));
    // e1 e2 e3 = -1 as for i, j, k
    CHECK((e1 * e2 * e3).m.isApprox(-one.m));
    CHECK((e1 * e2).m.isApprox((e2 * e1).m * -1.0));
}

TEST_CASE("dual") {
    auto one = Quaternion::one();
    CHECK(dual(one).m.isApprox(one.m));
    for (auto e : {Quaternion::e1(), Quaternion::e2(), Quaternion::e3()}) CHECK(dual(e).m.isApprox(-e.m));
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int k = 0; k < 20; ++k) {
        Eigen::Matrix2cd c;
        c << cplx(U(rng), U(rng)), cplx(U(rng), U(rng)), cplx(U(rng), U(rng)), cplx(U(rng), U(rng));
        Quaternion q(c);
        CHECK(dual(dual(q)).m == q.m);
        // q dual(q) is scalar (the quaternion norm)
        auto n = (q * dual(q)).m;
        CHECK(std::abs(n(0, 1)) < 1e-14);
        CHECK(std::abs(n(1, 0)) < 1e-14);
        CHECK(std::abs(n(0, 0) - n(1, 1)) < 1e-14);
    }
}

TEST_CASE("pfaffian base cases") {
    MatrixXd A(2, 2);
    A << 0, 3.5, -3.5, 0;
    CHECK(pfaffian_real(A) == 3.5);
    for (int n = 1; n <= 12; ++n) CHECK(pfaffian_real(block_J(n)) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pfaffian_real(MatrixXd(0, 0)) == 1.0);
}

TEST_CASE("pfaffian errors") {
    CHECK_THROWS_AS(pfaffian_real(MatrixXd::Zero(3, 3)), domain_error);
    MatrixXd A = MatrixXd::Zero(4, 4);
    A(1, 2) = 1;
    A(2, 1) = 0.5;  // not skew
    try {
        pfaffian_real(A);
        FAIL("expected rejection");
    } catch (const domain_error& e) {
        std::string msg = e.what();
        CHECK(msg.find("(1, 2)") != std::string::npos);
    }
}

TEST_CASE("pfaffian squared equals det") {
    std::mt19937 rng(11);
    for (int s = 0; s < 200; ++s) {
        int n = 2 * (1 + s % 8);
        MatrixXd A = random_skew(n, rng);
        double pf = pfaffian_real(A);
        CHECK(rel(pf * pf, A.determinant()) < 1e-9);
    }
    // complex too
    std::uniform_real_distribution<double> U(-1, 1);
    for (int s = 0; s < 20; ++s) {
        int n = 2 * (1 + s % 6);
        MatrixXcd A = MatrixXcd::Zero(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                A(i, j) = cplx(U(rng), U(rng));
                A(j, i) = -A(i, j);
            }
        cplx pf = pfaffian_complex(A);
        CHECK(std::abs(pf * pf - A.determinant()) < 1e-9 * std::abs(A.determinant()));
    }
}

TEST_CASE("pfaffian against the definitions") {
    std::mt19937 rng(5);
    for (int n : {2, 4, 6, 8}) {
        MatrixXd A = random_skew(n, rng);
        double pf = pfaffian_real(A);
        CHECK(rel(pf, pf_definition(A)) < 1e-12);
        CHECK(rel(pf, pfaffian_permutation_sum(A.cast<cplx>()).real()) < 1e-12);
    }
}

TEST_CASE("pfaffian congruence and pair swaps") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(-1, 1);
    for (int n = 2; n <= 10; n += 2) {
        MatrixXd A = random_skew(n, rng);
        MatrixXd B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = U(rng);
        MatrixXd C = B * A * B.transpose();
        C = 0.5 * (C - C.transpose()).eval();
        CHECK(rel(pfaffian_real(C), B.determinant() * pfaffian_real(A)) < 1e-8);

        // swapping rows and columns i, j flips the sign
        MatrixXd P = A;
        P.row(0).swap(P.row(n - 1));
        P.col(0).swap(P.col(n - 1));
        CHECK(pfaffian_real(P) == doctest::Approx(-pfaffian_real(A)).epsilon(1e-12));
    }
}

TEST_CASE("pfaffian of a singular matrix is exactly zero") {
    MatrixXd A = MatrixXd::Zero(4, 4);
    A(0, 1) = 1;
    A(1, 0) = -1;
    CHECK(pfaffian_real(A) == 0.0);
    // a repeated row pair
    std::mt19937 rng(1);
    MatrixXd R = random_skew(3, rng);
    MatrixXd D = MatrixXd::Zero(6, 6);
    D.topLeftCorner(3, 3) = R;
    D.block(0, 3, 3, 3) = R;
    D.block(3, 0, 3, 3) = R;
    D.bottomRightCorner(3, 3) = R;
    CHECK(pfaffian_real(D) == 0.0);
}

TEST_CASE("tdet base cases") {
    QKernelMatrix I(3);
    for (int i = 0; i < 3; ++i) I(i, i) = Quaternion::one();
    CHECK(tdet(I).value == doctest::Approx(1.0).epsilon(1e-15));

    QKernelMatrix Q1(1);
    Q1(0, 0) = Quaternion::from_block(0.7, 0, 0, 0.7);
    CHECK(tdet(Q1).value == doctest::Approx(0.7).epsilon(1e-15));

    // 2x2 by hand: a c - scalar part of q dual(q)
    QKernelMatrix Q2(2);
    double a = 0.8, c = 1.3;
    Quaternion q = Quaternion::from_block(0.2, -0.5, 0.9, 0.1);
    Q2(0, 0) = Quaternion::from_block(a, 0, 0, a);
    Q2(1, 1) = Quaternion::from_block(c, 0, 0, c);
    Q2(0, 1) = q;
    Q2(1, 0) = dual(q);
    double expect = a * c - (q * dual(q)).scalar_part().real();
    CHECK(tdet(Q2).value == doctest::Approx(expect).epsilon(1e-14));
    CHECK(tdet_cycle_sum(Q2).real() == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("tdet against the cycle sum") {
    std::mt19937 rng(23);
    for (int n = 1; n <= 4; ++n)
        for (int s = 0; s < 10; ++s) {
            auto Q = random_self_dual(n, rng);
            auto t = tdet(Q);
            double ref = tdet_cycle_sum(Q).real();
            CHECK(std::abs(t.value - ref) < 1e-12 * std::max(1.0, std::abs(ref)));
            CHECK(std::abs(t.imag) < 1e-12);
        }
}

TEST_CASE("tdet conjugation invariance") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> U(-2, 2);
    for (int n = 2; n <= 6; ++n) {
        auto Q = random_self_dual(n, rng);
        std::vector<double> lb(n);
        for (auto& v : lb) v = U(rng);
        QKernelMatrix Z(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Eigen::Matrix2cd zi = Eigen::Vector2cd(std::exp(lb[i]), std::exp(-lb[i])).asDiagonal();
                Eigen::Matrix2cd zj = Eigen::Vector2cd(std::exp(-lb[j]), std::exp(lb[j])).asDiagonal();
                Z(i, j) = Quaternion(zi * Q(i, j).m * zj);
            }
        CHECK(Z.self_dual_residual() < 1e-12);
        CHECK(rel(tdet(Z).value, tdet(Q).value) < 1e-9);
    }
}

TEST_CASE("tdet rejects non self-dual input and names the block") {
    std::mt19937 rng(31);
    auto Q = random_self_dual(3, rng);
    Q(2, 1).m(0, 1) += 0.1;
    try {
        tdet(Q);
        FAIL("expected rejection");
    } catch (const domain_error& e) {
        std::string msg = e.what();
        bool named = msg.find("(1, 2)") != std::string::npos || msg.find("(2, 1)") != std::string::npos;
        CHECK(named);
    }
}
