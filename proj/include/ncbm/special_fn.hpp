#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncbm {

struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Gaussian transition density p_t(x, y).
double heat_kernel(double t, double x, double y);

// Physicists' Hermite polynomial H_l(x), plain three-term recurrence.
double hermite(int l, double x);

// log h_l with h_l = sqrt(pi) 2^l l!
double log_h(int l);

// Orthonormal Hermite function phi_l(x) = e^{-x^2/2} H_l(x) / sqrt(h_l).
double phi(int l, double x);

// phi_0..phi_L at x in one sweep. The recurrence runs on a rescaled
// sequence so that large x (where e^{-x^2/2} underflows) still yields the
// correct mantissas: phi_l = val[l] * exp(lsc[l]).
struct HermiteTable {
    std::vector<double> val;
    std::vector<double> lsc;
    double at(int l) const;
};
HermiteTable phi_table(int L, double x);

// phi_l values with the scale folded in (may underflow to 0 far out).
std::vector<double> phi_all(int L, double x);

// Psi_l(x) = int_{-inf}^x phi_l, l = 0..L.
std::vector<double> psi_all(int L, double x);
std::vector<double> psi_inf(int L);

// e^{-y^2/2} H_{l+1}(y) built from the derivative identity
//   -2 d/dy (e^{-y^2/2} H_l) + 2 l e^{-y^2/2} H_{l-1}
double hermite_derivative_identity(int l, double y);

double airy_ai(double z);
double airy_ai_prime(double z);
void airy(double z, double& ai, double& aip);

// int_0^x Ai
double airy_ai_integral(double x);

// ---------------------------------------------------------------- quadrature

enum class QuadRule { gauss_legendre_composite, tanh_sinh, filon_oscillatory };

struct QuadratureSpec {
    QuadRule rule = QuadRule::gauss_legendre_composite;
    double a = 0.0;
    double b = 1.0;
    // For a semi-infinite domain set b_infinite; Lambda then truncates
    // (gauss/tanh) or bounds the first oscillation segment (filon).
    bool b_infinite = false;
    double cutoff = 0.0;
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    int max_subdivisions = 2000;
    // filon only: half period of the oscillation in the integration variable
    double half_period = 0.0;

    void validate() const;
};

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
    int evaluations = 0;
};

QuadResult integrate(const std::function<double(double)>& f, const QuadratureSpec& spec);

// Thin helpers for the common cases.
QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b,
                        double abs_tol = 1e-12, double rel_tol = 1e-10, int max_sub = 2000);

// Sum of f over [a, inf) split at a + k*half_period, alternating tail
// accelerated by repeated Euler averaging of partial sums.
QuadResult integrate_oscillatory(const std::function<double(double)>& f, double a,
                                 double half_period, double abs_tol = 1e-12,
                                 int max_segments = 4000);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

// Nodes/weights for a composite n-point rule on [a, b] with `panels` panels.
void composite_gl(double a, double b, int panels, int n, std::vector<double>& x,
                  std::vector<double>& w);

// Composite Gauss-Legendre rule that also returns running integrals at
// every node: cumulative(f)[i] ~ int_a^{x_i} f, exact per panel for
// polynomials of degree < n.
struct CumulativeGL {
    double a = 0, h = 0;
    int n = 0, panels = 0;
    std::vector<double> x, w;
    std::vector<double> Q;  // n x n, row-major, on the reference panel [0, 1]

    CumulativeGL(double a, double b, int panels, int n);
    std::vector<double> cumulative(const std::vector<double>& fvals) const;
};

}  // namespace ncbm
