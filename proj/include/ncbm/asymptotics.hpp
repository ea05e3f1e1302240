#pragma once

#include <string>
#include <vector>

#include "ncbm/finite_model.hpp"

namespace ncbm {

struct KernelTriple {
    double St = 0, D = 0, It = 0;
    bool converged = true;
};

// Extended sine kernel (bulk limit).
KernelTriple sine_kernel(double s, double x, double t, double y, double tol = 1e-12);
// Same after the point-wise conjugation l = -s/2 (Tdet is unchanged by it);
// entries stay O(1) for very negative times where D and I~ over/underflow.
KernelTriple sine_kernel_balanced(double s, double x, double t, double y, double tol = 1e-12);

struct AiryKernelValue {
    double St = 0, D = 0, It = 0, S = 0, P = 0;
    bool converged = true;
};

// Extended Airy kernel (edge limit).
AiryKernelValue airy_kernel(double s, double x, double t, double y, double tol = 1e-12);

// Pieces exposed for testing.
double airy_S(double s, double x, double t, double y, double tol = 1e-12);
double airy_P(double s, double x, double t, double y, double tol = 1e-12);
double airy_D(double s, double x, double t, double y, double tol = 1e-12);
double airy_I(double s, double x, double t, double y, double tol = 1e-12, bool* converged = nullptr);
// int_0^inf e^{s l/2} Ai(x - l) dl, s <= 0
double airy_damped_tail(double s, double x, double tol = 1e-12);

// Temporally homogeneous reductions.
double airy_reduction_a(double sm, double x, double sn, double y, double tol = 1e-12);
double sine_reduction_A(double sm, double x, double sn, double y);

enum class Regime { bulk, edge };
Regime parse_regime(const std::string& s);
std::string to_string(Regime r);

// Maps limit coordinates (s, x) onto a finite-N model and back.
class ScalingMap {
public:
    ScalingMap(Regime r, int N, std::vector<double> s_values);

    Regime regime() const { return regime_; }
    int N() const { return N_; }
    double T() const { return T_; }
    const std::vector<double>& s() const { return s_; }
    const FiniteNModel& model() const { return model_; }

    double position(int m, double x) const;  // finite-N coordinate of (s_m, x)
    double log_b(int m, double x) const;     // conjugation exponent at (s_m, x)
    // +1 or -1 applied to D and I~ (a constant e_3 conjugation)
    double off_sign() const { return regime_ == Regime::edge ? -1.0 : 1.0; }

private:
    Regime regime_;
    int N_;
    double T_;
    std::vector<double> s_;
    FiniteNModel model_;
};

KernelTriple scaled_finite_kernel(const ScalingMap& map, int m, int n, double x, double y);
KernelTriple limit_kernel(Regime r, double s, double x, double t, double y, double tol = 1e-12);

// Tdet of the limit kernel at points pts[m] on times s[m].
double limit_correlation(Regime r, const std::vector<double>& s, const std::vector<std::vector<double>>& pts,
                         bool* converged = nullptr, double tol = 1e-12);

struct ProbeGrid {
    std::vector<double> s;
    std::vector<double> xs;
    static ProbeGrid defaults(Regime r);
};

struct ConvergenceRow {
    int N = 0;
    std::string entry;
    double sup_error = 0;
    int m = 0, n = 0;
    double x = 0, y = 0;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    bool monotone = true;     // strictly decreasing per entry
    double final_sup = 0;     // max over entries at the largest N
};

ConvergenceTable convergence_table(Regime r, const std::vector<int>& N_list, const ProbeGrid& grid,
                                   int threads = 0);

int default_threads();

}  // namespace ncbm
