#pragma once

#include <vector>

#include "ncbm/pfaffian.hpp"
#include "ncbm/special_fn.hpp"

namespace ncbm {

// Time indices are 0-based throughout: m = 0..M, with times[M] == T.
class FiniteNModel {
public:
    FiniteNModel(int N, double T, std::vector<double> times);

    int N() const { return N_; }
    double T() const { return T_; }
    int n_times() const { return int(t_.size()); }
    int last() const { return int(t_.size()) - 1; }
    const std::vector<double>& times() const { return t_; }
    double t(int m) const { return t_[m]; }
    double c(int m) const { return c_[m]; }
    double gamma(int m) const { return g_[m]; }
    double z(int m) const { return z_[m]; }
    double tau(int m) const { return tau_[m]; }

    double log_r(int j) const;
    double log_rstar(int j) const;
    double log_C() const;  // log C(N, T, t_1)
    double alpha(int k, int j) const;
    double beta(int k, int j) const;

    // Monic skew-orthogonal polynomial R_k(x).
    double R(int k, double x) const;

    // Values at x of R_k^{(m)} and Phi_k^{(m)} for k < K, each stored as
    // value * exp(logw) so that edge-scale magnitudes never overflow.
    struct Side {
        std::vector<double> R_log, R_val, P_log, P_val;
        double R_at(int k) const;
        double P_at(int k) const;
    };
    Side side(int m, double x, int K) const;
    int series_length(int m, int K) const;

    double R_m(int m, int k, double x) const;
    double Phi(int m, int k, double x) const;

    // F^{m,n}(x, y). The default path is the closed form; the two others
    // are independent evaluations kept for cross-checks.
    double F(int m, int n, double x, double y) const;
    double F_direct(int m, int n, double x, double y) const;
    double F_series(int m, int n, double x, double y, int L) const;  // m, n < last()

    // Gram entries G_kl of the normalized Hermite functions under the
    // final-time antisymmetric product (quadrature, cached by the caller).
    static Eigen::MatrixXd gram_star(int L);

    struct Kernels {
        double S = 0, D = 0, I = 0;
        double St = 0, It = 0;
    };
    // lx, ly are log conjugation factors: S~ e^{lx-ly}, D e^{-lx-ly}, I~ e^{lx+ly}
    Kernels kernels(int m, int n, double x, double y, double lx = 0.0, double ly = 0.0) const;
    Kernels kernels(int m, const Side& a, double x, int n, const Side& b, double y, double lx = 0.0,
                    double ly = 0.0) const;

private:
    int N_;
    double T_;
    std::vector<double> t_, c_, g_, z_, tau_;
};

struct MultitimeRequest {
    const FiniteNModel* model = nullptr;
    std::vector<std::vector<double>> configs;  // one list per time index

    void validate() const;
    void canonicalize();  // sort each time's points
    int total_points() const;
};

double km_density(double dt, const std::vector<double>& x, const std::vector<double>& y);

// Joint density on ordered configurations (each of size N). Returns the
// signed value; ordered input gives a nonnegative result.
double density_multitime(const FiniteNModel& md, const std::vector<std::vector<double>>& configs);
double log_density_multitime(const FiniteNModel& md, const std::vector<std::vector<double>>& configs);

// Same formula applied after sorting each time slice (the symmetric
// extension used when integrating over all of R).
double density_symmetric(const FiniteNModel& md, std::vector<std::vector<double>> configs);

QKernelMatrix assemble_Q(const MultitimeRequest& req);
double correlation(const MultitimeRequest& req);

// Antisymmetric products by quadrature.
double skew_inner_m(const FiniteNModel& md, int m, const std::function<double(double)>& f,
                    const std::function<double(double)>& g);
double skew_inner(const FiniteNModel& md, const std::function<double(double)>& f,
                  const std::function<double(double)>& g);
double skew_inner_star(double T, const std::function<double(double)>& f, const std::function<double(double)>& g);

}  // namespace ncbm
