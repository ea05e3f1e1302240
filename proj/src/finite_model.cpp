#include "ncbm/finite_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ncbm {

namespace {
constexpr double kPi = std::numbers::pi;
const double kLog2 = std::log(2.0);

double ncdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// a*e^{la} + b*e^{lb} kept as (value, log scale)
void log_accumulate(double& v, double& lv, double b, double lb) {
    if (b == 0.0) return;
    if (v == 0.0) {
        v = b;
        lv = lb;
        return;
    }
    if (lb > lv) {
        v = v * std::exp(lv - lb) + b;
        lv = lb;
    } else {
        v += b * std::exp(lb - lv);
    }
}
}  // namespace

FiniteNModel::FiniteNModel(int N, double T, std::vector<double> times) : N_(N), T_(T), t_(std::move(times)) {
    if (N < 2 || N % 2) throw domain_error("FiniteNModel: N must be even and >= 2 (got " + std::to_string(N) + ")");
    if (!(T > 0)) throw domain_error("FiniteNModel: T must be positive");
    if (t_.empty()) throw domain_error("FiniteNModel: times must not be empty");
    if (!(t_[0] > 0)) throw domain_error("FiniteNModel: times must start above 0");
    for (size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw domain_error("FiniteNModel: times must be strictly increasing");
    if (t_.back() != T) throw domain_error("FiniteNModel: last time must equal T");
    for (double t : t_) {
        c_.push_back(std::sqrt(t * (2 * T - t) / T));
        g_.push_back(-(T - t) / T);
        z_.push_back(std::sqrt((2 * T - t) / t));
        tau_.push_back(-std::log(z_.back()));
    }
    tau_.back() = 0.0;
}

double FiniteNModel::log_r(int j) const {
    return std::lgamma(j + 0.5) + std::lgamma(j + 1.0) - std::log(kPi) +
           (2 * j + 0.5) * std::log(t_[0] * t_[0] / T_);
}

double FiniteNModel::log_rstar(int j) const {
    return std::log(4.0) + log_h(2 * j) + std::log(T_) + (4 * j + 1) * std::log(c_[0] / 2);
}

double FiniteNModel::log_C() const {
    double s = 0.5 * N_ * std::log(kPi);
    for (int j = 1; j <= N_; ++j) s -= std::lgamma(j / 2.0);
    s += N_ * (N_ - 1) / 4.0 * std::log(T_) - N_ * (N_ - 1) / 2.0 * std::log(t_[0]);
    return s;
}

double FiniteNModel::alpha(int k, int j) const {
    double base = std::exp(-k * kLog2 + k * std::log(c_[0]));
    if (j == k) return base;
    if (k % 2 == 1 && j == k - 2) return -2.0 * (k - 1) * base;
    return 0.0;
}

double FiniteNModel::beta(int k, int j) const {
    if (k % 2 == 0) return j == k ? std::exp(k * kLog2 - k * std::log(c_[0])) : 0.0;
    if (j % 2 == 0 || j > k) return 0.0;
    return std::exp(k * kLog2 + std::lgamma((k - 1) / 2.0 + 1) - j * std::log(c_[0]) - std::lgamma((j - 1) / 2.0 + 1));
}

double FiniteNModel::R(int k, double x) const {
    double s = 0;
    for (int j = std::max(0, k - 2); j <= k; ++j) {
        double a = alpha(k, j);
        if (a != 0.0) s += a * hermite(j, x / c_[0]) * std::pow(z_[0], j - k);
    }
    return s;
}

double FiniteNModel::Side::R_at(int k) const { return R_val[k] * std::exp(R_log[k]); }
double FiniteNModel::Side::P_at(int k) const { return P_val[k] * std::exp(P_log[k]); }

int FiniteNModel::series_length(int m, int K) const {
    if (m == last()) return K + 2;
    return K + int(std::ceil(45.0 / std::abs(tau_[m]))) + 10;
}

FiniteNModel::Side FiniteNModel::side(int m, double x, int K) const {
    Side s;
    s.R_log.assign(K, 0.0);
    s.R_val.assign(K, 0.0);
    s.P_log.assign(K, 0.0);
    s.P_val.assign(K, 0.0);
    const double xi = x / c_[m], tau = tau_[m], tm = t_[m];
    const int L = series_length(m, K);
    HermiteTable ph = phi_table(L, xi);
    const double lc1 = std::log(c_[0]);

    auto log_a = [&](int k) { return -k * kLog2 + k * lc1 + 0.5 * log_h(k) + k * tau_[0]; };

    const double logG = 0.5 * g_[m] * xi * xi - 0.5 * std::log(2 * kPi * tm);
    for (int k = 0; k < K; ++k) {
        double v = ph.val[k];
        if (k % 2 == 1 && k >= 3)
            v -= std::sqrt(double(k - 1) / k) * std::exp(2 * tau + ph.lsc[k - 2] - ph.lsc[k]) * ph.val[k - 2];
        s.R_log[k] = logG + log_a(k) - k * tau + ph.lsc[k];
        s.R_val[k] = v;
    }

    const double logH = -0.5 * g_[m] * xi * xi - 0.5 * std::log(2 * kPi * T_ * (2 * T_ - tm));
    for (int k = 1; k < K; k += 2) {
        int kk = (k - 1) / 2;
        s.P_log[k] = logH + log_rstar(kk) + (2 * kk + 1) * tau_[0] + 2 * kk * kLog2 - 2 * kk * lc1 -
                     0.5 * log_h(2 * kk) + 2 * kk * tau + ph.lsc[2 * kk];
        s.P_val[k] = -ph.val[2 * kk];
    }
    if (m == last()) {
        // closed form through the incomplete integrals Psi_l
        std::vector<double> ps = psi_all(K, xi), pinf = psi_inf(K);
        for (int k = 0; k < K; k += 2) {
            s.P_log[k] = log_a(k) - 0.5 * std::log(2 * kPi);
            s.P_val[k] = 2 * ps[k] - pinf[k];
        }
    } else {
        // suffix sums over odd l of g_l e^{l tau} phi_l
        std::vector<double> suf_v(L + 2, 0.0), suf_l(L + 2, 0.0);
        double v = 0, lv = 0;
        for (int l = L; l >= 1; --l) {
            if (l % 2 == 1) {
                double lg = l * kLog2 + std::lgamma((l + 1) / 2.0) - 0.5 * log_h(l);
                log_accumulate(v, lv, ph.val[l], lg + l * tau + ph.lsc[l]);
            }
            suf_v[l] = v;
            suf_l[l] = lv;
        }
        for (int k = 0; k < K; k += 2) {
            int kk = k / 2;
            s.P_log[k] = logH + log_rstar(kk) + 2 * kk * tau_[0] - (2 * kk + 1) * lc1 - std::lgamma(kk + 1.0) +
                         suf_l[2 * kk + 1];
            s.P_val[k] = suf_v[2 * kk + 1];
        }
    }
    return s;
}

double FiniteNModel::R_m(int m, int k, double x) const { return side(m, x, k + 2).R_at(k); }

double FiniteNModel::Phi(int m, int k, double x) const { return side(m, x, k + 2).P_at(k); }

double FiniteNModel::F(int m, int n, double x, double y) const {
    double v = 2 * T_ - t_[m] - t_[n];
    if (m == last() && n == last()) return (y > x) ? 1.0 : (y < x ? -1.0 : 0.0);
    return std::erf((y - x) / std::sqrt(2 * v));
}

double FiniteNModel::F_direct(int m, int n, double x, double y) const {
    // inner z-integral done exactly, outer w-integral by quadrature
    double a = T_ - t_[m], b = T_ - t_[n];
    if (a == 0 && b == 0) return (y > x) ? 1.0 : (y < x ? -1.0 : 0.0);
    if (a == 0) {
        auto r = integrate_gk([&](double w) { return heat_kernel(b, y, w); }, x, x + 40 * std::sqrt(b), 1e-15, 1e-13);
        return r.value - ncdf((x - y) / std::sqrt(b));
    }
    if (b == 0) return -F_direct(n, m, y, x);
    double sa = std::sqrt(a), sb = std::sqrt(b);
    auto f = [&](double w) { return heat_kernel(b, y, w) * ncdf((w - x) / sa) - heat_kernel(a, x, w) * ncdf((w - y) / sb); };
    double lo = std::min(x, y) - 40 * std::max(sa, sb), hi = std::max(x, y) + 40 * std::max(sa, sb);
    return integrate_gk(f, lo, hi, 1e-15, 1e-13, 4000).value;
}

Eigen::MatrixXd FiniteNModel::gram_star(int L) {
    double half = std::sqrt(2.0 * L + 1) + 12;
    CumulativeGL rule(-half, half, 4 * (L + 20), 12);
    const size_t P = rule.x.size();
    Eigen::MatrixXd phiv(L + 1, P), psiv(L + 1, P);
    for (size_t i = 0; i < P; ++i) {
        std::vector<double> ph = phi_all(L, rule.x[i]), ps = psi_all(L, rule.x[i]);
        for (int l = 0; l <= L; ++l) phiv(l, i) = ph[l], psiv(l, i) = ps[l];
    }
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.w.data(), P);
    // G_kl = int phi_l Psi_k - int phi_k Psi_l
    Eigen::MatrixXd A = psiv * w.asDiagonal() * phiv.transpose();
    return A - A.transpose();
}

double FiniteNModel::F_series(int m, int n, double x, double y, int L) const {
    // e^{l tau} gives no decay at the final time
    if (m == last() || n == last()) throw domain_error("F_series: diverges when an index is the final time");
    static thread_local int cached_L = -1;
    static thread_local Eigen::MatrixXd G;
    if (cached_L != L) {
        G = gram_star(L);
        cached_L = L;
    }
    double xi = x / c_[m], eta = y / c_[n];
    std::vector<double> a = phi_all(L, xi), b = phi_all(L, eta);
    double s = 0;
    for (int k = 0; k <= L; ++k) {
        double ak = std::exp(k * tau_[m]) * a[k];
        if (ak == 0) continue;
        for (int l = 0; l <= L; ++l) s += ak * std::exp(l * tau_[n]) * b[l] * G(k, l);
    }
    double pre = T_ * std::exp(-0.5 * g_[m] * xi * xi - 0.5 * g_[n] * eta * eta) /
                 std::sqrt((2 * T_ - t_[m]) * (2 * T_ - t_[n]));
    return pre * s;
}

FiniteNModel::Kernels FiniteNModel::kernels(int m, int n, double x, double y, double lx, double ly) const {
    Side a = side(m, x, N_), b = side(n, y, N_);
    return kernels(m, a, x, n, b, y, lx, ly);
}

FiniteNModel::Kernels FiniteNModel::kernels(int m, const Side& a, double x, int n, const Side& b, double y,
                                            double lx, double ly) const {
    Kernels k;
    for (int p = 0; p < N_ / 2; ++p) {
        const int e = 2 * p, o = 2 * p + 1;
        const double lr = log_r(p);
        k.D += std::exp(a.R_log[e] + b.R_log[o] - lr - lx - ly) * a.R_val[e] * b.R_val[o] -
               std::exp(a.R_log[o] + b.R_log[e] - lr - lx - ly) * a.R_val[o] * b.R_val[e];
        k.S += std::exp(a.P_log[e] + b.R_log[o] - lr + lx - ly) * a.P_val[e] * b.R_val[o] -
               std::exp(a.P_log[o] + b.R_log[e] - lr + lx - ly) * a.P_val[o] * b.R_val[e];
        k.I -= std::exp(a.P_log[e] + b.P_log[o] - lr + lx + ly) * a.P_val[e] * b.P_val[o] -
               std::exp(a.P_log[o] + b.P_log[e] - lr + lx + ly) * a.P_val[o] * b.P_val[e];
    }
    k.St = k.S;
    if (m < n) {
        double dt = t_[n] - t_[m], d = x - y;
        k.St -= std::exp(-d * d / (2 * dt) + lx - ly) / std::sqrt(2 * kPi * dt);
    }
    k.It = k.I + F(m, n, x, y) * std::exp(lx + ly);
    return k;
}

// ----------------------------------------------------------------- requests

void MultitimeRequest::validate() const {
    if (!model) throw domain_error("request: no model");
    if (int(configs.size()) != model->n_times())
        throw domain_error("request: need one configuration per time (" + std::to_string(model->n_times()) + ")");
    int total = 0;
    for (size_t m = 0; m < configs.size(); ++m) {
        if (int(configs[m].size()) > model->N())
            throw domain_error("request: time " + std::to_string(m) + " has more than N points");
        for (double v : configs[m])
            if (!std::isfinite(v)) throw domain_error("request: non-finite coordinate");
        total += int(configs[m].size());
    }
    if (total == 0) throw domain_error("request: no points");
}

void MultitimeRequest::canonicalize() {
    for (auto& c : configs) std::sort(c.begin(), c.end());
}

int MultitimeRequest::total_points() const {
    int s = 0;
    for (auto& c : configs) s += int(c.size());
    return s;
}

double km_density(double dt, const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw domain_error("km_density: size mismatch");
    const int n = int(x.size());
    Eigen::MatrixXd P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = heat_kernel(dt, x[i], y[j]);
    return n == 0 ? 1.0 : P.determinant();
}

namespace {
// log|det| and sign by partial-pivot LU
double log_abs_det(const Eigen::MatrixXd& A, int& sign) {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const Eigen::MatrixXd& U = lu.matrixLU();
    double s = 0;
    sign = lu.permutationP().determinant() > 0 ? 1 : -1;
    for (int i = 0; i < A.rows(); ++i) {
        double d = U(i, i);
        if (d == 0) {
            sign = 0;
            return -INFINITY;
        }
        if (d < 0) sign = -sign;
        s += std::log(std::abs(d));
    }
    return s;
}

double signed_log_density(const FiniteNModel& md, const std::vector<std::vector<double>>& cf, int& sign) {
    const int N = md.N();
    if (int(cf.size()) != md.n_times()) throw domain_error("density: need a configuration per time");
    for (auto& c : cf)
        if (int(c.size()) != N) throw domain_error("density: every configuration must have N points");
    double lg = md.log_C();
    sign = 1;
    const auto& x1 = cf[0];
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            double d = x1[j] - x1[i];
            if (d == 0) {
                sign = 0;
                return -INFINITY;
            }
            if (d < 0) sign = -sign;
            lg += std::log(std::abs(d));
        }
    const double t1 = md.t(0);
    for (double v : x1) lg += -v * v / (2 * t1) - 0.5 * std::log(2 * kPi * t1);
    for (int m = 0; m + 1 < md.n_times(); ++m) {
        double dt = md.t(m + 1) - md.t(m);
        Eigen::MatrixXd P(N, N);
        // factor the Gaussian scale out of each row to keep entries O(1)
        for (int i = 0; i < N; ++i) {
            double rowmax = -INFINITY;
            for (int j = 0; j < N; ++j) {
                double d = cf[m][i] - cf[m + 1][j];
                P(i, j) = -d * d / (2 * dt);
                rowmax = std::max(rowmax, P(i, j));
            }
            for (int j = 0; j < N; ++j) P(i, j) = std::exp(P(i, j) - rowmax);
            lg += rowmax - 0.5 * std::log(2 * kPi * dt);
        }
        int sg = 0;
        lg += log_abs_det(P, sg);
        sign *= sg;
        if (sign == 0) return -INFINITY;
    }
    // sgn h_N at the final time
    const auto& xl = cf.back();
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) {
            double d = xl[j] - xl[i];
            if (d == 0) {
                sign = 0;
                return -INFINITY;
            }
            if (d < 0) sign = -sign;
        }
    return lg;
}
}  // namespace

double log_density_multitime(const FiniteNModel& md, const std::vector<std::vector<double>>& cf) {
    for (size_t m = 0; m < cf.size(); ++m)
        for (size_t i = 1; i < cf[m].size(); ++i)
            if (!(cf[m][i] > cf[m][i - 1]))
                throw domain_error("density_multitime: configuration at time " + std::to_string(m) +
                                   " is not strictly increasing");
    int sign = 0;
    double lg = signed_log_density(md, cf, sign);
    return sign > 0 ? lg : -INFINITY;
}

double density_multitime(const FiniteNModel& md, const std::vector<std::vector<double>>& cf) {
    for (size_t m = 0; m < cf.size(); ++m)
        for (size_t i = 1; i < cf[m].size(); ++i)
            if (!(cf[m][i] > cf[m][i - 1]))
                throw domain_error("density_multitime: configuration at time " + std::to_string(m) +
                                   " is not strictly increasing");
    int sign = 0;
    double lg = signed_log_density(md, cf, sign);
    return sign == 0 ? 0.0 : sign * std::exp(lg);
}

double density_symmetric(const FiniteNModel& md, std::vector<std::vector<double>> cf) {
    for (auto& c : cf) std::sort(c.begin(), c.end());
    int sign = 0;
    double lg = signed_log_density(md, cf, sign);
    return sign == 0 ? 0.0 : sign * std::exp(lg);
}

QKernelMatrix assemble_Q(const MultitimeRequest& req) {
    req.validate();
    const FiniteNModel& md = *req.model;
    std::vector<std::pair<int, double>> pts;
    QKernelMatrix Q(req.total_points());
    for (int m = 0; m < md.n_times(); ++m)
        for (size_t i = 0; i < req.configs[m].size(); ++i) {
            pts.push_back({m, req.configs[m][i]});
            Q.index.push_back({m, int(i)});
        }
    std::vector<FiniteNModel::Side> sides;
    for (auto& [m, x] : pts) sides.push_back(md.side(m, x, md.N()));
    const int n = Q.n;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            auto [m, x] = pts[i];
            auto [k, y] = pts[j];
            auto a = md.kernels(m, sides[i], x, k, sides[j], y);
            auto b = md.kernels(k, sides[j], y, m, sides[i], x);
            Q(i, j) = Quaternion::from_block(a.St, a.It, a.D, b.St);
            Q(j, i) = dual(Q(i, j));
        }
    return Q;
}

double correlation(const MultitimeRequest& req_in) {
    MultitimeRequest req = req_in;
    req.canonicalize();
    return tdet(assemble_Q(req)).value;
}

// ------------------------------------------------------ skew inner products

namespace {
double skew_smooth(const std::function<double(double, double)>& F, const std::function<double(double)>& f,
                   const std::function<double(double)>& g, double half) {
    std::vector<double> x, w;
    composite_gl(-half, half, 48, 16, x, w);
    const size_t n = x.size();
    std::vector<double> fv(n), gv(n);
    for (size_t i = 0; i < n; ++i) fv[i] = w[i] * f(x[i]), gv[i] = w[i] * g(x[i]);
    double s = 0;
    // symmetrized: (<f,g> - <g,f>) / 2
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) s += F(x[i], x[j]) * (fv[i] * gv[j] - gv[i] * fv[j]);
    return 0.5 * s;
}

double skew_sign(const std::function<double(double)>& f, const std::function<double(double)>& g, double half) {
    // int dx int dy sgn(y - x) f(x) g(y) = int g(y) [2 Fc(y) - Fc(inf)] dy
    CumulativeGL rule(-half, half, 96, 14);
    const size_t n = rule.x.size();
    std::vector<double> fv(n), gv(n);
    for (size_t i = 0; i < n; ++i) fv[i] = f(rule.x[i]), gv[i] = g(rule.x[i]);
    auto Fc = rule.cumulative(fv), Gc = rule.cumulative(gv);
    double Ftot = 0, Gtot = 0;
    for (size_t i = 0; i < n; ++i) Ftot += rule.w[i] * fv[i], Gtot += rule.w[i] * gv[i];
    double a = 0, b = 0;
    for (size_t i = 0; i < n; ++i) {
        a += rule.w[i] * gv[i] * (2 * Fc[i] - Ftot);
        b += rule.w[i] * fv[i] * (2 * Gc[i] - Gtot);
    }
    return 0.5 * (a - b);
}
}  // namespace

double skew_inner_m(const FiniteNModel& md, int m, const std::function<double(double)>& f,
                    const std::function<double(double)>& g) {
    double half = 16 * std::sqrt(md.T());
    if (m == md.last()) return skew_sign(f, g, half);
    return skew_smooth([&](double x, double y) { return md.F(m, m, x, y); }, f, g, half);
}

double skew_inner(const FiniteNModel& md, const std::function<double(double)>& f,
                  const std::function<double(double)>& g) {
    const double t1 = md.t(0);
    auto fw = [&](double x) { return heat_kernel(t1, 0, x) * f(x); };
    auto gw = [&](double x) { return heat_kernel(t1, 0, x) * g(x); };
    double half = 16 * std::sqrt(t1);
    if (md.last() == 0) return skew_sign(fw, gw, half);
    return skew_smooth([&](double x, double y) { return md.F(0, 0, x, y); }, fw, gw, half);
}

double skew_inner_star(double T, const std::function<double(double)>& f, const std::function<double(double)>& g) {
    auto fw = [&](double x) { return std::exp(-x * x / (2 * T)) * f(x); };
    auto gw = [&](double x) { return std::exp(-x * x / (2 * T)) * g(x); };
    return skew_sign(fw, gw, 16 * std::sqrt(T));
}

}  // namespace ncbm
