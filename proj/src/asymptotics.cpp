#include "ncbm/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <thread>

namespace ncbm {

namespace {
constexpr double kPi = std::numbers::pi;

double tail_cut(double rate, double tol) {
    // e^{-rate * L} < tol / 10
    return std::log(10.0 / tol) / rate;
}
}  // namespace

// ------------------------------------------------------------ sine kernel

// Entries conjugated by l = -s/2 per point: S~ e^{(t-s)/2}, D e^{(s+t)/2},
// I~ e^{-(s+t)/2}. All O(1) however negative the times are.
KernelTriple sine_kernel_balanced(double s, double x, double t, double y, double tol) {
    KernelTriple k;
    const double d = x - y;
    if (s > t) {
        auto r = integrate_gk([&](double l) { return std::cos(l * d) * std::exp((l * l - 1) * (s - t) / 2); }, 0, 1,
                              tol, 1e-13, 1 << 12);
        k.St = r.value / kPi;
        k.converged &= r.converged;
    } else if (s == t) {
        k.St = d == 0 ? 1 / kPi : std::sin(d) / (kPi * d);
    } else {
        double L = std::sqrt(1 + 2 * std::log(10 / tol) / (t - s));
        auto r = integrate_gk([&](double l) { return std::cos(l * d) * std::exp(-(l * l - 1) * (t - s) / 2); }, 1, L,
                              tol, 1e-13, 1 << 14);
        k.St = -r.value / kPi;
        k.converged &= r.converged;
    }
    auto rd = integrate_gk([&](double l) { return l * std::sin(l * d) * std::exp(-(s + t) * (l * l - 1) / 2); }, 0, 1,
                           tol, 1e-13, 1 << 12);
    k.D = -rd.value / kPi;
    k.converged &= rd.converged;

    if (d == 0) {
        k.It = 0;
    } else {
        auto f = [&](double l) { return std::sin(l * d) / l * std::exp((s + t) * (l * l - 1) / 2); };
        double L = (s + t) < 0 ? std::sqrt(1 + 2 * std::log(10 / tol) / -(s + t)) : INFINITY;
        QuadResult r;
        if (L * std::abs(d) < 400) {
            r = integrate_gk(f, 1, L, tol, 1e-13, 1 << 14);
        } else {
            QuadratureSpec q;
            q.rule = QuadRule::filon_oscillatory;
            q.a = 1;
            q.b_infinite = true;
            q.half_period = kPi / std::abs(d);
            q.abs_tol = tol;
            q.max_subdivisions = 20000;
            r = integrate(f, q);
        }
        k.It = -r.value / kPi;
        k.converged &= r.converged;
    }
    return k;
}

KernelTriple sine_kernel(double s, double x, double t, double y, double tol) {
    KernelTriple k = sine_kernel_balanced(s, x, t, y, tol);
    k.St *= std::exp((s - t) / 2);
    k.D *= std::exp(-(s + t) / 2);
    k.It *= std::exp((s + t) / 2);
    return k;
}

double sine_reduction_A(double sm, double x, double sn, double y) { return sine_kernel(sm, x, sn, y).St; }

// ------------------------------------------------------------ Airy kernel

double airy_damped_tail(double s, double x, double tol) {
    if (s > 0) throw domain_error("airy_damped_tail: s must be <= 0");
    if (s == 0) return 2.0 / 3.0 + airy_ai_integral(x);
    double L = tail_cut(-s / 2, tol);
    auto f = [&](double l) { return std::exp(s * l / 2) * airy_ai(x - l); };
    // split at the turning point, then unit-length pieces keep GK happy on the oscillations
    double acc = 0;
    double a = 0;
    while (a < L) {
        double b = std::min(L, a + (a < 20 ? 5.0 : 2.0));
        acc += integrate_gk(f, a, b, tol * 1e-2, 1e-13, 256).value;
        a = b;
    }
    return acc;
}

double airy_S(double s, double x, double t, double y, double tol) {
    // Ai(x + l) decays like exp(-2/3 l^{3/2}); 40 is far past double range
    double c = (t - s) / 2;
    double L = 40;
    if (c > 0) L = std::max(L, std::pow(3 * c, 2.0) + 40);
    auto f = [&](double l) { return std::exp(c * l) * airy_ai(x + l) * airy_ai(y + l); };
    double main = integrate_gk(f, 0, L, tol, 1e-13, 4096).value;
    return main + 0.5 * airy_ai(y) * airy_damped_tail(s, x, tol);
}

double airy_P(double s, double x, double t, double y, double tol) {
    double c = (t - s) / 2;
    if (!(c > 0)) throw domain_error("airy_P: needs t > s");
    auto f = [&](double l) { return std::exp(c * l) * airy_ai(x + l) * airy_ai(y + l); };
    // positive side damped by Ai, negative side by e^{c l}
    double Lp = std::max(40.0, std::pow(3 * c, 2.0) + 40);
    double pos = integrate_gk(f, 0, Lp, tol, 1e-13, 4096).value;
    double Ln = tail_cut(c, tol);
    double neg = 0, a = 0;
    while (a < Ln) {
        double b = std::min(Ln, a + 2.0);
        neg += integrate_gk(f, -b, -a, tol * 1e-2, 1e-13, 256).value;
        a = b;
    }
    return pos + neg;
}

double airy_D(double s, double x, double t, double y, double tol) {
    double L = 40;
    auto f = [&](double l) {
        double ax, apx, ay, apy;
        airy(x + l, ax, apx);
        airy(y + l, ay, apy);
        return std::exp((s + t) * l / 2) * ((t - s) / 2 * ax * ay + ax * apy - ay * apx);
    };
    return 0.25 * integrate_gk(f, 0, L, tol, 1e-13, 4096).value;
}

double airy_I(double s, double x, double t, double y, double tol, bool* converged) {
    if (s > 0 || t > 0) throw domain_error("airy_I: needs s, t <= 0");
    if (converged) *converged = true;
    if (x == y && s == t) return 0.0;
    // Truncate where the slower of the two dampings is negligible; with no
    // damping at all the remaining tail is handled asymptotically below.
    double rate = (s < 0 && t < 0) ? std::min(-s, -t) / 2 : std::max(-s, -t) / 2;
    double L = rate > 0 ? std::max(tail_cut(rate, tol), 20.0) : 400.0;
    const double h = std::min(1.0, 2.0 / std::sqrt(L));
    const int panels = int(std::ceil(L / h));
    CumulativeGL rule(0, L, panels, 16);
    const size_t n = rule.x.size();
    std::vector<double> f(n), g(n);
    for (size_t i = 0; i < n; ++i) {
        double l = rule.x[i];
        f[i] = std::exp(s * l / 2) * airy_ai(x - l);
        g[i] = std::exp(t * l / 2) * airy_ai(y - l);
    }
    std::vector<double> F = rule.cumulative(f), G = rule.cumulative(g);
    double FL = 0, GL = 0, acc = 0;
    for (size_t i = 0; i < n; ++i) {
        FL += rule.w[i] * f[i];
        GL += rule.w[i] * g[i];
        acc += rule.w[i] * (f[i] * G[i] - g[i] * F[i]);
    }
    double Finf = s == 0 ? airy_damped_tail(0, x, tol) : FL;
    double Ginf = t == 0 ? airy_damped_tail(0, y, tol) : GL;
    acc += Ginf * (Finf - FL) - Finf * (Ginf - GL);
    if (s == 0 && t == 0 && x != y) {
        // Beyond L: g (F_inf - F) - f (G_inf - G) reduces, after dropping the
        // fast oscillation, to sin(zeta_y - zeta_x) (wy^{-1/4} wx^{-3/4} + wx^{-1/4} wy^{-3/4}) / (2 pi).
        // Integrated in v = sqrt(l), where it oscillates with period 2 pi / |x - y|.
        auto tail = [&](double v) {
            double l = v * v, wx = l - x, wy = l - y;
            double zx = 2.0 / 3.0 * wx * std::sqrt(wx), zy = 2.0 / 3.0 * wy * std::sqrt(wy);
            double amp = std::pow(wy, -0.25) * std::pow(wx, -0.75) + std::pow(wx, -0.25) * std::pow(wy, -0.75);
            return std::sin(zy - zx) * amp / (2 * kPi) * 2 * v;
        };
        QuadratureSpec q;
        q.rule = QuadRule::filon_oscillatory;
        q.a = std::sqrt(L);
        q.b_infinite = true;
        q.half_period = kPi / std::abs(x - y);
        q.abs_tol = tol;
        q.max_subdivisions = 20000;
        auto r = integrate(tail, q);
        acc += r.value;
        if (converged) *converged = r.converged;
    }
    return acc;
}

AiryKernelValue airy_kernel(double s, double x, double t, double y, double tol) {
    AiryKernelValue v;
    v.S = airy_S(s, x, t, y, tol);
    v.P = s < t ? airy_P(s, x, t, y, tol) : 0.0;
    v.St = v.S - v.P;
    v.D = airy_D(s, x, t, y, tol);
    bool ok = true;
    v.It = airy_I(s, x, t, y, tol, &ok);
    v.converged = ok;
    return v;
}

double airy_reduction_a(double sm, double x, double sn, double y, double tol) {
    double c = (sn - sm) / 2;
    auto f = [&](double l) { return std::exp(c * l) * airy_ai(x + l) * airy_ai(y + l); };
    if (sm >= sn) return integrate_gk(f, 0, 40, tol, 1e-13, 4096).value;
    double Ln = tail_cut(c, tol), neg = 0, a = 0;
    while (a < Ln) {
        double b = std::min(Ln, a + 2.0);
        neg += integrate_gk(f, -b, -a, tol * 1e-2, 1e-13, 256).value;
        a = b;
    }
    return -neg;
}

// ---------------------------------------------------------------- scaling

Regime parse_regime(const std::string& s) {
    if (s == "bulk") return Regime::bulk;
    if (s == "edge") return Regime::edge;
    throw domain_error("unknown regime '" + s + "' (expected bulk or edge)");
}

std::string to_string(Regime r) { return r == Regime::bulk ? "bulk" : "edge"; }

namespace {
double regime_T(Regime r, int N) { return r == Regime::bulk ? 2.0 * N : 2.0 * std::cbrt(double(N)); }

std::vector<double> checked_times(Regime r, int N, const std::vector<double>& s) {
    if (s.empty()) throw domain_error("ScalingMap: s values must not be empty");
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] > 0) throw domain_error("ScalingMap: s values must be nonpositive");
        if (i && !(s[i] > s[i - 1])) throw domain_error("ScalingMap: s values must be strictly increasing");
    }
    if (s.back() != 0.0) throw domain_error("ScalingMap: the last s value must be 0");
    double T = regime_T(r, N);
    std::vector<double> t;
    for (double v : s) {
        if (!(T + v > 0)) throw domain_error("ScalingMap: N too small for s = " + std::to_string(v));
        t.push_back(T + v);
    }
    t.back() = T;
    return t;
}
}  // namespace

ScalingMap::ScalingMap(Regime r, int N, std::vector<double> s_values)
    : regime_(r), N_(N), T_(regime_T(r, N)), s_(s_values), model_(N, T_, checked_times(r, N, s_values)) {}

double ScalingMap::position(int m, double x) const {
    if (regime_ == Regime::bulk) return x;
    return 2.0 * std::pow(double(N_), 2.0 / 3.0) - s_[m] * s_[m] / 4 + x;
}

double ScalingMap::log_b(int m, double x) const {
    if (regime_ == Regime::bulk) return 0.5 * std::log(0.5);
    double X = position(m, x), xi = X / model_.c(m);
    return 0.5 * model_.gamma(m) * xi * xi - N_ * model_.tau(m);
}

KernelTriple scaled_finite_kernel(const ScalingMap& map, int m, int n, double x, double y) {
    const FiniteNModel& md = map.model();
    double X = map.position(m, x), Y = map.position(n, y);
    auto k = md.kernels(m, n, X, Y, map.log_b(m, x), map.log_b(n, y));
    KernelTriple out;
    out.St = k.St;
    out.D = map.off_sign() * k.D;
    out.It = map.off_sign() * k.It;
    out.converged = std::isfinite(k.St) && std::isfinite(k.D) && std::isfinite(k.It);
    return out;
}

KernelTriple limit_kernel(Regime r, double s, double x, double t, double y, double tol) {
    if (r == Regime::bulk) return sine_kernel(s, x, t, y, tol);
    auto a = airy_kernel(s, x, t, y, tol);
    return {a.St, a.D, a.It, a.converged};
}

double limit_correlation(Regime r, const std::vector<double>& s, const std::vector<std::vector<double>>& pts,
                         bool* converged, double tol) {
    if (pts.size() != s.size()) throw domain_error("limit_correlation: one point list per time needed");
    for (size_t m = 1; m < s.size(); ++m)
        if (!(s[m] > s[m - 1])) throw domain_error("limit_correlation: times must increase");
    if (r == Regime::edge && s.back() > 0) throw domain_error("limit_correlation: Airy times must be <= 0");
    std::vector<std::pair<int, double>> all;
    for (size_t m = 0; m < pts.size(); ++m)
        for (double x : pts[m]) all.push_back({int(m), x});
    const int n = int(all.size());
    QKernelMatrix Q(n);
    bool ok = true;
    auto entry = [&](int m, double x, int k, double y) {
        return r == Regime::bulk ? sine_kernel_balanced(s[m], x, s[k], y, tol) : limit_kernel(r, s[m], x, s[k], y, tol);
    };
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            auto [m, x] = all[i];
            auto [k, y] = all[j];
            auto a = entry(m, x, k, y), b = entry(k, y, m, x);
            ok = ok && a.converged && b.converged;
            Q(i, j) = Quaternion::from_block(a.St, a.It, a.D, b.St);
            Q(j, i) = dual(Q(i, j));
        }
    if (converged) *converged = ok;
    return n ? tdet(Q).value : 1.0;
}

ProbeGrid ProbeGrid::defaults(Regime r) {
    ProbeGrid g;
    g.s = r == Regime::bulk ? std::vector<double>{-2, -1, 0} : std::vector<double>{-1, -0.5, 0};
    g.xs = {-2, -1, 0, 1, 2};
    return g;
}

int default_threads() {
    if (const char* e = std::getenv("NCBM_THREADS")) {
        int v = std::atoi(e);
        if (v > 0) return v;
    }
    unsigned h = std::thread::hardware_concurrency();
    return h ? int(h) : 1;
}

namespace {
template <class Fn>
void parallel_for(int count, int threads, Fn fn) {
    threads = std::max(1, std::min(threads, count));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < count; i += threads) fn(i);
        });
    for (auto& th : pool) th.join();
}
}  // namespace

ConvergenceTable convergence_table(Regime r, const std::vector<int>& N_list, const ProbeGrid& grid, int threads) {
    if (threads <= 0) threads = default_threads();
    for (size_t i = 0; i < N_list.size(); ++i) {
        if (N_list[i] % 2) throw domain_error("convergence_table: N must be even (got " + std::to_string(N_list[i]) + ")");
        if (i && N_list[i] <= N_list[i - 1]) throw domain_error("convergence_table: N list must increase");
    }
    struct Probe {
        int m, n;
        double x, y;
    };
    std::vector<Probe> probes;
    const int S = int(grid.s.size());
    for (int m = 0; m < S; ++m)
        for (int n = 0; n < S; ++n)
            for (double x : grid.xs)
                for (double y : grid.xs) probes.push_back({m, n, x, y});
    const int P = int(probes.size());
    std::vector<KernelTriple> lim(P);
    parallel_for(P, threads, [&](int i) {
        const Probe& p = probes[i];
        lim[i] = limit_kernel(r, grid.s[p.m], p.x, grid.s[p.n], p.y);
    });

    ConvergenceTable table;
    const char* names[3] = {"S", "D", "I"};
    std::map<std::string, double> prev;
    for (int N : N_list) {
        ScalingMap map(r, N, grid.s);
        std::vector<KernelTriple> fin(P);
        parallel_for(P, threads, [&](int i) {
            const Probe& p = probes[i];
            fin[i] = scaled_finite_kernel(map, p.m, p.n, p.x, p.y);
        });
        double worst_all = 0;
        for (int e = 0; e < 3; ++e) {
            ConvergenceRow row;
            row.N = N;
            row.entry = names[e];
            row.sup_error = -1;
            for (int i = 0; i < P; ++i) {
                double a = e == 0 ? fin[i].St : e == 1 ? fin[i].D : fin[i].It;
                double b = e == 0 ? lim[i].St : e == 1 ? lim[i].D : lim[i].It;
                double err = std::abs(a - b);
                if (!std::isfinite(err)) err = INFINITY;
                if (err > row.sup_error) {
                    row.sup_error = err;
                    row.m = probes[i].m, row.n = probes[i].n, row.x = probes[i].x, row.y = probes[i].y;
                }
            }
            auto it = prev.find(row.entry);
            if (it != prev.end() && !(row.sup_error < it->second)) table.monotone = false;
            prev[row.entry] = row.sup_error;
            worst_all = std::max(worst_all, row.sup_error);
            table.rows.push_back(row);
        }
        table.final_sup = worst_all;
    }
    return table;
}

}  // namespace ncbm
