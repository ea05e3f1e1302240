#include "ncbm/special_fn.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ncbm {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kBig = 1e150;
const double kLogBig = std::log(kBig);
}  // namespace

double heat_kernel(double t, double x, double y) {
    if (!(t > 0.0)) throw domain_error("heat_kernel: t must be positive");
    double d = x - y;
    return std::exp(-d * d / (2.0 * t)) / std::sqrt(2.0 * kPi * t);
}

double hermite(int l, double x) {
    if (l < 0) throw domain_error("hermite: negative degree");
    if (l == 0) return 1.0;
    double hm = 1.0, h = 2.0 * x;
    for (int k = 1; k < l; ++k) {
        double hp = 2.0 * x * h - 2.0 * k * hm;
        hm = h;
        h = hp;
    }
    return h;
}

double log_h(int l) { return 0.5 * std::log(kPi) + l * std::log(2.0) + std::lgamma(l + 1.0); }

double HermiteTable::at(int l) const { return val[l] * std::exp(lsc[l]); }

HermiteTable phi_table(int L, double x) {
    HermiteTable t;
    t.val.assign(L + 1, 0.0);
    t.lsc.assign(L + 1, 0.0);
    double scale = -0.5 * x * x - 0.25 * std::log(kPi);
    double prev = 0.0, cur = 1.0;
    t.val[0] = cur;
    t.lsc[0] = scale;
    for (int l = 0; l < L; ++l) {
        double next = std::sqrt(2.0 / (l + 1)) * x * cur - std::sqrt(double(l) / (l + 1)) * prev;
        prev = cur;
        cur = next;
        if (std::abs(cur) > kBig) {
            cur /= kBig;
            prev /= kBig;
            scale += kLogBig;
        }
        t.val[l + 1] = cur;
        t.lsc[l + 1] = scale;
    }
    return t;
}

std::vector<double> phi_all(int L, double x) {
    HermiteTable t = phi_table(L, x);
    std::vector<double> out(L + 1);
    for (int l = 0; l <= L; ++l) out[l] = t.at(l);
    return out;
}

double phi(int l, double x) {
    if (l < 0) throw domain_error("phi: negative index");
    return phi_table(l, x).at(l);
}

std::vector<double> psi_all(int L, double x) {
    std::vector<double> ph = phi_all(std::max(L, 1), x);
    std::vector<double> out(L + 1);
    out[0] = std::sqrt(2.0) * std::pow(kPi, 0.25) * 0.5 * std::erfc(-x / std::sqrt(2.0));
    if (L >= 1) out[1] = -std::sqrt(2.0) * ph[0];
    for (int l = 1; l < L; ++l)
        out[l + 1] = std::sqrt(double(l) / (l + 1)) * out[l - 1] - std::sqrt(2.0 / (l + 1)) * ph[l];
    return out;
}

std::vector<double> psi_inf(int L) {
    std::vector<double> out(L + 1, 0.0);
    out[0] = std::sqrt(2.0) * std::pow(kPi, 0.25);
    for (int l = 1; l < L; ++l) out[l + 1] = std::sqrt(double(l) / (l + 1)) * out[l - 1];
    return out;
}

double hermite_derivative_identity(int l, double y) {
    if (l < 1) throw domain_error("hermite_derivative_identity: l must be >= 1");
    // d/dy (e^{-y^2/2} H_l) = e^{-y^2/2} (H_l' - y H_l), H_l' = 2 l H_{l-1}
    double w = std::exp(-0.5 * y * y);
    double hl = hermite(l, y), hlm = hermite(l - 1, y);
    double deriv = w * (2.0 * l * hlm - y * hl);
    return -2.0 * deriv + 2.0 * l * w * hlm;
}

// ------------------------------------------------------------------- Airy

namespace {

constexpr long double kAi0 = 0.355028053887817239260063186004183176L;
constexpr long double kAip0 = 0.258819403792806798405183560189203963L;  // -Ai'(0)

void airy_series(double zd, double& ai, double& aip) {
    long double z = zd, z3 = z * z * z;
    long double f = 1, g = z, fp = 0, gp = 1;
    long double tf = 1, tg = z, tfp = z * z / 2, tgp = 1;
    fp = tfp;
    for (int k = 1; k < 200; ++k) {
        tf *= z3 / ((3.0L * k - 1) * (3.0L * k));
        tg *= z3 / ((3.0L * k) * (3.0L * k + 1));
        tgp *= z3 / ((3.0L * k - 2) * (3.0L * k));
        if (k >= 2) {
            tfp *= z3 / ((3.0L * k - 3) * (3.0L * k - 1));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        long double m = std::max({std::abs(tf), std::abs(tg), std::abs(tfp), std::abs(tgp)});
        if (k > 3 && m < 1e-24L) break;
    }
    ai = double(kAi0 * f - kAip0 * g);
    aip = double(kAi0 * fp - kAip0 * gp);
}

// u_k, v_k coefficients of the large-argument expansions
struct AiryAsym {
    double u[40], v[40];
    AiryAsym() {
        u[0] = v[0] = 1.0;
        for (int k = 1; k < 40; ++k) {
            u[k] = u[k - 1] * (6.0 * k - 5) * (6.0 * k - 3) * (6.0 * k - 1) / ((2.0 * k - 1) * 216.0 * k);
            v[k] = -u[k] * (6.0 * k + 1) / (6.0 * k - 1);
        }
    }
};
const AiryAsym& asym() {
    static const AiryAsym a;
    return a;
}

void airy_asym_pos(double z, double& ai, double& aip) {
    const AiryAsym& c = asym();
    double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    double su = 0, sv = 0, p = 1, last = 1e300;
    for (int k = 0; k < 40; ++k) {
        double tu = c.u[k] * p, tv = c.v[k] * p;
        if (std::abs(tu) > last) break;
        last = std::abs(tu);
        su += tu;
        sv += tv;
        if (last < 1e-18) break;
        p *= -1.0 / zeta;
    }
    double e = std::exp(-zeta) / (2.0 * std::sqrt(kPi));
    double q = std::pow(z, 0.25);
    ai = e / q * su;
    aip = -e * q * sv;
}

void airy_asym_neg(double z, double& ai, double& aip) {
    // z < 0, x = -z > 0
    const AiryAsym& c = asym();
    double x = -z;
    double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    double ue = 0, uo = 0, ve = 0, vo = 0, p = 1, last = 1e300;
    for (int k = 0; k < 40; ++k) {
        double tu = c.u[k] * p;
        if (std::abs(tu) > last) break;
        last = std::abs(tu);
        double sgn = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            ue += sgn * tu;
            ve += sgn * c.v[k] * p;
        } else {
            uo += sgn * tu;
            vo += sgn * c.v[k] * p;
        }
        if (last < 1e-18) break;
        p /= zeta;
    }
    double ph = zeta + 0.25 * kPi;
    double s = std::sin(ph), co = std::cos(ph);
    double q = std::pow(x, 0.25);
    ai = (s * ue - co * uo) / (std::sqrt(kPi) * q);
    aip = -q * (co * ve + s * vo) / std::sqrt(kPi);
}

}  // namespace

void airy(double z, double& ai, double& aip) {
    if (z > 6.0)
        airy_asym_pos(z, ai, aip);
    else if (z < -8.0)
        airy_asym_neg(z, ai, aip);
    else
        airy_series(z, ai, aip);
}

double airy_ai(double z) {
    double a, ap;
    airy(z, a, ap);
    return a;
}

double airy_ai_prime(double z) {
    double a, ap;
    airy(z, a, ap);
    return ap;
}

double airy_ai_integral(double x) {
    if (x == 0.0) return 0.0;
    auto r = integrate_gk([](double u) { return airy_ai(u); }, std::min(0.0, x), std::max(0.0, x),
                          1e-15, 1e-13, 4000);
    return x > 0 ? r.value : -r.value;
}

// ------------------------------------------------------------- quadrature

void QuadratureSpec::validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw domain_error("QuadratureSpec: tolerances must be positive");
    if (max_subdivisions < 1) throw domain_error("QuadratureSpec: max_subdivisions must be >= 1");
    if (b_infinite && rule != QuadRule::filon_oscillatory && !(cutoff > a))
        throw domain_error("QuadratureSpec: semi-infinite domain needs a cutoff beyond a");
    if (rule == QuadRule::filon_oscillatory && !(half_period > 0))
        throw domain_error("QuadratureSpec: filon rule needs a positive half period");
}

QuadResult integrate_gk(const std::function<double(double)>& f, double a, double b, double abs_tol,
                        double rel_tol, int max_sub) {
    QuadResult r;
    if (a == b) return r;
    unsigned depth = 1;
    while ((1 << depth) < max_sub && depth < 30) ++depth;
    double err = 0, l1 = 0;
    int calls = 0;
    auto g = [&](double x) {
        ++calls;
        return f(x);
    };
    // boost measures tol against the L1 norm; ask for the tighter of the two
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, depth, rel_tol, &err, &l1);
    r.error = err;
    r.evaluations = calls;
    r.converged = std::isfinite(r.value) && err <= std::max(abs_tol, rel_tol * std::max(std::abs(r.value), l1));
    return r;
}

QuadResult integrate_oscillatory(const std::function<double(double)>& f, double a, double h, double abs_tol,
                                 int max_segments) {
    QuadResult r;
    std::vector<double> partial;
    double sum = 0;
    auto seg = [&](int k) {
        double lo = a + k * h, hi = lo + h;
        QuadResult s = integrate_gk(f, lo, hi, abs_tol * 1e-2, 1e-13, 64);
        r.evaluations += s.evaluations;
        return s.value;
    };
    // Euler/repeated averaging over the last `w` partial sums
    auto accel = [&](int w) {
        std::vector<double> p(partial.end() - w, partial.end());
        while (p.size() > 1) {
            for (size_t i = 0; i + 1 < p.size(); ++i) p[i] = 0.5 * (p[i] + p[i + 1]);
            p.pop_back();
        }
        return p[0];
    };
    const int w = 16;
    double prev = std::numeric_limits<double>::quiet_NaN();
    int k = 0;
    for (; k < max_segments; ++k) {
        sum += seg(k);
        partial.push_back(sum);
        if (k >= 2 * w && k % 4 == 0) {
            double est = accel(w);
            if (std::isfinite(prev) && std::abs(est - prev) < abs_tol) {
                r.value = est;
                r.error = std::abs(est - prev);
                return r;
            }
            prev = est;
        }
    }
    r.value = partial.size() >= size_t(w) ? accel(w) : sum;
    r.error = std::isfinite(prev) ? std::abs(r.value - prev) : std::numeric_limits<double>::infinity();
    r.converged = false;
    return r;
}

QuadResult integrate(const std::function<double(double)>& f, const QuadratureSpec& spec) {
    spec.validate();
    double b = spec.b_infinite ? spec.cutoff : spec.b;
    switch (spec.rule) {
        case QuadRule::gauss_legendre_composite:
            return integrate_gk(f, spec.a, b, spec.abs_tol, spec.rel_tol, spec.max_subdivisions);
        case QuadRule::tanh_sinh: {
            QuadResult r;
            if (spec.a == b) return r;
            size_t levels = 0;
            double err = 0, l1 = 0;
            boost::math::quadrature::tanh_sinh<double> ts(15);
            int calls = 0;
            auto g = [&](double x) {
                ++calls;
                return f(x);
            };
            r.value = ts.integrate(g, spec.a, b, spec.rel_tol, &err, &l1, &levels);
            r.error = err;
            r.evaluations = calls;
            r.converged = std::isfinite(r.value) &&
                          err <= std::max(spec.abs_tol, spec.rel_tol * std::max(std::abs(r.value), l1));
            return r;
        }
        case QuadRule::filon_oscillatory: {
            if (!spec.b_infinite) {
                // finite range: plain segmentation is enough
                QuadResult r;
                int n = std::max(1, int(std::ceil((spec.b - spec.a) / spec.half_period)));
                double h = (spec.b - spec.a) / n;
                for (int k = 0; k < n; ++k) {
                    auto s = integrate_gk(f, spec.a + k * h, spec.a + (k + 1) * h, spec.abs_tol / n, spec.rel_tol, 64);
                    r.value += s.value;
                    r.error += s.error;
                    r.evaluations += s.evaluations;
                    r.converged = r.converged && s.converged;
                }
                return r;
            }
            return integrate_oscillatory(f, spec.a, spec.half_period, spec.abs_tol, spec.max_subdivisions);
        }
    }
    throw domain_error("integrate: unknown rule");
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5)), pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // refresh derivative at the converged node
        double p1 = 1, p2 = 0;
        for (int j = 1; j <= n; ++j) {
            double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
        }
        pp = n * (z * p1 - p2) / (z * z - 1);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
    }
}

void composite_gl(double a, double b, int panels, int n, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    x.clear();
    w.clear();
    double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * h;
        for (int i = 0; i < n; ++i) {
            x.push_back(lo + 0.5 * h * (gx[i] + 1));
            w.push_back(0.5 * h * gw[i]);
        }
    }
}

CumulativeGL::CumulativeGL(double a_, double b, int panels_, int n_) : a(a_), n(n_), panels(panels_) {
    h = (b - a) / panels;
    composite_gl(a, b, panels, n, x, w);
    std::vector<double> gx, gw;
    gauss_legendre(n, gx, gw);
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = 0.5 * (gx[i] + 1);
    Q.assign(size_t(n) * n, 0.0);
    // Q(i, j) = int_0^{t_i} l_j(u) du with l_j the Lagrange basis on t
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < n; ++q) {
            double u = t[i] * t[q], wq = t[i] * 0.5 * gw[q];
            for (int j = 0; j < n; ++j) {
                double l = 1;
                for (int k = 0; k < n; ++k)
                    if (k != j) l *= (u - t[k]) / (t[j] - t[k]);
                Q[size_t(i) * n + j] += wq * l;
            }
        }
}

std::vector<double> CumulativeGL::cumulative(const std::vector<double>& f) const {
    std::vector<double> out(f.size());
    double base = 0;
    for (int p = 0; p < panels; ++p) {
        const double* fp = f.data() + size_t(p) * n;
        for (int i = 0; i < n; ++i) {
            double s = 0;
            for (int j = 0; j < n; ++j) s += Q[size_t(i) * n + j] * fp[j];
            out[size_t(p) * n + i] = base + h * s;
        }
        double full = 0;
        for (int j = 0; j < n; ++j) full += w[size_t(p) * n + j] * fp[j];
        base += full;
    }
    return out;
}

}  // namespace ncbm
