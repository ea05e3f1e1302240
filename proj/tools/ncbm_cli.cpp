// ncbm command-line front end: JSON config in, CSV/JSON tables out.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncbm/asymptotics.hpp"
#include "ncbm/oracle.hpp"

#ifndef NCBM_VERSION
#define NCBM_VERSION "0.0.0"
#endif

using json = nlohmann::ordered_json;
using namespace ncbm;

namespace {

enum Exit { kOk = 0, kVerifyFail = 1, kConfigError = 2, kNoConvergence = 3 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
    throw ConfigError(path.empty() ? "/" + what : path + ": " + what);
}

// ------------------------------------------------------------ schema subset
// type, enum, properties, required, additionalProperties=false, items,
// minItems, minimum, exclusiveMinimum, $ref into #/$defs, default (filled in)

const json& resolve(const json& node, const json& root) {
    if (!node.contains("$ref")) return node;
    std::string ref = node["$ref"];
    const std::string pre = "#/$defs/";
    if (ref.rfind(pre, 0) != 0) throw std::logic_error("schema: unsupported $ref " + ref);
    return root["$defs"][ref.substr(pre.size())];
}

bool type_ok(const std::string& t, const json& v) {
    if (t == "object") return v.is_object();
    if (t == "array") return v.is_array();
    if (t == "string") return v.is_string();
    if (t == "integer") return v.is_number_integer() || (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()));
    if (t == "number") return v.is_number();
    if (t == "boolean") return v.is_boolean();
    return false;
}

void validate(const json& sch_in, json& v, const json& root, const std::string& path) {
    const json& sch = resolve(sch_in, root);
    if (sch.contains("type") && !type_ok(sch["type"], v))
        config_fail(path, "expected " + sch["type"].get<std::string>());
    if (sch.contains("enum")) {
        bool hit = false;
        for (auto& e : sch["enum"]) hit |= (e == v);
        if (!hit) config_fail(path, "must be one of " + sch["enum"].dump());
    }
    if (v.is_number()) {
        double x = v.get<double>();
        if (sch.contains("minimum") && x < sch["minimum"].get<double>())
            config_fail(path, "must be >= " + sch["minimum"].dump());
        if (sch.contains("exclusiveMinimum") && !(x > sch["exclusiveMinimum"].get<double>()))
            config_fail(path, "must be > " + sch["exclusiveMinimum"].dump());
    }
    if (v.is_array()) {
        if (sch.contains("minItems") && v.size() < sch["minItems"].get<size_t>())
            config_fail(path, "needs at least " + sch["minItems"].dump() + " entries");
        if (sch.contains("items"))
            for (size_t i = 0; i < v.size(); ++i) validate(sch["items"], v[i], root, path + "/" + std::to_string(i));
    }
    if (v.is_object()) {
        const json empty = json::object();
        const json& props = sch.contains("properties") ? sch["properties"] : empty;
        if (sch.value("additionalProperties", true) == false)
            for (auto& [k, _] : v.items())
                if (!props.contains(k)) config_fail(path + "/" + k, "unknown key");
        if (sch.contains("required"))
            for (auto& r : sch["required"])
                if (!v.contains(r.get<std::string>())) config_fail(path + "/" + r.get<std::string>(), "required");
        for (auto& [k, ps] : props.items()) {
            if (v.contains(k))
                validate(ps, v[k], root, path + "/" + k);
            else if (resolve(ps, root).contains("default")) {
                v[k] = resolve(ps, root)["default"];
                validate(ps, v[k], root, path + "/" + k);  // nested defaults
            }
        }
    }
}

json load_schema() {
    std::ifstream in(NCBM_SCHEMA_PATH);
    if (!in) throw std::runtime_error("cannot open schema " + std::string(NCBM_SCHEMA_PATH));
    return json::parse(in);
}

json load_config(const std::string& path) {
    json cfg = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) config_fail("", "cannot open config " + path);
        try {
            cfg = json::parse(in);
        } catch (const json::parse_error& e) {
            config_fail("", std::string("malformed JSON: ") + e.what());
        }
    }
    json schema = load_schema();
    validate(schema, cfg, schema, "");
    return cfg;
}

void check_increasing(const json& a, const std::string& path) {
    for (size_t i = 1; i < a.size(); ++i)
        if (!(a[i].get<double>() > a[i - 1].get<double>()))
            config_fail(path, "must be strictly increasing (entry " + std::to_string(i) + ")");
}

// ------------------------------------------------------------------ output

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string joined(const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + num(v[i]);
    return s;
}

struct Output {
    std::ostringstream buf;
    void header(const std::string& cmd, const json& cfg) {
        buf << "# ncbm " << NCBM_VERSION << "\n";
        buf << "# command: " << cmd << "\n";
        buf << "# seed: " << cfg["seed"].get<std::uint64_t>() << "\n";
        buf << "# config: " << cfg.dump() << "\n";
    }
    void flush(const std::string& path) {
        if (path.empty()) {
            std::cout << buf.str();
            return;
        }
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        out << buf.str();
    }
};

FiniteNModel make_model(const json& cfg) {
    if (!cfg.contains("model")) config_fail("/model", "required for this command");
    const json& m = cfg["model"];
    check_increasing(m["times"], "/model/times");
    int N = m["N"];
    if (N % 2) config_fail("/model/N", "must be even");
    try {
        return FiniteNModel(N, m["T"].get<double>(), m["times"].get<std::vector<double>>());
    } catch (const domain_error& e) {
        config_fail("/model", e.what());
    }
}

std::vector<std::vector<double>> points_for(const json& cfg, size_t n_times) {
    if (!cfg.contains("points")) config_fail("/points", "required for this command");
    auto pts = cfg["points"].get<std::vector<std::vector<double>>>();
    if (pts.size() != n_times)
        config_fail("/points", "needs one list per time (" + std::to_string(n_times) + "), got " + std::to_string(pts.size()));
    return pts;
}

std::string time_indices(const std::vector<std::vector<double>>& pts) {
    std::string s;
    for (size_t m = 0; m < pts.size(); ++m)
        for (size_t i = 0; i < pts[m].size(); ++i) s += (s.empty() ? "" : " ") + std::to_string(m);
    return s;
}

std::vector<double> flat(const std::vector<std::vector<double>>& pts) {
    std::vector<double> v;
    for (auto& p : pts) v.insert(v.end(), p.begin(), p.end());
    return v;
}

// --------------------------------------------------------------- commands

int cmd_correlate(const json& cfg, Output& out) {
    out.buf << "source,time_indices,points,value\n";
    if (cfg.contains("limit")) {
        const json& lim = cfg["limit"];
        check_increasing(lim["s"], "/limit/s");
        auto s = lim["s"].get<std::vector<double>>();
        Regime r = lim["family"] == "sine" ? Regime::bulk : Regime::edge;
        if (r == Regime::edge && s.back() > 0) config_fail("/limit/s", "Airy times must be <= 0");
        auto pts = points_for(cfg, s.size());
        std::vector<std::pair<int, double>> all;
        for (size_t m = 0; m < pts.size(); ++m)
            for (double x : pts[m]) all.push_back({int(m), x});
        const int n = int(all.size());
        if (lim["reduced"].get<bool>()) {
            // temporally homogeneous reduction: a plain determinant
            Eigen::MatrixXd A(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    auto [m, x] = all[i];
                    auto [k, y] = all[j];
                    A(i, j) = r == Regime::bulk ? sine_reduction_A(s[m], x, s[k], y) : airy_reduction_a(s[m], x, s[k], y);
                }
            out.buf << lim["family"].get<std::string>() << "_reduced," << time_indices(pts) << "," << joined(flat(pts))
                    << "," << num(n ? A.determinant() : 1.0) << "\n";
            return kOk;
        }
        bool conv = true;
        double v = limit_correlation(r, s, pts, &conv, cfg["quadrature"]["tol"].get<double>());
        out.buf << lim["family"].get<std::string>() << "," << time_indices(pts) << "," << joined(flat(pts)) << ","
                << num(v) << "\n";
        return conv ? kOk : kNoConvergence;
    }
    FiniteNModel md = make_model(cfg);
    auto pts = points_for(cfg, md.n_times());
    MultitimeRequest req{&md, pts};
    try {
        req.validate();
    } catch (const domain_error& e) {
        config_fail("/points", e.what());
    }
    double v = correlation(req);
    out.buf << "finite," << time_indices(pts) << "," << joined(flat(pts)) << "," << num(v) << "\n";
    return std::isfinite(v) ? kOk : kNoConvergence;
}

std::vector<double> grid(const json& g) {
    double lo = g["min"], hi = g["max"];
    int n = g["steps"];
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

int cmd_kernel(const json& cfg, Output& out) {
    if (!cfg.contains("kernel")) config_fail("/kernel", "required for this command");
    const json& k = cfg["kernel"];
    auto xs = grid(k["x"]), ys = grid(k["y"]);
    out.buf << "x,y,St,D,It\n";
    bool conv = true;
    if (cfg.contains("limit")) {
        Regime r = cfg["limit"]["family"] == "sine" ? Regime::bulk : Regime::edge;
        double s = k["s"], t = k["t"], tol = cfg["quadrature"]["tol"];
        if (r == Regime::edge && (s > 0 || t > 0)) config_fail("/kernel", "Airy times must be <= 0");
        for (double x : xs)
            for (double y : ys) {
                auto v = limit_kernel(r, s, x, t, y, tol);
                conv = conv && v.converged;
                out.buf << num(x) << "," << num(y) << "," << num(v.St) << "," << num(v.D) << "," << num(v.It) << "\n";
            }
        return conv ? kOk : kNoConvergence;
    }
    FiniteNModel md = make_model(cfg);
    int m = k["m"], n = k["n"];
    if (m > md.last()) config_fail("/kernel/m", "time index out of range");
    if (n > md.last()) config_fail("/kernel/n", "time index out of range");
    for (double x : xs)
        for (double y : ys) {
            auto v = md.kernels(m, n, x, y);
            conv = conv && std::isfinite(v.St) && std::isfinite(v.D) && std::isfinite(v.It);
            out.buf << num(x) << "," << num(y) << "," << num(v.St) << "," << num(v.D) << "," << num(v.It) << "\n";
        }
    return conv ? kOk : kNoConvergence;
}

int cmd_converge(const json& cfg, Output& out) {
    if (!cfg.contains("converge")) config_fail("/converge", "required for this command");
    const json& c = cfg["converge"];
    Regime r = parse_regime(c["regime"]);
    auto Ns = c["N_list"].get<std::vector<int>>();
    for (size_t i = 0; i < Ns.size(); ++i)
        if (Ns[i] % 2) config_fail("/converge/N_list/" + std::to_string(i), "N must be even");
    for (size_t i = 1; i < Ns.size(); ++i)
        if (Ns[i] <= Ns[i - 1]) config_fail("/converge/N_list", "must be strictly increasing");
    ProbeGrid g = ProbeGrid::defaults(r);
    if (c.contains("s")) {
        check_increasing(c["s"], "/converge/s");
        g.s = c["s"].get<std::vector<double>>();
    }
    if (c.contains("xs")) g.xs = c["xs"].get<std::vector<double>>();
    if (g.s.back() != 0) config_fail("/converge/s", "last entry must be 0");
    auto tab = convergence_table(r, Ns, g, c["threads"].get<int>());
    out.buf << "N,entry,sup_error,m,n,x,y\n";
    for (auto& row : tab.rows)
        out.buf << row.N << "," << row.entry << "," << num(row.sup_error) << "," << row.m << "," << row.n << ","
                << num(row.x) << "," << num(row.y) << "\n";
    out.buf << "# monotone: " << (tab.monotone ? "true" : "false") << "\n";
    out.buf << "# final_sup: " << num(tab.final_sup) << "\n";
    bool finite = std::all_of(tab.rows.begin(), tab.rows.end(), [](auto& r) { return std::isfinite(r.sup_error); });
    return finite ? kOk : kNoConvergence;
}

McConfig mc_from(const json& cfg) {
    McConfig mc;
    const json& m = cfg["mc"];
    mc.seed = cfg["seed"];
    mc.chains = m["chains"];
    mc.burn_in = m["burn_in"];
    mc.samples_per_chain = m["samples_per_chain"];
    mc.proposal_scale = m["proposal_scale"];
    mc.bin_width = m["bin_width"];
    return mc;
}

int cmd_oracle(const json& cfg, Output& out, const std::string& out_path) {
    FiniteNModel md = make_model(cfg);
    const json& o = cfg["oracle"];
    if (o["mode"] == "quadrature") {
        auto pts = points_for(cfg, md.n_times());
        MultitimeRequest req{&md, pts};
        OracleOptions opt;
        opt.max_free_dims = o["max_free_dims"];
        opt.rel_tol = o["rel_tol"];
        double q;
        try {
            req.validate();
            q = correlation_quadrature(req, opt);
        } catch (const domain_error& e) {
            config_fail("/oracle", e.what());
        }
        double p = correlation(req);
        out.buf << "time_indices,points,quadrature,pfaffian,rel_diff\n";
        out.buf << time_indices(pts) << "," << joined(flat(pts)) << "," << num(q) << "," << num(p) << ","
                << num(std::abs(q - p) / std::max(std::abs(p), 1e-300)) << "\n";
        return std::isfinite(q) ? kOk : kNoConvergence;
    }
    if (!o.contains("windows")) config_fail("/oracle/windows", "required in mcmc mode");
    std::vector<std::vector<Box>> windows;
    for (size_t w = 0; w < o["windows"].size(); ++w) {
        std::vector<Box> win;
        for (size_t b = 0; b < o["windows"][w].size(); ++b) {
            const json& j = o["windows"][w][b];
            std::string p = "/oracle/windows/" + std::to_string(w) + "/" + std::to_string(b);
            Box box{j["m"].get<int>(), j["lo"].get<double>(), j["hi"].get<double>()};
            if (box.m > md.last()) config_fail(p + "/m", "time index out of range");
            if (!(box.hi > box.lo)) config_fail(p, "hi must exceed lo");
            win.push_back(box);
        }
        windows.push_back(win);
    }
    McConfig mc = mc_from(cfg);
    auto chains = sample_density(md, mc);
    out.buf << "window,estimate,std_error,n_effective,rhat,multi_occupancy,reference,z_score\n";
    bool mixed = true;
    for (size_t w = 0; w < windows.size(); ++w) {
        auto e = estimate_correlation(chains, windows[w]);
        double ref = box_average_correlation(md, windows[w]);
        double z = e.std_error > 0 ? (e.value - ref) / e.std_error : 0.0;
        mixed = mixed && e.rhat < 1.05;
        out.buf << w << "," << num(e.value) << "," << num(e.std_error) << "," << num(e.n_effective) << ","
                << num(e.rhat) << "," << num(e.multi_occupancy) << "," << num(ref) << "," << num(z) << "\n";
    }
    if (o.contains("export_samples")) {
        std::string path = o["export_samples"];
        Output s;
        s.buf << out.buf.str().substr(0, out.buf.str().find("window,"));
        s.buf << "chain,step,m,i,x\n";
        for (auto& c : chains)
            for (size_t k = 0; k < c.states.size(); ++k)
                for (size_t m = 0; m < c.states[k].size(); ++m)
                    for (size_t i = 0; i < c.states[k][m].size(); ++i)
                        s.buf << c.chain << "," << k << "," << m << "," << i << "," << num(c.states[k][m][i]) << "\n";
        if (path == out_path) config_fail("/oracle/export_samples", "must differ from --out");
        s.flush(path);
    }
    return mixed ? kOk : kNoConvergence;
}

// ----------------------------------------------------------------- verify

struct Check {
    std::string name, module;
    double tolerance = 0, residual = 0, seconds = 0;
    bool pass = false;
};

double line_integral(const std::function<double(double)>& f, double lo, double hi, std::vector<double> cuts = {}) {
    cuts.push_back(lo);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double s = 0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = std::max(lo, cuts[i]), b = std::min(hi, cuts[i + 1]);
        if (b > a) s += integrate_gk(f, a, b, 1e-15, 1e-11, 4000).value;
    }
    return s;
}

Eigen::MatrixXd random_skew(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1, 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) A(i, j) = U(rng), A(j, i) = -A(i, j);
    return A;
}

using Residual = std::function<double(std::mt19937_64&)>;

struct Planned {
    std::string name, module;
    double tolerance;
    Residual run;
};

std::vector<Planned> plan() {
    std::vector<Planned> p;
    p.push_back({"airy_at_zero", "special_fn", 1e-14, [](auto&) {
                     return std::abs(airy_ai(0) - std::pow(3.0, -2.0 / 3) / std::tgamma(2.0 / 3));
                 }});
    p.push_back({"airy_ode_residual", "special_fn", 1e-7, [](auto&) {
                     const double h = 1e-3;
                     auto d2 = [&](double z, double s) {
                         return (airy_ai(z + s) - 2 * airy_ai(z) + airy_ai(z - s)) / (s * s);
                     };
                     double w = 0;
                     for (double z = -10; z <= 5; z += 0.05)
                         w = std::max(w, std::abs((4 * d2(z, h) - d2(z, 2 * h)) / 3 - z * airy_ai(z)));
                     return w;
                 }});
    p.push_back({"hermite_orthonormality", "special_fn", 1e-8, [](auto&) {
                     std::vector<double> xs, ws;
                     composite_gl(-25, 25, 100, 20, xs, ws);
                     double w = 0;
                     for (int k = 0; k <= 12; ++k)
                         for (int l = 0; l <= 12; ++l) {
                             double s = 0;
                             for (size_t i = 0; i < xs.size(); ++i) s += ws[i] * phi(k, xs[i]) * phi(l, xs[i]);
                             w = std::max(w, std::abs(s - (k == l)));
                         }
                     return w;
                 }});
    p.push_back({"pfaffian_squared_is_det", "pfaffian", 1e-9, [](auto& rng) {
                     double w = 0;
                     for (int s = 0; s < 200; ++s) {
                         auto A = random_skew(2 * (1 + s % 8), rng);
                         double pf = pfaffian_real(A), d = A.determinant();
                         w = std::max(w, std::abs(pf * pf - d) / std::abs(d));
                     }
                     return w;
                 }});
    p.push_back({"tdet_vs_cycle_sum", "pfaffian", 1e-12, [](auto& rng) {
                     std::uniform_real_distribution<double> U(-1, 1);
                     double w = 0;
                     for (int n = 1; n <= 4; ++n)
                         for (int s = 0; s < 10; ++s) {
                             QKernelMatrix Q(n);
                             for (int i = 0; i < n; ++i) {
                                 double d = U(rng);
                                 Q(i, i) = Quaternion::from_block(d, 0, 0, d);
                                 for (int j = i + 1; j < n; ++j) {
                                     Q(i, j) = Quaternion::from_block(U(rng), U(rng), U(rng), U(rng));
                                     Q(j, i) = dual(Q(i, j));
                                 }
                             }
                             double ref = tdet_cycle_sum(Q).real();
                             w = std::max(w, std::abs(tdet(Q).value - ref) / std::max(1.0, std::abs(ref)));
                         }
                     return w;
                 }});
    p.push_back({"skew_orthogonality", "finite_model", 1e-7, [](auto&) {
                     FiniteNModel md(8, 1.0, {0.5, 1.0});
                     double w = 0;
                     for (int a = 0; a < 8; ++a)
                         for (int b = 0; b < 8; ++b) {
                             double expect = 0;
                             if (a % 2 == 0 && b == a + 1) expect = std::exp(md.log_r(a / 2));
                             if (b % 2 == 0 && a == b + 1) expect = -std::exp(md.log_r(b / 2));
                             double v = skew_inner(md, [&](double x) { return md.R(a, x); },
                                                   [&](double x) { return md.R(b, x); });
                             w = std::max(w, std::abs(v - expect) / std::exp(md.log_r(std::min(a, b) / 2)));
                         }
                     return w;
                 }});
    p.push_back({"F_series_expansion", "finite_model", 1e-5, [](auto& rng) {
                     FiniteNModel md(4, 1.0, {0.4, 0.7, 1.0});
                     std::uniform_real_distribution<double> U(-2, 2);
                     const int K = md.N() + 40;
                     double w = 0;
                     for (int s = 0; s < 6; ++s) {
                         double x = U(rng), y = U(rng);
                         int m = s % 2, n = (s / 2) % 2;
                         auto a = md.side(m, x, 2 * K), b = md.side(n, y, 2 * K);
                         double sum = 0;
                         for (int k = 0; k < K; ++k)
                             sum += std::exp(-md.log_r(k)) *
                                    (a.P_at(2 * k) * b.P_at(2 * k + 1) - a.P_at(2 * k + 1) * b.P_at(2 * k));
                         w = std::max(w, std::abs(md.F(m, n, x, y) - sum));
                     }
                     return w;
                 }});
    p.push_back({"convolution_identities", "finite_model", 1e-5, [](auto& rng) {
                     FiniteNModel md(4, 1.0, {0.4, 0.7, 1.0});
                     std::uniform_real_distribution<double> U(-2, 2);
                     double w = 0;
                     for (int s = 0; s < 3; ++s) {
                         double x = U(rng), y = U(rng);
                         int m = s % 3, p = (s + 1) % 3, n = (s + 2) % 3;
                         auto K = [&](int a, int b, double u, double v) { return md.kernels(a, b, u, v); };
                         auto t = K(m, n, x, y);
                         double SS = line_integral([&](double z) { return K(m, p, x, z).S * K(p, n, z, y).S; }, -14, 14);
                         double SI = line_integral([&](double z) { return K(m, p, x, z).S * K(p, n, z, y).I; }, -14, 14);
                         double DF = line_integral([&](double z) { return K(m, p, x, z).D * md.F(p, n, z, y); }, -14, 14, {y});
                         w = std::max({w, std::abs(SS - t.S), std::abs(SI - t.I), std::abs(DF + K(n, m, y, x).S)});
                     }
                     return w;
                 }});
    p.push_back({"integration_out", "finite_model", 1e-5, [](auto&) {
                     double w = 0;
                     for (int N : {2, 4}) {
                         FiniteNModel md(N, 1.0, {0.5, 1.0});
                         MultitimeRequest base{&md, {{-0.2}, {0.4}}};
                         double lhs = line_integral(
                             [&](double u) {
                                 MultitimeRequest r = base;
                                 r.configs[1].push_back(u);
                                 return correlation(r);
                             },
                             -14, 14, {0.4});
                         double rhs = (N - 1) * correlation(base);
                         w = std::max(w, std::abs(lhs - rhs) / std::abs(rhs));
                     }
                     return w;
                 }});
    p.push_back({"sine_diagonal", "asymptotics", 1e-14, [](auto&) {
                     return std::abs(sine_kernel(-1, 0.4, -1, 0.4).St - 1 / M_PI);
                 }});
    p.push_back({"airy_D_diagonal", "asymptotics", 1e-15, [](auto&) {
                     return std::abs(airy_D(-0.5, 0.3, -0.5, 0.3));
                 }});
    p.push_back({"airy_P_closed_form", "asymptotics", 1e-10, [](auto&) {
                     double s = -1, x = 0.3, t = -0.5, y = -0.7, c = (t - s) / 2;
                     double ref = std::exp(c * c * c / 12 - (x + y) * c / 2 - (x - y) * (x - y) / (4 * c)) /
                                  (2 * std::sqrt(M_PI * c));
                     return std::abs(airy_P(s, x, t, y) - ref);
                 }});
    p.push_back({"airy_process_diagonal", "asymptotics", 1e-6, [](auto&) {
                     double d = airy_ai_prime(0);
                     return std::abs(airy_reduction_a(-0.5, 0, -0.5, 0) - d * d);
                 }});
    p.push_back({"quadrature_vs_pfaffian", "oracle", 1e-6, [](auto&) {
                     double w = 0;
                     FiniteNModel a(2, 1.0, {0.7, 1.0});
                     FiniteNModel b(4, 1.0, {0.7, 1.0});
                     for (auto req : {MultitimeRequest{&a, {{-0.2}, {0.5}}},
                                      MultitimeRequest{&b, {{-1.0, 0.1, 0.9}, {0.0, 1.2, -0.7}}}}) {
                         double p = correlation(req);
                         w = std::max(w, std::abs(correlation_quadrature(req) - p) / std::abs(p));
                     }
                     return w;
                 }});
    return p;
}

int cmd_verify(const json& cfg, const std::string& only, std::string& report) {
    static const std::vector<std::string> modules = {"special_fn", "pfaffian", "finite_model", "asymptotics", "oracle"};
    if (!only.empty() && std::find(modules.begin(), modules.end(), only) == modules.end())
        config_fail("--only", "unknown module " + only);
    std::mt19937_64 rng(cfg["seed"].get<std::uint64_t>());
    json checks = json::array();
    int failed = 0;
    for (auto& pl : plan()) {
        if (!only.empty() && pl.module != only) continue;
        double tol = cfg.contains("verify") && cfg["verify"].contains("tolerance") ? cfg["verify"]["tolerance"].get<double>()
                                                                                    : pl.tolerance;
        auto t0 = std::chrono::steady_clock::now();
        double r = pl.run(rng);
        double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool pass = std::isfinite(r) && r <= tol;
        failed += !pass;
        checks.push_back({{"name", pl.name}, {"module", pl.module}, {"tolerance", tol}, {"residual", r},
                          {"pass", pass}, {"seconds", sec}});
    }
    json rep = {{"version", NCBM_VERSION},
                {"seed", cfg["seed"]},
                {"config", cfg},
                {"only", only},
                {"checks", checks},
                {"passed", int(checks.size()) - failed},
                {"failed", failed}};
    report = rep.dump(2) + "\n";
    return failed ? kVerifyFail : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multitime correlations of non-colliding Brownian motion"};
    app.set_version_flag("--version", NCBM_VERSION);
    app.require_subcommand(1);
    std::string config_path, out_path, only;
    std::uint64_t seed = 0;
    for (auto [name, help] : {std::pair{"correlate", "correlation function at given points"},
                              {"kernel", "kernel entries on an (x, y) grid"},
                              {"converge", "finite-N against limit kernel errors"},
                              {"oracle", "independent quadrature or sampling check"},
                              {"verify", "run the invariant suite, JSON report"}}) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "output path (default stdout)");
        sub->add_option("--seed", seed, "RNG seed (overrides the config)");
        sub->add_option("--only", only, "restrict verify to one module");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc ? kConfigError : kOk;
    }
    std::string cmd = app.get_subcommands().front()->get_name();
    bool seed_given = app.get_subcommands().front()->count("--seed") > 0;

    try {
        json cfg = load_config(config_path);
        if (seed_given) cfg["seed"] = seed;
        if (!only.empty() && cmd != "verify") config_fail("--only", "applies to verify only");
        if (cmd == "verify") {
            std::string rep;
            int rc = cmd_verify(cfg, only, rep);
            Output o;
            o.buf << rep;
            o.flush(out_path);
            return rc;
        }
        Output o;
        o.header(cmd, cfg);
        int rc = kOk;
        if (cmd == "correlate") rc = cmd_correlate(cfg, o);
        if (cmd == "kernel") rc = cmd_kernel(cfg, o);
        if (cmd == "converge") rc = cmd_converge(cfg, o);
        if (cmd == "oracle") rc = cmd_oracle(cfg, o, out_path);
        o.flush(out_path);
        if (rc == kNoConvergence) std::cerr << "warning: numerical non-convergence, see output\n";
        return rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        // unreadable or unwritable files and the like
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
}
