#include "ncbm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

namespace ncbm {

// ------------------------------------------------------------- quadrature

double correlation_quadrature(const MultitimeRequest& req_in, const OracleOptions& opt) {
    MultitimeRequest req = req_in;
    req.validate();
    req.canonicalize();
    const FiniteNModel& md = *req.model;
    const int N = md.N();
    std::vector<int> free_time;
    double log_fact = 0;
    for (int m = 0; m < md.n_times(); ++m) {
        int k = N - int(req.configs[m].size());
        for (int i = 0; i < k; ++i) free_time.push_back(m);
        log_fact += std::lgamma(k + 1.0);
    }
    const int D = int(free_time.size());
    if (D > opt.max_free_dims)
        throw domain_error("correlation_quadrature: " + std::to_string(D) + " free coordinates exceed the cost guard (" +
                           std::to_string(opt.max_free_dims) + "); use the sampler instead");
    std::vector<std::vector<double>> cfg = req.configs;
    if (D == 0) return density_symmetric(md, cfg);

    std::vector<double> vals(D);
    // integrate dim d given vals[0..d-1]
    std::function<double(int)> level = [&](int d) -> double {
        if (d == D) {
            std::vector<std::vector<double>> full = req.configs;
            for (int j = 0; j < D; ++j) full[free_time[j]].push_back(vals[j]);
            return density_symmetric(md, full);
        }
        const int m = free_time[d];
        double R = md.c(m) * (std::sqrt(2.0 * N + 1) + 9.0);
        // kinks sit where the coordinate meets another point of the same time
        std::vector<double> cuts = {-R, R};
        for (double v : req.configs[m])
            if (std::abs(v) < R) cuts.push_back(v);
        for (int j = 0; j < d; ++j)
            if (free_time[j] == m && std::abs(vals[j]) < R) cuts.push_back(vals[j]);
        std::sort(cuts.begin(), cuts.end());
        double acc = 0;
        for (size_t i = 0; i + 1 < cuts.size(); ++i) {
            if (cuts[i + 1] <= cuts[i]) continue;
            auto r = integrate_gk(
                [&](double v) {
                    vals[d] = v;
                    return level(d + 1);
                },
                cuts[i], cuts[i + 1], 1e-300, opt.rel_tol, 1 << 10);
            acc += r.value;
        }
        return acc;
    };
    return level(0) / std::exp(log_fact);
}

// ---------------------------------------------------------------- sampler

void McConfig::validate() const {
    if (chains < 2) throw domain_error("mc: chains must be >= 2");
    if (samples_per_chain < 1000) throw domain_error("mc: samples_per_chain must be >= 1000");
    if (burn_in < 0) throw domain_error("mc: burn_in must be >= 0");
    if (!(proposal_scale > 0)) throw domain_error("mc: proposal_scale must be positive");
    if (!(bin_width > 0)) throw domain_error("mc: bin_width must be positive");
}

namespace {

ChainSamples run_chain(const FiniteNModel& md, const McConfig& mc, int chain) {
    std::seed_seq seq{std::uint32_t(mc.seed & 0xffffffffu), std::uint32_t(mc.seed >> 32), std::uint32_t(chain),
                      0x9e3779b9u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int N = md.N(), S = md.n_times(), dim = N * S;

    std::vector<std::vector<double>> x(S, std::vector<double>(N));
    for (int m = 0; m < S; ++m)
        for (int i = 0; i < N; ++i) x[m][i] = md.c(m) * (i - 0.5 * (N - 1)) * 0.8 + 0.01 * gauss(rng);
    for (auto& v : x) std::sort(v.begin(), v.end());
    double logp = log_density_multitime(md, x);

    double scale = mc.proposal_scale;
    ChainSamples out;
    out.chain = chain;
    out.states.reserve(mc.samples_per_chain);
    long accepted = 0, proposed = 0, window_acc = 0, window_prop = 0;
    const int total = mc.burn_in + mc.samples_per_chain;
    for (int sweep = 0; sweep < total; ++sweep) {
        const bool burning = sweep < mc.burn_in;
        int sweep_acc = 0;
        for (int step = 0; step < dim; ++step) {
            int k = int(unif(rng) * dim);
            if (k == dim) k = dim - 1;
            int m = k / N, i = k % N;
            double old = x[m][i];
            double nv = old + scale * md.c(m) * gauss(rng);
            ++window_prop;
            // ordering is part of the state space; leaving it is a rejection
            bool inside = (i == 0 || nv > x[m][i - 1]) && (i == N - 1 || nv < x[m][i + 1]);
            if (inside) {
                x[m][i] = nv;
                double lp = log_density_multitime(md, x);
                if (std::log(unif(rng)) < lp - logp) {
                    logp = lp;
                    ++sweep_acc;
                    ++window_acc;
                } else {
                    x[m][i] = old;
                }
            } else {
                (void)unif(rng);
            }
            if (window_prop == 1000) {
                if (window_acc == 0)
                    throw domain_error("sampler: no proposal accepted in 1000 steps; check proposal_scale");
                window_acc = window_prop = 0;
            }
        }
        if (burning) {
            // adapt toward an acceptance rate of about 0.35
            double rate = double(sweep_acc) / dim;
            scale *= std::exp(0.05 * (rate - 0.35));
        } else {
            accepted += sweep_acc;
            proposed += dim;
            out.states.push_back(x);
        }
    }
    out.acceptance = proposed ? double(accepted) / proposed : 0.0;
    out.final_scale = scale;
    return out;
}

}  // namespace

std::vector<ChainSamples> sample_density(const FiniteNModel& md, const McConfig& mc) {
    mc.validate();
    std::vector<ChainSamples> out(mc.chains);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(mc.chains);
    for (int c = 0; c < mc.chains; ++c)
        pool.emplace_back([&, c] {
            try {
                out[c] = run_chain(md, mc, c);
            } catch (...) {
                errs[c] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> parts;
    for (auto& c : chains) {
        size_t h = c.size() / 2;
        parts.emplace_back(c.begin(), c.begin() + h);
        parts.emplace_back(c.begin() + h, c.begin() + 2 * h);
    }
    const double n = double(parts[0].size());
    const size_t J = parts.size();
    std::vector<double> means(J), vars(J);
    for (size_t j = 0; j < J; ++j) {
        double mu = std::accumulate(parts[j].begin(), parts[j].end(), 0.0) / n, s = 0;
        for (double v : parts[j]) s += (v - mu) * (v - mu);
        means[j] = mu;
        vars[j] = s / (n - 1);
    }
    double grand = std::accumulate(means.begin(), means.end(), 0.0) / J;
    double B = 0;
    for (double m : means) B += (m - grand) * (m - grand);
    B *= n / (J - 1);
    double W = std::accumulate(vars.begin(), vars.end(), 0.0) / J;
    if (W == 0) return B == 0 ? 1.0 : INFINITY;
    double var_plus = (n - 1) / n * W + B / n;
    return std::sqrt(var_plus / W);
}

EstimateWithError estimate_functional(const std::vector<ChainSamples>& chains,
                                      const std::function<double(const std::vector<std::vector<double>>&)>& f) {
    EstimateWithError e;
    std::vector<std::vector<double>> vals;
    for (auto& c : chains) {
        std::vector<double> v;
        v.reserve(c.states.size());
        for (auto& s : c.states) v.push_back(f(s));
        vals.push_back(std::move(v));
    }
    // batch means: 50 batches per chain
    const int nb = 50;
    std::vector<double> batch;
    double total = 0;
    size_t count = 0;
    for (auto& v : vals) {
        size_t len = v.size() / nb;
        for (int b = 0; b < nb && len > 0; ++b) {
            double s = 0;
            for (size_t i = b * len; i < (b + 1) * len; ++i) s += v[i];
            batch.push_back(s / len);
        }
        for (double x : v) total += x;
        count += v.size();
    }
    if (count == 0) throw domain_error("estimate: no samples");
    e.value = total / count;
    double mu = std::accumulate(batch.begin(), batch.end(), 0.0) / batch.size(), s2 = 0;
    for (double b : batch) s2 += (b - mu) * (b - mu);
    s2 /= (batch.size() - 1);
    e.std_error = std::sqrt(s2 / batch.size());
    double var = 0;
    for (auto& v : vals)
        for (double x : v) var += (x - e.value) * (x - e.value);
    var /= (count - 1);
    e.n_effective = e.std_error > 0 ? var / (e.std_error * e.std_error) : double(count);
    e.rhat = split_rhat(vals);
    return e;
}

EstimateWithError estimate_correlation(const std::vector<ChainSamples>& chains, const std::vector<Box>& window) {
    double vol = 1;
    for (auto& b : window) vol *= (b.hi - b.lo);
    long multi = 0, total = 0;
    auto f = [&](const std::vector<std::vector<double>>& s) {
        // product of counts = number of tuples of distinct particles when boxes are disjoint
        double prod = 1;
        bool many = false;
        for (auto& b : window) {
            int c = 0;
            for (double v : s[b.m]) c += (v >= b.lo && v < b.hi);
            many |= c > 1;
            prod *= c;
        }
        multi += many;
        ++total;
        return prod / vol;
    };
    EstimateWithError e = estimate_functional(chains, f);
    e.multi_occupancy = total ? double(multi) / total : 0.0;
    return e;
}

double box_average_correlation(const FiniteNModel& md, const std::vector<Box>& window, int nodes) {
    std::vector<double> gx, gw;
    gauss_legendre(nodes, gx, gw);
    const int d = int(window.size());
    std::vector<int> idx(d, 0);
    double acc = 0;
    while (true) {
        MultitimeRequest req{&md, std::vector<std::vector<double>>(md.n_times())};
        double w = 1;
        for (int j = 0; j < d; ++j) {
            const Box& b = window[j];
            double h = 0.5 * (b.hi - b.lo);
            req.configs[b.m].push_back(b.lo + h * (gx[idx[j]] + 1));
            w *= 0.5 * gw[idx[j]];
        }
        acc += w * correlation(req);
        int j = 0;
        while (j < d && ++idx[j] == nodes) idx[j++] = 0;
        if (j == d) break;
    }
    return acc;
}

}  // namespace ncbm
