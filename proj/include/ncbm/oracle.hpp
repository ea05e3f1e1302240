#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ncbm/finite_model.hpp"

namespace ncbm {

struct OracleOptions {
    int max_free_dims = 3;   // cost guard
    double rel_tol = 1e-9;
};

// Direct quadrature of the correlation integral: the free coordinates are
// integrated over R and divided by the factorials.
double correlation_quadrature(const MultitimeRequest& req, const OracleOptions& opt = {});

struct McConfig {
    std::uint64_t seed = 20240601;
    int chains = 4;
    int burn_in = 2000;
    int samples_per_chain = 50000;
    double proposal_scale = 0.3;
    double bin_width = 0.1;

    void validate() const;
};

struct EstimateWithError {
    double value = 0;
    double std_error = 0;
    double n_effective = 0;
    double rhat = 1;
    double multi_occupancy = 0;  // fraction of samples with >1 particle in some box
};

// One sample is a full sweep; coordinates stored per time, ordered.
struct ChainSamples {
    int chain = 0;
    std::vector<std::vector<std::vector<double>>> states;  // [sample][time][i]
    double acceptance = 0;
    double final_scale = 0;
};

std::vector<ChainSamples> sample_density(const FiniteNModel& md, const McConfig& mc);

struct Box {
    int m = 0;
    double lo = 0, hi = 0;
};

// Box-count estimator of the correlation averaged over the boxes.
EstimateWithError estimate_correlation(const std::vector<ChainSamples>& chains, const std::vector<Box>& window);

// Any scalar functional of the state, same error machinery.
EstimateWithError estimate_functional(
    const std::vector<ChainSamples>& chains,
    const std::function<double(const std::vector<std::vector<double>>&)>& f);

// Pfaffian correlation averaged over the same boxes (Gauss rule per box).
double box_average_correlation(const FiniteNModel& md, const std::vector<Box>& window, int nodes = 4);

double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace ncbm
