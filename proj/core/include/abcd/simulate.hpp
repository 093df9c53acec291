#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "abcd/dataset.hpp"

namespace abcd {

// Data-generating process: a latent confounder C feeds both the baseline
// belief and the outcome, the randomized anchor pulls the belief toward
// itself with strength lambda inside a plausibility window, the pull decays
// exponentially over days, and theta injects a direct anchor->outcome path
// (an exclusion-restriction violation) for stress testing.
struct SimConfig {
    int n = 1000;
    double beta0 = 0.0;
    double beta1 = 0.5;        // causal effect of the belief on the outcome
    double gamma = 0.0;        // confounder -> outcome
    double delta = 0.0;        // confounder -> baseline belief
    double mu_belief = 50.0;   // baseline belief mean
    double lambda = 0.6;       // anchoring pull strength in [0,1]
    double window_lo = 0.0;    // anchor plausibility window, belief units
    double window_hi = 100.0;
    double tau = 7.0;          // decay time constant, days
    double theta = 0.0;        // direct high-anchor -> outcome effect
    double sigma_belief = 1.0;
    double sigma_outcome = 1.0;
    double no_anchor_share = 0.0;  // fraction assigned to a no-anchor condition
    std::vector<double> anchors = {10.0, 80.0};  // a (low, high) pair or a grid
    std::uint64_t seed = 1;

    void validate() const;
    static SimConfig from_json(const nlohmann::json& j);
    static SimConfig from_file(const std::string& path);
    nlohmann::json to_json() const;
};

// Deterministic anchoring response: belief = b0 + lambda * plaus(anchor) *
// (anchor - b0). The plausibility weight is 1 inside the window and tapers
// linearly to 0 over a margin of (window_hi - window_lo)/2 beyond each edge.
double anchor_response(double b0, double anchor, double lambda, double window_lo,
                       double window_hi);

// Pull remaining after t days: pull * exp(-t / tau).
double decay_apply(double pull, double t_days, double tau);

// One record per participant per wave. wave_days[0] is the instantaneous
// wave; fractional days are honoured by the decay (interview_day stores the
// rounded value). The latent confounder is kept in covariates["confounder"]
// so oracle checks can compute the analytic OLS bias in-sample.
ExperimentDataset generate_population(const SimConfig& cfg,
                                      const std::vector<double>& wave_days = {0.0});

enum class Estimator { OLS, IV, Wald };

struct McEstimatorSummary {
    double mean_estimate = 0.0;
    double empirical_sd = 0.0;
    double mean_reported_se = 0.0;
    double bias = 0.0;
    double coverage = 0.0;  // share of 95% CIs containing beta1
    std::vector<double> estimates;  // per surviving replicate
};

struct McSummary {
    std::map<Estimator, McEstimatorSummary> per_estimator;
    int replicates = 0;
    double analytic_ols_bias = 0.0;  // mean of gamma*Cov(C,belief)/Var(belief)
    int failed_replicates = 0;       // no-first-stage errors, recorded not fatal
    bool config_warning = false;     // > 5% failed replicates
};

// Independent replicates with substream seeds derived from (seed, replicate);
// results are identical for a given master seed regardless of thread count.
McSummary monte_carlo(const SimConfig& cfg, int replicates,
                      const std::vector<Estimator>& estimators, int threads = 1);

std::string estimator_name(Estimator e);

}  // namespace abcd
