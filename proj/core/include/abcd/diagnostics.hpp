#pragma once

#include <string>
#include <utility>
#include <vector>

#include "abcd/dataset.hpp"
#include "abcd/iv.hpp"

namespace abcd {

// One co-administered experiment: the post-treatment belief plus the
// treatment dummy columns derived from its anchor conditions, aligned
// record-by-record across all experiments of the round.
struct PlaceboExperiment {
    std::string belief_name;
    std::vector<double> belief;  // NaN = missing response
    std::vector<std::pair<std::string, std::vector<double>>> treatments;
};

// Builds the dummy block for one dataset: a high-anchor dummy (low anchor as
// reference) plus a no-anchor dummy when that condition is present. Column
// names are prefixed with the experiment name.
PlaceboExperiment make_placebo_experiment(const ExperimentDataset& ds,
                                          const std::string& belief_name);

struct PlaceboCell {
    double coef = 0.0;
    double se = 0.0;
    double p = 1.0;
    bool is_placebo = false;   // treatment from a different experiment
    bool flagged = false;      // placebo cell with p < 0.05
};

// Table-4 layout: one multiple regression per belief, on ALL treatment
// dummies of the round simultaneously, never pairwise.
struct PlaceboMatrix {
    std::vector<std::string> belief_names;                   // one regression per entry
    std::vector<std::string> treatment_names;                // shared column order
    std::vector<std::vector<PlaceboCell>> cells;             // [belief][treatment]
    std::vector<double> constant;                            // per regression
    std::vector<double> constant_se;
    std::vector<long> n;                                     // per regression
    std::vector<double> adj_r2;
};

PlaceboMatrix placebo_matrix(const std::vector<PlaceboExperiment>& experiments);

struct LaggedEffect {
    int day_lo = 0;
    int day_hi = 0;
    double mean_lag = 0.0;
    double effect = 0.0;
    double se = 0.0;
    double f = 0.0;
    double p = 1.0;
    long n = 0;
};

struct DecayReport {
    AnchoringEffect instantaneous;
    std::vector<LaggedEffect> lagged;     // one per surviving bin
    LaggedEffect pooled;                  // all matched follow-ups in any bin
    double decay_ratio = 0.0;             // pooled effect / instantaneous effect
    std::vector<std::string> warnings;    // dropped bins etc.
};

// Matches wave-2 records to wave-1 records by id; the instrument is always
// the wave-1 anchor condition, the response is the wave-2 belief. Lag is
// interview_day difference in days. Participants without a follow-up are
// dropped listwise; no-anchor participants are excluded.
DecayReport decay_analysis(const ExperimentDataset& wave1, const ExperimentDataset& wave2,
                           const std::vector<std::pair<int, int>>& bins);

struct ManipulationCheck {
    AnchoringEffect effect;
    bool gate_passed = false;
    std::string verdict;
};

ManipulationCheck manipulation_check(const ExperimentDataset& ds);

}  // namespace abcd
