#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace abcd {

// One CLI invocation. Every command writes report.json (and friends) under
// `out`; re-running with the same inputs and seed yields byte-identical
// files, and each report embeds the config hash, toolkit version, and seed.
struct RunConfig {
    std::string command;  // ingest|describe|first-stage|iv|placebo|decay|design-anchors|simulate|plot

    std::filesystem::path data;
    std::filesystem::path data2;       // decay: wave-2 file (else split `data` by wave)
    std::filesystem::path schema;      // column-mapping JSON; canonical layout assumed if empty
    std::filesystem::path sim_config;  // simulate
    std::filesystem::path pilot;       // design-anchors: pilot data for the curve rule
    std::filesystem::path out = ".";

    std::string belief_override;            // --belief: remap the belief column
    std::string outcome;                    // --outcome: one outcome (default: all)
    std::string coding = "binary";          // binary|dummies|continuous
    std::string transform = "identity";     // identity|log10p1 (belief + anchors)
    std::vector<std::string> transform_outcomes;  // outcomes to log10p1-transform
    double exclude_above = std::numeric_limits<double>::infinity();

    std::string bins = "5-14";          // decay lag bins, e.g. "5-9,10-14"
    int wave1 = 1;
    int wave2 = 2;

    std::string rule = "percentile";    // design-anchors: percentile|extrema
    std::string scale = "raw";          // anchor scale for curve fits: raw|log10p1
    double compare_delta = 0.0;         // variance ratio vs. an existing design's delta

    std::vector<std::string> experiments;  // placebo: name=belief_col:cond_col[:log10p1]

    std::string plot_kind = "kde";      // kde|smooth|effects
    double bandwidth = 0.0;             // 0 = automatic

    std::string wave_days = "0";        // simulate: comma-separated days per wave
    int replicates = 0;                 // simulate: Monte Carlo replicates (0 = none)
    int threads = 1;
    std::uint64_t seed = 0;             // 0 = keep the sim config's own seed
    bool svg = false;

    nlohmann::json to_json() const;
};

// Executes the pipeline; throws abcd::Error subclasses on failure.
void run(const RunConfig& config);

// CLI wrapper: catches errors and prints a machine-readable JSON error block
// to stderr. Returns the process exit status.
int run_cli(const RunConfig& config);

}  // namespace abcd
