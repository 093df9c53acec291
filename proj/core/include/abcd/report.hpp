#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "abcd/diagnostics.hpp"
#include "abcd/iv.hpp"
#include "abcd/regression.hpp"
#include "abcd/simulate.hpp"
#include "abcd/smoothing.hpp"

namespace abcd::report {

nlohmann::json to_json(const RegressionFit& fit);
nlohmann::json to_json(const IvFit& fit);
nlohmann::json to_json(const AnchoringEffect& eff);
nlohmann::json to_json(const PlaceboMatrix& matrix);
nlohmann::json to_json(const DecayReport& decay);
nlohmann::json to_json(const McSummary& summary);

// Table 2/3-style block for one outcome: OLS row, IV row (absent when the
// weak-instrument gate failed), anchoring effect, first-stage F, n, outcome
// mean/SD.
struct ResultsTable {
    std::string outcome;
    RegressionFit ols;
    bool iv_calculated = false;
    IvFit iv;                         // valid only when iv_calculated
    AnchoringEffect anchoring;
    double binary_first_stage_f = 0;  // from the anchoring effect (t^2)
    double coded_first_stage_f = 0;   // from the requested instrument coding
    long observations = 0;
    double outcome_mean = 0;
    double outcome_sd = 0;
};
nlohmann::json to_json(const ResultsTable& table);
std::string to_text(const std::vector<ResultsTable>& tables, const std::string& belief_label);

std::string to_text(const PlaceboMatrix& matrix);
std::string to_text(const DecayReport& decay);

// Significance stars matching the papers' convention (* 5%, ** 1%, *** 0.1%).
std::string stars(double p);

std::string curve_to_csv(const CurveSeries& series);
std::string curve_to_svg(const CurveSeries& series, const std::string& title);

// FNV-1a over the canonical (sorted-key) dump; embedded in every report so
// outputs are traceable to the exact configuration.
std::string config_hash(const nlohmann::json& config);

// Validates a document against the subset of JSON Schema used by
// data/schemas/report.schema.json (type, required, properties, items, enum).
// Returns human-readable violations; empty means valid.
std::vector<std::string> validate_against_schema(const nlohmann::json& doc,
                                                 const nlohmann::json& schema);

}  // namespace abcd::report
