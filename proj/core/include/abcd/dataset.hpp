#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace abcd {

enum class BeliefTransform { Identity, Log10Plus1 };

// Anchoring condition a participant was assigned to: either no anchor at all
// or a concrete anchor value in belief units.
struct AnchorCondition {
    enum class Kind { NoAnchor, Anchor };

    Kind kind = Kind::NoAnchor;
    double value = 0.0;  // meaningful only when kind == Anchor

    static AnchorCondition none() { return {Kind::NoAnchor, 0.0}; }
    static AnchorCondition anchor(double v);

    bool is_anchor() const { return kind == Kind::Anchor; }
    bool operator==(const AnchorCondition&) const = default;
};

struct ParticipantRecord {
    std::string id;
    AnchorCondition condition;
    double belief = 0.0;  // NaN marks a missing response
    std::map<std::string, double> outcomes;
    std::map<std::string, double> covariates;
    int wave = 1;
    std::optional<int> interview_day;  // days since epoch; required for decay analysis

    bool operator==(const ParticipantRecord&) const = default;
};

enum class OutcomeType { Continuous, Ordinal };

struct OutcomeSchema {
    OutcomeType type = OutcomeType::Continuous;
    int levels = 0;  // ordinal only

    bool operator==(const OutcomeSchema&) const = default;
};

struct DatasetSchema {
    std::map<std::string, OutcomeSchema> outcomes;
    std::vector<std::string> covariates;

    bool operator==(const DatasetSchema&) const = default;
};

struct Exclusion {
    std::string id;
    std::string reason;

    bool operator==(const Exclusion&) const = default;
};

// Immutable after construction: every operation returns a new dataset.
struct ExperimentDataset {
    std::vector<ParticipantRecord> records;
    BeliefTransform belief_transform = BeliefTransform::Identity;
    std::vector<Exclusion> exclusion_report;
    DatasetSchema schema;

    std::size_t size() const { return records.size(); }

    // Beliefs of records matching a predicate-free slice; NaNs are kept.
    std::vector<double> beliefs() const;
    std::vector<double> no_anchor_beliefs() const;

    // Distinct anchor values among Anchor-condition records, sorted ascending.
    std::vector<double> anchor_values() const;
};

// Maps CSV columns onto the record fields. Loaded from a JSON schema file
// with keys condition_col, belief_col, outcome_cols[], and optional id_col,
// wave_col, day_col, covariate_cols[]. Each outcome_cols entry is either a
// plain column name (continuous) or {"name":..., "type":"ordinal",
// "levels": k}.
struct ColumnMapping {
    std::string condition_col;
    std::string belief_col;
    std::vector<std::pair<std::string, OutcomeSchema>> outcome_cols;
    std::optional<std::string> id_col;
    std::optional<std::string> wave_col;
    std::optional<std::string> day_col;
    std::vector<std::string> covariate_cols;

    static ColumnMapping from_json(const nlohmann::json& j);
    static ColumnMapping from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    // Mapping for the canonical CSV layout produced by write_csv.
    static ColumnMapping canonical(const DatasetSchema& schema);
};

// One record per data row, row order preserved. Condition cells that are
// empty or the literal "none" (case-insensitive) become NoAnchor. Empty
// belief/outcome cells become NaN (missing); non-numeric cells are parse
// errors naming the row.
ExperimentDataset load_csv(const std::filesystem::path& path, const ColumnMapping& mapping);
ExperimentDataset load_csv_text(const std::string& text, const ColumnMapping& mapping);

// Canonical serialization: id, condition, belief, wave, day, then outcomes
// and covariates in schema order. load_csv of the output is a fixed point.
void write_csv(const ExperimentDataset& ds, const std::filesystem::path& path);
std::string write_csv_text(const ExperimentDataset& ds);

void write_exclusion_report(const ExperimentDataset& ds, const std::filesystem::path& path);

// Moves records with belief > threshold into the exclusion report.
ExperimentDataset apply_exclusions(const ExperimentDataset& ds, double belief_above_threshold);

// Log10Plus1 replaces belief by log10(1 + belief) and transforms anchor
// values identically; a second application re-transforms. Negative beliefs
// are a domain error under Log10Plus1.
ExperimentDataset transform_belief(const ExperimentDataset& ds, BeliefTransform t);

// Same transform applied to one outcome column (the analyses of donation
// outcomes run on a log scale, like the beliefs).
ExperimentDataset transform_outcome(const ExperimentDataset& ds, const std::string& outcome,
                                    BeliefTransform t);

double apply_transform_value(double v, BeliefTransform t);

struct Dichotomized {
    int cutoff = 0;
    std::vector<int> binary;  // 1 iff value > cutoff
};

// Splits ordinal levels at the level closest to the sample median (the
// largest observed level <= lower median, stepping down when that level is
// the scale maximum so both sides stay nonempty). All-identical input is a
// degenerate-scale error.
Dichotomized dichotomize_ordinal(const std::vector<int>& values);

}  // namespace abcd
