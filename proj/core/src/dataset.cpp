#include "abcd/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "abcd/csv.hpp"
#include "abcd/errors.hpp"

namespace abcd {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

double parse_double_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string cell = trim(raw);
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ParseError("row " + std::to_string(row) + ", column '" + col +
                         "': cannot parse '" + cell + "' as a number");
    }
    return v;
}

int parse_int_cell(const std::string& raw, std::size_t row, const std::string& col) {
    const std::string cell = trim(raw);
    int v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw ParseError("row " + std::to_string(row) + ", column '" + col +
                         "': cannot parse '" + cell + "' as an integer");
    }
    return v;
}

bool is_missing(const std::string& raw) { return trim(raw).empty(); }

}  // namespace

AnchorCondition AnchorCondition::anchor(double v) {
    if (!std::isfinite(v) || v < 0.0) {
        throw DomainError("anchor value must be finite and >= 0, got " + csv::format_double(v));
    }
    return {Kind::Anchor, v};
}

std::vector<double> ExperimentDataset::beliefs() const {
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.belief);
    return out;
}

std::vector<double> ExperimentDataset::no_anchor_beliefs() const {
    std::vector<double> out;
    for (const auto& r : records) {
        if (!r.condition.is_anchor() && std::isfinite(r.belief)) out.push_back(r.belief);
    }
    return out;
}

std::vector<double> ExperimentDataset::anchor_values() const {
    std::set<double> vals;
    for (const auto& r : records) {
        if (r.condition.is_anchor()) vals.insert(r.condition.value);
    }
    return {vals.begin(), vals.end()};
}

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
    ColumnMapping m;
    if (!j.contains("condition_col") || !j.contains("belief_col")) {
        throw SchemaError("schema file must define condition_col and belief_col");
    }
    m.condition_col = j.at("condition_col").get<std::string>();
    m.belief_col = j.at("belief_col").get<std::string>();
    for (const auto& entry : j.value("outcome_cols", nlohmann::json::array())) {
        if (entry.is_string()) {
            m.outcome_cols.emplace_back(entry.get<std::string>(), OutcomeSchema{});
        } else {
            OutcomeSchema os;
            const std::string type = entry.value("type", "continuous");
            if (type == "ordinal") {
                os.type = OutcomeType::Ordinal;
                os.levels = entry.value("levels", 0);
            } else if (type != "continuous") {
                throw SchemaError("unknown outcome type '" + type + "'");
            }
            m.outcome_cols.emplace_back(entry.at("name").get<std::string>(), os);
        }
    }
    if (j.contains("id_col")) m.id_col = j.at("id_col").get<std::string>();
    if (j.contains("wave_col")) m.wave_col = j.at("wave_col").get<std::string>();
    if (j.contains("day_col")) m.day_col = j.at("day_col").get<std::string>();
    for (const auto& c : j.value("covariate_cols", nlohmann::json::array())) {
        m.covariate_cols.push_back(c.get<std::string>());
    }
    return m;
}

ColumnMapping ColumnMapping::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open schema file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("invalid schema JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ColumnMapping::to_json() const {
    nlohmann::json j;
    j["condition_col"] = condition_col;
    j["belief_col"] = belief_col;
    auto outs = nlohmann::json::array();
    for (const auto& [name, os] : outcome_cols) {
        if (os.type == OutcomeType::Continuous) {
            outs.push_back(name);
        } else {
            outs.push_back({{"name", name}, {"type", "ordinal"}, {"levels", os.levels}});
        }
    }
    j["outcome_cols"] = outs;
    if (id_col) j["id_col"] = *id_col;
    if (wave_col) j["wave_col"] = *wave_col;
    if (day_col) j["day_col"] = *day_col;
    if (!covariate_cols.empty()) j["covariate_cols"] = covariate_cols;
    return j;
}

ColumnMapping ColumnMapping::canonical(const DatasetSchema& schema) {
    ColumnMapping m;
    m.condition_col = "condition";
    m.belief_col = "belief";
    m.id_col = "id";
    m.wave_col = "wave";
    m.day_col = "day";
    for (const auto& [name, os] : schema.outcomes) m.outcome_cols.emplace_back(name, os);
    m.covariate_cols = schema.covariates;
    return m;
}

namespace {

ExperimentDataset load_table(const csv::Table& table, const ColumnMapping& mapping) {
    const std::size_t cond_idx = table.require_column(mapping.condition_col);
    const std::size_t belief_idx = table.require_column(mapping.belief_col);
    std::vector<std::pair<std::string, std::size_t>> outcome_idx;
    for (const auto& [name, os] : mapping.outcome_cols) {
        outcome_idx.emplace_back(name, table.require_column(name));
        (void)os;
    }
    std::vector<std::pair<std::string, std::size_t>> covariate_idx;
    for (const auto& name : mapping.covariate_cols) {
        covariate_idx.emplace_back(name, table.require_column(name));
    }
    std::optional<std::size_t> id_idx, wave_idx, day_idx;
    if (mapping.id_col) id_idx = table.require_column(*mapping.id_col);
    if (mapping.wave_col) wave_idx = table.column(*mapping.wave_col);
    if (mapping.day_col) day_idx = table.column(*mapping.day_col);

    ExperimentDataset ds;
    for (const auto& [name, os] : mapping.outcome_cols) ds.schema.outcomes[name] = os;
    ds.schema.covariates = mapping.covariate_cols;

    ds.records.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t rownum = i + 1;
        ParticipantRecord rec;
        rec.id = id_idx ? trim(row[*id_idx]) : std::to_string(rownum);

        const std::string cond = trim(row[cond_idx]);
        if (cond.empty() || lower(cond) == "none") {
            rec.condition = AnchorCondition::none();
        } else {
            rec.condition =
                AnchorCondition::anchor(parse_double_cell(cond, rownum, mapping.condition_col));
        }

        rec.belief = is_missing(row[belief_idx])
                         ? std::numeric_limits<double>::quiet_NaN()
                         : parse_double_cell(row[belief_idx], rownum, mapping.belief_col);
        if (std::isinf(rec.belief)) {
            throw ParseError("row " + std::to_string(rownum) + ": non-finite belief");
        }

        for (const auto& [name, idx] : outcome_idx) {
            rec.outcomes[name] = is_missing(row[idx])
                                     ? std::numeric_limits<double>::quiet_NaN()
                                     : parse_double_cell(row[idx], rownum, name);
        }
        for (const auto& [name, idx] : covariate_idx) {
            if (!is_missing(row[idx])) {
                rec.covariates[name] = parse_double_cell(row[idx], rownum, name);
            }
        }
        if (wave_idx && !is_missing(row[*wave_idx])) {
            rec.wave = parse_int_cell(row[*wave_idx], rownum, *mapping.wave_col);
            if (rec.wave < 1) {
                throw ParseError("row " + std::to_string(rownum) + ": wave must be >= 1");
            }
        }
        if (day_idx && !is_missing(row[*day_idx])) {
            rec.interview_day = parse_int_cell(row[*day_idx], rownum, *mapping.day_col);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace

ExperimentDataset load_csv(const std::filesystem::path& path, const ColumnMapping& mapping) {
    return load_table(csv::read_file(path), mapping);
}

ExperimentDataset load_csv_text(const std::string& text, const ColumnMapping& mapping) {
    return load_table(csv::parse(text), mapping);
}

std::string write_csv_text(const ExperimentDataset& ds) {
    csv::Table table;
    table.header = {"id", "condition", "belief", "wave", "day"};
    for (const auto& [name, os] : ds.schema.outcomes) {
        table.header.push_back(name);
        (void)os;
    }
    for (const auto& name : ds.schema.covariates) table.header.push_back(name);

    auto num_cell = [](double v) { return std::isnan(v) ? std::string{} : csv::format_double(v); };

    for (const auto& rec : ds.records) {
        std::vector<std::string> row;
        row.push_back(rec.id);
        row.push_back(rec.condition.is_anchor() ? csv::format_double(rec.condition.value)
                                                : std::string{"none"});
        row.push_back(num_cell(rec.belief));
        row.push_back(std::to_string(rec.wave));
        row.push_back(rec.interview_day ? std::to_string(*rec.interview_day) : std::string{});
        for (const auto& [name, os] : ds.schema.outcomes) {
            auto it = rec.outcomes.find(name);
            row.push_back(it == rec.outcomes.end() ? std::string{} : num_cell(it->second));
            (void)os;
        }
        for (const auto& name : ds.schema.covariates) {
            auto it = rec.covariates.find(name);
            row.push_back(it == rec.covariates.end() ? std::string{} : num_cell(it->second));
        }
        table.rows.push_back(std::move(row));
    }
    return csv::to_string(table);
}

void write_csv(const ExperimentDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write file: " + path.string());
    out << write_csv_text(ds);
}

void write_exclusion_report(const ExperimentDataset& ds, const std::filesystem::path& path) {
    csv::Table table;
    table.header = {"id", "reason"};
    for (const auto& e : ds.exclusion_report) table.rows.push_back({e.id, e.reason});
    csv::write_file(path, table);
}

ExperimentDataset apply_exclusions(const ExperimentDataset& ds, double threshold) {
    if (std::isnan(threshold)) throw DomainError("exclusion threshold must not be NaN");
    ExperimentDataset out;
    out.belief_transform = ds.belief_transform;
    out.schema = ds.schema;
    out.exclusion_report = ds.exclusion_report;
    for (const auto& rec : ds.records) {
        if (std::isfinite(rec.belief) && rec.belief > threshold) {
            out.exclusion_report.push_back(
                {rec.id, "belief " + csv::format_double(rec.belief) + " > " +
                             csv::format_double(threshold)});
        } else {
            out.records.push_back(rec);
        }
    }
    return out;
}

double apply_transform_value(double v, BeliefTransform t) {
    if (t == BeliefTransform::Identity) return v;
    if (std::isnan(v)) return v;
    if (v < 0.0) throw DomainError("log10(1+x) transform undefined for negative value " +
                                   csv::format_double(v));
    return std::log10(1.0 + v);
}

ExperimentDataset transform_belief(const ExperimentDataset& ds, BeliefTransform t) {
    ExperimentDataset out = ds;
    out.belief_transform = t;
    if (t == BeliefTransform::Identity) return out;
    for (auto& rec : out.records) {
        rec.belief = apply_transform_value(rec.belief, t);
        if (rec.condition.is_anchor()) {
            rec.condition = AnchorCondition::anchor(apply_transform_value(rec.condition.value, t));
        }
    }
    return out;
}

ExperimentDataset transform_outcome(const ExperimentDataset& ds, const std::string& outcome,
                                    BeliefTransform t) {
    if (ds.schema.outcomes.find(outcome) == ds.schema.outcomes.end()) {
        throw SchemaError("unknown outcome '" + outcome + "'");
    }
    ExperimentDataset out = ds;
    if (t == BeliefTransform::Identity) return out;
    for (auto& rec : out.records) {
        auto it = rec.outcomes.find(outcome);
        if (it != rec.outcomes.end()) it->second = apply_transform_value(it->second, t);
    }
    return out;
}

Dichotomized dichotomize_ordinal(const std::vector<int>& values) {
    if (values.empty()) throw InsufficientDataError("dichotomize_ordinal needs at least one value");
    std::vector<int> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        throw DegenerateInputError("all ordinal values identical; scale cannot be dichotomized");
    }
    // Lower sample median; the cutoff must leave the '>' group nonempty, so
    // step down to the next observed level when the median is the maximum.
    const int max_level = sorted.back();
    int cutoff = sorted[(sorted.size() - 1) / 2];
    if (cutoff == max_level) {
        auto it = std::lower_bound(sorted.begin(), sorted.end(), max_level);
        cutoff = *std::prev(it);
    }
    Dichotomized d;
    d.cutoff = cutoff;
    d.binary.reserve(values.size());
    for (int v : values) d.binary.push_back(v > cutoff ? 1 : 0);
    return d;
}

}  // namespace abcd
