#include "abcd/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>

#include <nlohmann/json.hpp>

#include "abcd/csv.hpp"
#include "abcd/design.hpp"
#include "abcd/diagnostics.hpp"
#include "abcd/errors.hpp"
#include "abcd/report.hpp"
#include "abcd/smoothing.hpp"
#include "abcd/version.hpp"

namespace abcd {

namespace {

nlohmann::json path_or_null(const std::filesystem::path& p) {
    return p.empty() ? nlohmann::json(nullptr) : nlohmann::json(p.string());
}

}  // namespace

nlohmann::json RunConfig::to_json() const {
    return nlohmann::json{{"command", command},
                          {"data", path_or_null(data)},
                          {"data2", path_or_null(data2)},
                          {"schema", path_or_null(schema)},
                          {"sim_config", path_or_null(sim_config)},
                          {"pilot", path_or_null(pilot)},
                          {"out", path_or_null(out)},
                          {"belief", belief_override},
                          {"outcome", outcome},
                          {"coding", coding},
                          {"transform", transform},
                          {"transform_outcomes", transform_outcomes},
                          {"exclude_above", std::isfinite(exclude_above)
                                                ? nlohmann::json(exclude_above)
                                                : nlohmann::json(nullptr)},
                          {"bins", bins},
                          {"wave1", wave1},
                          {"wave2", wave2},
                          {"rule", rule},
                          {"scale", scale},
                          {"compare_delta", compare_delta},
                          {"experiments", experiments},
                          {"plot_kind", plot_kind},
                          {"bandwidth", bandwidth},
                          {"wave_days", wave_days},
                          {"replicates", replicates},
                          {"threads", threads},
                          {"seed", seed},
                          {"svg", svg}};
}

namespace {

BeliefTransform parse_transform(const std::string& name) {
    if (name == "identity") return BeliefTransform::Identity;
    if (name == "log10p1") return BeliefTransform::Log10Plus1;
    throw DomainError("unknown transform '" + name + "' (expected identity|log10p1)");
}

AnchorScale parse_scale(const std::string& name) {
    if (name == "raw") return AnchorScale::Raw;
    if (name == "log10p1") return AnchorScale::Log10Plus1;
    throw DomainError("unknown anchor scale '" + name + "'");
}

InstrumentCoding parse_coding(const std::string& name) {
    if (name == "binary") return InstrumentCoding::binary();
    if (name == "dummies") return InstrumentCoding::dummies();
    if (name == "continuous") return InstrumentCoding::continuous();
    throw DomainError("unknown coding '" + name + "' (expected binary|dummies|continuous)");
}

std::vector<std::pair<int, int>> parse_bins(const std::string& spec) {
    std::vector<std::pair<int, int>> bins;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ',')) {
        const auto dash = token.find('-');
        if (dash == std::string::npos) {
            const int d = std::stoi(token);
            bins.emplace_back(d, d);
        } else {
            bins.emplace_back(std::stoi(token.substr(0, dash)),
                              std::stoi(token.substr(dash + 1)));
        }
    }
    if (bins.empty()) throw DomainError("no lag bins given");
    return bins;
}

std::vector<double> parse_days(const std::string& spec) {
    std::vector<double> days;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ',')) days.push_back(std::stod(token));
    if (days.empty()) throw DomainError("no wave days given");
    return days;
}

// Canonical layout fallback: id/condition/belief/wave/day are structural,
// "confounder" is the simulator's covariate, everything else is a
// continuous outcome. Real data should come with a --schema file.
ColumnMapping autodetect_mapping(const std::filesystem::path& path) {
    const csv::Table table = csv::read_file(path);
    DatasetSchema schema;
    for (const auto& col : table.header) {
        if (col == "id" || col == "condition" || col == "belief" || col == "wave" ||
            col == "day") {
            continue;
        }
        if (col == "confounder") {
            schema.covariates.push_back(col);
        } else {
            schema.outcomes[col] = OutcomeSchema{};
        }
    }
    return ColumnMapping::canonical(schema);
}

ExperimentDataset load_input(const RunConfig& config, const std::filesystem::path& path,
                             std::vector<std::string>& warnings) {
    ColumnMapping mapping = config.schema.empty() ? autodetect_mapping(path)
                                                  : ColumnMapping::from_file(config.schema);
    if (!config.belief_override.empty()) mapping.belief_col = config.belief_override;

    ExperimentDataset ds = load_csv(path, mapping);
    if (std::isfinite(config.exclude_above)) {
        const std::size_t before = ds.exclusion_report.size();
        ds = apply_exclusions(ds, config.exclude_above);
        warnings.push_back(std::to_string(ds.exclusion_report.size() - before) +
                           " records excluded with belief > " +
                           csv::format_double(config.exclude_above));
    }
    const BeliefTransform t = parse_transform(config.transform);
    if (t != BeliefTransform::Identity) ds = transform_belief(ds, t);
    for (const auto& outcome : config.transform_outcomes) {
        ds = transform_outcome(ds, outcome, BeliefTransform::Log10Plus1);
    }
    return ds;
}

struct ReportWriter {
    const RunConfig& config;
    std::vector<std::string> warnings;

    void write(nlohmann::json results) const {
        std::filesystem::create_directories(config.out);
        nlohmann::json doc{{"command", config.command},
                           {"version", kVersion},
                           {"config_hash", report::config_hash(config.to_json())},
                           {"seed", config.seed},
                           {"warnings", warnings},
                           {"results", std::move(results)}};
        std::ofstream out(config.out / "report.json", std::ios::binary);
        if (!out) throw Error("cannot write report.json under " + config.out.string());
        out << doc.dump(2) << "\n";
    }

    void write_text(const std::string& name, const std::string& text) const {
        std::filesystem::create_directories(config.out);
        std::ofstream out(config.out / name, std::ios::binary);
        if (!out) throw Error("cannot write " + name);
        out << text;
    }

    void write_curve(const std::string& stem, const CurveSeries& series,
                     const std::string& title) const {
        std::filesystem::create_directories(config.out / "curves");
        std::ofstream csv_out(config.out / "curves" / (stem + ".csv"), std::ios::binary);
        csv_out << report::curve_to_csv(series);
        if (config.svg) {
            std::filesystem::create_directories(config.out / "figures");
            std::ofstream svg_out(config.out / "figures" / (stem + ".svg"), std::ios::binary);
            svg_out << report::curve_to_svg(series, title);
        }
    }
};

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.size() < 2) return std::nan("");
    const double m = mean_of(v);
    double ss = 0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

void cmd_ingest(const RunConfig& config) {
    ReportWriter w{config, {}};
    const ExperimentDataset ds = load_input(config, config.data, w.warnings);
    std::filesystem::create_directories(config.out);
    write_csv(ds, config.out / "normalized.csv");
    write_exclusion_report(ds, config.out / "exclusions.csv");

    auto outcome_names = nlohmann::json::array();
    for (const auto& [name, os] : ds.schema.outcomes) {
        outcome_names.push_back(name);
        (void)os;
    }
    w.write({{"records", ds.records.size()},
             {"excluded", ds.exclusion_report.size()},
             {"belief_transform",
              ds.belief_transform == BeliefTransform::Log10Plus1 ? "log10p1" : "identity"},
             {"outcomes", outcome_names},
             {"files", {"normalized.csv", "exclusions.csv"}}});
}

void cmd_describe(const RunConfig& config) {
    ReportWriter w{config, {}};
    const ExperimentDataset ds = load_input(config, config.data, w.warnings);

    auto group_stats = nlohmann::json::array();
    auto add_group = [&](const std::string& label, const std::vector<double>& beliefs) {
        if (beliefs.empty()) return;
        group_stats.push_back({{"condition", label},
                               {"n", beliefs.size()},
                               {"mean_belief", mean_of(beliefs)},
                               {"sd_belief", sd_of(beliefs)}});
    };
    add_group("none", ds.no_anchor_beliefs());
    for (double a : ds.anchor_values()) {
        std::vector<double> beliefs;
        for (const auto& rec : ds.records) {
            if (rec.condition.is_anchor() && rec.condition.value == a &&
                std::isfinite(rec.belief)) {
                beliefs.push_back(rec.belief);
            }
        }
        add_group("anchor=" + csv::format_double(a), beliefs);
    }

    nlohmann::json outcomes = nlohmann::json::object();
    for (const auto& [name, os] : ds.schema.outcomes) {
        std::vector<double> vals;
        for (const auto& rec : ds.records) {
            auto it = rec.outcomes.find(name);
            if (it != rec.outcomes.end() && std::isfinite(it->second)) vals.push_back(it->second);
        }
        outcomes[name] = {{"n", vals.size()}, {"mean", mean_of(vals)}, {"sd", sd_of(vals)}};
        (void)os;
    }
    w.write({{"records", ds.records.size()},
             {"conditions", group_stats},
             {"outcomes", outcomes}});
}

void cmd_first_stage(const RunConfig& config) {
    ReportWriter w{config, {}};
    const ExperimentDataset ds = load_input(config, config.data, w.warnings);
    const ManipulationCheck check = manipulation_check(ds);
    w.write({{"anchoring_effect", report::to_json(check.effect)},
             {"gate_passed", check.gate_passed},
             {"verdict", check.verdict}});
    w.write_text("tables.txt", check.verdict + "\n");
}

void cmd_iv(const RunConfig& config) {
    ReportWriter w{config, {}};
    const ExperimentDataset ds = load_input(config, config.data, w.warnings);

    std::vector<std::string> outcomes;
    if (!config.outcome.empty()) {
        outcomes.push_back(config.outcome);
    } else {
        for (const auto& [name, os] : ds.schema.outcomes) {
            outcomes.push_back(name);
            (void)os;
        }
    }
    if (outcomes.empty()) throw SchemaError("no outcomes to analyze");

    std::vector<report::ResultsTable> tables;
    for (const auto& outcome : outcomes) {
        report::ResultsTable table;
        table.outcome = outcome;

        std::vector<double> beliefs, ys;
        for (const auto& rec : ds.records) {
            auto it = rec.outcomes.find(outcome);
            if (it == rec.outcomes.end() || !std::isfinite(it->second) ||
                !std::isfinite(rec.belief)) {
                continue;
            }
            beliefs.push_back(rec.belief);
            ys.push_back(it->second);
        }
        const Eigen::Index n = static_cast<Eigen::Index>(beliefs.size());
        DesignMatrix X = DesignMatrix::with_intercept(n);
        X.add("belief", beliefs);
        table.ols = ols_fit(X, Eigen::Map<const Eigen::VectorXd>(ys.data(), n));
        table.observations = table.ols.n;
        table.outcome_mean = mean_of(ys);
        table.outcome_sd = sd_of(ys);

        try {
            table.anchoring = anchoring_effect(ds);
            table.binary_first_stage_f = table.anchoring.f;
        } catch (const Error& e) {
            w.warnings.push_back("anchoring effect not computed for '" + outcome +
                                 "': " + e.what());
        }

        try {
            const IvFit iv = two_sls(ds, outcome, parse_coding(config.coding));
            table.coded_first_stage_f = iv.first_stage_f;
            if (iv.gate_passed) {
                table.iv = iv;
                table.iv_calculated = true;
            } else {
                w.warnings.push_back("outcome '" + outcome +
                                     "': first-stage F = " + csv::format_double(iv.first_stage_f) +
                                     " failed the F > 10 gate; IV estimates not calculated");
            }
        } catch (const NoFirstStageError& e) {
            w.warnings.push_back("outcome '" + outcome + "': " + e.what());
        }
        tables.push_back(std::move(table));
    }

    auto results = nlohmann::json::array();
    for (const auto& t : tables) results.push_back(report::to_json(t));
    w.write({{"outcomes", results}});
    w.write_text("tables.txt", report::to_text(tables, "belief"));
}

void cmd_placebo(const RunConfig& config) {
    if (config.experiments.size() < 2) {
        throw DomainError("placebo needs >= 2 --experiment name=belief_col:cond_col specs");
    }
    ReportWriter w{config, {}};

    std::vector<PlaceboExperiment> experiments;
    for (const auto& spec : config.experiments) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw DomainError("bad experiment spec '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        std::string rest = spec.substr(eq + 1);
        std::vector<std::string> parts;
        std::istringstream in(rest);
        std::string token;
        while (std::getline(in, token, ':')) parts.push_back(token);
        if (parts.size() < 2) {
            throw DomainError("experiment spec '" + spec + "' needs belief_col:cond_col");
        }
        ColumnMapping mapping;
        mapping.belief_col = parts[0];
        mapping.condition_col = parts[1];
        ExperimentDataset ds = load_csv(config.data, mapping);
        if (parts.size() > 2 && parts[2] == "log10p1") {
            ds = transform_belief(ds, BeliefTransform::Log10Plus1);
        }
        experiments.push_back(make_placebo_experiment(ds, name));
    }

    const PlaceboMatrix matrix = placebo_matrix(experiments);
    long flagged = 0;
    for (const auto& row : matrix.cells) {
        for (const auto& cell : row) flagged += cell.flagged ? 1 : 0;
    }
    if (flagged > 0) {
        w.warnings.push_back(std::to_string(flagged) +
                             " placebo cell(s) significant at p < 0.05");
    }
    w.write({{"placebo_matrix", report::to_json(matrix)}, {"flagged_cells", flagged}});
    w.write_text("tables.txt", report::to_text(matrix));
}

void cmd_decay(const RunConfig& config) {
    ReportWriter w{config, {}};
    ExperimentDataset wave1_ds, wave2_ds;
    if (!config.data2.empty()) {
        wave1_ds = load_input(config, config.data, w.warnings);
        wave2_ds = load_input(config, config.data2, w.warnings);
    } else {
        const ExperimentDataset all = load_input(config, config.data, w.warnings);
        wave1_ds.schema = wave2_ds.schema = all.schema;
        wave1_ds.belief_transform = wave2_ds.belief_transform = all.belief_transform;
        for (const auto& rec : all.records) {
            if (rec.wave == config.wave1) wave1_ds.records.push_back(rec);
            if (rec.wave == config.wave2) wave2_ds.records.push_back(rec);
        }
    }

    const DecayReport decay = decay_analysis(wave1_ds, wave2_ds, parse_bins(config.bins));
    for (const auto& warning : decay.warnings) w.warnings.push_back(warning);

    CurveSeries bars;
    bars.kind = CurveSeries::Kind::EffectBar;
    bars.x.push_back(0.0);
    bars.y.push_back(decay.instantaneous.effect);
    bars.ci_lo.push_back(decay.instantaneous.effect - 1.96 * decay.instantaneous.se);
    bars.ci_hi.push_back(decay.instantaneous.effect + 1.96 * decay.instantaneous.se);
    for (const auto& l : decay.lagged) {
        bars.x.push_back(l.mean_lag);
        bars.y.push_back(l.effect);
        bars.ci_lo.push_back(l.effect - 1.96 * l.se);
        bars.ci_hi.push_back(l.effect + 1.96 * l.se);
    }
    w.write_curve("decay_effects", bars, "Anchoring effects by lag");

    w.write({{"decay", report::to_json(decay)}});
    w.write_text("tables.txt", report::to_text(decay));
}

void cmd_design_anchors(const RunConfig& config) {
    ReportWriter w{config, {}};
    const AnchorScale scale = parse_scale(config.scale);

    std::vector<double> baseline;
    if (!config.data.empty()) {
        const ExperimentDataset ds = load_input(config, config.data, w.warnings);
        baseline = ds.no_anchor_beliefs();
        if (baseline.empty()) {
            w.warnings.push_back("no no-anchor condition found; using all beliefs as baseline");
            for (double b : ds.beliefs()) {
                if (std::isfinite(b)) baseline.push_back(b);
            }
        }
    }

    AnchorPlan plan;
    if (config.rule == "percentile") {
        plan = recommend_anchors(baseline, AnchorRule::PercentileRule);
    } else if (config.rule == "extrema") {
        const std::filesystem::path pilot_path = config.pilot.empty() ? config.data : config.pilot;
        if (pilot_path.empty()) throw DomainError("extrema rule needs --pilot data");
        std::vector<std::string> pilot_warnings;
        RunConfig pilot_cfg = config;
        pilot_cfg.transform = "identity";  // the curve fit applies its own anchor scale
        const ExperimentDataset pilot = load_input(pilot_cfg, pilot_path, pilot_warnings);
        plan = recommend_anchors(baseline, AnchorRule::CurveExtrema, &pilot, scale);
    } else {
        throw DomainError("unknown rule '" + config.rule + "' (expected percentile|extrema)");
    }

    nlohmann::json results{{"rule", config.rule},
                           {"low", plan.low},
                           {"high", plan.high}};
    if (plan.predicted_beliefs) {
        results["predicted_beliefs"] = {plan.predicted_beliefs->first,
                                        plan.predicted_beliefs->second};
    }
    if (plan.predicted_delta) results["predicted_delta"] = *plan.predicted_delta;
    if (plan.percentiles) {
        results["percentiles"] = {plan.percentiles->first, plan.percentiles->second};
    }
    if (config.compare_delta > 0.0 && plan.predicted_delta && *plan.predicted_delta > 0.0) {
        results["variance_ratio_vs_compare"] =
            design_variance_ratio(config.compare_delta, *plan.predicted_delta);
    }
    w.write(results);
}

void cmd_simulate(const RunConfig& config) {
    ReportWriter w{config, {}};
    SimConfig sim = config.sim_config.empty() ? SimConfig{}
                                              : SimConfig::from_file(config.sim_config.string());
    if (config.seed != 0) sim.seed = config.seed;

    const std::vector<double> days = parse_days(config.wave_days);
    const ExperimentDataset ds = generate_population(sim, days);
    std::filesystem::create_directories(config.out);
    write_csv(ds, config.out / "dataset.csv");

    nlohmann::json results{{"sim_config", sim.to_json()},
                           {"records", ds.records.size()},
                           {"files", {"dataset.csv"}}};

    if (config.replicates > 0) {
        const McSummary mc = monte_carlo(
            sim, config.replicates, {Estimator::OLS, Estimator::IV, Estimator::Wald},
            config.threads);
        if (mc.config_warning) {
            w.warnings.push_back("more than 5% of replicates had no usable first stage");
        }
        results["monte_carlo"] = report::to_json(mc);
        std::ofstream mc_out(config.out / "mc_summary.json", std::ios::binary);
        mc_out << report::to_json(mc).dump(2) << "\n";
        results["files"].push_back("mc_summary.json");
    }
    w.write(results);
}

void cmd_plot(const RunConfig& config) {
    ReportWriter w{config, {}};
    auto files = nlohmann::json::array();

    if (config.plot_kind == "kde") {
        const ExperimentDataset ds = load_input(config, config.data, w.warnings);
        auto emit = [&](const std::string& label, const std::vector<double>& beliefs) {
            if (beliefs.size() < 2) return;
            w.write_curve("kde_" + label, kde(beliefs, config.bandwidth),
                          "Belief density, " + label);
            files.push_back("curves/kde_" + label + ".csv");
        };
        emit("none", ds.no_anchor_beliefs());
        const std::vector<double> anchors = ds.anchor_values();
        for (std::size_t i = 0; i < anchors.size(); ++i) {
            std::vector<double> beliefs;
            for (const auto& rec : ds.records) {
                if (rec.condition.is_anchor() && rec.condition.value == anchors[i] &&
                    std::isfinite(rec.belief)) {
                    beliefs.push_back(rec.belief);
                }
            }
            std::string label = "anchor_" + csv::format_double(anchors[i]);
            if (anchors.size() == 2) label = i == 0 ? "low" : "high";
            emit(label, beliefs);
        }
    } else if (config.plot_kind == "smooth") {
        const ExperimentDataset ds = load_input(config, config.data, w.warnings);
        const AnchorScale scale = parse_scale(config.scale);
        std::vector<double> xs, ys;
        for (const auto& rec : ds.records) {
            if (!rec.condition.is_anchor() || !std::isfinite(rec.belief)) continue;
            xs.push_back(to_anchor_scale(rec.condition.value, scale));
            ys.push_back(rec.belief);
        }
        const CurveSeries smooth = local_linear_smooth(xs, ys, config.bandwidth);
        for (const auto& warning : smooth.warnings) w.warnings.push_back(warning);
        w.write_curve("anchor_response", smooth, "Belief vs anchor value");
        files.push_back("curves/anchor_response.csv");
    } else if (config.plot_kind == "effects") {
        RunConfig decay_cfg = config;
        decay_cfg.command = "decay";
        cmd_decay(decay_cfg);
        files.push_back("curves/decay_effects.csv");
    } else {
        throw DomainError("unknown plot kind '" + config.plot_kind + "'");
    }
    w.write({{"files", files}});
}

}  // namespace

void run(const RunConfig& config) {
    if (config.command == "ingest") return cmd_ingest(config);
    if (config.command == "describe") return cmd_describe(config);
    if (config.command == "first-stage") return cmd_first_stage(config);
    if (config.command == "iv") return cmd_iv(config);
    if (config.command == "placebo") return cmd_placebo(config);
    if (config.command == "decay") return cmd_decay(config);
    if (config.command == "design-anchors") return cmd_design_anchors(config);
    if (config.command == "simulate") return cmd_simulate(config);
    if (config.command == "plot") return cmd_plot(config);
    throw DomainError("unknown command '" + config.command + "'");
}

int run_cli(const RunConfig& config) {
    try {
        run(config);
        return 0;
    } catch (const Error& e) {
        std::cerr << nlohmann::json{{"error", {{"command", config.command},
                                               {"message", e.what()}}}}
                         .dump()
                  << std::endl;
        return 1;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"command", config.command},
                                               {"message", e.what()},
                                               {"unexpected", true}}}}
                         .dump()
                  << std::endl;
        return 2;
    }
}

}  // namespace abcd
