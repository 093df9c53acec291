// abcd: design and analyze anchoring-based causal design experiments.
//
// Subcommands mirror the analysis pipeline one-to-one: ingest, describe,
// first-stage, iv, placebo, decay, design-anchors, simulate, plot. Every
// command writes report.json (plus tables.txt / curves/*.csv as applicable)
// under --out; outputs are byte-identical across re-runs with the same
// inputs and seed.

#include <CLI11.hpp>

#include "abcd/runner.hpp"
#include "abcd/version.hpp"

namespace {

void add_data_options(CLI::App* cmd, abcd::RunConfig& config) {
    cmd->add_option("--data", config.data, "input CSV")->required();
    cmd->add_option("--schema", config.schema,
                    "column-mapping JSON (canonical layout assumed if omitted)");
    cmd->add_option("--belief", config.belief_override, "override the belief column");
    cmd->add_option("--exclude-above", config.exclude_above,
                    "exclude records with belief above this threshold");
    cmd->add_option("--transform", config.transform, "belief transform: identity|log10p1")
        ->check(CLI::IsMember({"identity", "log10p1"}));
    cmd->add_option("--transform-outcomes", config.transform_outcomes,
                    "outcome columns to log10p1-transform")
        ->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anchoring-based causal design toolkit"};
    app.set_version_flag("--version", abcd::kVersion);
    app.require_subcommand(1);

    abcd::RunConfig config;
    app.add_option("--out", config.out, "output directory")->capture_default_str();
    app.add_option("--seed", config.seed, "random seed (overrides the sim config seed)")
        ->envname("ABCD_SEED");
    app.add_flag("--svg", config.svg, "also render figures/*.svg");

    auto* ingest = app.add_subcommand("ingest", "normalize a CSV into the canonical layout");
    add_data_options(ingest, config);

    auto* describe = app.add_subcommand("describe", "descriptive statistics per condition");
    add_data_options(describe, config);

    auto* first_stage =
        app.add_subcommand("first-stage", "manipulation check with the F > 10 gate");
    add_data_options(first_stage, config);

    auto* iv = app.add_subcommand("iv", "OLS + IV analysis of outcomes on the belief");
    add_data_options(iv, config);
    iv->add_option("--outcome", config.outcome, "analyze one outcome (default: all)");
    iv->add_option("--coding", config.coding, "instrument coding")
        ->check(CLI::IsMember({"binary", "dummies", "continuous"}));

    auto* placebo = app.add_subcommand("placebo", "selectiveness tests across experiments");
    placebo->add_option("--data", config.data, "input CSV")->required();
    placebo
        ->add_option("--experiment", config.experiments,
                     "experiment spec name=belief_col:cond_col[:log10p1] (repeatable)")
        ->required();

    auto* decay = app.add_subcommand("decay", "lagged anchoring effects across waves");
    add_data_options(decay, config);
    decay->add_option("--data2", config.data2, "wave-2 CSV (default: split --data by wave)");
    decay->add_option("--wave1", config.wave1, "wave number of the treatment wave");
    decay->add_option("--wave2", config.wave2, "wave number of the follow-up wave");
    decay->add_option("--bins", config.bins, "lag bins in days, e.g. 5-9,10-14")
        ->capture_default_str();

    auto* design = app.add_subcommand("design-anchors", "recommend anchor values");
    design->add_option("--data", config.data, "baseline CSV (no-anchor beliefs)");
    design->add_option("--schema", config.schema, "column-mapping JSON");
    design->add_option("--belief", config.belief_override, "override the belief column");
    design->add_option("--transform", config.transform, "belief transform: identity|log10p1")
        ->check(CLI::IsMember({"identity", "log10p1"}));
    design->add_option("--exclude-above", config.exclude_above, "belief exclusion threshold");
    design->add_option("--rule", config.rule, "percentile|extrema")->capture_default_str();
    design->add_option("--pilot", config.pilot, "multivalued-anchor pilot CSV (extrema rule)");
    design->add_option("--scale", config.scale, "anchor scale for the curve fit: raw|log10p1")
        ->check(CLI::IsMember({"raw", "log10p1"}));
    design->add_option("--compare-delta", config.compare_delta,
                       "mean-belief gap of an existing design, for the variance ratio");

    auto* simulate = app.add_subcommand("simulate", "generate synthetic data / run Monte Carlo");
    simulate->add_option("--config", config.sim_config, "SimConfig JSON file");
    simulate->add_option("--wave-days", config.wave_days, "comma-separated wave days")
        ->capture_default_str();
    simulate->add_option("--replicates", config.replicates,
                         "Monte Carlo replicates (0 = just write dataset.csv)");
    simulate->add_option("--threads", config.threads, "worker threads for Monte Carlo");

    auto* plot = app.add_subcommand("plot", "emit plot data as curves/*.csv");
    add_data_options(plot, config);
    plot->add_option("--kind", config.plot_kind, "kde|smooth|effects")->capture_default_str();
    plot->add_option("--bandwidth", config.bandwidth, "kernel bandwidth (0 = automatic)");
    plot->add_option("--scale", config.scale, "anchor scale for smooth: raw|log10p1")
        ->check(CLI::IsMember({"raw", "log10p1"}));
    plot->add_option("--data2", config.data2, "wave-2 CSV for --kind effects");
    plot->add_option("--bins", config.bins, "lag bins for --kind effects");

    // Let --out/--seed/--svg appear after the subcommand name.
    for (auto* sub : app.get_subcommands([](CLI::App*) { return true; })) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    config.command = app.get_subcommands().front()->get_name();
    return abcd::run_cli(config);
}
