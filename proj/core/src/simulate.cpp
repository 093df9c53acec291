#include "abcd/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "abcd/distributions.hpp"
#include "abcd/errors.hpp"
#include "abcd/iv.hpp"
#include "abcd/regression.hpp"
#include "abcd/rng.hpp"

namespace abcd {

void SimConfig::validate() const {
    if (n < 4) throw DomainError("simulation needs n >= 4");
    if (lambda < 0.0 || lambda > 1.0) throw DomainError("lambda must lie in [0,1]");
    if (!(tau > 0.0)) throw DomainError("decay constant tau must be > 0");
    if (!(window_lo < window_hi)) throw DomainError("plausibility window needs lo < hi");
    if (sigma_belief < 0.0 || sigma_outcome < 0.0) throw DomainError("noise SDs must be >= 0");
    if (no_anchor_share < 0.0 || no_anchor_share >= 1.0) {
        throw DomainError("no_anchor_share must lie in [0,1)");
    }
    if (anchors.empty()) throw DomainError("at least one anchor value required");
    for (double a : anchors) {
        if (!std::isfinite(a) || a < 0.0) throw DomainError("anchor values must be finite, >= 0");
    }
}

SimConfig SimConfig::from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.n = j.value("n", cfg.n);
    cfg.beta0 = j.value("beta0", cfg.beta0);
    cfg.beta1 = j.value("beta1", cfg.beta1);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.mu_belief = j.value("mu_belief", cfg.mu_belief);
    cfg.lambda = j.value("lambda", cfg.lambda);
    if (j.contains("window")) {
        cfg.window_lo = j.at("window").at(0).get<double>();
        cfg.window_hi = j.at("window").at(1).get<double>();
    }
    cfg.tau = j.value("tau", cfg.tau);
    cfg.theta = j.value("theta", cfg.theta);
    cfg.sigma_belief = j.value("sigma_belief", cfg.sigma_belief);
    cfg.sigma_outcome = j.value("sigma_outcome", cfg.sigma_outcome);
    cfg.no_anchor_share = j.value("no_anchor_share", cfg.no_anchor_share);
    if (j.contains("anchors")) cfg.anchors = j.at("anchors").get<std::vector<double>>();
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

SimConfig SimConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open simulation config: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid simulation config JSON: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json SimConfig::to_json() const {
    return nlohmann::json{{"n", n},
                          {"beta0", beta0},
                          {"beta1", beta1},
                          {"gamma", gamma},
                          {"delta", delta},
                          {"mu_belief", mu_belief},
                          {"lambda", lambda},
                          {"window", {window_lo, window_hi}},
                          {"tau", tau},
                          {"theta", theta},
                          {"sigma_belief", sigma_belief},
                          {"sigma_outcome", sigma_outcome},
                          {"no_anchor_share", no_anchor_share},
                          {"anchors", anchors},
                          {"seed", seed}};
}

double anchor_response(double b0, double anchor, double lambda, double window_lo,
                       double window_hi) {
    if (lambda < 0.0 || lambda > 1.0) throw DomainError("lambda must lie in [0,1]");
    const double margin = 0.5 * (window_hi - window_lo);
    double plausibility = 1.0;
    if (anchor < window_lo) {
        plausibility = std::max(0.0, 1.0 - (window_lo - anchor) / margin);
    } else if (anchor > window_hi) {
        plausibility = std::max(0.0, 1.0 - (anchor - window_hi) / margin);
    }
    return b0 + lambda * plausibility * (anchor - b0);
}

double decay_apply(double pull, double t_days, double tau) {
    if (t_days < 0.0) throw DomainError("elapsed time must be >= 0");
    if (!(tau > 0.0)) throw DomainError("tau must be > 0");
    return pull * std::exp(-t_days / tau);
}

ExperimentDataset generate_population(const SimConfig& cfg, const std::vector<double>& wave_days) {
    cfg.validate();
    if (wave_days.empty()) throw DomainError("at least one wave day required");

    const double anchor_min = *std::min_element(cfg.anchors.begin(), cfg.anchors.end());
    const double anchor_max = *std::max_element(cfg.anchors.begin(), cfg.anchors.end());
    const double high_threshold = 0.5 * (anchor_min + anchor_max);

    ExperimentDataset ds;
    ds.schema.outcomes["outcome"] = OutcomeSchema{};
    ds.schema.covariates = {"confounder"};
    ds.records.reserve(static_cast<std::size_t>(cfg.n) * wave_days.size());

    for (int i = 0; i < cfg.n; ++i) {
        Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(i)));
        const double confounder = rng.normal();
        const double b0 = cfg.mu_belief + cfg.delta * confounder +
                          cfg.sigma_belief * rng.normal();

        const bool no_anchor = rng.uniform() < cfg.no_anchor_share;
        double anchor = 0.0;
        double pull = 0.0;
        bool high = false;
        if (!no_anchor) {
            anchor = cfg.anchors[rng.uniform_index(cfg.anchors.size())];
            pull = anchor_response(b0, anchor, cfg.lambda, cfg.window_lo, cfg.window_hi) - b0;
            high = cfg.anchors.size() >= 2 && anchor >= high_threshold;
        }

        for (std::size_t w = 0; w < wave_days.size(); ++w) {
            const double day = wave_days[w];
            const double belief = b0 + decay_apply(pull, day, cfg.tau);
            const double outcome = cfg.beta0 + cfg.beta1 * belief + cfg.gamma * confounder +
                                   cfg.theta * (high ? 1.0 : 0.0) +
                                   cfg.sigma_outcome * rng.normal();
            ParticipantRecord rec;
            rec.id = "p" + std::to_string(i);
            rec.condition = no_anchor ? AnchorCondition::none() : AnchorCondition::anchor(anchor);
            rec.belief = belief;
            rec.outcomes["outcome"] = outcome;
            rec.covariates["confounder"] = confounder;
            rec.wave = static_cast<int>(w) + 1;
            rec.interview_day = static_cast<int>(std::llround(day));
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

std::string estimator_name(Estimator e) {
    switch (e) {
        case Estimator::OLS: return "OLS";
        case Estimator::IV: return "IV";
        case Estimator::Wald: return "Wald";
    }
    return "?";
}

namespace {

struct ReplicateResult {
    // NaN marks "not computed" (failed or not requested).
    double estimate[3] = {std::nan(""), std::nan(""), std::nan("")};
    double se[3] = {std::nan(""), std::nan(""), std::nan("")};
    long df[3] = {0, 0, 0};
    double analytic_bias = std::nan("");
    bool no_first_stage = false;
};

ReplicateResult run_replicate(const SimConfig& cfg, std::uint64_t master_seed, int replicate,
                              const std::vector<Estimator>& estimators) {
    SimConfig sub = cfg;
    sub.seed = Rng::derive(master_seed, 0x7265706cULL, static_cast<std::uint64_t>(replicate));
    const ExperimentDataset ds = generate_population(sub, {0.0});

    ReplicateResult res;

    // In-sample analytic omitted-variable bias gamma*Cov(C,belief)/Var(belief).
    {
        double sum_b = 0.0, sum_c = 0.0;
        long n = 0;
        for (const auto& rec : ds.records) {
            sum_b += rec.belief;
            sum_c += rec.covariates.at("confounder");
            ++n;
        }
        const double mb = sum_b / n, mc = sum_c / n;
        double cov = 0.0, var = 0.0;
        for (const auto& rec : ds.records) {
            const double db = rec.belief - mb;
            cov += db * (rec.covariates.at("confounder") - mc);
            var += db * db;
        }
        res.analytic_bias = var > 0.0 ? cfg.gamma * cov / var : std::nan("");
    }

    for (Estimator est : estimators) {
        const int idx = static_cast<int>(est);
        try {
            switch (est) {
                case Estimator::OLS: {
                    std::vector<double> b, y;
                    for (const auto& rec : ds.records) {
                        b.push_back(rec.belief);
                        y.push_back(rec.outcomes.at("outcome"));
                    }
                    const Eigen::Index n = static_cast<Eigen::Index>(b.size());
                    DesignMatrix X = DesignMatrix::with_intercept(n);
                    X.add("belief", b);
                    const RegressionFit fit =
                        ols_fit(X, Eigen::Map<const Eigen::VectorXd>(y.data(), n));
                    res.estimate[idx] = fit.coef_of("belief");
                    res.se[idx] = fit.se_of("belief");
                    res.df[idx] = fit.df_resid;
                    break;
                }
                case Estimator::IV: {
                    InstrumentCoding coding = cfg.anchors.size() > 2
                                                  ? InstrumentCoding::continuous()
                                                  : (cfg.no_anchor_share > 0.0
                                                         ? InstrumentCoding::dummies()
                                                         : InstrumentCoding::binary());
                    const IvFit fit = two_sls(ds, "outcome", coding);
                    res.estimate[idx] = fit.coef_of("belief");
                    res.se[idx] = fit.se_of("belief");
                    res.df[idx] = fit.second_stage_df;
                    break;
                }
                case Estimator::Wald: {
                    if (cfg.anchors.size() != 2) {
                        throw GroupingError("Wald estimator needs a two-anchor design");
                    }
                    res.estimate[idx] = wald_estimate(ds, "outcome");
                    break;
                }
            }
        } catch (const NoFirstStageError&) {
            res.no_first_stage = true;
        }
    }
    return res;
}

}  // namespace

McSummary monte_carlo(const SimConfig& cfg, int replicates,
                      const std::vector<Estimator>& estimators, int threads) {
    cfg.validate();
    if (replicates < 100) throw DomainError("monte_carlo needs at least 100 replicates");
    if (estimators.empty()) throw DomainError("no estimators requested");
    if (threads < 1) threads = 1;

    std::vector<ReplicateResult> results(replicates);
    auto worker = [&](int begin, int end) {
        for (int r = begin; r < end; ++r) {
            results[r] = run_replicate(cfg, cfg.seed, r, estimators);
        }
    };
    if (threads == 1) {
        worker(0, replicates);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (replicates + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(replicates, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    McSummary summary;
    summary.replicates = replicates;

    double bias_sum = 0.0;
    int bias_n = 0;
    for (const auto& res : results) {
        if (!std::isnan(res.analytic_bias)) {
            bias_sum += res.analytic_bias;
            ++bias_n;
        }
        if (res.no_first_stage) ++summary.failed_replicates;
    }
    summary.analytic_ols_bias = bias_n > 0 ? bias_sum / bias_n : std::nan("");
    summary.config_warning = summary.failed_replicates > replicates / 20;

    for (Estimator est : estimators) {
        const int idx = static_cast<int>(est);
        McEstimatorSummary s;
        double se_sum = 0.0;
        long se_n = 0;
        long covered = 0, ci_n = 0;
        double crit = 0.0;
        long crit_df = -1;
        for (const auto& res : results) {
            const double e = res.estimate[idx];
            if (std::isnan(e)) continue;
            s.estimates.push_back(e);
            if (!std::isnan(res.se[idx]) && res.df[idx] > 0) {
                se_sum += res.se[idx];
                ++se_n;
                if (res.df[idx] != crit_df) {
                    crit = dist::t_quantile(0.975, static_cast<double>(res.df[idx]));
                    crit_df = res.df[idx];
                }
                ++ci_n;
                if (std::fabs(e - cfg.beta1) <= crit * res.se[idx]) ++covered;
            }
        }
        const long m = static_cast<long>(s.estimates.size());
        if (m > 0) {
            double sum = 0.0;
            for (double e : s.estimates) sum += e;
            s.mean_estimate = sum / m;
            double ss = 0.0;
            for (double e : s.estimates) ss += (e - s.mean_estimate) * (e - s.mean_estimate);
            s.empirical_sd = m > 1 ? std::sqrt(ss / (m - 1)) : 0.0;
            s.bias = s.mean_estimate - cfg.beta1;
        }
        s.mean_reported_se = se_n > 0 ? se_sum / se_n : std::nan("");
        s.coverage = ci_n > 0 ? static_cast<double>(covered) / ci_n : std::nan("");
        summary.per_estimator[est] = std::move(s);
    }
    return summary;
}

}  // namespace abcd
