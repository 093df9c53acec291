#include "abcd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "abcd/csv.hpp"
#include "abcd/errors.hpp"
#include "abcd/regression.hpp"

namespace abcd {

PlaceboExperiment make_placebo_experiment(const ExperimentDataset& ds,
                                          const std::string& belief_name) {
    PlaceboExperiment exp;
    exp.belief_name = belief_name;
    exp.belief = ds.beliefs();

    const std::vector<double> anchors = ds.anchor_values();
    if (anchors.empty()) throw CodingError("experiment '" + belief_name + "' has no anchors");
    bool has_no_anchor = false;
    for (const auto& rec : ds.records) {
        if (!rec.condition.is_anchor()) {
            has_no_anchor = true;
            break;
        }
    }

    for (std::size_t j = 1; j < anchors.size(); ++j) {
        const std::string name =
            anchors.size() == 2 ? "high_" + belief_name + "_anchor"
                                : belief_name + "_anchor_" + csv::format_double(anchors[j]);
        std::vector<double> col(ds.records.size(), 0.0);
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            const auto& c = ds.records[i].condition;
            col[i] = c.is_anchor() && c.value == anchors[j] ? 1.0 : 0.0;
        }
        exp.treatments.emplace_back(name, std::move(col));
    }
    if (has_no_anchor) {
        std::vector<double> col(ds.records.size(), 0.0);
        for (std::size_t i = 0; i < ds.records.size(); ++i) {
            col[i] = ds.records[i].condition.is_anchor() ? 0.0 : 1.0;
        }
        exp.treatments.emplace_back("no_" + belief_name + "_anchor", std::move(col));
    }
    return exp;
}

PlaceboMatrix placebo_matrix(const std::vector<PlaceboExperiment>& experiments) {
    if (experiments.size() < 2) {
        throw AlignmentError("placebo tests need at least two co-administered experiments");
    }
    const std::size_t n_records = experiments.front().belief.size();
    for (const auto& exp : experiments) {
        if (exp.belief.size() != n_records) {
            throw AlignmentError("experiment '" + exp.belief_name +
                                 "' is not aligned with the others (" +
                                 std::to_string(exp.belief.size()) + " vs " +
                                 std::to_string(n_records) + " records)");
        }
        for (const auto& [name, col] : exp.treatments) {
            if (col.size() != n_records) {
                throw AlignmentError("treatment column '" + name + "' is not aligned");
            }
        }
    }

    PlaceboMatrix m;
    std::vector<std::size_t> owner;  // experiment index per treatment column
    for (std::size_t e = 0; e < experiments.size(); ++e) {
        for (const auto& [name, col] : experiments[e].treatments) {
            m.treatment_names.push_back(name);
            owner.push_back(e);
            (void)col;
        }
    }

    for (std::size_t e = 0; e < experiments.size(); ++e) {
        const auto& exp = experiments[e];
        m.belief_names.push_back(exp.belief_name);

        // Row-wise deletion on the regressed belief only.
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < n_records; ++i) {
            if (std::isfinite(exp.belief[i])) keep.push_back(i);
        }
        const Eigen::Index n = static_cast<Eigen::Index>(keep.size());

        DesignMatrix X = DesignMatrix::with_intercept(n);
        std::size_t col_idx = 0;
        for (const auto& other : experiments) {
            for (const auto& [name, col] : other.treatments) {
                Eigen::VectorXd v(n);
                for (Eigen::Index i = 0; i < n; ++i) v(i) = col[keep[i]];
                X.add(m.treatment_names[col_idx++], v);
                (void)name;
            }
        }
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = exp.belief[keep[i]];
        const RegressionFit fit = ols_fit(X, y);

        std::vector<PlaceboCell> row;
        for (std::size_t t = 0; t < m.treatment_names.size(); ++t) {
            PlaceboCell cell;
            cell.coef = fit.coef_of(m.treatment_names[t]);
            cell.se = fit.se_of(m.treatment_names[t]);
            cell.p = fit.p_of(m.treatment_names[t]);
            cell.is_placebo = owner[t] != e;
            cell.flagged = cell.is_placebo && cell.p < 0.05;
            row.push_back(cell);
        }
        m.cells.push_back(std::move(row));
        m.constant.push_back(fit.coef_of("const"));
        m.constant_se.push_back(fit.se_of("const"));
        m.n.push_back(fit.n);
        m.adj_r2.push_back(fit.adj_r2);
    }
    return m;
}

namespace {

LaggedEffect lagged_effect_for(const std::vector<double>& beliefs,
                               const std::vector<int>& dummies,
                               const std::vector<int>& lags, int day_lo, int day_hi) {
    const AnchoringEffect eff = anchoring_effect(beliefs, dummies);
    LaggedEffect out;
    out.day_lo = day_lo;
    out.day_hi = day_hi;
    double lag_sum = 0.0;
    for (int l : lags) lag_sum += l;
    out.mean_lag = lags.empty() ? 0.0 : lag_sum / static_cast<double>(lags.size());
    out.effect = eff.effect;
    out.se = eff.se;
    out.f = eff.f;
    out.p = eff.p;
    out.n = eff.n;
    return out;
}

}  // namespace

DecayReport decay_analysis(const ExperimentDataset& wave1, const ExperimentDataset& wave2,
                           const std::vector<std::pair<int, int>>& bins) {
    if (bins.empty()) throw DomainError("decay analysis needs at least one lag bin");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].first > bins[i].second) throw DomainError("lag bin with lo > hi");
        for (std::size_t j = i + 1; j < bins.size(); ++j) {
            if (bins[i].first <= bins[j].second && bins[j].first <= bins[i].second) {
                throw DomainError("lag bins overlap");
            }
        }
    }

    DecayReport report;
    report.instantaneous = anchoring_effect(wave1);

    std::unordered_map<std::string, const ParticipantRecord*> by_id;
    for (const auto& rec : wave1.records) by_id[rec.id] = &rec;

    struct Matched {
        double belief;
        int dummy;
        int lag;
    };
    std::vector<Matched> matched;
    const std::vector<double> anchors = wave1.anchor_values();
    if (anchors.size() != 2) {
        throw GroupingError("decay analysis needs binary anchor groups in wave 1");
    }
    const double hi = anchors.back();

    for (const auto& rec : wave2.records) {
        auto it = by_id.find(rec.id);
        if (it == by_id.end()) continue;  // lost to follow-up in reverse direction
        const ParticipantRecord& first = *it->second;
        if (!first.condition.is_anchor()) continue;  // no-anchor participants excluded
        if (!std::isfinite(rec.belief)) continue;
        if (!first.interview_day || !rec.interview_day) {
            throw SchemaError("interview_day required in both waves for decay analysis");
        }
        matched.push_back({rec.belief, first.condition.value == hi ? 1 : 0,
                           *rec.interview_day - *first.interview_day});
    }

    auto in_any_bin = [&](int lag) {
        for (const auto& [lo, hi_day] : bins) {
            if (lag >= lo && lag <= hi_day) return true;
        }
        return false;
    };

    for (const auto& [lo, hi_day] : bins) {
        std::vector<double> beliefs;
        std::vector<int> dummies;
        std::vector<int> lags;
        long n_high = 0, n_low = 0;
        for (const auto& mrec : matched) {
            if (mrec.lag < lo || mrec.lag > hi_day) continue;
            beliefs.push_back(mrec.belief);
            dummies.push_back(mrec.dummy);
            lags.push_back(mrec.lag);
            (mrec.dummy ? n_high : n_low) += 1;
        }
        if (n_high < 2 || n_low < 2) {
            report.warnings.push_back("bin [" + std::to_string(lo) + "," +
                                      std::to_string(hi_day) +
                                      "] dropped: fewer than 2 per group");
            continue;
        }
        report.lagged.push_back(lagged_effect_for(beliefs, dummies, lags, lo, hi_day));
    }

    std::vector<double> beliefs;
    std::vector<int> dummies;
    std::vector<int> lags;
    for (const auto& mrec : matched) {
        if (!in_any_bin(mrec.lag)) continue;
        beliefs.push_back(mrec.belief);
        dummies.push_back(mrec.dummy);
        lags.push_back(mrec.lag);
    }
    int pool_lo = bins.front().first, pool_hi = bins.front().second;
    for (const auto& [lo, hi_day] : bins) {
        pool_lo = std::min(pool_lo, lo);
        pool_hi = std::max(pool_hi, hi_day);
    }
    long pooled_high = 0, pooled_low = 0;
    for (int d : dummies) (d ? pooled_high : pooled_low) += 1;
    if (pooled_high >= 2 && pooled_low >= 2) {
        report.pooled = lagged_effect_for(beliefs, dummies, lags, pool_lo, pool_hi);
        report.decay_ratio = report.instantaneous.effect != 0.0
                                 ? report.pooled.effect / report.instantaneous.effect
                                 : std::numeric_limits<double>::quiet_NaN();
    } else {
        report.pooled.day_lo = pool_lo;
        report.pooled.day_hi = pool_hi;
        report.pooled.effect = std::numeric_limits<double>::quiet_NaN();
        report.decay_ratio = std::numeric_limits<double>::quiet_NaN();
        report.warnings.push_back("no usable matched follow-ups in the requested bins");
    }
    return report;
}

ManipulationCheck manipulation_check(const ExperimentDataset& ds) {
    ManipulationCheck check;
    check.effect = anchoring_effect(ds);
    check.gate_passed = weak_instrument_gate(check.effect.f);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "anchoring effect %.4g (SE %.4g, p = %.4g, F = %.4g): %s",
                  check.effect.effect, check.effect.se, check.effect.p, check.effect.f,
                  check.gate_passed ? "pass (F > 10, instrument usable)"
                                    : "fail (F <= 10, IV estimates not calculated)");
    check.verdict = buf;
    return check;
}

}  // namespace abcd
