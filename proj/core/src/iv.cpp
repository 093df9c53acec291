#include "abcd/iv.hpp"

#include <cmath>
#include <set>

#include "abcd/csv.hpp"
#include "abcd/distributions.hpp"
#include "abcd/errors.hpp"

namespace abcd {

namespace {

struct AnalysisRows {
    std::vector<const ParticipantRecord*> rows;
    Eigen::VectorXd belief;
    Eigen::VectorXd outcome;
};

// Row-wise deletion: keep rows with a finite belief, a finite value of the
// analyzed outcome, and every requested covariate present.
AnalysisRows select_rows(const ExperimentDataset& ds, const std::string& outcome,
                         const std::vector<std::string>& covariates, bool anchors_only) {
    AnalysisRows out;
    std::vector<double> beliefs, outcomes;
    for (const auto& rec : ds.records) {
        if (anchors_only && !rec.condition.is_anchor()) continue;
        if (!std::isfinite(rec.belief)) continue;
        auto it = rec.outcomes.find(outcome);
        if (it == rec.outcomes.end() || !std::isfinite(it->second)) continue;
        bool covariates_ok = true;
        for (const auto& c : covariates) {
            if (!rec.covariates.count(c)) {
                covariates_ok = false;
                break;
            }
        }
        if (!covariates_ok) continue;
        out.rows.push_back(&rec);
        beliefs.push_back(rec.belief);
        outcomes.push_back(it->second);
    }
    out.belief = Eigen::Map<const Eigen::VectorXd>(beliefs.data(), beliefs.size());
    out.outcome = Eigen::Map<const Eigen::VectorXd>(outcomes.data(), outcomes.size());
    return out;
}

void check_not_constant(const std::string& name, const Eigen::VectorXd& col) {
    const double first = col(0);
    for (Eigen::Index i = 1; i < col.size(); ++i) {
        if (col(i) != first) return;
    }
    throw CodingError("instrument column '" + name + "' is constant");
}

// Resolves the coding against the selected rows and appends the instrument
// columns to the design matrix.
InstrumentCoding build_instruments(const InstrumentCoding& coding,
                                   const std::vector<const ParticipantRecord*>& rows,
                                   DesignMatrix& design) {
    InstrumentCoding resolved = coding;
    resolved.columns.clear();

    std::set<double> anchor_set;
    bool has_no_anchor = false;
    for (const auto* r : rows) {
        if (r->condition.is_anchor()) {
            anchor_set.insert(r->condition.value);
        } else {
            has_no_anchor = true;
        }
    }
    const std::vector<double> anchors(anchor_set.begin(), anchor_set.end());
    const Eigen::Index n = static_cast<Eigen::Index>(rows.size());

    switch (coding.scheme) {
        case CodingScheme::BinaryHighLow: {
            if (anchors.size() != 2) {
                throw CodingError("binary coding needs exactly two anchor values, found " +
                                  std::to_string(anchors.size()));
            }
            const double hi = anchors.back();
            resolved.reference = "anchor=" + csv::format_double(anchors.front());
            Eigen::VectorXd col(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                col(i) = rows[i]->condition.value == hi ? 1.0 : 0.0;
            }
            check_not_constant("high_anchor", col);
            design.add("high_anchor", col);
            resolved.columns.push_back("high_anchor");
            break;
        }
        case CodingScheme::DummiesWithReference: {
            if (anchors.empty() || anchors.size() + (has_no_anchor ? 1 : 0) < 2) {
                throw CodingError("dummy coding needs at least two conditions");
            }
            const double reference = anchors.front();  // low anchor serves as reference
            resolved.reference = "anchor=" + csv::format_double(reference);
            for (std::size_t j = 1; j < anchors.size(); ++j) {
                const std::string name = anchors.size() == 2
                                             ? std::string{"high_anchor"}
                                             : "anchor_" + csv::format_double(anchors[j]);
                Eigen::VectorXd col(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    col(i) = rows[i]->condition.is_anchor() &&
                                     rows[i]->condition.value == anchors[j]
                                 ? 1.0
                                 : 0.0;
                }
                check_not_constant(name, col);
                design.add(name, col);
                resolved.columns.push_back(name);
            }
            if (has_no_anchor) {
                Eigen::VectorXd col(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    col(i) = rows[i]->condition.is_anchor() ? 0.0 : 1.0;
                }
                check_not_constant("no_anchor", col);
                design.add("no_anchor", col);
                resolved.columns.push_back("no_anchor");
            }
            break;
        }
        case CodingScheme::ContinuousAnchor: {
            if (anchors.size() < 2) {
                throw CodingError("continuous coding needs at least two distinct anchor values");
            }
            Eigen::VectorXd col(n);
            for (Eigen::Index i = 0; i < n; ++i) col(i) = rows[i]->condition.value;
            check_not_constant("anchor_value", col);
            design.add("anchor_value", col);
            resolved.reference = "";
            resolved.columns.push_back("anchor_value");
            break;
        }
    }
    return resolved;
}

void add_covariates(DesignMatrix& design, const std::vector<const ParticipantRecord*>& rows,
                    const std::vector<std::string>& covariates) {
    for (const auto& name : covariates) {
        Eigen::VectorXd col(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            col(static_cast<Eigen::Index>(i)) = rows[i]->covariates.at(name);
        }
        design.add(name, col);
    }
}

}  // namespace

int IvFit::index(const std::string& name) const {
    for (std::size_t i = 0; i < second_stage_names.size(); ++i) {
        if (second_stage_names[i] == name) return static_cast<int>(i);
    }
    return -1;
}

double IvFit::coef_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no second-stage regressor named '" + name + "'");
    return second_stage_coef(i);
}

double IvFit::se_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no second-stage regressor named '" + name + "'");
    return second_stage_se(i);
}

double IvFit::p_of(const std::string& name) const {
    const int i = index(name);
    if (i < 0) throw Error("no second-stage regressor named '" + name + "'");
    return second_stage_p(i);
}

IvFit two_sls(const ExperimentDataset& ds, const std::string& outcome,
              const InstrumentCoding& coding, const std::vector<std::string>& covariates,
              const std::string& belief_label) {
    const bool anchors_only = coding.scheme != CodingScheme::DummiesWithReference;
    AnalysisRows sel = select_rows(ds, outcome, covariates, anchors_only);
    const Eigen::Index n = static_cast<Eigen::Index>(sel.rows.size());

    DesignMatrix stage1 = DesignMatrix::with_intercept(n);
    InstrumentCoding resolved = build_instruments(coding, sel.rows, stage1);
    const int n_instruments = static_cast<int>(resolved.columns.size());
    if (n < n_instruments + static_cast<int>(covariates.size()) + 3) {
        throw InsufficientDataError("too few usable rows for 2SLS: n = " + std::to_string(n));
    }
    add_covariates(stage1, sel.rows, covariates);

    const RegressionFit first = ols_fit(stage1, sel.belief);

    DesignMatrix restricted = DesignMatrix::with_intercept(n);
    add_covariates(restricted, sel.rows, covariates);
    const RegressionFit restricted_fit = ols_fit(restricted, sel.belief);
    const FTest fs = f_test_nested(first, restricted_fit, n_instruments);

    const Eigen::VectorXd belief_hat = stage1.values * first.coef;
    const double hat_mean = belief_hat.mean();
    const double hat_var = (belief_hat.array() - hat_mean).matrix().squaredNorm();
    if (hat_var <= 1e-20 * static_cast<double>(n) * (1.0 + hat_mean * hat_mean)) {
        throw NoFirstStageError("instruments do not move the belief (predicted belief constant)");
    }

    DesignMatrix stage2 = DesignMatrix::with_intercept(n);
    stage2.add(belief_label, belief_hat);
    add_covariates(stage2, sel.rows, covariates);
    const OlsCore core2 = ols_core(stage2, sel.outcome);

    // 2SLS-corrected sigma^2: residuals against the original beliefs.
    Eigen::MatrixXd x_orig = stage2.values;
    x_orig.col(1) = sel.belief;
    const Eigen::VectorXd structural_resid = sel.outcome - x_orig * core2.coef;
    const long df = n - stage2.k();
    const double sigma2 = structural_resid.squaredNorm() / static_cast<double>(df);

    IvFit fit;
    fit.first_stage = first;
    fit.coding = resolved;
    fit.belief_label = belief_label;
    fit.outcome_label = outcome;
    fit.second_stage_names = stage2.names;
    fit.second_stage_coef = core2.coef;
    fit.second_stage_se = (sigma2 * core2.xtx_inv.diagonal().cwiseMax(0.0).array()).sqrt();
    fit.second_stage_df = df;
    fit.n = n;

    const Eigen::Index k2 = stage2.k();
    fit.second_stage_t.resize(k2);
    fit.second_stage_p.resize(k2);
    for (Eigen::Index j = 0; j < k2; ++j) {
        fit.second_stage_t(j) = fit.second_stage_se(j) > 0.0
                                    ? fit.second_stage_coef(j) / fit.second_stage_se(j)
                                    : std::numeric_limits<double>::quiet_NaN();
        fit.second_stage_p(j) =
            dist::t_two_sided_p(fit.second_stage_t(j), static_cast<double>(df));
    }

    fit.first_stage_f = fs.f;
    fit.first_stage_f_p = fs.p;
    fit.gate_passed = weak_instrument_gate(fs.f);
    return fit;
}

double wald_estimate(const ExperimentDataset& ds, const std::string& outcome) {
    AnalysisRows sel = select_rows(ds, outcome, {}, /*anchors_only=*/true);
    std::set<double> anchor_set;
    for (const auto* r : sel.rows) anchor_set.insert(r->condition.value);
    if (anchor_set.size() != 2) {
        throw GroupingError("Wald estimator needs exactly two anchor groups, found " +
                            std::to_string(anchor_set.size()));
    }
    const double hi = *anchor_set.rbegin();

    double sum_y[2] = {0.0, 0.0};
    double sum_b[2] = {0.0, 0.0};
    long count[2] = {0, 0};
    for (std::size_t i = 0; i < sel.rows.size(); ++i) {
        const int g = sel.rows[i]->condition.value == hi ? 1 : 0;
        sum_y[g] += sel.outcome(static_cast<Eigen::Index>(i));
        sum_b[g] += sel.belief(static_cast<Eigen::Index>(i));
        ++count[g];
    }
    const double mean_y_lo = sum_y[0] / count[0], mean_y_hi = sum_y[1] / count[1];
    const double mean_b_lo = sum_b[0] / count[0], mean_b_hi = sum_b[1] / count[1];
    const double denom = mean_b_hi - mean_b_lo;
    const double scale = std::max({1.0, std::fabs(mean_b_hi), std::fabs(mean_b_lo)});
    if (std::fabs(denom) < 1e-12 * scale) {
        throw NoFirstStageError("zero first stage: group mean beliefs are equal");
    }
    return (mean_y_hi - mean_y_lo) / denom;
}

AnchoringEffect anchoring_effect(const std::vector<double>& beliefs,
                                 const std::vector<int>& high_dummy) {
    if (beliefs.size() != high_dummy.size()) {
        throw AlignmentError("belief and dummy vectors differ in length");
    }
    std::vector<double> b;
    std::vector<double> d;
    for (std::size_t i = 0; i < beliefs.size(); ++i) {
        if (!std::isfinite(beliefs[i])) continue;
        b.push_back(beliefs[i]);
        d.push_back(static_cast<double>(high_dummy[i]));
    }
    const Eigen::Index n = static_cast<Eigen::Index>(b.size());
    long n_high = 0;
    for (double v : d) n_high += v == 1.0 ? 1 : 0;
    if (n_high == 0 || n_high == n) throw GroupingError("one anchor group is empty");

    DesignMatrix X = DesignMatrix::with_intercept(n);
    X.add("high_anchor", d);
    const RegressionFit fit = ols_fit(X, Eigen::Map<const Eigen::VectorXd>(b.data(), n));

    AnchoringEffect eff;
    eff.effect = fit.coef_of("high_anchor");
    eff.se = fit.se_of("high_anchor");
    eff.p = fit.p_of("high_anchor");
    const double t = fit.t_value(fit.index("high_anchor"));
    eff.f = t * t;
    eff.n = n;
    eff.n_high = n_high;
    eff.n_low = n - n_high;
    eff.mean_low = fit.coef_of("const");
    eff.mean_high = eff.mean_low + eff.effect;
    return eff;
}

AnchoringEffect anchoring_effect(const ExperimentDataset& ds) {
    std::vector<double> beliefs;
    std::vector<double> values;
    std::set<double> anchor_set;
    for (const auto& rec : ds.records) {
        if (!rec.condition.is_anchor() || !std::isfinite(rec.belief)) continue;
        beliefs.push_back(rec.belief);
        values.push_back(rec.condition.value);
        anchor_set.insert(rec.condition.value);
    }
    if (anchor_set.size() != 2) {
        throw GroupingError("anchoring effect needs exactly two anchor groups, found " +
                            std::to_string(anchor_set.size()));
    }
    const double hi = *anchor_set.rbegin();
    std::vector<int> dummy(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) dummy[i] = values[i] == hi ? 1 : 0;
    return anchoring_effect(beliefs, dummy);
}

bool weak_instrument_gate(double f) {
    if (f < 0.0 || std::isnan(f)) throw DomainError("F statistic must be >= 0");
    return f > 10.0;
}

}  // namespace abcd
