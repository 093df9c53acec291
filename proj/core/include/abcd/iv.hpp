#pragma once

#include <string>
#include <vector>

#include "abcd/dataset.hpp"
#include "abcd/regression.hpp"

namespace abcd {

enum class CodingScheme {
    BinaryHighLow,         // one column, 1 = high anchor, 0 = low; no-anchor rows dropped
    DummiesWithReference,  // dummy per non-reference condition (incl. "no_anchor")
    ContinuousAnchor,      // the anchor value itself as a single instrument column
};

struct InstrumentCoding {
    CodingScheme scheme = CodingScheme::BinaryHighLow;
    std::string reference;             // resolved from data (label of the reference condition)
    std::vector<std::string> columns;  // resolved instrument column names

    static InstrumentCoding binary() { return {CodingScheme::BinaryHighLow, {}, {}}; }
    static InstrumentCoding dummies() { return {CodingScheme::DummiesWithReference, {}, {}}; }
    static InstrumentCoding continuous() { return {CodingScheme::ContinuousAnchor, {}, {}}; }
};

struct IvFit {
    RegressionFit first_stage;
    InstrumentCoding coding;  // with reference/columns resolved
    std::string belief_label;
    std::string outcome_label;

    std::vector<std::string> second_stage_names;
    Eigen::VectorXd second_stage_coef;
    Eigen::VectorXd second_stage_se;
    Eigen::VectorXd second_stage_t;
    Eigen::VectorXd second_stage_p;
    long second_stage_df = 0;

    double first_stage_f = 0.0;
    double first_stage_f_p = 1.0;
    bool gate_passed = false;
    long n = 0;

    int index(const std::string& name) const;
    double coef_of(const std::string& name) const;
    double se_of(const std::string& name) const;
    double p_of(const std::string& name) const;
};

// Two-stage least squares with randomized anchors as instruments.
// Stage 1 regresses the belief on the instrument columns (plus covariates),
// stage 2 regresses the outcome on the predicted belief (plus covariates).
// Second-stage standard errors use sigma^2 from residuals against the
// ORIGINAL beliefs, y - X beta_2sls, never against the predicted ones.
// Rows missing the belief, the outcome, or a covariate are dropped from
// this analysis only.
IvFit two_sls(const ExperimentDataset& ds, const std::string& outcome,
              const InstrumentCoding& coding, const std::vector<std::string>& covariates = {},
              const std::string& belief_label = "belief");

// Ratio-of-mean-differences estimator for a single binary instrument;
// identical to the 2SLS point estimate on the same rows.
double wald_estimate(const ExperimentDataset& ds, const std::string& outcome);

// First-stage treatment effect: difference between the mean belief in the
// high-anchor group and the low-anchor group, with OLS-equivalent inference.
struct AnchoringEffect {
    double effect = 0.0;
    double se = 0.0;
    double p = 1.0;
    double f = 0.0;  // = t^2 of the high-anchor dummy
    long n = 0;
    long n_high = 0;
    long n_low = 0;
    double mean_high = 0.0;
    double mean_low = 0.0;
};
AnchoringEffect anchoring_effect(const ExperimentDataset& ds);
AnchoringEffect anchoring_effect(const std::vector<double>& beliefs,
                                 const std::vector<int>& high_dummy);

// F > 10 rule of thumb; reports must suppress IV estimates on fail.
bool weak_instrument_gate(double f);

}  // namespace abcd
