#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "abcd/dataset.hpp"

namespace abcd {

enum class AnchorScale { Raw, Log10Plus1 };

double to_anchor_scale(double raw_anchor, AnchorScale scale);
double from_anchor_scale(double scaled_anchor, AnchorScale scale);

// Cubic fit of mean post-treatment belief against the anchor value, on the
// scale the anchors were fitted on. Only valid inside [domain_lo, domain_hi].
struct ResponseCurve {
    std::array<double, 4> coefficients{};  // c0 + c1 x + c2 x^2 + c3 x^3
    AnchorScale anchor_scale = AnchorScale::Raw;
    double domain_lo = 0.0;
    double domain_hi = 0.0;
};

struct CurveExtremaResult {
    double argmin = 0.0;
    double argmax = 0.0;
    bool monotone = false;  // no interior critical point; extrema at the endpoints
};

enum class AnchorRule { PercentileRule, CurveExtrema };

struct AnchorPlan {
    double low = 0.0;   // raw-scale anchor values
    double high = 0.0;
    std::optional<std::pair<double, double>> predicted_beliefs;  // on the curve scale
    std::optional<double> predicted_delta;
    std::optional<std::pair<double, double>> percentiles;
    AnchorRule rule = AnchorRule::PercentileRule;
};

// Least-squares polynomial of belief on anchor powers 0..degree. Every pilot
// record must carry an Anchor condition; the domain is the observed anchor
// range on the chosen scale.
ResponseCurve fit_response_polynomial(const ExperimentDataset& pilot, int degree = 3,
                                      AnchorScale scale = AnchorScale::Raw);

// Locations of the minimum and maximum of the cubic over its domain: the
// classified interior critical points (c1 + 2 c2 x + 3 c3 x^2 = 0, closed
// form), with out-of-domain roots replaced by the better domain endpoint.
CurveExtremaResult curve_extrema(const ResponseCurve& curve);

double predicted_mean_belief(const ResponseCurve& curve, double anchor_on_curve_scale);

// Empirical-CDF percentile of an anchor within the no-anchor baseline
// sample: 100 * #{b <= anchor} / n, no interpolation.
double anchor_percentile(double anchor, const std::vector<double>& baseline);

// Percentile rule: 5th/95th empirical percentiles of the baseline.
// CurveExtrema: extrema of the fitted pilot curve mapped back to raw scale.
AnchorPlan recommend_anchors(const std::vector<double>& baseline, AnchorRule rule,
                             const ExperimentDataset* pilot = nullptr,
                             AnchorScale pilot_scale = AnchorScale::Raw);

// (delta_a / delta_b)^2: the IV variance multiplier when moving from a design
// with mean-belief gap delta_a to one with gap delta_b.
double design_variance_ratio(double delta_a, double delta_b);

// Anchor grid fixtures: one anchor per line/cell, '#' comment lines and a
// non-numeric header allowed.
std::vector<double> load_anchor_grid(const std::filesystem::path& path);

// Lower empirical quantile (smallest sample value with CDF >= p/100).
double empirical_percentile_value(const std::vector<double>& sample, double percentile);

}  // namespace abcd
