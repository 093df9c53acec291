#include "abcd/design.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "abcd/errors.hpp"
#include "abcd/regression.hpp"

namespace abcd {

double to_anchor_scale(double raw_anchor, AnchorScale scale) {
    if (scale == AnchorScale::Raw) return raw_anchor;
    if (raw_anchor < 0.0) throw DomainError("log10(1+x) anchor scale needs x >= 0");
    return std::log10(1.0 + raw_anchor);
}

double from_anchor_scale(double scaled_anchor, AnchorScale scale) {
    if (scale == AnchorScale::Raw) return scaled_anchor;
    return std::pow(10.0, scaled_anchor) - 1.0;
}

ResponseCurve fit_response_polynomial(const ExperimentDataset& pilot, int degree,
                                      AnchorScale scale) {
    if (degree < 1 || degree > 3) throw DomainError("polynomial degree must be 1..3");

    std::vector<double> anchors;
    std::vector<double> beliefs;
    for (const auto& rec : pilot.records) {
        if (!rec.condition.is_anchor()) {
            throw DomainError("pilot dataset contains a no-anchor record (id " + rec.id + ")");
        }
        if (!std::isfinite(rec.belief)) continue;
        anchors.push_back(to_anchor_scale(rec.condition.value, scale));
        beliefs.push_back(rec.belief);
    }
    const std::set<double> distinct(anchors.begin(), anchors.end());
    if (static_cast<int>(distinct.size()) < degree + 1) {
        throw DegenerateInputError("underdetermined fit: " + std::to_string(distinct.size()) +
                                   " distinct anchors for degree " + std::to_string(degree));
    }

    const Eigen::Index n = static_cast<Eigen::Index>(anchors.size());
    DesignMatrix X = DesignMatrix::with_intercept(n);
    Eigen::Map<const Eigen::VectorXd> a(anchors.data(), n);
    Eigen::VectorXd power = Eigen::VectorXd::Ones(n);
    for (int d = 1; d <= degree; ++d) {
        power = power.cwiseProduct(a);
        X.add("anchor^" + std::to_string(d), power);
    }
    const RegressionFit fit = ols_fit(X, Eigen::Map<const Eigen::VectorXd>(beliefs.data(), n));

    ResponseCurve curve;
    curve.anchor_scale = scale;
    for (int d = 0; d <= degree; ++d) curve.coefficients[d] = fit.coef(d);
    curve.domain_lo = *std::min_element(anchors.begin(), anchors.end());
    curve.domain_hi = *std::max_element(anchors.begin(), anchors.end());
    return curve;
}

namespace {

double eval(const ResponseCurve& c, double x) {
    const auto& b = c.coefficients;
    return ((b[3] * x + b[2]) * x + b[1]) * x + b[0];
}

// Real roots of the derivative c1 + 2 c2 x + 3 c3 x^2.
std::vector<double> derivative_roots(const ResponseCurve& curve) {
    const double c1 = curve.coefficients[1];
    const double c2 = curve.coefficients[2];
    const double c3 = curve.coefficients[3];
    const double a = 3.0 * c3, b = 2.0 * c2;
    const double scale = std::max({std::fabs(a), std::fabs(b), std::fabs(c1)});
    if (scale == 0.0) return {};

    if (std::fabs(a) <= 1e-14 * scale) {
        if (std::fabs(b) <= 1e-14 * scale) return {};  // constant nonzero slope
        return {-c1 / b};
    }
    const double disc = b * b - 4.0 * a * c1;
    if (disc < 0.0) return {};
    const double sq = std::sqrt(disc);
    // Citardauq form for the root where b and sq cancel.
    const double q = -0.5 * (b + std::copysign(sq, b));
    std::vector<double> roots{q / a};
    if (q != 0.0) roots.push_back(c1 / q);
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace

CurveExtremaResult curve_extrema(const ResponseCurve& curve) {
    if (!(curve.domain_lo < curve.domain_hi)) {
        throw DomainError("curve domain is empty");
    }
    const auto& c = curve.coefficients;
    if (c[1] == 0.0 && c[2] == 0.0 && c[3] == 0.0) {
        throw DegenerateInputError("flat response curve has no extrema");
    }

    std::vector<double> candidates{curve.domain_lo, curve.domain_hi};
    bool interior = false;
    for (double r : derivative_roots(curve)) {
        if (r > curve.domain_lo && r < curve.domain_hi) {
            candidates.push_back(r);
            interior = true;
        }
    }

    CurveExtremaResult res;
    res.monotone = !interior;
    double best_min = std::numeric_limits<double>::infinity();
    double best_max = -std::numeric_limits<double>::infinity();
    for (double x : candidates) {
        const double y = eval(curve, x);
        if (y < best_min) {
            best_min = y;
            res.argmin = x;
        }
        if (y > best_max) {
            best_max = y;
            res.argmax = x;
        }
    }
    return res;
}

double predicted_mean_belief(const ResponseCurve& curve, double anchor) {
    const double slack = 1e-9 * (curve.domain_hi - curve.domain_lo);
    if (anchor < curve.domain_lo - slack || anchor > curve.domain_hi + slack) {
        throw ExtrapolationError("anchor " + std::to_string(anchor) +
                                 " outside fitted domain [" + std::to_string(curve.domain_lo) +
                                 ", " + std::to_string(curve.domain_hi) + "]");
    }
    return eval(curve, anchor);
}

double anchor_percentile(double anchor, const std::vector<double>& baseline) {
    if (baseline.empty()) throw InsufficientDataError("empty baseline sample");
    std::size_t at_or_below = 0;
    for (double b : baseline) {
        if (b <= anchor) ++at_or_below;
    }
    return 100.0 * static_cast<double>(at_or_below) / static_cast<double>(baseline.size());
}

double empirical_percentile_value(const std::vector<double>& sample, double percentile) {
    if (sample.empty()) throw InsufficientDataError("empty sample");
    if (percentile < 0.0 || percentile > 100.0) throw DomainError("percentile outside [0,100]");
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::size_t rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
    if (rank == 0) rank = 1;
    if (rank > sorted.size()) rank = sorted.size();
    return sorted[rank - 1];
}

AnchorPlan recommend_anchors(const std::vector<double>& baseline, AnchorRule rule,
                             const ExperimentDataset* pilot, AnchorScale pilot_scale) {
    AnchorPlan plan;
    plan.rule = rule;

    if (rule == AnchorRule::PercentileRule) {
        if (baseline.size() < 20) {
            throw InsufficientDataError("percentile rule needs a baseline of n >= 20");
        }
        const auto [mn, mx] = std::minmax_element(baseline.begin(), baseline.end());
        if (*mn == *mx) throw DegenerateInputError("baseline beliefs are all identical");
        plan.low = empirical_percentile_value(baseline, 5.0);
        plan.high = empirical_percentile_value(baseline, 95.0);
        plan.percentiles = {anchor_percentile(plan.low, baseline),
                            anchor_percentile(plan.high, baseline)};
        if (pilot != nullptr) {
            const ResponseCurve curve = fit_response_polynomial(*pilot, 3, pilot_scale);
            const double lo_s = to_anchor_scale(plan.low, pilot_scale);
            const double hi_s = to_anchor_scale(plan.high, pilot_scale);
            if (lo_s >= curve.domain_lo && hi_s <= curve.domain_hi) {
                plan.predicted_beliefs = {predicted_mean_belief(curve, lo_s),
                                          predicted_mean_belief(curve, hi_s)};
                plan.predicted_delta =
                    plan.predicted_beliefs->second - plan.predicted_beliefs->first;
            }
        }
        return plan;
    }

    if (pilot == nullptr) throw DomainError("curve-extrema rule needs pilot data");
    const ResponseCurve curve = fit_response_polynomial(*pilot, 3, pilot_scale);
    const CurveExtremaResult ext = curve_extrema(curve);

    const double raw_at_min = from_anchor_scale(ext.argmin, pilot_scale);
    const double raw_at_max = from_anchor_scale(ext.argmax, pilot_scale);
    plan.low = std::min(raw_at_min, raw_at_max);
    plan.high = std::max(raw_at_min, raw_at_max);
    const double b_low = predicted_mean_belief(curve, to_anchor_scale(plan.low, pilot_scale));
    const double b_high = predicted_mean_belief(curve, to_anchor_scale(plan.high, pilot_scale));
    plan.predicted_beliefs = {b_low, b_high};
    plan.predicted_delta = b_high - b_low;
    if (!baseline.empty()) {
        plan.percentiles = {anchor_percentile(plan.low, baseline),
                            anchor_percentile(plan.high, baseline)};
    }
    return plan;
}

double design_variance_ratio(double delta_a, double delta_b) {
    if (!(delta_a > 0.0) || !(delta_b > 0.0)) {
        throw DomainError("mean-belief differences must be > 0");
    }
    const double r = delta_a / delta_b;
    return r * r;
}

std::vector<double> load_anchor_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open anchor grid: " + path.string());
    std::vector<double> grid;
    std::string line;
    while (std::getline(in, line)) {
        std::string cell = line;
        if (auto comma = cell.find(','); comma != std::string::npos) cell = cell.substr(0, comma);
        const auto b = cell.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = cell.find_last_not_of(" \t\r");
        cell = cell.substr(b, e - b + 1);
        if (cell.empty() || cell[0] == '#') continue;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
            if (grid.empty()) continue;  // header line
            throw ParseError("anchor grid " + path.string() + ": cannot parse '" + cell + "'");
        }
        grid.push_back(v);
    }
    if (grid.empty()) throw ParseError("anchor grid " + path.string() + " contains no values");
    return grid;
}

}  // namespace abcd
