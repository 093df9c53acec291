#pragma once

#include <string>
#include <vector>

namespace abcd {

struct CurveSeries {
    enum class Kind { KDE, LocalLinear, EffectBar };

    std::vector<double> x;  // strictly increasing
    std::vector<double> y;
    std::vector<double> ci_lo;  // empty when no interval is defined
    std::vector<double> ci_hi;
    Kind kind = Kind::KDE;
    std::vector<std::string> warnings;
};

// Silverman's rule of thumb: 0.9 * min(SD, IQR/1.34) * n^(-1/5).
double silverman_bandwidth(const std::vector<double>& values);

// Gaussian-kernel density on a 512-point grid spanning the data +- 3
// bandwidths. bandwidth <= 0 selects Silverman's rule.
CurveSeries kde(const std::vector<double>& values, double bandwidth = 0.0);

// Local linear regression with Gaussian kernel weights at 101 evenly spaced
// points over [min x, max x], with pointwise 95% CIs from the weighted
// least-squares variance at each point. bandwidth <= 0 selects range/10.
// Windows with fewer than 2 distinct x are widened, with a warning.
CurveSeries local_linear_smooth(const std::vector<double>& x, const std::vector<double>& y,
                                double bandwidth = 0.0);

}  // namespace abcd
