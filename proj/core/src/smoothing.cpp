#include "abcd/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "abcd/distributions.hpp"
#include "abcd/errors.hpp"

namespace abcd {

namespace {

constexpr int kKdeGridPoints = 512;
constexpr int kSmoothGridPoints = 101;

double sample_sd(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1.0));
}

// Type-7 quantile (linear interpolation), the usual convention behind IQR.
double quantile7(std::vector<double> sorted, double p) {
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(const std::vector<double>& values) {
    if (values.size() < 2) throw InsufficientDataError("bandwidth needs at least 2 values");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() == sorted.back()) {
        throw DegenerateInputError("all values identical; zero spread");
    }
    const double sd = sample_sd(values);
    const double iqr = quantile7(sorted, 0.75) - quantile7(sorted, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);  // heavy ties on one side
    return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

CurveSeries kde(const std::vector<double>& values, double bandwidth) {
    if (values.size() < 2) throw InsufficientDataError("kde needs at least 2 values");
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    if (*mn == *mx) throw DegenerateInputError("all values identical; zero spread");
    const double h = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(values);

    CurveSeries series;
    series.kind = CurveSeries::Kind::KDE;
    const double lo = *mn - 3.0 * h;
    const double hi = *mx + 3.0 * h;
    const double step = (hi - lo) / (kKdeGridPoints - 1);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h);

    series.x.resize(kKdeGridPoints);
    series.y.resize(kKdeGridPoints);
    for (int g = 0; g < kKdeGridPoints; ++g) {
        const double gx = lo + g * step;
        double density = 0.0;
        for (double v : values) density += dist::normal_pdf((gx - v) / h);
        series.x[g] = gx;
        series.y[g] = density * norm;
    }
    return series;
}

CurveSeries local_linear_smooth(const std::vector<double>& x, const std::vector<double>& y,
                                double bandwidth) {
    if (x.size() != y.size()) throw AlignmentError("x and y differ in length");
    if (x.size() < 5) throw InsufficientDataError("local linear smooth needs at least 5 points");
    for (double v : x) {
        if (!std::isfinite(v)) throw DomainError("non-finite x value");
    }
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mn == *mx) throw DegenerateInputError("all x identical");
    const double range = *mx - *mn;
    const double h0 = bandwidth > 0.0 ? bandwidth : range / 10.0;

    CurveSeries series;
    series.kind = CurveSeries::Kind::LocalLinear;
    const double step = range / (kSmoothGridPoints - 1);
    bool widened = false;

    for (int g = 0; g < kSmoothGridPoints; ++g) {
        const double x0 = *mn + g * step;

        double h = h0;
        std::vector<double> w(x.size());
        for (int attempt = 0;; ++attempt) {
            std::set<double> distinct;
            for (std::size_t i = 0; i < x.size(); ++i) {
                w[i] = dist::normal_pdf((x[i] - x0) / h);
                if (w[i] > 1e-12) distinct.insert(x[i]);
            }
            if (distinct.size() >= 2 || attempt >= 60) break;
            h *= 2.0;
            widened = true;
        }

        // Weighted least squares of y on (1, x - x0); the intercept is the
        // smoothed value at x0.
        double sw = 0, swx = 0, swxx = 0, swy = 0, swxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - x0;
            sw += w[i];
            swx += w[i] * d;
            swxx += w[i] * d * d;
            swy += w[i] * y[i];
            swxy += w[i] * d * y[i];
        }
        const double det = sw * swxx - swx * swx;
        double a0, a1;
        if (det > 1e-300) {
            a0 = (swxx * swy - swx * swxy) / det;
            a1 = (sw * swxy - swx * swy) / det;
        } else {
            a0 = swy / sw;
            a1 = 0.0;
        }

        // Pointwise variance of the WLS intercept under local homoskedastic
        // noise: sigma^2 * [ (X'WX)^-1 X'W^2X (X'WX)^-1 ]_00 with sigma^2
        // from the weighted residuals.
        double wrss = 0.0, sw2 = 0, sw2x = 0, sw2xx = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double d = x[i] - x0;
            const double r = y[i] - (a0 + a1 * d);
            wrss += w[i] * r * r;
            sw2 += w[i] * w[i];
            sw2x += w[i] * w[i] * d;
            sw2xx += w[i] * w[i] * d * d;
        }
        const double eff_df = std::max(sw > 0 ? sw * sw / std::max(sw2, 1e-300) - 2.0 : 0.0, 1.0);
        const double sigma2 = wrss / std::max(sw, 1e-300) * (eff_df + 2.0) / eff_df;
        double var0 = 0.0;
        if (det > 1e-300) {
            const double i00 = swxx / det, i01 = -swx / det;
            // first row of (X'WX)^-1 X'W^2X (X'WX)^-1
            const double m00 = i00 * sw2 + i01 * sw2x;
            const double m01 = i00 * sw2x + i01 * sw2xx;
            var0 = sigma2 * (m00 * i00 + m01 * i01);
        } else {
            var0 = sigma2 * sw2 / (sw * sw);
        }
        const double half_width = 1.96 * std::sqrt(std::max(var0, 0.0));

        series.x.push_back(x0);
        series.y.push_back(a0);
        series.ci_lo.push_back(a0 - half_width);
        series.ci_hi.push_back(a0 + half_width);
    }
    if (widened) {
        series.warnings.push_back(
            "bandwidth widened in sparse windows to keep 2 distinct x values");
    }
    return series;
}

}  // namespace abcd
