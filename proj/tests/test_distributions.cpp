#include <doctest.h>

#include <cmath>

#include "abcd/distributions.hpp"
#include "abcd/errors.hpp"

using namespace abcd;

namespace {

struct TPoint {
    double t;
    double df;
    double cdf;
};

// Reference values computed with 50-digit arithmetic via the regularized
// incomplete beta (mpmath), frozen here.
constexpr TPoint kTReference[] = {
    {0.0, 1, 0.5},
    {1.0, 1, 0.75},
    {-1.0, 2, 0.21132486540518712},
    {2.0, 3, 0.93033701572057841},
    {-2.5, 5, 0.027245049671188121},
    {0.5, 10, 0.68605319712851353},
    {1.96, 30, 0.97032884355197476},
    {-1.96, 30, 0.029671156448025238},
    {3.0, 50, 0.99789914840646588},
    {-4.0, 100, 6.0761822150380839e-5},
    {2.227, 1010, 0.98691645993907461},
    {1.96, 1000000, 0.9750019662073651},
    {-0.7, 7, 0.2532587760977999},
    {5.0, 20, 0.99996563485710229},
    {-10.0, 15, 2.4984490714624723e-8},
    {0.25, 4, 0.59254899427040939},
    {12.5, 2, 0.99683039594822766},
    {-25.0, 60, 1.0071186528976261e-33},
    {50.0, 200, 1.0},
    {-50.0, 1000000, 5.1482839195057938e-545},
};

}  // namespace

TEST_CASE("t_cdf matches high-precision reference at 20 spot points") {
    for (const auto& pt : kTReference) {
        CHECK(dist::t_cdf(pt.t, pt.df) == doctest::Approx(pt.cdf).epsilon(0).scale(1e-8));
        CHECK(std::fabs(dist::t_cdf(pt.t, pt.df) - pt.cdf) < 1e-8);
    }
}

TEST_CASE("t_cdf symmetry and trivia") {
    for (double df : {1.0, 7.0, 100.0, 1e6}) {
        CHECK(dist::t_cdf(0.0, df) == doctest::Approx(0.5));
        for (double t : {0.3, 1.7, 4.2}) {
            CHECK(dist::t_cdf(-t, df) + dist::t_cdf(t, df) == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("t_cdf approaches the normal limit for huge df") {
    // Normal CDF at 1.96 is 0.975002104852.
    CHECK(std::fabs(dist::t_cdf(1.96, 1e6) - 0.97500) < 1e-4);
    CHECK(std::fabs(dist::normal_cdf(1.96) - 0.975002104852) < 1e-9);
}

TEST_CASE("two-sided p for t = 2.227 with 1010 df is about 0.026") {
    CHECK(dist::t_two_sided_p(2.227, 1010) == doctest::Approx(0.02616708012).epsilon(1e-6));
}

TEST_CASE("t_cdf rejects df < 1") {
    CHECK_THROWS_AS(dist::t_cdf(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(dist::t_cdf(1.0, 0.0), DomainError);
}

TEST_CASE("F(1, df) is the square of t(df)") {
    for (double df : {3.0, 10.0, 250.0}) {
        for (double t : {0.5, 1.0, 2.5}) {
            const double via_t = 2.0 * dist::t_cdf(t, df) - 1.0;
            CHECK(dist::f_cdf(t * t, 1.0, df) == doctest::Approx(via_t).epsilon(1e-12));
        }
    }
}

TEST_CASE("f_cdf edge cases") {
    CHECK(dist::f_cdf(0.0, 3, 10) == 0.0);
    CHECK(dist::f_cdf(std::numeric_limits<double>::infinity(), 3, 10) == 1.0);
    CHECK_THROWS_AS(dist::f_cdf(1.0, 0, 10), DomainError);
}

TEST_CASE("t_quantile inverts t_cdf") {
    for (double df : {2.0, 15.0, 999.0}) {
        for (double p : {0.025, 0.2, 0.5, 0.9, 0.975}) {
            CHECK(dist::t_cdf(dist::t_quantile(p, df), df) == doctest::Approx(p).epsilon(1e-10));
        }
    }
    CHECK_THROWS_AS(dist::t_quantile(0.0, 10), DomainError);
    CHECK_THROWS_AS(dist::t_quantile(1.0, 10), DomainError);
}

TEST_CASE("incomplete beta basics") {
    CHECK(dist::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(dist::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    // I_x(1,1) = x for the uniform distribution.
    for (double x : {0.1, 0.37, 0.92}) {
        CHECK(dist::incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-13));
    }
}
