#pragma once

namespace abcd::dist {

// Regularized incomplete beta I_x(a, b), evaluated by the continued-fraction
// expansion (modified Lentz), switching to the symmetric form for fast
// convergence. Accurate to ~1e-14 for moderate a, b.
double incomplete_beta(double a, double b, double x);

// Student's t CDF; df >= 1 required. Absolute accuracy better than 1e-8 for
// |t| <= 50 and df up to 1e6.
double t_cdf(double t, double df);

// Two-sided p-value for a t statistic.
double t_two_sided_p(double t, double df);

// Inverse of t_cdf in p for fixed df (bisection; p in (0,1)).
double t_quantile(double p, double df);

// CDF of the F distribution with (d1, d2) degrees of freedom.
double f_cdf(double x, double d1, double d2);

double normal_cdf(double z);
double normal_pdf(double z);

}  // namespace abcd::dist
