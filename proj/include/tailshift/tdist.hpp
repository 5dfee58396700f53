#pragma once

// Student-t distribution function and quantile, from the regularized
// incomplete beta function evaluated by Lentz's continued fraction.

namespace tailshift {

// I_x(a, b) for a, b > 0, x in [0, 1].
double incomplete_beta(double a, double b, double x);

double student_t_cdf(double x, double df);
// Inverse of student_t_cdf for q in (0, 1); Newton steps from a bracketed
// bisection start, accurate to about 1e-12 relative.
double student_t_quantile(double q, double df);

double normal_cdf(double x);
double normal_pdf(double x);
// Acklam's rational start refined by Newton steps on erfc.
double normal_quantile(double q);

}  // namespace tailshift
