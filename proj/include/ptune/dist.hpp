#pragma once

// Probability distributions used by the screening and inference code:
// CDFs of the standard normal, Student t and Fisher F distributions,
// plus the quantile functions the normal plot and Lenth margins need.
// CDFs are accurate to ~1e-14 on double inputs; quantiles to ~1e-12.

#include <stdexcept>

namespace ptune::dist {

// Regularized incomplete beta function I_x(a, b), a,b > 0, x in [0,1].
double inc_beta(double a, double b, double x);

double normal_cdf(double x);
// Inverse standard normal CDF (Wichura's PPND16 rational approximations).
double normal_quantile(double p);

// Student t CDF with real (not necessarily integral) dof > 0.
double t_cdf(double x, double dof);
double t_quantile(double p, double dof);

// Fisher F CDF, dof1, dof2 > 0, x >= 0.
double f_cdf(double x, double dof1, double dof2);

enum class Kind { normal, student_t, fisher_f };

struct Params {
  double dof1 = 0.0;  // t dof, or F numerator dof
  double dof2 = 0.0;  // F denominator dof
};

// Generic entry point used by report code; throws on invalid parameters.
double cdf(Kind kind, const Params& params, double x);

}  // namespace ptune::dist
