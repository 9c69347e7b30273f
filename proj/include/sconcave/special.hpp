#pragma once

#include <functional>

namespace sconcave {

// log B(a, b) = lgamma(a) + lgamma(b) - lgamma(a+b), a > 0, b > 0.
double log_beta(double a, double b);
double beta_fn(double a, double b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double reg_inc_beta(double a, double b, double x);

// Invert I_x(a, b) = p by bisection on x; 60 halvings (interval < 1e-12).
double reg_inc_beta_inv(double a, double b, double p);

// Adaptive Simpson quadrature to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

}  // namespace sconcave
