#pragma once

#include <string>
#include <vector>

#include "sconcave/rng.hpp"

namespace sconcave::densities {

/* One-sided power-law density A x^{1/s} on [x0, inf), x0 = (s+1)/(-s).
   Its distribution function has an exact closed form, and its centroid
   halfspace mass attains the general lower bound with equality, which makes
   it the sharp test case for the 1-D halfspace inequality. */
struct Pareto1D {
    double s;
    double x0;  // domain start
    double A;   // normalizer (-1-1/s)^{-1/s}

    double density(double x) const;
    double tail(double t) const;  // Pr[X > t]
    double cdf(double x) const;
    double quantile(double u) const;
    double mean() const;  // finite only for s > -1/2
};
Pareto1D make_pareto1d(double s);
double pareto_tail(const Pareto1D& m, double t);

/* Two-sided density c (1 + b|x|)^{1/s} with b chosen for unit variance and c
   the exact normalizer; s = 0 degenerates to the Laplace density with the
   same calibration. */
struct Symmetric1D {
    double s;
    double b;
    double c;

    double density(double x) const;
    double cdf(double x) const;
    double quantile(double u) const;
};
Symmetric1D make_symmetric1d(double s);

/* Radial density c (1 + b r)^{1/s} in n dimensions, b chosen so that every
   coordinate has unit variance (hence isotropic: mean zero by symmetry).
   s = 0 degenerates to the exponential radial profile c e^{-br}. */
struct RadialND {
    int n;
    double s;
    double b;
    double c;  // pointwise normalizer

    double density(const double* x) const;  // x has n entries
    double density_at_radius(double r) const;
    double radial_pdf(double r) const;  // marginal law of ||x||
    double radial_cdf(double r) const;
    double radial_quantile(double p) const;
};
RadialND make_radial_nd(int n, double s);

/* Unnormalized half-line profile alpha (1 + beta t)^{1/s} on t >= 0, the
   kernel whose power moments are exact Beta values. */
struct BaselineHalfLine {
    double alpha;
    double beta;
    double s;

    double density(double t) const;
};
// integral of t^order h(t) over [0, inf); throws when the moment diverges
double baseline_moment(const BaselineHalfLine& h, int order);

// i.i.d. draws; the stream is advanced by the call
std::vector<double> sample(const Pareto1D& m, int count, RngStream& stream);
std::vector<double> sample(const Symmetric1D& m, int count, RngStream& stream);
// row-major (count x n) batch
std::vector<double> sample(const RadialND& m, int count, RngStream& stream);

// uniform point on the unit sphere in R^n, appended as one row
std::vector<double> unit_vector(int n, RngStream& stream);

// one row per point, header x1..xdim, 17 significant digits
std::string points_csv(const std::vector<double>& pts, int dim);

}  // namespace sconcave::densities
