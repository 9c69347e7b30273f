#pragma once

#include <vector>

namespace sconcave::bounds {

// Exponent/dimension pair for an s-concave distribution, s <= 0.
// geometry_valid marks the window where all geometric rate/width/variance
// constants below are defined; second_moment_1d marks where a univariate
// member has a finite second moment.
struct SConcaveParams {
    double s;
    int n;
    bool geometry_valid;     // -1/(2n+3) <= s <= 0
    bool second_moment_1d;   // s > -1/3

    SConcaveParams(double s_, int n_);
};

// Multipliers for constants the source bounds leave unnamed.  All default
// to 1; experiment configs may calibrate and freeze them.
struct Knobs {
    double c_f1 = 1.0;     // disagreement rate multiplier
    double c1 = 1.0;       // outside-band constant
    double C0 = 1.0;       // variance bound constant
    double c_theta = 1.0;  // disagreement coefficient multiplier
    double c_err = 1.0;    // error-halving constant inside the round count
    double c_b = 1.0;      // band radius multiplier
    double c_tau = 1.0;    // hinge scale multiplier
    double c_r = 1.0;      // localization radius multiplier
    double c_kappa = 1.0;  // per-round conditional error multiplier
    double c_m = 1.0;      // label budget multiplier
    double c0 = 1.0;       // adversarial noise budget: requires eta < c0 * eps
    double C_vc = 1.0;     // passive sample size constant
};

// s / (1 + m s); the exponent surviving after integrating out m dimensions.
double marginal_gamma(double s, int m);

// (1 + gamma)^{-1/gamma} for -1 < gamma <= 0; mass of a halfspace through
// the centroid.  Evaluates to 1/e at gamma = 0.
double halfspace_mass_lower(double gamma);

// Band probability constants: f2 * t < Pr[|w.x| <= t] <= f3 * t (t <= d for
// the lower half), plus the width threshold d.
struct BandBounds {
    double f2;
    double f3;
    double d;
};
BandBounds band_bounds(const SConcaveParams& p);

// Disagreement rate per radian: d_D(u, v) >= f1 * theta(u, v).
double disagreement_lower_f1(const SConcaveParams& p, double c = 1.0);

// Band margin width factor: length per radian of angle such that
// Pr[disagree and |v.x| >= f4 * theta] <= c1 * f_rate * theta.
double band_margin_f4(const SConcaveParams& p, double c1, double f_rate);

// Conditional second moment factor: E[(a.x)^2 | |u.x| <= t] <= f5 (r^2+t^2).
double variance_bound_f5(const SConcaveParams& p, double C0);

// Upper envelope beta1 (1 - s beta2 ||x||)^{1/s}, the center floor value
// (a appears inside the envelope derivation), and the companion radius d
// below which the density is within fixed ratio of its center value.
struct EnvelopeCoeffs {
    double beta1;
    double beta2;
    double a;
    double d;
};
EnvelopeCoeffs density_envelope(int n, double s);

// Pr[||x|| > sqrt(n) t] <= [1 - c s t/(1+ns)]^{(1+ns)/s}, t >= 16,
// clamped to [0, 1].
double tail_bound(const SConcaveParams& p, double t, double c = 1.0);

// Reflection constant for cones: Pr[x in -R] <= K * Pr[x in R] for any
// region R spanned by directions, n >= 3.
double baum_reflection_K(const SConcaveParams& p);

// Upper bound on the disagreement coefficient at scale eps.
double disagreement_coefficient_bound(const SConcaveParams& p, double eps,
                                      const Knobs& knobs = {});

// Aggregate record of the geometric constants (n >= 3, s < 0).
struct GeometryBounds {
    double f1;
    double f2;
    double f3;
    double f4;
    double f5;
    double d;
    double beta1;
    double beta2;
    double K;
    double gamma_marginal;  // s / (1 + n s)
};
GeometryBounds geometry_bounds(const SConcaveParams& p, const Knobs& knobs = {});

enum class Model { realizable, adversarial };

// Per-round schedule for margin-based active learning.  b has T+1 entries
// (index 0 is the pre-round width); tau, r, kappa, m have T entries for
// rounds 1..T.
struct ALSchedule {
    int T;
    Model model;
    Knobs knobs;  // the constants that instantiated the asymptotic notation
    std::vector<double> b;
    std::vector<double> tau;
    std::vector<double> r;
    std::vector<double> kappa;
    std::vector<long long> m;
};
ALSchedule al_schedule(const SConcaveParams& p, double eps, double delta,
                       Model model, const Knobs& knobs = {});

// ceil(C ((vcdim/eps) log(1/eps) + (1/eps) log(1/delta))).
long long vc_sample_size(double eps, double delta, int vcdim, double C = 1.0);

// Sample sizes for the intersection-of-halfspaces learner.
struct BaumSizes {
    long long m1;  // quadratic-fit sample inside the separating halfspace
    long long m2;  // positive-count threshold for the non-degenerate branch
    long long m3;  // initial draw
};
BaumSizes baum_sizes(double eps, double delta, int n, double K, double C = 1.0);

// floor(sqrt(n)/2 (f1/(2 eps))^{n-1} - 1), or 0 when below 1: size of an
// eps-packing of halfspaces under the disagreement metric.
long long packing_lower_bound(const SConcaveParams& p, double eps, double c = 1.0);

}  // namespace sconcave::bounds
