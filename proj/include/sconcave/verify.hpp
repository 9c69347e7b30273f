#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "sconcave/bounds.hpp"
#include "sconcave/densities.hpp"
#include "sconcave/rng.hpp"

namespace sconcave::verify {

enum class Direction { LE, GE, EQ };
enum class Verdict { Pass, Fail, Inconclusive };

// Raw Monte Carlo summary: estimate, its standard error, and the sample count.
struct McCore {
    double estimate = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
};

/* One verified inequality.  z_margin is the signed distance from the bound in
   standard-error units, oriented so that positive means the claim holds; the
   verdict needs a 3-sigma margin either way, anything nearer is
   inconclusive.  For EQ rows the verdict is pass iff |z_margin| <= 3. */
struct McReport {
    std::string theorem_id;
    double s = 0.0;
    int n = 0;
    std::string params;  // "k=v;k=v", no commas (CSV-safe)
    double estimate = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
    double bound = 0.0;
    Direction direction = Direction::LE;
    Verdict verdict = Verdict::Inconclusive;
    double z_margin = 0.0;
};

McReport make_report(std::string theorem_id, double s, int n, std::string params,
                     const McCore& core, double bound, Direction direction);

// any of the sampling families, presented as a batch source of row-major points
using AnyModel =
    std::variant<densities::Pareto1D, densities::Symmetric1D, densities::RadialND>;
int model_dim(const AnyModel& model);
std::vector<double> draw(const AnyModel& model, int count, RngStream& stream);

// hit fraction of the event with binomial standard error; n >= 1000
McCore mc_probability(const AnyModel& model, const std::function<bool(const double*)>& event,
                      long long n, RngStream& stream);

/* Band mass f2 t < Pr[|w.x| <= t] <= f3 t: one upper report per grid point,
   plus a lower report where t <= d.  A single sample batch is shared across
   the grid. */
std::vector<McReport> verify_band(const bounds::SConcaveParams& p,
                                  const densities::RadialND& model,
                                  const std::vector<double>& w,
                                  const std::vector<double>& t_grid, long long n,
                                  RngStream& stream);

// Pr[sign(u.x) != sign(v.x)] >= f1 * angle(u, v)
McReport verify_disagreement(const bounds::SConcaveParams& p, const densities::RadialND& model,
                             const std::vector<double>& u, const std::vector<double>& v,
                             long long n, RngStream& stream);

// Pr[signs disagree and |v.x| >= f4 angle] <= c1 f1 angle, for angle < pi/2
McReport verify_disagreement_outside_band(const bounds::SConcaveParams& p,
                                          const densities::RadialND& model,
                                          const std::vector<double>& u,
                                          const std::vector<double>& v, double c1, long long n,
                                          RngStream& stream);

/* E[(a.x)^2 | |u.x| <= t] <= f5 (r^2 + t^2) with r = ||u - a||, by rejection
   into the band until n_accept points land; the standard error comes from 20
   batch means.  Throws band-starvation if acceptance drops below 1e-3. */
McReport verify_conditional_variance(const bounds::SConcaveParams& p,
                                     const densities::RadialND& model,
                                     const std::vector<double>& u, const std::vector<double>& a,
                                     double t, long long n_accept, RngStream& stream);

/* Pr[||x|| > sqrt(n) t] against the closed-form tail bound at constant
   c_knob, one MC report per grid point (t >= 16); a Pareto model adds an
   exact-tail report per point since its tail has a closed form. */
std::vector<McReport> verify_tail(const bounds::SConcaveParams& p, const AnyModel& model,
                                  const std::vector<double>& t_grid, double c_knob, long long n,
                                  RngStream& stream);

// Pr[w.x >= 0] >= (1+gamma)^{-1/gamma} at gamma = s/(1+(n-1)s)
McReport verify_halfspace(const bounds::SConcaveParams& p, const AnyModel& model,
                          const std::vector<double>& w, long long n, RngStream& stream);

// worst over sampled points of density(x) - beta1 (1 - s beta2 ||x||)^{1/s} <= 1e-12
McReport verify_density_envelope(const bounds::SConcaveParams& p,
                                 const densities::RadialND& model, int n_points,
                                 RngStream& stream);

/* Deterministic 1-D density bounds for the symmetric unit-variance family:
   peak <= (1+s)/(1+3s) and center value >= sqrt(1/(3 (1+gamma)^{3/gamma})),
   gamma = s/(1+s). */
std::vector<McReport> verify_univariate_bounds(double s);

// deterministic convexity check of fn^gamma over midpoint triples of the grid
struct ConcavityReport {
    Verdict verdict = Verdict::Pass;
    double worst_slack = 0.0;  // max of lhs - rhs over triples; pass iff <= 1e-9
    double at_a = 0.0, at_mid = 0.0, at_b = 0.0;  // first violating triple
};
ConcavityReport check_gamma_concavity(const std::function<double(double)>& fn, double gamma,
                                      const std::vector<double>& grid);

/* Worst ratio Pr[x in -R]/Pr[x in R] over random three-halfspace cones R
   against the reflection constant K; trials with fewer than 10 hits in R are
   skipped and counted in params. */
McReport reflection_experiment(const bounds::SConcaveParams& p, const densities::RadialND& model,
                               int trials, long long n_samples, RngStream& stream);

/* Greedy packing under the estimated disagreement metric with a shared
   common-random-numbers sample; estimate = survivor count, bound =
   packing_lower_bound (reported, not asserted). */
McReport packing_experiment(const bounds::SConcaveParams& p, const densities::RadialND& model,
                            double eps, int n_candidates, long long n_mc, RngStream& stream);

// one row per report: theorem,s,n,params,estimate,std_error,n_samples,bound,
// direction,verdict,z_margin (doubles at 17 significant digits)
std::string reports_csv(const std::vector<McReport>& reports);

}  // namespace sconcave::verify
