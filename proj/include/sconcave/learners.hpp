#pragma once

#include <functional>
#include <optional>
#include <queue>
#include <vector>

#include "sconcave/bounds.hpp"
#include "sconcave/densities.hpp"
#include "sconcave/rng.hpp"
#include "sconcave/verify.hpp"

namespace sconcave::learners {

enum class FlipStrategy { boundary_proximal, uniform };

/* Label source for halfspace learning against a planted unit target w*.
   Realizable mode answers sign(w*.x).  Adversarial mode may flip labels,
   spending at most an eta fraction of the queries issued so far: the flip
   budget holds at every prefix of the stream, not just in aggregate.

   boundary_proximal concentrates its flips on the queries whose margin
   |w*.x| falls below the running eta-quantile of all margins seen, i.e. the
   points closest to the decision boundary; uniform flips each query with
   probability eta.  The uniform strategy owns an RngStream and consumes one
   draw per query whether or not a flip occurs, so the label sequence for a
   given stream of points is reproducible regardless of chunking. */
class LabelOracle {
  public:
    static LabelOracle realizable(std::vector<double> wstar);
    static LabelOracle adversarial(std::vector<double> wstar, double eta,
                                   FlipStrategy strategy, RngStream stream);

    // +/-1 label for one point (dimension = target size); counts the query
    int query(const double* x);

    const std::vector<double>& target() const { return wstar_; }
    bool adversarial_mode() const { return adversarial_; }
    double eta() const { return eta_; }
    FlipStrategy strategy() const { return strategy_; }
    long long queries() const { return queries_; }
    long long flips() const { return flips_; }

  private:
    LabelOracle(std::vector<double> wstar, bool adversarial, double eta,
                FlipStrategy strategy, std::optional<RngStream> stream);

    std::vector<double> wstar_;
    bool adversarial_;
    double eta_;
    FlipStrategy strategy_;
    std::optional<RngStream> stream_;
    long long queries_ = 0;
    long long flips_ = 0;
    // exact running-quantile tracker for boundary_proximal: low_margins_
    // holds the ceil(eta * queries) smallest margins seen (largest on top,
    // the flip threshold), high_margins_ the rest, smallest on top
    std::priority_queue<double> low_margins_;
    std::priority_queue<double, std::vector<double>, std::greater<double>> high_margins_;
};

/* Outcome of one active-learning (or passive) run.  round_w stores the
   hypothesis after each round, row-major T x n, so audits can replay
   per-round quantities without rerunning the learner. */
struct ALRunResult {
    std::vector<double> final_w;           // unit hypothesis after round T
    std::vector<long long> round_labels;   // labels consumed to produce w_k
    long long total_labels = 0;
    double error = 0.0;      // Pr[sign(w_T.x) != sign(w*.x)] on fresh points
    double error_se = 0.0;
    std::vector<double> round_angle;       // angle(w_k, w*) per round
    std::vector<double> round_w;           // row-major per-round hypotheses
    int small_norm_rounds = 0;  // hinge minimizers renormalized from below 1/2
};

/* Margin-based active learning, noise-free case.  Round 1 fits a consistent
   halfspace to an unfiltered batch of m_1 labeled draws; round k+1 refills
   the working set with m_{k+1} points drawn from the band |w_k.x| <= b_k
   (only points inside the band are sent to the oracle) and refits.  The
   schedule (T, b, m) comes from al_schedule(realizable).  Stream children:
   "round"/k for the batch feeding round k, "eval" for the error estimate on
   1e5 fresh points.
   Throws RegimeError when the oracle can flip labels (eta > 0), propagates
   NonSeparableError from the halfspace fit, and throws StreamExhaustedError
   when a band refill rejects more than 1e8 draws. */
ALRunResult margin_al_realizable(const bounds::SConcaveParams& p,
                                 const densities::RadialND& model,
                                 LabelOracle& oracle, double eps, double delta,
                                 const bounds::Knobs& knobs, RngStream& stream);

/* Margin-based active learning under bounded adversarial label noise
   (requires eta < c0 * eps).  The initial hypothesis w_0 is a random unit
   vector (stream child "init") and the round-1 working set is drawn from the
   band |w_0.x| <= b_0.  Round k minimizes the tau_k-rescaled hinge loss over
   ball(w_{k-1}, r_k) intersected with the unit ball to accuracy kappa_k / 8,
   renormalizes the minimizer to unit length (counting rounds whose
   minimizer had norm below 1/2), then refills from the band b_k.  Stream
   children as in the realizable runner. */
ALRunResult margin_al_adversarial(const bounds::SConcaveParams& p,
                                  const densities::RadialND& model,
                                  LabelOracle& oracle, double eps, double delta,
                                  const bounds::Knobs& knobs, RngStream& stream);

/* Passive baseline: labels vc_sample_size(eps, delta, n, C_vc) unfiltered
   draws, fits one consistent halfspace, and evaluates it on fresh points.
   Stream children "data" and "eval". */
ALRunResult passive_baseline(const bounds::SConcaveParams& p,
                             const densities::RadialND& model,
                             LabelOracle& oracle, double eps, double delta,
                             const bounds::Knobs& knobs, RngStream& stream);

/* Composite hypothesis for an intersection of two origin-centered
   halfspaces: predict +1 iff the point lies in the covering halfspace
   (gate.x >= 0) AND the learned quadratic form is nonnegative.  The
   all-negative degenerate branch predicts -1 everywhere. */
struct BaumHypothesis {
    int n = 0;
    bool all_negative = false;
    std::vector<double> gate;  // unit normal of the covering halfspace
    std::vector<double> quad;  // n x n row-major separator in the lifted space

    int predict(const double* x) const;  // +/-1
};

struct BaumResult {
    BaumHypothesis h;
    bounds::BaumSizes sizes;
    long long positives = 0;          // r, positive count in the initial draw
    bool all_negative_branch = false;
    bool gate_contains_positives = true;  // audit: gate.x > 0 for all positives
    bool lifted_consistent = true;    // audit: h matches labels on phase-2 set
    bool composite_law_ok = true;     // audit: h = -1 outside the gate on eval
    long long total_labels = 0;       // m3 + (m1 when the full branch runs)
    double error = 0.0;               // Pr[h(x) != truth(x)] on fresh points
    double error_se = 0.0;
};

/* Two-halfspace intersection learner for a centrally symmetric model.
   Labels come from the planted intersection: +1 iff u.x >= 0 and v.x >= 0.
   Draws m3 points and counts positives r; when r < m2 returns the
   all-negative hypothesis, otherwise learns the covering halfspace from the
   positives and their reflections, draws m1 gated points (only points inside
   the gate are labeled), and fits the quadratic separator on them.  Stream
   children: "phase1", "phase2", "eval". */
BaumResult baum_learn(const bounds::SConcaveParams& p,
                      const densities::RadialND& model,
                      const std::vector<double>& u, const std::vector<double>& v,
                      double eps, double delta, const bounds::Knobs& knobs,
                      RngStream& stream);

struct CapacityRow {
    double r;          // disagreement-ball radius
    double prob;       // MC mass of the angular disagreement region
    double capacity;   // prob / r
    double std_error;  // binomial s.e. of capacity
};

/* Capacity of the disagreement region at each radius in r_grid, using the
   angular surrogate {x : |w*.x| <= ||x|| sin(min(r / f1, pi/2))}, which
   contains every halfspace within disagreement r of w* because the
   disagreement rate is at least f1 per radian of angle.  The report compares
   the supremum of capacity over the grid against
   disagreement_coefficient_bound at the smallest radius.  All rows share one
   MC sample of size n_mc drawn from the stream. */
struct CoefficientEstimate {
    std::vector<CapacityRow> rows;
    double theta_hat = 0.0;     // sup of capacity over the grid
    verify::McReport report;    // theta_hat vs the closed-form bound
};

CoefficientEstimate estimate_disagreement_coefficient(
    const bounds::SConcaveParams& p, const densities::RadialND& model,
    const std::vector<double>& wstar, const std::vector<double>& r_grid,
    int n_mc, RngStream& stream);

}  // namespace sconcave::learners
