#pragma once

#include <cstddef>
#include <vector>

namespace sconcave::optim {

// Labeled points, row-major; labels are strictly +/-1.
struct LabeledSet {
    int dim = 0;
    std::vector<double> x;
    std::vector<int> y;

    std::size_t size() const { return y.size(); }
    const double* point(std::size_t i) const { return &x[i * std::size_t(dim)]; }
    void add(const double* xi, int yi);
    void add(const std::vector<double>& xi, int yi);
    void validate() const;
};

/* Constrained hinge minimization instance: mean hinge loss at scale tau over
   the working set, feasible region ball(center, radius) intersected with the
   unit ball, additive accuracy target. */
struct HingeProblem {
    LabeledSet W;
    double tau = 1.0;
    std::vector<double> center;
    double radius = 1.0;
    double accuracy = 0.01;

    void validate() const;
};

// mean over W of max{0, 1 - y (w.x)/tau}
double hinge_loss(const std::vector<double>& w, const LabeledSet& W, double tau);

/* Euclidean projection onto ball(center, radius) intersect ball(0, 1), by
   Dykstra alternating projections (movement stop 1e-14, sweep cap 1000). */
std::vector<double> project_two_balls(const std::vector<double>& w,
                                      const std::vector<double>& center, double radius);

/* Averaged projected subgradient descent.  Returns v feasible for both balls
   with loss(v) <= min feasible loss + accuracy, via T = ceil((G D / accuracy)^2)
   steps at fixed step size D/(G sqrt(T)), G = max ||x||/tau, D = 2 min{1, radius}. */
std::vector<double> minimize_hinge(const HingeProblem& problem);

/* Unit vector w with y (w.x) > 0 for every labeled point; perceptron with
   unit-norm updates, mistake cap 10^6. */
std::vector<double> find_consistent_halfspace(const LabeledSet& W);

/* n x n symmetric weight matrix (row-major) with y (x' W x) > 0 for every
   labeled point; perceptron on the lifted features x (x)' with the same cap. */
std::vector<double> fit_quadratic_separator(const LabeledSet& S);

}  // namespace sconcave::optim
