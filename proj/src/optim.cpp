#include "sconcave/optim.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "sconcave/errors.hpp"

namespace sconcave::optim {

namespace {

constexpr std::int64_t kMistakeCap = 1000000;

double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& v) {
    double q = 0.0;
    for (double x : v) q += x * x;
    return std::sqrt(q);
}

// projection of v onto ball(c, r); c may be null for the origin
void project_ball(std::vector<double>& v, const double* c, double r) {
    double q = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double d = v[i] - (c ? c[i] : 0.0);
        q += d * d;
    }
    double dist = std::sqrt(q);
    if (dist <= r) return;
    double sc = r / dist;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double ci = c ? c[i] : 0.0;
        v[i] = ci + (v[i] - ci) * sc;
    }
}

void require_feasible(const std::vector<double>& center, double radius) {
    if (norm(center) > 1.0 + radius + 1e-12)
        throw InfeasibleError("ball(center, radius) and the unit ball do not intersect");
}

/* Perceptron over generic feature rows: finds w with y (w.phi) > 0 for all
   rows, making unit-norm corrections on violated rows.  A zero feature row
   can never get a strict margin and ends at the cap like any other
   non-separable input. */
std::vector<double> perceptron(const std::vector<double>& phi, const std::vector<int>& y,
                               std::size_t dim, const std::string& who) {
    std::vector<double> w(dim, 0.0);
    std::size_t rows = y.size();
    std::int64_t mistakes = 0;
    for (;;) {
        bool clean = true;
        for (std::size_t i = 0; i < rows; ++i) {
            const double* p = &phi[i * dim];
            if (y[i] * dot(w.data(), p, int(dim)) > 0.0) continue;
            clean = false;
            if (++mistakes > kMistakeCap)
                throw NonSeparableError(who + ": mistake cap hit, sample is not separable");
            double pn = std::sqrt(dot(p, p, int(dim)));
            if (pn > 0.0)
                for (std::size_t j = 0; j < dim; ++j) w[j] += y[i] * p[j] / pn;
        }
        if (clean) return w;
    }
}

}  // namespace

void LabeledSet::add(const double* xi, int yi) {
    x.insert(x.end(), xi, xi + dim);
    y.push_back(yi);
}

void LabeledSet::add(const std::vector<double>& xi, int yi) {
    if (int(xi.size()) != dim) throw RegimeError("labeled point has wrong dimension");
    add(xi.data(), yi);
}

void LabeledSet::validate() const {
    if (dim < 1) throw RegimeError("labeled set requires dim >= 1");
    if (x.size() != y.size() * std::size_t(dim))
        throw RegimeError("labeled set storage does not match dim * count");
    for (int yi : y)
        if (yi != 1 && yi != -1) throw RegimeError("labels must be +1 or -1");
}

void HingeProblem::validate() const {
    W.validate();
    if (!(tau > 0.0)) throw RegimeError("hinge problem requires tau > 0");
    if (!(radius >= 0.0)) throw RegimeError("hinge problem requires radius >= 0");
    if (!(accuracy > 0.0)) throw RegimeError("hinge problem requires accuracy > 0");
    if (center.size() != std::size_t(W.dim))
        throw RegimeError("hinge problem center has wrong dimension");
}

double hinge_loss(const std::vector<double>& w, const LabeledSet& W, double tau) {
    if (!(tau > 0.0)) throw RegimeError("hinge loss requires tau > 0");
    if (W.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < W.size(); ++i) {
        double m = 1.0 - W.y[i] * dot(w.data(), W.point(i), W.dim) / tau;
        if (m > 0.0) total += m;
    }
    return total / double(W.size());
}

std::vector<double> project_two_balls(const std::vector<double>& w,
                                      const std::vector<double>& center, double radius) {
    if (w.size() != center.size()) throw RegimeError("projection dimension mismatch");
    if (!(radius >= 0.0)) throw RegimeError("projection requires radius >= 0");
    require_feasible(center, radius);

    /* Dykstra converges linearly at a rate set by the angle between the two
       boundary spheres at the solution; the stop threshold sits two decades
       under the 1e-12 idempotence contract so that transversal overlaps
       (every caller here: unit-vector centers) finish well inside it. */
    std::size_t n = w.size();
    std::vector<double> x = w, p(n, 0.0), q(n, 0.0), yv(n), prev(n);
    for (int iter = 0; iter < 1000; ++iter) {
        prev = x;
        for (std::size_t i = 0; i < n; ++i) yv[i] = x[i] + p[i];
        project_ball(yv, center.data(), radius);
        for (std::size_t i = 0; i < n; ++i) p[i] = x[i] + p[i] - yv[i];
        for (std::size_t i = 0; i < n; ++i) x[i] = yv[i] + q[i];
        project_ball(x, nullptr, 1.0);
        for (std::size_t i = 0; i < n; ++i) q[i] = yv[i] + q[i] - x[i];
        double move = 0.0;
        for (std::size_t i = 0; i < n; ++i) move += (x[i] - prev[i]) * (x[i] - prev[i]);
        if (std::sqrt(move) <= 1e-14) break;
    }
    return x;
}

std::vector<double> minimize_hinge(const HingeProblem& problem) {
    problem.validate();
    require_feasible(problem.center, problem.radius);

    int n = problem.W.dim;
    double G = 0.0;
    for (std::size_t i = 0; i < problem.W.size(); ++i) {
        const double* xi = problem.W.point(i);
        G = std::max(G, std::sqrt(dot(xi, xi, n)));
    }
    G /= problem.tau;
    double D = 2.0 * std::min(1.0, problem.radius);

    std::vector<double> w = project_two_balls(problem.center, problem.center, problem.radius);
    double GD = G * D;
    if (GD == 0.0) return w;  // loss is constant over a point or G = 0

    double T = std::ceil((GD / problem.accuracy) * (GD / problem.accuracy));
    std::int64_t steps = std::int64_t(std::max(1.0, T));
    double eta = D / (G * std::sqrt(double(steps)));

    /* uniform average of the T iterates at which subgradients are taken;
       with the fixed step above its mean loss is within G D / sqrt(T) <=
       accuracy of the constrained optimum */
    std::vector<double> avg(std::size_t(n), 0.0), grad(std::size_t(n), 0.0);
    for (std::int64_t t = 0; t < steps; ++t) {
        for (int j = 0; j < n; ++j) avg[j] += w[j];
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < problem.W.size(); ++i) {
            const double* xi = problem.W.point(i);
            double yi = problem.W.y[i];
            if (1.0 - yi * dot(w.data(), xi, n) / problem.tau > 0.0)
                for (int j = 0; j < n; ++j) grad[j] -= yi * xi[j] / problem.tau;
        }
        double inv = 1.0 / double(problem.W.size());
        for (int j = 0; j < n; ++j) w[j] -= eta * grad[j] * inv;
        w = project_two_balls(w, problem.center, problem.radius);
    }
    for (double& a : avg) a /= double(steps);
    // the mean of feasible iterates can sit a rounding error outside
    return project_two_balls(avg, problem.center, problem.radius);
}

std::vector<double> find_consistent_halfspace(const LabeledSet& W) {
    W.validate();
    if (W.size() == 0) throw RegimeError("consistency finder requires a nonempty set");
    std::vector<double> w = perceptron(W.x, W.y, std::size_t(W.dim), "halfspace finder");
    double nm = norm(w);
    for (double& wi : w) wi /= nm;
    return w;
}

std::vector<double> fit_quadratic_separator(const LabeledSet& S) {
    S.validate();
    if (S.size() == 0) throw RegimeError("quadratic separator requires a nonempty set");
    std::size_t n = std::size_t(S.dim), d2 = n * n;
    // lifted rows: the outer product x x' flattened row-major
    std::vector<double> phi(S.size() * d2);
    for (std::size_t i = 0; i < S.size(); ++i) {
        const double* xi = S.point(i);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) phi[i * d2 + a * n + b] = xi[a] * xi[b];
    }
    std::vector<double> w = perceptron(phi, S.y, d2, "quadratic separator");
    double nm = norm(w);
    for (double& wi : w) wi /= nm;
    return w;
}

}  // namespace sconcave::optim
