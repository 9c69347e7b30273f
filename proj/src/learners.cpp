#include "sconcave/learners.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "sconcave/errors.hpp"
#include "sconcave/optim.hpp"

namespace sconcave::learners {
namespace {

constexpr long long kRejectionCap = 100'000'000;  // discarded draws per refill
constexpr int kEvalPoints = 100'000;
constexpr int kDrawChunk = 8192;
constexpr double kUnitTol = 1e-9;

double dot(const double* a, const double* b, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const std::vector<double>& v) {
    return std::sqrt(dot(v.data(), v.data(), static_cast<int>(v.size())));
}

int sign_of(double v) { return v >= 0.0 ? 1 : -1; }

void require_unit(const std::vector<double>& w, int n, const char* what) {
    if (static_cast<int>(w.size()) != n)
        throw RegimeError(std::string(what) + ": dimension mismatch");
    if (std::fabs(norm(w) - 1.0) > kUnitTol)
        throw RegimeError(std::string(what) + ": not a unit vector");
}

void require_match(const bounds::SConcaveParams& p, const densities::RadialND& model) {
    if (model.n != p.n || model.s != p.s)
        throw RegimeError("learners: model does not match the parameter record");
}

double angle_between(const std::vector<double>& a, const std::vector<double>& b) {
    const double c = dot(a.data(), b.data(), static_cast<int>(a.size()));
    return std::acos(std::clamp(c, -1.0, 1.0));
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/* Rejection-collect `want` labeled points: draw from the model, keep points
   passing `keep`, and only those are sent to `label` (rejected points cost no
   label).  Chunked draws advance one stream, so the accepted set does not
   depend on the chunk size. */
template <typename Keep, typename Label>
void collect(const densities::RadialND& model, Keep&& keep, Label&& label,
             long long want, RngStream stream, optim::LabeledSet& out) {
    out.dim = model.n;
    long long rejected = 0;
    while (static_cast<long long>(out.size()) < want) {
        const std::vector<double> batch = densities::sample(model, kDrawChunk, stream);
        for (int i = 0; i < kDrawChunk && static_cast<long long>(out.size()) < want; ++i) {
            const double* x = &batch[std::size_t(i) * std::size_t(model.n)];
            if (keep(x)) {
                out.add(x, label(x));
            } else if (++rejected > kRejectionCap) {
                throw StreamExhaustedError("learners: band refill exceeded the rejection cap");
            }
        }
    }
}

// Fresh-sample disagreement rate between two +/-1 classifiers.
template <typename A, typename B>
void mc_disagreement(const densities::RadialND& model, A&& f, B&& g,
                     RngStream stream, double& err, double& se) {
    long long bad = 0;
    long long done = 0;
    while (done < kEvalPoints) {
        const int take = static_cast<int>(std::min<long long>(kDrawChunk, kEvalPoints - done));
        const std::vector<double> batch = densities::sample(model, take, stream);
        for (int i = 0; i < take; ++i) {
            const double* x = &batch[std::size_t(i) * std::size_t(model.n)];
            if (f(x) != g(x)) ++bad;
        }
        done += take;
    }
    err = double(bad) / double(kEvalPoints);
    se = std::sqrt(err * (1.0 - err) / double(kEvalPoints));
}

}  // namespace

LabelOracle::LabelOracle(std::vector<double> wstar, bool adversarial, double eta,
                         FlipStrategy strategy, std::optional<RngStream> stream)
    : wstar_(std::move(wstar)),
      adversarial_(adversarial),
      eta_(eta),
      strategy_(strategy),
      stream_(std::move(stream)) {
    if (wstar_.empty()) throw RegimeError("LabelOracle: empty target");
    if (std::fabs(norm(wstar_) - 1.0) > kUnitTol)
        throw RegimeError("LabelOracle: target must be a unit vector");
    if (!(eta_ >= 0.0) || eta_ >= 1.0 || !std::isfinite(eta_))
        throw RegimeError("LabelOracle: eta must lie in [0, 1)");
}

LabelOracle LabelOracle::realizable(std::vector<double> wstar) {
    return LabelOracle(std::move(wstar), false, 0.0, FlipStrategy::boundary_proximal,
                       std::nullopt);
}

LabelOracle LabelOracle::adversarial(std::vector<double> wstar, double eta,
                                     FlipStrategy strategy, RngStream stream) {
    return LabelOracle(std::move(wstar), true, eta, strategy, std::move(stream));
}

int LabelOracle::query(const double* x) {
    ++queries_;
    const double margin = dot(wstar_.data(), x, static_cast<int>(wstar_.size()));
    const int clean = sign_of(margin);
    if (!adversarial_ || eta_ <= 0.0) return clean;
    // Budget law: flipping now must keep flips <= eta * queries at this prefix.
    const bool budget = double(flips_ + 1) <= eta_ * double(queries_);
    bool flip = false;
    if (strategy_ == FlipStrategy::uniform) {
        const double u = stream_->next_double();  // drawn on every query
        flip = budget && u < eta_;
    } else {
        const double m = std::fabs(margin);
        // eligible iff m is below the running eta-quantile of margins seen so
        // far (decided before inserting m, so the quantile cannot be skewed
        // by the very margin under test)
        flip = budget && !low_margins_.empty() && m <= low_margins_.top();
        if (low_margins_.empty() || m <= low_margins_.top())
            low_margins_.push(m);
        else
            high_margins_.push(m);
        const auto cap =
            static_cast<std::size_t>(std::max(1.0, std::ceil(eta_ * double(queries_))));
        while (low_margins_.size() > cap) {
            high_margins_.push(low_margins_.top());
            low_margins_.pop();
        }
        while (low_margins_.size() < cap && !high_margins_.empty()) {
            low_margins_.push(high_margins_.top());
            high_margins_.pop();
        }
    }
    if (!flip) return clean;
    ++flips_;
    return -clean;
}

ALRunResult margin_al_realizable(const bounds::SConcaveParams& p,
                                 const densities::RadialND& model,
                                 LabelOracle& oracle, double eps, double delta,
                                 const bounds::Knobs& knobs, RngStream& stream) {
    require_match(p, model);
    require_unit(oracle.target(), p.n, "margin_al_realizable");
    if (oracle.adversarial_mode() && oracle.eta() > 0.0)
        throw RegimeError("margin_al_realizable: oracle may flip labels");
    const bounds::ALSchedule sch =
        bounds::al_schedule(p, eps, delta, bounds::Model::realizable, knobs);

    ALRunResult res;
    const std::vector<double>& wstar = oracle.target();
    auto ask = [&oracle](const double* x) { return oracle.query(x); };

    optim::LabeledSet W;
    collect(model, [](const double*) { return true; }, ask, sch.m[0],
            stream.child("round").child(std::uint64_t{1}), W);

    std::vector<double> w;
    for (int k = 1; k <= sch.T; ++k) {
        w = optim::find_consistent_halfspace(W);
        res.round_labels.push_back(static_cast<long long>(W.size()));
        res.round_angle.push_back(angle_between(w, wstar));
        res.round_w.insert(res.round_w.end(), w.begin(), w.end());
        if (k < sch.T) {
            const double width = sch.b[std::size_t(k)];
            W = optim::LabeledSet{};
            collect(model,
                    [&w, width, n = p.n](const double* x) {
                        return std::fabs(dot(w.data(), x, n)) <= width;
                    },
                    ask, sch.m[std::size_t(k)],
                    stream.child("round").child(std::uint64_t(k + 1)), W);
        }
    }
    res.final_w = w;
    res.total_labels =
        std::accumulate(res.round_labels.begin(), res.round_labels.end(), 0LL);
    mc_disagreement(
        model, [&w, n = p.n](const double* x) { return sign_of(dot(w.data(), x, n)); },
        [&wstar, n = p.n](const double* x) { return sign_of(dot(wstar.data(), x, n)); },
        stream.child("eval"), res.error, res.error_se);
    return res;
}

ALRunResult margin_al_adversarial(const bounds::SConcaveParams& p,
                                  const densities::RadialND& model,
                                  LabelOracle& oracle, double eps, double delta,
                                  const bounds::Knobs& knobs, RngStream& stream) {
    require_match(p, model);
    require_unit(oracle.target(), p.n, "margin_al_adversarial");
    if (!(oracle.eta() < knobs.c0 * eps))
        throw RegimeError("margin_al_adversarial: requires eta < c0 * eps");
    const bounds::ALSchedule sch =
        bounds::al_schedule(p, eps, delta, bounds::Model::adversarial, knobs);

    ALRunResult res;
    const std::vector<double>& wstar = oracle.target();
    auto ask = [&oracle](const double* x) { return oracle.query(x); };

    RngStream init = stream.child("init");
    std::vector<double> w_prev = densities::unit_vector(p.n, init);
    std::vector<double> w = w_prev;

    optim::LabeledSet W;
    collect(model,
            [&w_prev, width = sch.b[0], n = p.n](const double* x) {
                return std::fabs(dot(w_prev.data(), x, n)) <= width;
            },
            ask, sch.m[0], stream.child("round").child(std::uint64_t{1}), W);

    for (int k = 1; k <= sch.T; ++k) {
        optim::HingeProblem prob;
        prob.W = std::move(W);
        prob.tau = sch.tau[std::size_t(k - 1)];
        prob.center = w_prev;
        prob.radius = sch.r[std::size_t(k - 1)];
        prob.accuracy = sch.kappa[std::size_t(k - 1)] / 8.0;
        const std::vector<double> v = optim::minimize_hinge(prob);
        const double nv = norm(v);
        if (nv < 0.5) ++res.small_norm_rounds;
        if (nv > 1e-12) {
            w = v;
            for (double& c : w) c /= nv;
        } else {
            w = w_prev;  // degenerate minimizer: hold the previous hypothesis
        }
        res.round_labels.push_back(static_cast<long long>(prob.W.size()));
        res.round_angle.push_back(angle_between(w, wstar));
        res.round_w.insert(res.round_w.end(), w.begin(), w.end());
        if (k < sch.T) {
            W = optim::LabeledSet{};
            collect(model,
                    [&w, width = sch.b[std::size_t(k)], n = p.n](const double* x) {
                        return std::fabs(dot(w.data(), x, n)) <= width;
                    },
                    ask, sch.m[std::size_t(k)],
                    stream.child("round").child(std::uint64_t(k + 1)), W);
        }
        w_prev = w;
    }
    res.final_w = w;
    res.total_labels =
        std::accumulate(res.round_labels.begin(), res.round_labels.end(), 0LL);
    mc_disagreement(
        model, [&w, n = p.n](const double* x) { return sign_of(dot(w.data(), x, n)); },
        [&wstar, n = p.n](const double* x) { return sign_of(dot(wstar.data(), x, n)); },
        stream.child("eval"), res.error, res.error_se);
    return res;
}

ALRunResult passive_baseline(const bounds::SConcaveParams& p,
                             const densities::RadialND& model, LabelOracle& oracle,
                             double eps, double delta, const bounds::Knobs& knobs,
                             RngStream& stream) {
    require_match(p, model);
    require_unit(oracle.target(), p.n, "passive_baseline");
    if (oracle.adversarial_mode() && oracle.eta() > 0.0)
        throw RegimeError("passive_baseline: oracle may flip labels");
    const long long m = bounds::vc_sample_size(eps, delta, p.n, knobs.C_vc);

    ALRunResult res;
    const std::vector<double>& wstar = oracle.target();
    optim::LabeledSet W;
    collect(model, [](const double*) { return true; },
            [&oracle](const double* x) { return oracle.query(x); }, m,
            stream.child("data"), W);
    const std::vector<double> w = optim::find_consistent_halfspace(W);

    res.final_w = w;
    res.round_labels = {m};
    res.total_labels = m;
    res.round_angle = {angle_between(w, wstar)};
    res.round_w = w;
    mc_disagreement(
        model, [&w, n = p.n](const double* x) { return sign_of(dot(w.data(), x, n)); },
        [&wstar, n = p.n](const double* x) { return sign_of(dot(wstar.data(), x, n)); },
        stream.child("eval"), res.error, res.error_se);
    return res;
}

int BaumHypothesis::predict(const double* x) const {
    if (all_negative) return -1;
    if (dot(gate.data(), x, n) < 0.0) return -1;
    double q = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = &quad[std::size_t(i) * std::size_t(n)];
        for (int j = 0; j < n; ++j) q += x[i] * row[j] * x[j];
    }
    return q >= 0.0 ? 1 : -1;
}

BaumResult baum_learn(const bounds::SConcaveParams& p, const densities::RadialND& model,
                      const std::vector<double>& u, const std::vector<double>& v,
                      double eps, double delta, const bounds::Knobs& knobs,
                      RngStream& stream) {
    require_match(p, model);
    require_unit(u, p.n, "baum_learn u");
    require_unit(v, p.n, "baum_learn v");
    if (!(eps > 0.0) || eps >= 1.0 || !(delta > 0.0) || delta >= 1.0)
        throw RegimeError("baum_learn: eps and delta must lie in (0, 1)");
    const double K = bounds::baum_reflection_K(p);

    BaumResult res;
    res.sizes = bounds::baum_sizes(eps, delta, p.n, K, knobs.C_vc);
    res.h.n = p.n;
    auto truth = [&u, &v, n = p.n](const double* x) {
        return (dot(u.data(), x, n) >= 0.0 && dot(v.data(), x, n) >= 0.0) ? 1 : -1;
    };

    optim::LabeledSet init;
    collect(model, [](const double*) { return true; }, truth, res.sizes.m3,
            stream.child("phase1"), init);
    res.total_labels = res.sizes.m3;

    std::vector<double> pos;  // row-major positive examples
    for (std::size_t i = 0; i < init.size(); ++i)
        if (init.y[i] == 1) pos.insert(pos.end(), init.point(i), init.point(i) + p.n);
    res.positives = static_cast<long long>(pos.size() / std::size_t(p.n));

    if (res.positives < res.sizes.m2) {
        res.all_negative_branch = true;
        res.h.all_negative = true;
    } else {
        // The covering halfspace must put every positive strictly on its
        // positive side and, being origin-centered, every reflection on the
        // other; that is exactly linear separability of the reflected pairs.
        optim::LabeledSet refl;
        refl.dim = p.n;
        std::vector<double> neg(std::size_t(p.n));
        for (long long i = 0; i < res.positives; ++i) {
            const double* x = &pos[std::size_t(i) * std::size_t(p.n)];
            for (int j = 0; j < p.n; ++j) neg[std::size_t(j)] = -x[j];
            refl.add(x, 1);
            refl.add(neg, -1);
        }
        res.h.gate = optim::find_consistent_halfspace(refl);

        double worst = std::numeric_limits<double>::infinity();
        for (long long i = 0; i < res.positives; ++i)
            worst = std::min(worst,
                             dot(res.h.gate.data(),
                                 &pos[std::size_t(i) * std::size_t(p.n)], p.n));
        res.gate_contains_positives = worst > 0.0;

        optim::LabeledSet gated;
        collect(model,
                [&res, n = p.n](const double* x) {
                    return dot(res.h.gate.data(), x, n) >= 0.0;
                },
                truth, res.sizes.m1, stream.child("phase2"), gated);
        res.total_labels += res.sizes.m1;
        res.h.quad = optim::fit_quadratic_separator(gated);

        for (std::size_t i = 0; i < gated.size(); ++i) {
            if (res.h.predict(gated.point(i)) != gated.y[i]) {
                res.lifted_consistent = false;
                break;
            }
        }
    }

    // Fresh-point error, auditing the composite law h = -1 outside the gate.
    RngStream eval = stream.child("eval");
    long long bad = 0;
    long long done = 0;
    while (done < kEvalPoints) {
        const int take = static_cast<int>(std::min<long long>(kDrawChunk, kEvalPoints - done));
        const std::vector<double> batch = densities::sample(model, take, eval);
        for (int i = 0; i < take; ++i) {
            const double* x = &batch[std::size_t(i) * std::size_t(p.n)];
            const int ph = res.h.predict(x);
            if (!res.h.all_negative && dot(res.h.gate.data(), x, p.n) < 0.0 && ph != -1)
                res.composite_law_ok = false;
            if (ph != truth(x)) ++bad;
        }
        done += take;
    }
    res.error = double(bad) / double(kEvalPoints);
    res.error_se = std::sqrt(res.error * (1.0 - res.error) / double(kEvalPoints));
    return res;
}

CoefficientEstimate estimate_disagreement_coefficient(
    const bounds::SConcaveParams& p, const densities::RadialND& model,
    const std::vector<double>& wstar, const std::vector<double>& r_grid, int n_mc,
    RngStream& stream) {
    require_match(p, model);
    require_unit(wstar, p.n, "estimate_disagreement_coefficient");
    if (r_grid.empty())
        throw RegimeError("estimate_disagreement_coefficient: empty radius grid");
    for (const double r : r_grid)
        if (!(r > 0.0) || r >= 1.0 || !std::isfinite(r))
            throw RegimeError(
                "estimate_disagreement_coefficient: radii must lie in (0, 1)");
    if (n_mc < 1000)
        throw RegimeError("estimate_disagreement_coefficient: n_mc below 1000");

    const double f1 = bounds::disagreement_lower_f1(p);
    const std::size_t G = r_grid.size();
    std::vector<double> sins(G);
    for (std::size_t g = 0; g < G; ++g)
        sins[g] = std::sin(std::min(r_grid[g] / f1, std::acos(-1.0) / 2.0));

    std::vector<long long> hits(G, 0);
    long long done = 0;
    while (done < n_mc) {
        const int take = static_cast<int>(std::min<long long>(kDrawChunk, n_mc - done));
        const std::vector<double> batch = densities::sample(model, take, stream);
        for (int i = 0; i < take; ++i) {
            const double* x = &batch[std::size_t(i) * std::size_t(p.n)];
            const double margin = std::fabs(dot(wstar.data(), x, p.n));
            const double radius = std::sqrt(dot(x, x, p.n));
            for (std::size_t g = 0; g < G; ++g)
                if (margin <= radius * sins[g]) ++hits[g];
        }
        done += take;
    }

    CoefficientEstimate out;
    out.rows.reserve(G);
    double best_se = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        const double prob = double(hits[g]) / double(n_mc);
        const double se_prob = std::sqrt(prob * (1.0 - prob) / double(n_mc));
        const double capacity = prob / r_grid[g];
        out.rows.push_back({r_grid[g], prob, capacity, se_prob / r_grid[g]});
        if (capacity > out.theta_hat) {
            out.theta_hat = capacity;
            best_se = se_prob / r_grid[g];
        }
    }
    const double r_min = *std::min_element(r_grid.begin(), r_grid.end());
    const double bound = bounds::disagreement_coefficient_bound(p, r_min);
    out.report = verify::make_report(
        "disagreement-coefficient", p.s, p.n,
        "r_min=" + fmt(r_min) + ";grid=" + std::to_string(G),
        verify::McCore{out.theta_hat, best_se, n_mc}, bound, verify::Direction::LE);
    return out;
}

}  // namespace sconcave::learners
