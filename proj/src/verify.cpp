#include "sconcave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <limits>
#include <numeric>
#include <utility>

#include "sconcave/errors.hpp"

namespace sconcave::verify {

namespace {

constexpr int kChunk = 8192;
constexpr double kUnitTol = 1e-9;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void regime_fail(const std::string& what) { throw RegimeError(what); }

double dot(const std::vector<double>& a, const double* b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

void require_unit(const std::vector<double>& v, int dim, const char* name) {
    if (static_cast<int>(v.size()) != dim) {
        regime_fail(std::string(name) + ": dimension mismatch");
    }
    if (std::fabs(norm(v) - 1.0) > kUnitTol) {
        regime_fail(std::string(name) + ": not unit norm");
    }
}

double model_s(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.s; }, model);
}

// the params record must describe the model the samples came from
void require_match(const bounds::SConcaveParams& p, const AnyModel& model) {
    if (model_dim(model) != p.n) regime_fail("model dimension differs from params n");
    if (model_s(model) != p.s) regime_fail("model exponent differs from params s");
}

void require_match(const bounds::SConcaveParams& p, const densities::RadialND& model) {
    if (model.n != p.n) regime_fail("model dimension differs from params n");
    if (model.s != p.s) regime_fail("model exponent differs from params s");
}

// Streams `n` sampled points through `fn` in fixed-size chunks.  The stream
// is consumed point by point, so the chunking never changes the sequence.
template <class Model, class Fn>
void for_each_point(const Model& model, long long n, RngStream& stream, Fn&& fn) {
    long long done = 0;
    while (done < n) {
        const int take = static_cast<int>(std::min<long long>(kChunk, n - done));
        std::vector<double> pts = densities::sample(model, take, stream);
        const int dim = static_cast<int>(pts.size()) / take;
        for (int i = 0; i < take; ++i) fn(pts.data() + static_cast<std::size_t>(i) * dim);
        done += take;
    }
}

template <class Fn>
void for_each_point(const AnyModel& model, long long n, RngStream& stream, Fn&& fn) {
    std::visit([&](const auto& m) { for_each_point(m, n, stream, fn); }, model);
}

McCore binomial_core(long long hits, long long n) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(std::max(0.0, p * (1.0 - p) / static_cast<double>(n))), n};
}

const char* direction_label(Direction d) {
    switch (d) {
        case Direction::LE: return "le";
        case Direction::GE: return "ge";
        default: return "eq";
    }
}

const char* verdict_label(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "inconclusive";
    }
}

}  // namespace

McReport make_report(std::string theorem_id, double s, int n, std::string params,
                     const McCore& core, double bound, Direction direction) {
    McReport r;
    r.theorem_id = std::move(theorem_id);
    r.s = s;
    r.n = n;
    r.params = std::move(params);
    r.estimate = core.estimate;
    r.std_error = core.std_error;
    r.n_samples = core.n_samples;
    r.bound = bound;
    r.direction = direction;
    // Signed margin: positive means the claimed inequality holds.
    const double diff =
        (direction == Direction::GE) ? core.estimate - bound : bound - core.estimate;
    if (core.std_error > 0.0) {
        r.z_margin = diff / core.std_error;
        if (direction == Direction::EQ) {
            r.verdict = (std::fabs(r.z_margin) <= 3.0) ? Verdict::Pass : Verdict::Fail;
        } else if (r.z_margin >= 3.0) {
            r.verdict = Verdict::Pass;
        } else if (r.z_margin <= -3.0) {
            r.verdict = Verdict::Fail;
        } else {
            r.verdict = Verdict::Inconclusive;
        }
    } else {
        // Deterministic comparison: no noise, no inconclusive band.
        constexpr double inf = std::numeric_limits<double>::infinity();
        r.z_margin = (diff > 0.0) ? inf : (diff < 0.0 ? -inf : 0.0);
        if (direction == Direction::EQ) {
            r.verdict = (diff == 0.0) ? Verdict::Pass : Verdict::Fail;
        } else {
            r.verdict = (diff >= 0.0) ? Verdict::Pass : Verdict::Fail;
        }
    }
    return r;
}

int model_dim(const AnyModel& model) {
    if (const auto* radial = std::get_if<densities::RadialND>(&model)) return radial->n;
    return 1;
}

std::vector<double> draw(const AnyModel& model, int count, RngStream& stream) {
    return std::visit([&](const auto& m) { return densities::sample(m, count, stream); },
                      model);
}

McCore mc_probability(const AnyModel& model, const std::function<bool(const double*)>& event,
                      long long n, RngStream& stream) {
    if (n < 1000) regime_fail("mc_probability: fewer than 1000 samples");
    long long hits = 0;
    for_each_point(model, n, stream, [&](const double* x) {
        if (event(x)) ++hits;
    });
    return binomial_core(hits, n);
}

std::vector<McReport> verify_band(const bounds::SConcaveParams& p,
                                  const densities::RadialND& model,
                                  const std::vector<double>& w,
                                  const std::vector<double>& t_grid, long long n,
                                  RngStream& stream) {
    require_match(p, model);
    require_unit(w, p.n, "w");
    if (t_grid.empty()) regime_fail("empty t grid");
    for (double t : t_grid) {
        if (!(t > 0.0)) regime_fail("t grid must be positive");
    }
    if (n < 1000) regime_fail("fewer than 1000 samples");
    const bounds::BandBounds bb = bounds::band_bounds(p);

    // One shared sample serves the whole grid (common random numbers).
    std::vector<long long> hits(t_grid.size(), 0);
    for_each_point(model, n, stream, [&](const double* x) {
        const double m = std::fabs(dot(w, x));
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (m <= t_grid[i]) ++hits[i];
        }
    });

    std::vector<McReport> out;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const McCore core = binomial_core(hits[i], n);
        const std::string params = "t=" + fmt(t);
        out.push_back(
            make_report("band-upper", p.s, p.n, params, core, bb.f3 * t, Direction::LE));
        if (t <= bb.d) {
            out.push_back(
                make_report("band-lower", p.s, p.n, params, core, bb.f2 * t, Direction::GE));
        }
    }
    return out;
}

McReport verify_disagreement(const bounds::SConcaveParams& p, const densities::RadialND& model,
                             const std::vector<double>& u, const std::vector<double>& v,
                             long long n, RngStream& stream) {
    require_match(p, model);
    require_unit(u, p.n, "u");
    require_unit(v, p.n, "v");
    const double cosang = std::clamp(
        std::inner_product(u.begin(), u.end(), v.begin(), 0.0), -1.0, 1.0);
    const double theta = std::acos(cosang);
    if (!(theta < 3.141592653589793 - 1e-12)) regime_fail("antipodal pair: angle is pi");
    const double bound = bounds::disagreement_lower_f1(p, 1.0) * theta;

    McCore core = mc_probability(
        AnyModel(model),
        [&](const double* x) { return (dot(u, x) >= 0.0) != (dot(v, x) >= 0.0); }, n, stream);
    return make_report("disagreement-lower", p.s, p.n, "theta=" + fmt(theta), core, bound,
                       Direction::GE);
}

McReport verify_disagreement_outside_band(const bounds::SConcaveParams& p,
                                          const densities::RadialND& model,
                                          const std::vector<double>& u,
                                          const std::vector<double>& v, double c1, long long n,
                                          RngStream& stream) {
    require_match(p, model);
    require_unit(u, p.n, "u");
    require_unit(v, p.n, "v");
    const double cosang = std::clamp(
        std::inner_product(u.begin(), u.end(), v.begin(), 0.0), -1.0, 1.0);
    const double theta = std::acos(cosang);
    if (!(theta < 1.5707963267948966)) regime_fail("angle must be below pi/2");
    const double f1 = bounds::disagreement_lower_f1(p, 1.0);
    const double f4 = bounds::band_margin_f4(p, c1, f1);
    const double margin = f4 * theta;

    McCore core = mc_probability(
        AnyModel(model),
        [&](const double* x) {
            return ((dot(u, x) >= 0.0) != (dot(v, x) >= 0.0)) &&
                   std::fabs(dot(v, x)) >= margin;
        },
        n, stream);
    return make_report("disagreement-outside-band", p.s, p.n,
                       "theta=" + fmt(theta) + ";c1=" + fmt(c1), core, c1 * f1 * theta,
                       Direction::LE);
}

McReport verify_conditional_variance(const bounds::SConcaveParams& p,
                                     const densities::RadialND& model,
                                     const std::vector<double>& u, const std::vector<double>& a,
                                     double t, long long n_accept, RngStream& stream) {
    require_match(p, model);
    require_unit(u, p.n, "u");
    if (static_cast<int>(a.size()) != p.n) regime_fail("a: dimension mismatch");
    if (norm(a) > 1.0 + 1e-12) regime_fail("a must lie in the unit ball");
    const bounds::BandBounds bb = bounds::band_bounds(p);
    if (!(t > 0.0 && t <= bb.d)) regime_fail("band width outside (0, d]");
    if (n_accept < 20) regime_fail("need at least 20 accepted samples for batch means");

    const double r = [&] {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) acc += (u[i] - a[i]) * (u[i] - a[i]);
        return std::sqrt(acc);
    }();

    /* Rejection into the band keeps the estimator unbiased; a reweighting
       scheme would be cheaper but couples the error analysis to the density
       values.  Starvation guard: once 1e5 proposals are in, an acceptance
       rate below 1e-3 aborts instead of spinning. */
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(n_accept));
    long long proposals = 0;
    while (static_cast<long long>(values.size()) < n_accept) {
        for_each_point(model, kChunk, stream, [&](const double* x) {
            ++proposals;
            if (static_cast<long long>(values.size()) < n_accept &&
                std::fabs(dot(u, x)) <= t) {
                const double y = dot(a, x);
                values.push_back(y * y);
            }
        });
        if (proposals >= 100000 &&
            static_cast<double>(values.size()) < 1e-3 * static_cast<double>(proposals)) {
            throw BandStarvationError("band acceptance below 1e-3 after " +
                                      std::to_string(proposals) + " proposals");
        }
    }

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n_accept);

    // Batch-means standard error: 20 contiguous batches, sizes differing by
    // at most one, sample standard deviation of the batch means over sqrt(B).
    constexpr int kBatches = 20;
    double batch_mean[kBatches];
    std::size_t pos = 0;
    for (int b = 0; b < kBatches; ++b) {
        const std::size_t len = static_cast<std::size_t>(n_accept / kBatches) +
                                (b < n_accept % kBatches ? 1u : 0u);
        double acc = 0.0;
        for (std::size_t i = 0; i < len; ++i) acc += values[pos + i];
        batch_mean[b] = acc / static_cast<double>(len);
        pos += len;
    }
    double var = 0.0;
    for (int b = 0; b < kBatches; ++b) {
        var += (batch_mean[b] - mean) * (batch_mean[b] - mean);
    }
    var /= kBatches - 1;
    const double se = std::sqrt(var / kBatches);

    const double bound = bounds::variance_bound_f5(p, 1.0) * (r * r + t * t);
    McCore core{mean, se, n_accept};
    return make_report("conditional-variance", p.s, p.n,
                       "t=" + fmt(t) + ";r=" + fmt(r) + ";proposals=" +
                           std::to_string(proposals),
                       core, bound, Direction::LE);
}

std::vector<McReport> verify_tail(const bounds::SConcaveParams& p, const AnyModel& model,
                                  const std::vector<double>& t_grid, double c_knob, long long n,
                                  RngStream& stream) {
    require_match(p, model);
    if (t_grid.empty()) regime_fail("empty t grid");
    for (double t : t_grid) {
        if (!(t >= 16.0)) regime_fail("tail bound requires t >= 16");
    }
    if (n < 1000) regime_fail("fewer than 1000 samples");
    const double root_n = std::sqrt(static_cast<double>(p.n));

    std::vector<long long> hits(t_grid.size(), 0);
    const int dim = model_dim(model);
    for_each_point(model, n, stream, [&](const double* x) {
        double sq = 0.0;
        for (int i = 0; i < dim; ++i) sq += x[i] * x[i];
        const double radius = std::sqrt(sq);
        for (std::size_t i = 0; i < t_grid.size(); ++i) {
            if (radius > root_n * t_grid[i]) ++hits[i];
        }
    });

    std::vector<McReport> out;
    const auto* pareto = std::get_if<densities::Pareto1D>(&model);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const double bound = bounds::tail_bound(p, t, c_knob);
        const std::string params = "t=" + fmt(t) + ";c=" + fmt(c_knob);
        out.push_back(make_report("tail-mc", p.s, p.n, params, binomial_core(hits[i], n),
                                  bound, Direction::LE));
        if (pareto != nullptr) {
            // The closed-form tail gives a noise-free comparison row.
            McCore exact{pareto->tail(root_n * t), 0.0, 0};
            out.push_back(
                make_report("tail-exact", p.s, p.n, params, exact, bound, Direction::LE));
        }
    }
    return out;
}

McReport verify_halfspace(const bounds::SConcaveParams& p, const AnyModel& model,
                          const std::vector<double>& w, long long n, RngStream& stream) {
    require_match(p, model);
    require_unit(w, p.n, "w");
    const double gamma = bounds::marginal_gamma(p.s, p.n - 1);
    const double bound = bounds::halfspace_mass_lower(gamma);
    McCore core = mc_probability(
        model, [&](const double* x) { return dot(w, x) >= 0.0; }, n, stream);
    return make_report("halfspace-mass", p.s, p.n, "gamma=" + fmt(gamma), core, bound,
                       Direction::GE);
}

McReport verify_density_envelope(const bounds::SConcaveParams& p,
                                 const densities::RadialND& model, int n_points,
                                 RngStream& stream) {
    require_match(p, model);
    if (n_points < 1) regime_fail("need at least one point");
    const bounds::EnvelopeCoeffs env = bounds::density_envelope(p.n, p.s);

    double worst = -std::numeric_limits<double>::infinity();
    double worst_radius = 0.0;
    for_each_point(model, n_points, stream, [&](const double* x) {
        double sq = 0.0;
        for (int i = 0; i < p.n; ++i) sq += x[i] * x[i];
        const double radius = std::sqrt(sq);
        // (1 - s beta2 r)^{1/s}; the exponent collapses the envelope to the
        // constant beta1 when s = 0 (beta2 = 0 there).
        const double profile =
            (p.s == 0.0) ? 1.0 : std::exp(std::log1p(-p.s * env.beta2 * radius) / p.s);
        const double gap = model.density_at_radius(radius) - env.beta1 * profile;
        if (gap > worst) {
            worst = gap;
            worst_radius = radius;
        }
    });

    McCore core{worst, 0.0, n_points};
    return make_report("density-envelope", p.s, p.n,
                       "points=" + std::to_string(n_points) +
                           ";worst_radius=" + fmt(worst_radius),
                       core, 1e-12, Direction::LE);
}

std::vector<McReport> verify_univariate_bounds(double s) {
    const densities::Symmetric1D m = densities::make_symmetric1d(s);
    // Density at the center equals the calibration constant c and is the peak
    // (the profile decreases in |x|).
    const double peak_bound = (1.0 + s) / (1.0 + 3.0 * s);
    const double gamma = s / (1.0 + s);
    const double log_pow = (gamma == 0.0) ? 3.0 : 3.0 * std::log1p(gamma) / gamma;
    const double floor_bound = std::sqrt(1.0 / (3.0 * std::exp(log_pow)));

    McCore core{m.c, 0.0, 0};
    std::vector<McReport> out;
    out.push_back(
        make_report("univariate-peak", s, 1, "", core, peak_bound, Direction::LE));
    out.push_back(
        make_report("univariate-floor", s, 1, "", core, floor_bound, Direction::GE));
    return out;
}

ConcavityReport check_gamma_concavity(const std::function<double(double)>& fn, double gamma,
                                      const std::vector<double>& grid) {
    if (!(gamma < 0.0)) regime_fail("concavity exponent must be negative");
    const std::size_t n = grid.size();
    if (n < 3) regime_fail("grid needs at least three points");

    std::vector<double> powed(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = fn(grid[i]);
        if (!(v > 0.0)) regime_fail("function must be positive on the grid");
        powed[i] = std::pow(v, gamma);
    }

    // gamma-concavity for gamma < 0 is convexity of f^gamma, checked on every
    // index triple whose middle point is the metric midpoint of the ends.
    ConcavityReport rep;
    rep.worst_slack = -std::numeric_limits<double>::infinity();
    for (std::size_t d = 1; 2 * d < n; ++d) {
        for (std::size_t i = 0; i + 2 * d < n; ++i) {
            const std::size_t m = i + d, k = i + 2 * d;
            const double span = grid[k] - grid[i];
            if (std::fabs(grid[m] - 0.5 * (grid[i] + grid[k])) >
                1e-9 * std::max(1.0, std::fabs(span))) {
                continue;  // non-uniform stretch: not a midpoint triple
            }
            const double slack = powed[m] - 0.5 * (powed[i] + powed[k]);
            if (slack > rep.worst_slack) rep.worst_slack = slack;
            if (slack > 1e-9 && rep.verdict == Verdict::Pass) {
                rep.verdict = Verdict::Fail;
                rep.at_a = grid[i];
                rep.at_mid = grid[m];
                rep.at_b = grid[k];
            }
        }
    }
    return rep;
}

McReport reflection_experiment(const bounds::SConcaveParams& p, const densities::RadialND& model,
                               int trials, long long n_samples, RngStream& stream) {
    require_match(p, model);
    if (p.n < 3) regime_fail("reflection experiment requires n >= 3");
    if (trials < 1) regime_fail("need at least one trial");
    if (n_samples < 1000) regime_fail("fewer than 1000 samples");
    const double K = bounds::baum_reflection_K(p);

    // All cone normals are drawn before the shared sample so the two uses of
    // the stream cannot interleave.
    std::vector<std::vector<double>> normals;
    normals.reserve(static_cast<std::size_t>(trials) * 3);
    for (int i = 0; i < trials * 3; ++i) {
        normals.push_back(densities::unit_vector(p.n, stream));
    }

    std::vector<long long> in_cone(trials, 0), in_reflected(trials, 0);
    for_each_point(model, n_samples, stream, [&](const double* x) {
        for (int tr = 0; tr < trials; ++tr) {
            bool pos = true, neg = true;
            for (int j = 0; j < 3 && (pos || neg); ++j) {
                const double d = dot(normals[static_cast<std::size_t>(tr) * 3 + j], x);
                pos = pos && d >= 0.0;
                neg = neg && d <= 0.0;
            }
            if (pos) ++in_cone[tr];
            if (neg) ++in_reflected[tr];
        }
    });

    int skipped = 0;
    double worst = 0.0;
    double worst_se = 0.0;
    for (int tr = 0; tr < trials; ++tr) {
        if (in_cone[tr] < 10) {
            ++skipped;  // region too thin to estimate a ratio
            continue;
        }
        const double ratio =
            static_cast<double>(in_reflected[tr]) / static_cast<double>(in_cone[tr]);
        if (ratio >= worst) {
            worst = ratio;
            // Delta-method error of a count ratio; a zero numerator still
            // carries the denominator's noise.
            worst_se = (in_reflected[tr] > 0)
                           ? ratio * std::sqrt(1.0 / static_cast<double>(in_reflected[tr]) +
                                               1.0 / static_cast<double>(in_cone[tr]))
                           : 1.0 / static_cast<double>(in_cone[tr]);
        }
    }

    McCore core{worst, worst_se, n_samples};
    return make_report("reflection-ratio", p.s, p.n,
                       "trials=" + std::to_string(trials) +
                           ";skipped=" + std::to_string(skipped),
                       core, K, Direction::LE);
}

McReport packing_experiment(const bounds::SConcaveParams& p, const densities::RadialND& model,
                            double eps, int n_candidates, long long n_mc, RngStream& stream) {
    require_match(p, model);
    if (!(eps > 0.0)) regime_fail("eps must be positive");
    if (n_candidates < 1) regime_fail("need at least one candidate");
    if (n_mc < 1000) regime_fail("fewer than 1000 samples");

    std::vector<std::vector<double>> cand;
    cand.reserve(static_cast<std::size_t>(n_candidates));
    for (int i = 0; i < n_candidates; ++i) {
        cand.push_back(densities::unit_vector(p.n, stream));
    }

    /* Sign bits of every candidate on one shared sample: the pairwise
       disagreement distance is then a Hamming distance, and the shared
       randomness cancels across pairs (common random numbers). */
    const std::size_t words = static_cast<std::size_t>((n_mc + 63) / 64);
    std::vector<std::vector<std::uint64_t>> bits(
        static_cast<std::size_t>(n_candidates), std::vector<std::uint64_t>(words, 0));
    long long index = 0;
    for_each_point(model, n_mc, stream, [&](const double* x) {
        const std::size_t word = static_cast<std::size_t>(index >> 6);
        const std::uint64_t mask = 1ull << (index & 63);
        for (int c = 0; c < n_candidates; ++c) {
            if (dot(cand[static_cast<std::size_t>(c)], x) >= 0.0) {
                bits[static_cast<std::size_t>(c)][word] |= mask;
            }
        }
        ++index;
    });

    const auto distance = [&](int i, int j) {
        long long diff = 0;
        const auto& a = bits[static_cast<std::size_t>(i)];
        const auto& b = bits[static_cast<std::size_t>(j)];
        for (std::size_t w = 0; w < words; ++w) {
            diff += __builtin_popcountll(a[w] ^ b[w]);
        }
        return static_cast<double>(diff) / static_cast<double>(n_mc);
    };

    // Greedy pruning: each kept candidate removes everything eps-close to it.
    std::vector<bool> alive(static_cast<std::size_t>(n_candidates), true);
    long long survivors = 0;
    for (int i = 0; i < n_candidates; ++i) {
        if (!alive[static_cast<std::size_t>(i)]) continue;
        ++survivors;
        for (int j = i + 1; j < n_candidates; ++j) {
            if (alive[static_cast<std::size_t>(j)] && distance(i, j) <= eps) {
                alive[static_cast<std::size_t>(j)] = false;
            }
        }
    }

    const long long bound = bounds::packing_lower_bound(p, eps, 1.0);
    McCore core{static_cast<double>(survivors), 0.0, n_mc};
    return make_report("packing-size", p.s, p.n,
                       "eps=" + fmt(eps) + ";candidates=" + std::to_string(n_candidates),
                       core, static_cast<double>(bound), Direction::GE);
}

std::string reports_csv(const std::vector<McReport>& reports) {
    std::string out =
        "theorem,s,n,params,estimate,std_error,n_samples,bound,direction,verdict,z_margin\n";
    for (const McReport& r : reports) {
        out += r.theorem_id;
        out += ',' + fmt(r.s) + ',' + std::to_string(r.n) + ',' + r.params;
        out += ',' + fmt(r.estimate) + ',' + fmt(r.std_error) + ',' +
               std::to_string(r.n_samples);
        out += ',' + fmt(r.bound) + ',';
        out += direction_label(r.direction);
        out += ',';
        out += verdict_label(r.verdict);
        out += ',' + fmt(r.z_margin) + '\n';
    }
    return out;
}

}  // namespace sconcave::verify
