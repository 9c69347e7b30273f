#include "sconcave/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "sconcave/errors.hpp"
#include "sconcave/special.hpp"

namespace sconcave::bounds {
namespace {

constexpr double kLn2 = M_LN2;
constexpr double kLn3 = 1.0986122886681098;
// log(4 e pi)
const double kLn4ePi = std::log(4.0 * M_E * M_PI);

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

[[noreturn]] void regime_fail(const std::string& cond) { throw RegimeError(cond); }

// s / (1 + m s) with the positivity check on the denominator.
double ratio_exponent(double s, int m) {
    double den = 1.0 + m * s;
    if (!(den > 0.0)) {
        regime_fail("1 + " + std::to_string(m) + "*s <= 0 (s=" + fmt(s) + ")");
    }
    return s / den;
}

// log[(2 - 2^{-m g})^{1/g}]; continuous through g = 0 where it equals m ln 2.
double log_two_minus_pow(double m, double g) {
    if (g == 0.0) return m * kLn2;
    double t = -std::expm1(-m * g * kLn2);
    if (t <= -1.0) regime_fail("2 - 2^{-" + fmt(m) + " g} <= 0 (g=" + fmt(g) + ")");
    return std::log1p(t) / g;
}

// log[(1+g)^{-1/g}]; -> -1 as g -> 0.
double log_drop(double g) {
    if (g == 0.0) return -1.0;
    if (g <= -1.0) regime_fail("1 + gamma <= 0 (gamma=" + fmt(g) + ")");
    return -std::log1p(g) / g;
}

// (log(1+2g) - log(1+g)) / g; -> 1 as g -> 0.
double dlog_ratio(double g) {
    if (g == 0.0) return 1.0;
    if (1.0 + 2.0 * g <= 0.0) regime_fail("1 + 2 gamma <= 0 (gamma=" + fmt(g) + ")");
    return (std::log1p(2.0 * g) - std::log1p(g)) / g;
}

// log[(1+b)/(1+3b) * sqrt(3 (1+g)^{3/g})], the slowly varying part of the
// center-value profile constant.
double log_profile_W(double b, double g) {
    if (1.0 + b <= 0.0) regime_fail("1 + beta <= 0 (beta=" + fmt(b) + ")");
    if (1.0 + 3.0 * b <= 0.0) regime_fail("1 + 3 beta <= 0 (beta=" + fmt(b) + ")");
    double lim = (g == 0.0) ? 1.0 : std::log1p(g) / g;
    return std::log1p(b) - std::log1p(3.0 * b) + 0.5 * (kLn3 + 3.0 * lim);
}

// log[(2 e^{xL} - 1)^{1/x}]; -> 2L as x -> 0.  This is the density ratio
// between the center value and the value at radius d.
double log_center_ratio(double x, double L) {
    if (x == 0.0) return 2.0 * L;
    double t = 2.0 * std::expm1(x * L);
    if (t <= -1.0) regime_fail("2 (2^{n-1} W)^x - 1 <= 0 (x=" + fmt(x) + ")");
    return std::log1p(t) / x;
}

struct EnvelopeLog {
    double log_beta1;
    double log_beta2;  // -inf when s == 0 (slope vanishes in the limit)
    double a;
    double log_d;
    double log_center_floor;  // log of the lower bound on the center value
    double mu;                // log(a)/s, continuous through s = 0
};

EnvelopeLog envelope_log(int n, double s) {
    if (n < 2) regime_fail("envelope requires n >= 2 (n=" + std::to_string(n) + ")");
    if (s > 0.0) regime_fail("s > 0 (s=" + fmt(s) + ")");
    double beta = ratio_exponent(s, n - 1);
    double gamma = beta / (1.0 + beta);

    EnvelopeLog e;
    e.log_d = log_drop(gamma) + std::log1p(3.0 * beta) - kLn3 - std::log1p(beta);
    double L = (n - 1) * kLn2 + log_profile_W(beta, gamma);
    double logE = log_center_ratio(s, L);

    double inv_e_pow = (s == 0.0) ? 1.0 : -std::log1p(-s) / s;  // log (1-s)^{-1/s}
    e.log_beta1 = log_two_minus_pow(n + 1, s) - std::log(2.0) - 0.5 * n * std::log(M_PI) -
                  n * e.log_d + inv_e_pow + std::log(n * std::tgamma(0.5 * n)) + logE;

    e.mu = -0.5 * n * kLn4ePi - logE;
    e.a = std::exp(s * e.mu);
    e.log_center_floor = -0.5 * n * kLn4ePi - logE;

    if (s == 0.0) {
        e.log_beta2 = -std::numeric_limits<double>::infinity();
        return e;
    }

    // Slope beta2 solves: the line integral of the interior profile out to
    // 1/beta2 equals the known lower bound on line mass through the center.
    double log_pref = std::log(2.0) + 0.5 * (n - 1) * std::log(M_PI) + (n - 1) * e.log_d -
                      std::log((n - 1) * std::tgamma(0.5 * (n - 1)));
    double beta1_s = std::exp(s * e.log_beta1);
    double t1 = e.a + (1.0 - s) * beta1_s;
    if (t1 <= 0.0) regime_fail("a + (1-s) beta1^s <= 0");
    double term1 = std::exp((1.0 + 1.0 / s) * std::log(t1));
    double term2 = std::exp((s + 1.0) * e.mu);
    double ps = (term1 - term2) * s;  // positive for s < 0
    if (!(ps > 0.0)) regime_fail("envelope slope solve lost positivity (s=" + fmt(s) + ")");
    e.log_beta2 = log_pref - log_two_minus_pow(n, s) + std::log(ps) -
                  (s * e.log_beta1 + std::log1p(s) + std::log1p(-s));
    return e;
}

// log[ B(-1/x - 3, 3) / (-x)^3 ] = log[ 2 / ((1+x)(1+2x)(1+3x)) ], exact.
double log_cubed_tail_moment(double x) {
    if (1.0 + 3.0 * x <= 0.0) {
        regime_fail("-1/x - 3 <= 0: beta argument out of domain (x=" + fmt(x) + ")");
    }
    return std::log(2.0) - std::log1p(x) - std::log1p(2.0 * x) - std::log1p(3.0 * x);
}

double require_positive(double v, const char* name) {
    if (!(v > 0.0)) regime_fail(std::string(name) + " must be positive");
    return v;
}

void require_geometry(const SConcaveParams& p) {
    if (!p.geometry_valid) {
        regime_fail("s < -1/(2n+3): outside the geometry window (s=" + fmt(p.s) +
                    ", n=" + std::to_string(p.n) + ")");
    }
}

}  // namespace

SConcaveParams::SConcaveParams(double s_, int n_) : s(s_), n(n_) {
    if (!(n_ >= 1)) regime_fail("n < 1 (n=" + std::to_string(n_) + ")");
    if (!(s_ <= 0.0)) regime_fail("s > 0 (s=" + fmt(s_) + ")");
    if (!std::isfinite(s_)) regime_fail("s is not finite");
    geometry_valid = s_ >= -1.0 / (2.0 * n_ + 3.0);
    second_moment_1d = s_ > -1.0 / 3.0;
}

double marginal_gamma(double s, int m) {
    if (m < 0) regime_fail("dims integrated out < 0");
    return ratio_exponent(s, m);
}

double halfspace_mass_lower(double gamma) {
    if (!(gamma > -1.0)) regime_fail("gamma <= -1 (gamma=" + fmt(gamma) + ")");
    if (!(gamma <= 0.0)) regime_fail("gamma > 0 (gamma=" + fmt(gamma) + ")");
    return std::exp(log_drop(gamma));
}

BandBounds band_bounds(const SConcaveParams& p) {
    require_geometry(p);
    double s = p.s;
    int n = p.n;
    double g = ratio_exponent(s, n - 1);  // exponent of the 1-D marginal
    if (!(1.0 + (n + 2.0) * s > 0.0)) regime_fail("1 + (n+2)s <= 0 (s=" + fmt(s) + ")");

    BandBounds out;
    out.f3 = 2.0 * (1.0 + n * s) / (1.0 + (n + 2.0) * s);
    out.d = std::exp(-(1.0 + g) * dlog_ratio(g) + std::log1p(3.0 * g) - kLn3 - std::log1p(g));
    double lnV = std::log1p(g) - std::log1p(3.0 * g) + 0.5 * kLn3 +
                 0.5 * (3.0 + 3.0 * g) * dlog_ratio(g);
    out.f2 = 2.0 * std::exp(-log_two_minus_pow(2.0, g)) * std::exp(-0.5 * kLn4ePi) *
             std::exp(-log_center_ratio(g, lnV));
    return out;
}

double disagreement_lower_f1(const SConcaveParams& p, double c) {
    require_geometry(p);
    require_positive(c, "rate multiplier c");
    double s = p.s;
    int n = p.n;
    double alpha = ratio_exponent(s, n - 2);
    double beta = ratio_exponent(s, n - 1);
    double gamma = ratio_exponent(s, n);
    double log_g_lim = (gamma == 0.0) ? 1.0 : std::log1p(gamma) / gamma;
    double lnf1 = std::log(c) - log_two_minus_pow(3.0, alpha) -
                  log_center_ratio(alpha, kLn2 + log_profile_W(beta, gamma)) -
                  2.0 * log_g_lim +
                  2.0 * (std::log1p(3.0 * beta) - kLn3 - std::log1p(beta));
    return std::exp(lnf1);
}

EnvelopeCoeffs density_envelope(int n, double s) {
    EnvelopeLog e = envelope_log(n, s);
    EnvelopeCoeffs out;
    out.beta1 = std::exp(e.log_beta1);
    out.beta2 = (s == 0.0) ? 0.0 : std::exp(e.log_beta2);
    out.a = e.a;
    out.d = std::exp(e.log_d);
    return out;
}

double band_margin_f4(const SConcaveParams& p, double c1, double f_rate) {
    require_geometry(p);
    require_positive(c1, "c1");
    require_positive(f_rate, "f_rate");
    double alpha = ratio_exponent(p.s, p.n - 2);
    if (alpha == 0.0) {
        regime_fail("band margin width undefined at s = 0: envelope slope vanishes");
    }
    EnvelopeLog env = envelope_log(2, alpha);
    double lnf4 = std::log(4.0) + env.log_beta1 + log_cubed_tail_moment(alpha) -
                  std::log(c1) - std::log(f_rate) - 3.0 * env.log_beta2;
    return std::exp(lnf4);
}

double variance_bound_f5(const SConcaveParams& p, double C0) {
    require_geometry(p);
    require_positive(C0, "C0");
    double eta = ratio_exponent(p.s, p.n - 2);
    if (eta == 0.0) {
        regime_fail("variance factor undefined at s = 0: envelope slope vanishes");
    }
    if (1.0 + 3.0 * eta <= 0.0) regime_fail("-1/eta - 3 <= 0 (eta=" + fmt(eta) + ")");
    EnvelopeLog env = envelope_log(2, eta);
    double f2 = band_bounds(p).f2;
    // B(-1/eta - 3, 2) / ((eta+1) eta^2) = 1 / ((1+eta)(1+2 eta)(1+3 eta)).
    double ln_term = std::log(8.0 * C0) + env.log_beta1 - std::log(f2) -
                     3.0 * env.log_beta2 - std::log1p(eta) - std::log1p(2.0 * eta) -
                     std::log1p(3.0 * eta);
    return 16.0 + std::exp(ln_term);
}

double tail_bound(const SConcaveParams& p, double t, double c) {
    require_positive(c, "c");
    if (!(t >= 16.0)) regime_fail("tail bound needs t >= 16 (t=" + fmt(t) + ")");
    double s = p.s;
    double den = 1.0 + p.n * s;
    if (!(den > 0.0)) regime_fail("1 + n s <= 0 (s=" + fmt(s) + ")");
    double v = (s == 0.0) ? std::exp(-c * t)
                          : std::exp(den / s * std::log1p(-c * s * t / den));
    return std::clamp(v, 0.0, 1.0);
}

double baum_reflection_K(const SConcaveParams& p) {
    require_geometry(p);
    if (p.n < 3) regime_fail("reflection constant requires n >= 3");
    double kappa = ratio_exponent(p.s, p.n - 3);
    if (kappa == 0.0) {
        regime_fail("reflection constant undefined at s = 0: envelope slope vanishes");
    }
    EnvelopeLog env = envelope_log(3, kappa);

    // Upper cone integral of the envelope: beta1 B(-1/k - 3, 3) / (-k beta2)^3.
    double log_upper = env.log_beta1 + log_cubed_tail_moment(kappa) - 3.0 * env.log_beta2;

    // Lower cone integral of the interior profile ((r/d) C + 1)^{1/k} g(0)
    // with the floor on the center value; substitution r = d rho.
    double q = std::expm1(-4.0 * kappa * kLn2);
    if (!(q < 1.0)) regime_fail("2 - 2^{-4 kappa} <= 0 (kappa=" + fmt(kappa) + ")");
    double C = q / (1.0 - q);
    double profile_integral = adaptive_simpson(
        [&](double rho) {
            if (rho <= 0.0) return 0.0;
            return std::exp(2.0 * std::log(rho) + std::log1p(C * rho) / kappa);
        },
        0.0, 1.0, 1e-13);
    double log_lower = env.log_center_floor + 3.0 * env.log_d + std::log(profile_integral);

    return std::exp(log_upper - log_lower);
}

double disagreement_coefficient_bound(const SConcaveParams& p, double eps,
                                      const Knobs& knobs) {
    require_geometry(p);
    if (!(eps > 0.0 && eps < 1.0)) regime_fail("eps outside (0, 1)");
    double s = p.s;
    int n = p.n;
    if (!(1.0 + (n + 2.0) * s > 0.0)) regime_fail("1 + (n+2)s <= 0 (s=" + fmt(s) + ")");
    double gamma = ratio_exponent(s, n);
    double f1 = disagreement_lower_f1(p, knobs.c_f1);
    // (1 - eps^gamma) / gamma -> log(1/eps) as gamma -> 0.
    double phi = (gamma == 0.0) ? -std::log(eps)
                                : -std::expm1(gamma * std::log(eps)) / gamma;
    return knobs.c_theta * std::sqrt(static_cast<double>(n)) * (1.0 + n * s) * phi /
           ((1.0 + (n + 2.0) * s) * f1);
}

GeometryBounds geometry_bounds(const SConcaveParams& p, const Knobs& knobs) {
    if (p.n < 3) regime_fail("geometry record requires n >= 3");
    if (!p.geometry_valid) regime_fail("s < -1/(2n+3): outside the geometry window");
    if (p.s == 0.0) regime_fail("geometry record requires s < 0");
    GeometryBounds g;
    BandBounds bb = band_bounds(p);
    g.f1 = disagreement_lower_f1(p, knobs.c_f1);
    g.f2 = bb.f2;
    g.f3 = bb.f3;
    g.d = bb.d;
    g.f4 = band_margin_f4(p, knobs.c1, g.f1);
    g.f5 = variance_bound_f5(p, knobs.C0);
    EnvelopeCoeffs env = density_envelope(p.n, p.s);
    g.beta1 = env.beta1;
    g.beta2 = env.beta2;
    g.K = baum_reflection_K(p);
    g.gamma_marginal = marginal_gamma(p.s, p.n);
    return g;
}

ALSchedule al_schedule(const SConcaveParams& p, double eps, double delta, Model model,
                       const Knobs& knobs) {
    if (!(eps > 0.0 && eps < 0.25)) regime_fail("eps outside (0, 1/4)");
    if (!(delta > 0.0 && delta < 1.0)) regime_fail("delta outside (0, 1)");
    GeometryBounds g = geometry_bounds(p, knobs);
    int n = p.n;
    double gamma = g.gamma_marginal;

    ALSchedule sch;
    sch.model = model;
    sch.knobs = knobs;
    sch.T = std::max(1, static_cast<int>(std::ceil(std::log2(1.0 / (knobs.c_err * eps)))));

    sch.b.resize(sch.T + 1);
    for (int k = 0; k <= sch.T; ++k) {
        sch.b[k] = std::min(knobs.c_b * std::ldexp(g.f4 / g.f1, -k), g.d);
    }
    double tau1 = knobs.c_tau * g.f3 * g.f4 * g.f4 * std::sqrt(g.f5) /
                  (g.f1 * g.f1 * std::sqrt(g.f2));
    double r1 = knobs.c_r * 0.5 / g.f1;
    sch.tau.resize(sch.T);
    sch.r.resize(sch.T);
    sch.kappa.resize(sch.T);
    sch.m.resize(sch.T);
    for (int k = 1; k <= sch.T; ++k) {
        double tau = std::ldexp(tau1, -(k - 1));
        double r = std::ldexp(r1, -(k - 1));
        sch.tau[k - 1] = tau;
        sch.r[k - 1] = r;
        double b_prev = sch.b[k - 1];
        double raw_m;
        if (model == Model::adversarial) {
            double kap = knobs.c_kappa *
                         std::max(g.f3 * tau / (g.f2 * std::min(b_prev, g.d)),
                                  b_prev * std::sqrt(g.f5) / (tau * std::sqrt(g.f2)));
            sch.kappa[k - 1] = kap;
            // Confidence split delta / (sqrt(n) (k + k^2)) enters through the
            // quantile factor (1 - x^gamma)/gamma, stable through gamma -> 0.
            double x = delta / (std::sqrt(static_cast<double>(n)) * (k + double(k) * k));
            double lam = (gamma == 0.0) ? -std::log(x)
                                        : -std::expm1(gamma * std::log(x)) / gamma;
            // form the quotient before squaring: kappa^2 tau^2 overflows first
            double ratio = (b_prev + tau * (lam + 1.0)) / (kap * tau);
            raw_m = knobs.c_m * n *
                    (n + std::log((k + double(k) * k) / delta)) * ratio * ratio;
        } else {
            double kap = knobs.c_kappa * std::ldexp(1.0, -k) / (2.0 * g.f3 * b_prev);
            sch.kappa[k - 1] = kap;
            double growth = g.f3 * sch.b[k] * std::ldexp(1.0, k);
            raw_m = knobs.c_m * growth *
                    (n * std::max(1.0, std::log(growth)) +
                     std::max(0.0, std::log((1.0 + sch.T - k) / delta)));
        }
        double capped = std::clamp(raw_m, static_cast<double>(n + 1), 1e6);
        sch.m[k - 1] = static_cast<long long>(std::ceil(capped));
    }
    return sch;
}

long long vc_sample_size(double eps, double delta, int vcdim, double C) {
    if (!(eps > 0.0 && eps < 1.0)) regime_fail("eps outside (0, 1)");
    if (!(delta > 0.0 && delta < 1.0)) regime_fail("delta outside (0, 1)");
    if (vcdim < 1) regime_fail("vcdim < 1");
    require_positive(C, "C");
    double v = C * ((vcdim / eps) * std::log(1.0 / eps) + (1.0 / eps) * std::log(1.0 / delta));
    return static_cast<long long>(std::ceil(v));
}

BaumSizes baum_sizes(double eps, double delta, int n, double K, double C) {
    if (n < 1) regime_fail("n < 1");
    require_positive(K, "K");
    BaumSizes out;
    out.m1 = vc_sample_size(0.5 * eps, 0.25 * delta, n * n, C);
    double alt = delta / (4.0 * M_E * K * static_cast<double>(out.m1));
    out.m2 = vc_sample_size(std::max(alt, 0.5 * eps), 0.25 * delta, n, C);
    double m3 = std::max(2.0 * static_cast<double>(out.m2) / eps,
                         (2.0 / (eps * eps)) * std::log(4.0 / delta));
    out.m3 = static_cast<long long>(std::ceil(m3));
    return out;
}

long long packing_lower_bound(const SConcaveParams& p, double eps, double c) {
    require_positive(eps, "eps");
    double f1 = disagreement_lower_f1(p, c);
    double v = 0.5 * std::sqrt(static_cast<double>(p.n)) *
                   std::pow(f1 / (2.0 * eps), p.n - 1) -
               1.0;
    if (v < 1.0) return 0;
    return static_cast<long long>(std::floor(v));
}

}  // namespace sconcave::bounds
