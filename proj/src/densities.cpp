#include "sconcave/densities.hpp"

#include <cmath>
#include <cstdio>
#include <cstdint>

#include "sconcave/errors.hpp"
#include "sconcave/special.hpp"

namespace sconcave::densities {

namespace {

/* Uniform draw from the open interval (0, 1): the closed endpoints of the
   53-bit grid are shifted off so that quantile transforms never see 0 or 1
   and every sample is finite. */
double open_unit(RngStream& stream) {
    return (double((stream.next_u64() >> 11)) + 0.5) * 0x1p-53;
}

// log of the surface area of the unit sphere in R^n: log(2 pi^{n/2} / Gamma(n/2)).
double log_surface(int n) {
    return std::log(2.0) + 0.5 * n * std::log(M_PI) - std::lgamma(0.5 * n);
}

// (1 + b r)^{1/s} for s < 0, or e^{-b r} at the s = 0 limit, in stable form.
double profile(double b, double r, double s) {
    if (s == 0.0) return std::exp(-b * r);
    return std::exp(std::log1p(b * r) / s);
}

[[noreturn]] void regime_fail(const std::string& what) { throw RegimeError(what); }

}  // namespace

// ---------------------------------------------------------------------------
// Pareto1D

Pareto1D make_pareto1d(double s) {
    if (!(s > -1.0 && s < 0.0)) regime_fail("pareto1d requires -1 < s < 0");
    Pareto1D m;
    m.s = s;
    m.x0 = (s + 1.0) / (-s);
    m.A = std::pow(-1.0 - 1.0 / s, -1.0 / s);
    return m;
}

double Pareto1D::density(double x) const {
    if (x < x0) return 0.0;
    return A * std::exp(std::log(x) / s);
}

double Pareto1D::tail(double t) const {
    if (t <= x0) return 1.0;
    // Pr[X > t] = (t/x0)^{(s+1)/s}
    return std::exp((1.0 + 1.0 / s) * std::log(t / x0));
}

double Pareto1D::cdf(double x) const { return 1.0 - tail(x); }

double Pareto1D::quantile(double u) const {
    return x0 * std::exp((s / (s + 1.0)) * std::log1p(-u));
}

double Pareto1D::mean() const {
    if (!(1.0 + 2.0 * s > 0.0)) regime_fail("pareto1d mean diverges: 1 + 2s <= 0");
    return (1.0 + s) * (1.0 + s) / (-s * (1.0 + 2.0 * s));
}

double pareto_tail(const Pareto1D& m, double t) { return m.tail(t); }

// ---------------------------------------------------------------------------
// Symmetric1D

Symmetric1D make_symmetric1d(double s) {
    if (s > 0.0) regime_fail("symmetric1d requires s <= 0");
    if (!(1.0 + 3.0 * s > 0.0)) regime_fail("symmetric1d requires 1 + 3s > 0");
    Symmetric1D m;
    m.s = s;
    if (s == 0.0) {
        // limit family: unit-variance Laplace density (b/2) e^{-b|x|}
        m.b = std::sqrt(2.0);
        m.c = m.b / 2.0;
        return m;
    }
    /* Unit variance forces b^2 = B(-1/s-3, 3) / B(-1/s-1, 1): the second
       power moment of the normalized profile equals the ratio of those two
       Beta values divided by b^2. */
    double z = -1.0 / s;
    m.b = std::sqrt(beta_fn(z - 3.0, 3.0) / beta_fn(z - 1.0, 1.0));
    m.c = m.b * (z - 1.0) / 2.0;
    return m;
}

double Symmetric1D::density(double x) const { return c * profile(b, std::fabs(x), s); }

double Symmetric1D::cdf(double x) const {
    double r = std::fabs(x);
    // upper half mass beyond |x| is (1+b|x|)^{1+1/s} / 2 (e^{-b|x|}/2 at s=0)
    double half_tail =
        s == 0.0 ? 0.5 * std::exp(-b * r) : 0.5 * std::exp((1.0 + 1.0 / s) * std::log1p(b * r));
    return x >= 0.0 ? 1.0 - half_tail : half_tail;
}

double Symmetric1D::quantile(double u) const {
    double t = u >= 0.5 ? 2.0 * (1.0 - u) : 2.0 * u;  // doubled tail mass at |x|
    double r = s == 0.0 ? -std::log(t) / b : std::expm1((s / (s + 1.0)) * std::log(t)) / b;
    return u >= 0.5 ? r : -r;
}

// ---------------------------------------------------------------------------
// RadialND

RadialND make_radial_nd(int n, double s) {
    if (n < 1) regime_fail("radial family requires n >= 1");
    if (s > 0.0) regime_fail("radial family requires s <= 0");
    if (!(1.0 + (n + 2.0) * s > 0.0)) regime_fail("radial family requires 1 + (n+2)s > 0");
    RadialND m;
    m.n = n;
    m.s = s;
    if (s == 0.0) {
        /* limit family: radius is Gamma(n) scaled by 1/b, so E||x||^2 =
           n(n+1)/b^2 = n forces b = sqrt(n+1). */
        m.b = std::sqrt(n + 1.0);
        m.c = std::exp(n * std::log(m.b) - log_surface(n) - std::lgamma(double(n)));
        return m;
    }
    /* E||x||^2 = B(-1/s-n-2, n+2) / (b^2 B(-1/s-n, n)) = n pins b; the
       total mass b^{-n} B(-1/s-n, n) of r^{n-1}(1+br)^{1/s} pins c. */
    double z = -1.0 / s;
    m.b = std::sqrt(beta_fn(z - n - 2.0, n + 2.0) / (n * beta_fn(z - n, double(n))));
    m.c = std::exp(n * std::log(m.b) - log_surface(n) - log_beta(z - n, double(n)));
    return m;
}

double RadialND::density_at_radius(double r) const { return c * profile(b, r, s); }

double RadialND::density(const double* x) const {
    double q = 0.0;
    for (int i = 0; i < n; ++i) q += x[i] * x[i];
    return density_at_radius(std::sqrt(q));
}

double RadialND::radial_pdf(double r) const {
    if (r < 0.0) return 0.0;
    return std::exp(log_surface(n) + (n - 1.0) * std::log(r)) * density_at_radius(r);
}

double RadialND::radial_cdf(double r) const {
    if (r <= 0.0) return 0.0;
    if (s == 0.0) {
        // integer-shape Gamma law: 1 - e^{-x} sum_{k<n} x^k/k! at x = b r
        double x = b * r;
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < n; ++k) {
            term *= x / k;
            sum += term;
        }
        return 1.0 - std::exp(-x) * sum;
    }
    /* substituting u = br/(1+br) turns the radial mass integral into an
       incomplete Beta integral in u */
    double u = b * r / (1.0 + b * r);
    return reg_inc_beta(double(n), -1.0 / s - n, u);
}

double RadialND::radial_quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) regime_fail("radial quantile requires p in [0, 1)");
    if (p == 0.0) return 0.0;
    if (s == 0.0) {
        double lo = 0.0, hi = (n + 10.0) / b;
        while (radial_cdf(hi) < p) hi *= 2.0;
        for (int i = 0; i < 60; ++i) {
            double mid = 0.5 * (lo + hi);
            (radial_cdf(mid) < p ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }
    double u = reg_inc_beta_inv(double(n), -1.0 / s - n, p);
    return u / (b * (1.0 - u));
}

// ---------------------------------------------------------------------------
// BaselineHalfLine

double BaselineHalfLine::density(double t) const {
    if (t < 0.0) return 0.0;
    return alpha * profile(beta, t, s);
}

double baseline_moment(const BaselineHalfLine& h, int order) {
    if (!(h.alpha > 0.0) || !(h.beta > 0.0)) regime_fail("baseline requires alpha > 0, beta > 0");
    if (h.s > 0.0) regime_fail("baseline requires s <= 0");
    if (order < 0) regime_fail("moment order must be >= 0");
    if (h.s == 0.0)
        return h.alpha * std::exp(std::lgamma(order + 1.0) - (order + 1.0) * std::log(h.beta));
    double z = -1.0 / h.s;
    if (!(z - order - 1.0 > 0.0))
        throw BetaDomainError("moment diverges: -1/s <= order + 1");
    // integral of t^order (1+beta t)^{1/s} is B(-1/s-order-1, order+1) / beta^{order+1}
    return h.alpha * beta_fn(z - order - 1.0, order + 1.0) /
           std::exp((order + 1.0) * std::log(h.beta));
}

// ---------------------------------------------------------------------------
// sampling

std::vector<double> sample(const Pareto1D& m, int count, RngStream& stream) {
    std::vector<double> out(count);
    for (double& x : out) x = m.quantile(open_unit(stream));
    return out;
}

std::vector<double> sample(const Symmetric1D& m, int count, RngStream& stream) {
    std::vector<double> out(count);
    for (double& x : out) x = m.quantile(open_unit(stream));
    return out;
}

std::vector<double> unit_vector(int n, RngStream& stream) {
    std::vector<double> v(n);
    for (;;) {
        double q = 0.0;
        for (double& vi : v) {
            vi = stream.next_gaussian();
            q += vi * vi;
        }
        if (q > 1e-300) {
            double inv = 1.0 / std::sqrt(q);
            for (double& vi : v) vi *= inv;
            return v;
        }
    }
}

std::vector<double> sample(const RadialND& m, int count, RngStream& stream) {
    std::vector<double> out;
    out.reserve(std::size_t(count) * m.n);
    for (int i = 0; i < count; ++i) {
        std::vector<double> dir = unit_vector(m.n, stream);
        double r = m.radial_quantile(open_unit(stream));
        for (double d : dir) out.push_back(r * d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// serialization

std::string points_csv(const std::vector<double>& pts, int dim) {
    if (dim < 1 || pts.size() % dim != 0) regime_fail("point batch size not a multiple of dim");
    std::string out;
    out.reserve(pts.size() * 20 + 16);
    for (int j = 0; j < dim; ++j) {
        if (j) out += ',';
        out += 'x';
        out += std::to_string(j + 1);
    }
    out += '\n';
    char buf[40];
    std::size_t rows = pts.size() / dim;
    for (std::size_t i = 0; i < rows; ++i) {
        for (int j = 0; j < dim; ++j) {
            if (j) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", pts[i * dim + j]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace sconcave::densities
