#include "replens/closed_form.hpp"

#include <algorithm>
#include <cmath>

namespace replens {

namespace {

// One time slice of the explicit formula
//   u(t, x) = (2 pi kv)^(-1/2) exp(gamma x^2) N(x / c) / D,
//   N(z) = integral of exp(-(z - y)^2 / (2 kv)) u0(y) dy,  D = integral of exp(gamma y^2) u0(y) dy,
// with (kv, gamma, c) = (sigma tanh, -tanh / 2 sigma, cosh) for f = -x^2 and
// (sigma tan, +tan / 2 sigma, cos) for f = +x^2, all evaluated at 2 sigma t.
struct Slice {
    double gamma;
    double inv_c;
    double kernel_var;
    double log_prefactor;
    double log_denominator;
};

Slice harmonic_slice(const ValidatedDatum& d, double sigma, double t, const EvalOptions& opts)
{
    const HyperbolicTerms h = hyperbolic_terms(2.0 * sigma * t);
    Slice s;
    s.gamma = -h.tanh / (2.0 * sigma);
    s.inv_c = h.sech;
    s.kernel_var = sigma * h.tanh;
    s.log_prefactor = -0.5 * std::log(2.0 * kPi * s.kernel_var);
    s.log_denominator = weighted_moment(d, s.gamma, 0, opts.moments).log_abs;
    return s;
}

std::optional<Slice> inverted_slice(const ValidatedDatum& d, double sigma, double t, const EvalOptions& opts)
{
    const double theta = 2.0 * sigma * t;
    const double tn = std::tan(theta);
    Slice s;
    s.gamma = tn / (2.0 * sigma);
    s.inv_c = 1.0 / std::cos(theta);
    s.kernel_var = sigma * tn;
    s.log_prefactor = -0.5 * std::log(2.0 * kPi * s.kernel_var);
    // Extinction has already been decided from T; right below T the weighted mass is large but finite.
    MomentOptions mo = opts.moments;
    mo.divergence_window = 0.0;
    try {
        s.log_denominator = weighted_moment(d, s.gamma, 0, mo).log_abs;
    } catch (const QuadratureError& e) {
        if (e.kind() == QuadratureError::Kind::divergent)
            return std::nullopt;
        throw;
    }
    if (!std::isfinite(s.log_denominator))
        return std::nullopt;
    return s;
}

double log_kernel_integral(const ValidatedDatum& d, double z, double kernel_var, const EvalOptions& opts)
{
    const double k = truncation_sigmas(opts.moments.quad.rel_tol);
    const double w = std::sqrt(kernel_var);
    Interval dom = effective_domain(d.datum(), 0.0, k);
    if (!has_bounded_support(d.datum()) && !std::holds_alternative<CustomDatum>(d.datum()))
        dom = hull(dom, {z - k * w, z + k * w});

    std::vector<double> breaks = breakpoints(d.datum());
    for (double j : {0.0, -1.0, 1.0, -3.0, 3.0, -6.0, 6.0})
        breaks.push_back(z + j * w);

    // Far outside the support the exponent is huge; factor out its value at the nearest point so
    // the integrand only sees (z-y)^2 - (z-y0)^2 = (y0-y)(2z-y-y0).
    const double y0 = std::clamp(z, dom.lo, dom.hi);
    const double r0 = z - y0;
    auto log_weight = [&d, z, y0, kernel_var](double y) {
        return -(y0 - y) * (2.0 * z - y - y0) / (2.0 * kernel_var) + d.log_density(y);
    };
    return -r0 * r0 / (2.0 * kernel_var) + integrate_log(log_weight, {}, dom, breaks, opts.moments.quad).log_abs;
}

double log_field(const ValidatedDatum& d, const Slice& s, double x, const EvalOptions& opts)
{
    return s.log_prefactor + s.gamma * x * x + log_kernel_integral(d, x * s.inv_c, s.kernel_var, opts) -
           s.log_denominator;
}

FieldValue small_time_value(const ValidatedDatum& d, double x) { return {d.density(x), EvalStatus::small_time}; }

} // namespace

double small_time_threshold(double sigma) { return 1e-6 / sigma; }

HyperbolicTerms hyperbolic_terms(double theta)
{
    const double e = std::exp(-theta);
    return {std::tanh(theta), 2.0 * e / (1.0 + e * e), theta + std::log1p(e * e) - std::log(2.0)};
}

FieldValue evaluate_harmonic(const ValidatedDatum& d, double sigma, double t, double x, const EvalOptions& opts)
{
    const double xs[] = {x};
    return evaluate_harmonic(d, sigma, t, xs, opts).front();
}

std::vector<FieldValue> evaluate_harmonic(const ValidatedDatum& d, double sigma, double t, std::span<const double> xs,
                                          const EvalOptions& opts)
{
    std::vector<FieldValue> out;
    out.reserve(xs.size());
    if (t < small_time_threshold(sigma)) {
        for (double x : xs)
            out.push_back(small_time_value(d, x));
        return out;
    }
    const Slice s = harmonic_slice(d, sigma, t, opts);
    for (double x : xs)
        out.push_back({std::exp(log_field(d, s, x, opts)), EvalStatus::regular});
    return out;
}

FieldValue evaluate_inverted(const ValidatedDatum& d, double sigma, double t, double x, const EvalOptions& opts)
{
    const double xs[] = {x};
    return evaluate_inverted(d, sigma, t, xs, opts).front();
}

std::vector<FieldValue> evaluate_inverted(const ValidatedDatum& d, double sigma, double t, std::span<const double> xs,
                                          const EvalOptions& opts)
{
    const std::vector<FieldValue> extinct(xs.size(), FieldValue{0.0, EvalStatus::extinct});
    if (t >= heat_cap(sigma) || t >= extinction_time(d, sigma).time)
        return extinct;

    std::vector<FieldValue> out;
    out.reserve(xs.size());
    if (t < small_time_threshold(sigma)) {
        for (double x : xs)
            out.push_back(small_time_value(d, x));
        return out;
    }
    const auto s = inverted_slice(d, sigma, t, opts);
    if (!s)
        return extinct;
    for (double x : xs)
        out.push_back({std::exp(log_field(d, *s, x, opts)), EvalStatus::regular});
    return out;
}

double second_moment_harmonic(const ValidatedDatum& d, double sigma, double t, const EvalOptions& opts)
{
    const HyperbolicTerms h = hyperbolic_terms(2.0 * sigma * t);
    const double gamma = -h.tanh / (2.0 * sigma);
    const QuadratureResult m0 = weighted_moment(d, gamma, 0, opts.moments);
    const QuadratureResult m2 = weighted_moment(d, gamma, 2, opts.moments);
    return sigma * h.tanh + h.sech * h.sech * std::exp(m2.log_abs - m0.log_abs);
}

std::optional<double> second_moment_inverted(const ValidatedDatum& d, double sigma, double t, const EvalOptions& opts)
{
    if (t >= heat_cap(sigma) || t >= extinction_time(d, sigma).time)
        return std::nullopt;
    const double theta = 2.0 * sigma * t;
    const double tn = std::tan(theta);
    const double cs = std::cos(theta);
    MomentOptions mo = opts.moments;
    mo.divergence_window = 0.0;
    try {
        const QuadratureResult m0 = weighted_moment(d, tn / (2.0 * sigma), 0, mo);
        const QuadratureResult m2 = weighted_moment(d, tn / (2.0 * sigma), 2, mo);
        const double value = sigma * tn + std::exp(m2.log_abs - m0.log_abs) / (cs * cs);
        if (!std::isfinite(value))
            return std::nullopt;
        return value;
    } catch (const QuadratureError& e) {
        if (e.kind() == QuadratureError::Kind::divergent)
            return std::nullopt;
        throw;
    }
}

std::optional<double> mean_fitness(const ValidatedDatum& d, const Parameters& p, double t, const EvalOptions& opts)
{
    if (p.fitness() == FitnessSign::harmonic)
        return -second_moment_harmonic(d, p.sigma(), t, opts);
    return second_moment_inverted(d, p.sigma(), t, opts);
}

double asymptotic_profile_psi(double sigma, double t, double x)
{
    const double v = sigma * std::tanh(2.0 * sigma * t);
    return std::exp(-x * x / (2.0 * v)) / std::sqrt(2.0 * kPi * v);
}

double stationary_profile_phi(double sigma, double x)
{
    return std::exp(-x * x / (2.0 * sigma)) / std::sqrt(2.0 * kPi * sigma);
}

SolutionField::SolutionField(Parameters params, ValidatedDatum datum, EvalOptions opts)
    : params_(params), datum_(std::move(datum)), opts_(opts),
      extinction_(params.fitness() == FitnessSign::harmonic ? kInf
                                                              : replens::extinction_time(datum_, params.sigma()).time)
{
}

FieldValue SolutionField::u(double t, double x) const
{
    const double xs[] = {x};
    return u(t, xs).front();
}

std::vector<FieldValue> SolutionField::u(double t, std::span<const double> xs) const
{
    if (params_.fitness() == FitnessSign::harmonic)
        return evaluate_harmonic(datum_, params_.sigma(), t, xs, opts_);
    return evaluate_inverted(datum_, params_.sigma(), t, xs, opts_);
}

Interval SolutionField::support_window(double t) const
{
    const double k = truncation_sigmas(opts_.moments.quad.rel_tol);
    const double sigma = params_.sigma();
    if (t < small_time_threshold(sigma))
        return effective_domain(datum_.datum(), 0.0, k);
    double gamma, inv_c, kv;
    if (params_.fitness() == FitnessSign::harmonic) {
        const HyperbolicTerms h = hyperbolic_terms(2.0 * sigma * t);
        gamma = -h.tanh / (2.0 * sigma);
        inv_c = h.sech;
        kv = sigma * h.tanh;
    } else {
        const double theta = 2.0 * sigma * t;
        gamma = std::tan(theta) / (2.0 * sigma);
        inv_c = 1.0 / std::cos(theta);
        kv = sigma * std::tan(theta);
    }
    const Interval y = effective_domain(datum_.datum(), gamma, k);
    const double w = k * std::sqrt(kv);
    return {std::min(y.lo * inv_c, y.hi * inv_c) - w, std::max(y.lo * inv_c, y.hi * inv_c) + w};
}

double SolutionField::field_integral(double t, int k) const
{
    const double sigma = params_.sigma();
    std::optional<Slice> s;
    if (t >= small_time_threshold(sigma)) {
        if (params_.fitness() == FitnessSign::harmonic)
            s = harmonic_slice(datum_, sigma, t, opts_);
        else if (t < extinction_)
            s = inverted_slice(datum_, sigma, t, opts_);
        if (!s)
            return 0.0;
    } else if (params_.fitness() == FitnessSign::inverted && t >= extinction_) {
        return 0.0;
    }

    const Interval window = support_window(t);
    std::vector<double> breaks{0.0};
    if (!s)
        breaks = breakpoints(datum_.datum());
    auto log_u = [this, &s](double x) {
        return s ? log_field(datum_, *s, x, opts_) : datum_.log_density(x);
    };
    std::function<double(double)> factor;
    if (k == 2)
        factor = [](double x) { return x * x; };
    QuadratureOptions outer = opts_.moments.quad;
    outer.rel_tol = std::max(1e-10, 10.0 * outer.rel_tol);
    return integrate_log(log_u, factor, window, breaks, outer).value();
}

double SolutionField::mass(double t) const { return field_integral(t, 0); }

double SolutionField::second_moment_quadrature(double t) const { return field_integral(t, 2); }

std::optional<double> SolutionField::second_moment(double t) const
{
    if (params_.fitness() == FitnessSign::harmonic)
        return second_moment_harmonic(datum_, params_.sigma(), t, opts_);
    return second_moment_inverted(datum_, params_.sigma(), t, opts_);
}

std::optional<double> SolutionField::mean_fitness(double t) const
{
    return replens::mean_fitness(datum_, params_, t, opts_);
}

} // namespace replens
