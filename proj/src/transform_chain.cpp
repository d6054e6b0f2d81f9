#include "replens/transform_chain.hpp"

#include <cmath>
#include <stdexcept>

#include "replens/gaussian_dynamics.hpp"

namespace replens {

HeatDatum scaled_heat_datum(const ValidatedDatum& d, double sigma, double rel_tol)
{
    HeatDatum w0;
    w0.log_value = [&d, sigma](double y) { return d.log_density(sigma * y); };
    const Interval dom = effective_domain(d.datum(), 0.0, truncation_sigmas(rel_tol));
    w0.domain = {dom.lo / sigma, dom.hi / sigma};
    w0.bounded = has_bounded_support(d.datum()) || std::holds_alternative<CustomDatum>(d.datum());
    for (double b : breakpoints(d.datum()))
        w0.breaks.push_back(b / sigma);
    return w0;
}

double heat_solve(const std::function<double(double)>& w0, Interval domain, double t, double x,
                  const QuadratureOptions& opts)
{
    if (!(t > 0.0))
        throw std::invalid_argument("heat_solve needs t > 0");
    const double norm = 1.0 / std::sqrt(4.0 * kPi * t);
    auto integrand = [&](double y) {
        const double r = x - y;
        return norm * std::exp(-r * r / (4.0 * t)) * w0(y);
    };
    // Only the kernel window contributes; splitting at x keeps narrow kernels visible.
    const double reach = truncation_sigmas(opts.rel_tol) * std::sqrt(2.0 * t);
    const double lo = std::max(domain.lo, x - reach), hi = std::min(domain.hi, x + reach);
    if (!(hi > lo))
        return 0.0;
    if (x <= lo || x >= hi)
        return integrate(integrand, lo, hi, opts).value();
    return integrate(integrand, lo, x, opts).value() + integrate(integrand, x, hi, opts).value();
}

double heat_solve_log(const HeatDatum& w0, double t, double x, const QuadratureOptions& opts)
{
    if (!(t > 0.0))
        throw std::invalid_argument("heat_solve needs t > 0");
    const double k = truncation_sigmas(opts.rel_tol);
    const double width = std::sqrt(2.0 * t);
    Interval dom = w0.domain;
    if (!w0.bounded)
        dom = hull(dom, {x - k * width, x + k * width});
    std::vector<double> breaks = w0.breaks;
    for (double j : {0.0, -1.0, 1.0, -3.0, 3.0, -6.0, 6.0})
        breaks.push_back(x + j * width);
    const double log_norm = -0.5 * std::log(4.0 * kPi * t);
    auto log_weight = [&](double y) {
        const double r = x - y;
        return log_norm - r * r / (4.0 * t) + w0.log_value(y);
    };
    return integrate_log(log_weight, {}, dom, breaks, opts).log_abs;
}

LensMap lens_harmonic(double sigma, double t, double x)
{
    const HyperbolicTerms h = hyperbolic_terms(2.0 * sigma * t);
    LensMap m;
    m.tau = h.tanh / (2.0 * sigma);
    m.xi = x * h.sech / sigma;
    m.log_prefactor = -0.5 * h.log_cosh;
    m.prefactor = std::exp(m.log_prefactor);
    m.gauge_exponent = -h.tanh / (2.0 * sigma) * x * x;
    return m;
}

LensMap lens_inverted(double sigma, double t, double x)
{
    if (t >= heat_cap(sigma))
        throw std::domain_error("inverted lens transform is only valid for t < pi / (4 sigma)");
    const double theta = 2.0 * sigma * t;
    const double tn = std::tan(theta);
    const double cs = std::cos(theta);
    LensMap m;
    m.tau = tn / (2.0 * sigma);
    m.xi = x / (sigma * cs);
    m.log_prefactor = -0.5 * std::log(cs);
    m.prefactor = std::exp(m.log_prefactor);
    m.gauge_exponent = tn / (2.0 * sigma) * x * x;
    return m;
}

double log_gauge_denominator(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t,
                             const MomentOptions& opts)
{
    if (fitness == FitnessSign::harmonic) {
        const HyperbolicTerms h = hyperbolic_terms(2.0 * sigma * t);
        return -0.5 * h.log_cosh + weighted_moment(d, -h.tanh / (2.0 * sigma), 0, opts).log_abs;
    }
    if (t >= heat_cap(sigma) || t >= extinction_time(d, sigma).time)
        return kInf;
    const double theta = 2.0 * sigma * t;
    MomentOptions mo = opts;
    mo.divergence_window = 0.0;
    try {
        return -0.5 * std::log(std::cos(theta)) + weighted_moment(d, std::tan(theta) / (2.0 * sigma), 0, mo).log_abs;
    } catch (const QuadratureError& e) {
        if (e.kind() == QuadratureError::Kind::divergent)
            return kInf;
        throw;
    }
}

double normalization_I(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t, const MomentOptions& opts)
{
    const double g = log_gauge_denominator(d, sigma, fitness, t, opts);
    if (fitness == FitnessSign::harmonic)
        return -std::expm1(g);
    return std::expm1(g);
}

ChainSlice::ChainSlice(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t, const EvalOptions& opts)
    : datum_(d), sigma_(sigma), fitness_(fitness), t_(t), opts_(opts)
{
    if (fitness == FitnessSign::inverted && (t >= heat_cap(sigma) || t >= extinction_time(d, sigma).time)) {
        extinct_ = true;
        return;
    }
    if (t < small_time_threshold(sigma)) {
        small_time_ = true;
        return;
    }
    log_gauge_ = log_gauge_denominator(d, sigma, fitness, t, opts.moments);
    if (!std::isfinite(log_gauge_)) {
        extinct_ = true;
        return;
    }
    I_ = fitness == FitnessSign::harmonic ? -std::expm1(log_gauge_) : std::expm1(log_gauge_);
    heat_ = scaled_heat_datum(d, sigma, opts.moments.quad.rel_tol);
}

double ChainSlice::cached_log_w(double tau, double xi) const
{
    {
        std::lock_guard<std::mutex> lock(mutex_);
        if (auto it = w_cache_.find(xi); it != w_cache_.end())
            return it->second;
    }
    const double value = heat_solve_log(heat_, tau, xi, opts_.moments.quad);
    std::lock_guard<std::mutex> lock(mutex_);
    w_cache_.emplace(xi, value);
    return value;
}

ChainIntermediate ChainSlice::intermediate(double x) const
{
    if (extinct_ || small_time_)
        throw std::logic_error("chain intermediates exist only for regular slices");
    ChainIntermediate c;
    c.lens = fitness_ == FitnessSign::harmonic ? lens_harmonic(sigma_, t_, x) : lens_inverted(sigma_, t_, x);
    c.log_w = cached_log_w(c.lens.tau, c.lens.xi);
    c.I = I_;
    c.log_gauge = log_gauge_;
    return c;
}

FieldValue ChainSlice::evaluate(double x) const
{
    if (extinct_)
        return {0.0, EvalStatus::extinct};
    if (small_time_)
        return {datum_.density(x), EvalStatus::small_time};
    const ChainIntermediate c = intermediate(x);
    const double log_v = c.lens.log_prefactor + c.lens.gauge_exponent + c.log_w;
    return {std::exp(log_v - c.log_gauge), EvalStatus::regular};
}

FieldValue chain_evaluate(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t, double x,
                          const EvalOptions& opts)
{
    return ChainSlice(d, sigma, fitness, t, opts).evaluate(x);
}

std::vector<FieldValue> chain_evaluate(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t,
                                       std::span<const double> xs, const EvalOptions& opts)
{
    const ChainSlice slice(d, sigma, fitness, t, opts);
    std::vector<FieldValue> out;
    out.reserve(xs.size());
    for (double x : xs)
        out.push_back(slice.evaluate(x));
    return out;
}

} // namespace replens
