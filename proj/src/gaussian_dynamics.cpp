#include "replens/gaussian_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "replens/quadrature.hpp"

namespace replens {

namespace {

constexpr double kBisectionTolerance = 1e-6;
constexpr int kBisectionIterations = 60;

} // namespace

double GaussianState::density(double x) const
{
    const double d = x - m;
    return std::sqrt(a / (2.0 * kPi)) * std::exp(-0.5 * a * d * d);
}

GaussianState propagate_harmonic(const GaussianState& g, double sigma, double t)
{
    if (t < 0.0)
        throw std::invalid_argument("propagate_harmonic needs t >= 0");
    const double theta = 2.0 * sigma * t;
    const double th = std::tanh(theta);
    // sech written through exp(-theta) so that it underflows gracefully instead of cosh overflowing.
    const double e = std::exp(-theta);
    const double sech = 2.0 * e / (1.0 + e * e);
    const double as = g.a * sigma;
    return {(as + th) / (sigma * (1.0 + as * th)), g.m * as * sech / (as + th)};
}

std::optional<GaussianState> propagate_inverted(const GaussianState& g, double sigma, double t)
{
    if (t < 0.0)
        throw std::invalid_argument("propagate_inverted needs t >= 0");
    if (t >= gaussian_extinction_time(g, sigma))
        return std::nullopt;
    const double theta = 2.0 * sigma * t;
    const double tn = std::tan(theta);
    const double as = g.a * sigma;
    const double a_t = (as - tn) / (sigma * (1.0 + as * tn));
    if (!(a_t > 0.0))
        return std::nullopt;
    return GaussianState{a_t, g.m * as / (as * std::cos(theta) - std::sin(theta))};
}

double gaussian_extinction_time(const GaussianState& g, double sigma)
{
    return std::atan(g.a * sigma) / (2.0 * sigma);
}

std::string to_string(ExtinctionSource s) { return s == ExtinctionSource::tail_class ? "tail_class" : "bisection"; }

ExtinctionReport extinction_time(const InitialDatum& d, double sigma, ExtinctionMethod method)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("sigma must be positive");
    ExtinctionReport r;
    r.t_heat = heat_cap(sigma);
    r.tail = classify_tail(d);

    if (method == ExtinctionMethod::automatic) {
        r.source = ExtinctionSource::tail_class;
        if (std::holds_alternative<tail::CompactSupport>(r.tail) ||
            std::holds_alternative<tail::SuperGaussian>(r.tail))
            r.time = r.t_heat;
        else if (const auto* g = std::get_if<tail::Gaussian>(&r.tail))
            r.time = gaussian_extinction_time({g->rate, 0.0}, sigma);
        else
            r.time = 0.0;
        return r;
    }

    r.source = ExtinctionSource::bisection;
    auto gamma = [sigma](double t) { return std::tan(2.0 * sigma * t) / (2.0 * sigma); };
    const double upper = r.t_heat - 1e-9;
    if (!probe_divergence(d, gamma(upper))) {
        r.time = r.t_heat;
        return r;
    }
    double lo = 0.0, hi = upper;
    for (int i = 0; i < kBisectionIterations && hi - lo > kBisectionTolerance * 1e-3; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (probe_divergence(d, gamma(mid)))
            hi = mid;
        else
            lo = mid;
    }
    r.time = 0.5 * (lo + hi);
    return r;
}

} // namespace replens
