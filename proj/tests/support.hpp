#pragma once

// Independent reference computations for the tests. Nothing here calls the library's quadrature:
// integrals use composite Simpson on fixed fine grids in long double.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "replens/model.hpp"

namespace oracle {

using Fn = std::function<long double(long double)>;

inline long double simpson(const Fn& f, long double lo, long double hi, int panels = 20000)
{
    if (panels % 2)
        ++panels;
    const long double h = (hi - lo) / panels;
    long double s = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i)
        s += (i % 2 ? 4.0L : 2.0L) * f(lo + i * h);
    return s * h / 3.0L;
}

inline long double gauss_pdf(long double a, long double m, long double x)
{
    return std::sqrt(a / (2.0L * 3.14159265358979323846L)) * std::exp(-0.5L * a * (x - m) * (x - m));
}

/// Direct transcription of the harmonic closed form, integrated by Simpson over [lo, hi] in y.
inline long double harmonic_formula(const Fn& u0, long double lo, long double hi, long double sigma, long double t,
                                    long double x, int panels = 20000)
{
    const long double th = std::tanh(2.0L * sigma * t);
    const long double ch = std::cosh(2.0L * sigma * t);
    const long double pi = 3.14159265358979323846L;
    const long double num = simpson(
        [&](long double y) {
            const long double z = x / ch - y;
            return std::exp(-z * z / (2.0L * sigma * th)) * u0(y);
        },
        lo, hi, panels);
    const long double den =
        simpson([&](long double y) { return std::exp(-th / (2.0L * sigma) * y * y) * u0(y); }, lo, hi, panels);
    return std::pow(2.0L * pi * sigma * th, -0.5L) * std::exp(-th / (2.0L * sigma) * x * x) * num / den;
}

/// Trigonometric counterpart, valid before extinction.
inline long double inverted_formula(const Fn& u0, long double lo, long double hi, long double sigma, long double t,
                                    long double x, int panels = 20000)
{
    const long double tn = std::tan(2.0L * sigma * t);
    const long double c = std::cos(2.0L * sigma * t);
    const long double pi = 3.14159265358979323846L;
    const long double num = simpson(
        [&](long double y) {
            const long double z = x / c - y;
            return std::exp(-z * z / (2.0L * sigma * tn)) * u0(y);
        },
        lo, hi, panels);
    const long double den =
        simpson([&](long double y) { return std::exp(tn / (2.0L * sigma) * y * y) * u0(y); }, lo, hi, panels);
    return std::pow(2.0L * pi * sigma * tn, -0.5L) * std::exp(tn / (2.0L * sigma) * x * x) * num / den;
}

/// Piecewise-linear interpolant with zero outside [nodes.front(), nodes.back()].
inline long double hat_table(const std::vector<double>& nodes, const std::vector<double>& values, long double y)
{
    if (y < nodes.front() || y > nodes.back())
        return 0.0L;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        if (y <= nodes[i + 1]) {
            const long double s = (y - nodes[i]) / (nodes[i + 1] - nodes[i]);
            return values[i] + s * (values[i + 1] - values[i]);
        }
    return values.back();
}

} // namespace oracle

namespace fixtures {

/// Tent on [-1, 1] with peak 1.
inline replens::TabulatedDatum tent()
{
    return {{-1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
}

/// Uniform on [-1, 1].
inline replens::TabulatedDatum uniform()
{
    return {{-1.0, 1.0}, {0.5, 0.5}};
}

/// Lopsided table on [-0.5, 2], normalized exactly (trapezoid of a linear interpolant).
inline replens::TabulatedDatum lopsided()
{
    std::vector<double> nodes{-0.5, 0.0, 0.5, 1.0, 2.0};
    std::vector<double> values{0.0, 1.0, 0.6, 0.8, 0.0};
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
        mass += 0.5 * (values[i] + values[i + 1]) * (nodes[i + 1] - nodes[i]);
    for (double& v : values)
        v /= mass;
    return {nodes, values};
}

inline replens::MixtureDatum lopsided_mixture()
{
    return {{0.3, 0.7}, {{1.0, -1.0}, {2.0, 1.5}}};
}

/// Laplace density with rate r (an exponential tail).
inline replens::CustomDatum laplace(double r)
{
    replens::CustomDatum c;
    c.density = [r](double y) { return 0.5 * r * std::exp(-r * std::abs(y)); };
    c.log_density = [r](double y) { return std::log(0.5 * r) - r * std::abs(y); };
    c.tail = replens::tail::SubGaussian{};
    c.suggested_domain = {-60.0 / r, 60.0 / r};
    return c;
}

/// Gaussian of inverse variance a, presented as a custom density with an unspecified tail so only
/// the numeric probes can see the rate.
inline replens::CustomDatum opaque_gaussian(double a, replens::TailClass declared)
{
    replens::CustomDatum c;
    c.density = [a](double y) { return std::sqrt(a / (2.0 * replens::kPi)) * std::exp(-0.5 * a * y * y); };
    c.log_density = [a](double y) { return 0.5 * std::log(a / (2.0 * replens::kPi)) - 0.5 * a * y * y; };
    c.tail = declared;
    c.suggested_domain = {-40.0 / std::sqrt(a), 40.0 / std::sqrt(a)};
    return c;
}

} // namespace fixtures

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

inline replens::GaussianDatum gaussian(Rng& rng)
{
    return {std::exp(uniform(rng, std::log(0.2), std::log(5.0))), uniform(rng, -2.0, 2.0)};
}

inline replens::MixtureDatum mixture(Rng& rng)
{
    const int n = 2 + static_cast<int>(rng() % 2);
    replens::MixtureDatum m;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        m.weights.push_back(uniform(rng, 0.2, 1.0));
        total += m.weights.back();
        m.components.push_back(gaussian(rng));
    }
    for (double& w : m.weights)
        w /= total;
    return m;
}

inline replens::TabulatedDatum table(Rng& rng)
{
    const int n = 4 + static_cast<int>(rng() % 6);
    const double lo = uniform(rng, -1.5, 0.0);
    const double hi = uniform(rng, 0.3, 1.5);
    replens::TabulatedDatum t;
    for (int i = 0; i < n; ++i) {
        t.nodes.push_back(lo + (hi - lo) * i / (n - 1));
        t.values.push_back(i == 0 || i == n - 1 ? 0.0 : uniform(rng, 0.1, 1.0));
    }
    double mass = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        mass += 0.5 * (t.values[i] + t.values[i + 1]) * (t.nodes[i + 1] - t.nodes[i]);
    for (double& v : t.values)
        v /= mass;
    return t;
}

} // namespace gen
