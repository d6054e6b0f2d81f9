#pragma once

#include <optional>
#include <string>

#include "replens/model.hpp"

namespace replens {

/// Gaussian density sqrt(a / 2pi) exp(-a (x - m)^2 / 2).
struct GaussianState {
    double a;
    double m;

    double density(double x) const;
};

/// Exact (a(t), m(t)) law under f = -x^2. Overflow-free for any t >= 0.
GaussianState propagate_harmonic(const GaussianState& g, double sigma, double t);

/// Exact (a(t), m(t)) law under f = +x^2; std::nullopt once t reaches the extinction time.
std::optional<GaussianState> propagate_inverted(const GaussianState& g, double sigma, double t);

/// arctan(a sigma) / (2 sigma), always below pi / (4 sigma).
double gaussian_extinction_time(const GaussianState& g, double sigma);

enum class ExtinctionSource { tail_class, bisection };

std::string to_string(ExtinctionSource s);

struct ExtinctionReport {
    double time = 0.0;
    ExtinctionSource source = ExtinctionSource::tail_class;
    double t_heat = 0.0;
    TailClass tail = tail::CompactSupport{};
};

enum class ExtinctionMethod { automatic, bisection };

/// T = sup{ t < pi/(4 sigma) : integral of exp(tan(2 sigma t) y^2 / (2 sigma)) u0 is finite }.
/// The automatic route reads T off the tail class; the bisection route brackets T on
/// [0, pi/(4 sigma) - 1e-9] using only the numeric tail probe.
ExtinctionReport extinction_time(const InitialDatum& d, double sigma,
                                 ExtinctionMethod method = ExtinctionMethod::automatic);
inline ExtinctionReport extinction_time(const ValidatedDatum& d, double sigma,
                                        ExtinctionMethod method = ExtinctionMethod::automatic)
{
    return extinction_time(d.datum(), sigma, method);
}

} // namespace replens
