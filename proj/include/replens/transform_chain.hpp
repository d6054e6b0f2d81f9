#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "replens/closed_form.hpp"
#include "replens/model.hpp"
#include "replens/quadrature.hpp"

namespace replens {

// Second evaluation route for u: solve the free heat equation from x -> u0(sigma x), map it through
// the (hyperbolic or trigonometric) lens transform, then divide by the gauge normalization 1 -/+ I(t).

/// Initial datum of the free heat equation, described in log space.
struct HeatDatum {
    std::function<double(double)> log_value;
    Interval domain;
    /// When false the datum has Gaussian-type tails and the integration window follows the kernel.
    bool bounded = true;
    std::vector<double> breaks;
};

/// The datum y -> u0(sigma y) solved by w in the lens transform.
HeatDatum scaled_heat_datum(const ValidatedDatum& d, double sigma, double rel_tol);

/// (4 pi t)^(-1/2) * integral of exp(-(x - y)^2 / (4 t)) w0(y) dy by quadrature.
double heat_solve(const std::function<double(double)>& w0, Interval domain, double t, double x,
                  const QuadratureOptions& opts = default_quadrature_options());
/// Log-space variant of heat_solve.
double heat_solve_log(const HeatDatum& w0, double t, double x,
                      const QuadratureOptions& opts = default_quadrature_options());

/// v(t, x) = prefactor * exp(gauge_exponent) * w(tau, xi).
struct LensMap {
    double tau;
    double xi;
    double prefactor;
    double gauge_exponent;
    double log_prefactor;
};

LensMap lens_harmonic(double sigma, double t, double x);
/// Throws std::domain_error (beyond the heat cap) when t >= pi / (4 sigma).
LensMap lens_inverted(double sigma, double t, double x);

/// Closed form of I(t) = integral over [0, t] x R of x^2 v. For inverted fitness returns +inf once the
/// weighted mass diverges.
double normalization_I(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t,
                       const MomentOptions& opts = {});

/// log(1 - I(t)) (harmonic) or log(1 + I(t)) (inverted) computed without cancellation.
double log_gauge_denominator(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t,
                             const MomentOptions& opts = {});

struct ChainIntermediate {
    LensMap lens;
    double log_w;
    double I;
    double log_gauge;
};

/// One t-slice of the chain. Caches w at the mapped time per xi; safe for concurrent use.
class ChainSlice {
public:
    ChainSlice(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t, const EvalOptions& opts = {});

    bool extinct() const { return extinct_; }
    FieldValue evaluate(double x) const;
    ChainIntermediate intermediate(double x) const;

private:
    double cached_log_w(double tau, double xi) const;

    const ValidatedDatum& datum_;
    double sigma_;
    FitnessSign fitness_;
    double t_;
    EvalOptions opts_;
    bool extinct_ = false;
    bool small_time_ = false;
    double I_ = 0.0;
    double log_gauge_ = 0.0;
    HeatDatum heat_;
    mutable std::mutex mutex_;
    mutable std::map<double, double> w_cache_;
};

FieldValue chain_evaluate(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t, double x,
                          const EvalOptions& opts = {});
std::vector<FieldValue> chain_evaluate(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t,
                                       std::span<const double> xs, const EvalOptions& opts = {});

} // namespace replens
