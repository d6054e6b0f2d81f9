#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "replens/model.hpp"

namespace replens {

/// Integral value kept as sign * exp(log_abs) so that Gaussian weights with large |gamma| y^2 neither
/// overflow nor underflow.
struct QuadratureResult {
    double log_abs = -kInf;
    int sign = 0;
    double log_abs_error = -kInf;
    bool converged = true;
    int evaluations = 0;

    double value() const { return sign == 0 ? 0.0 : sign * std::exp(log_abs); }
    double abs_error_estimate() const { return std::exp(log_abs_error); }
};

class QuadratureError : public std::runtime_error {
public:
    enum class Kind { divergent, no_convergence };

    QuadratureError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct QuadratureOptions {
    double rel_tol = 1e-11;
    /// Absolute floor on the error target, in the units of the integrand.
    double abs_tol = 0.0;
    int max_panels = 4000;
};

/// Default relative tolerance; the REPLENS_TOL environment variable overrides it.
double default_tolerance();
QuadratureOptions default_quadrature_options();

/// Adaptive 21-point Gauss-Kronrod on [lo, hi]; either end may be infinite, in which case the line is
/// compactified through y = s/(1 - s^2) or y = lo + s/(1 - s). Throws NoConvergence.
QuadratureResult integrate(const std::function<double(double)>& f, double lo, double hi,
                           const QuadratureOptions& opts = default_quadrature_options());

/// Computes the integral of factor(y) * exp(log_weight(y)) over a finite interval entirely in log space.
/// `breaks` seeds the initial panel partition; points outside the interval are ignored. An empty
/// `factor` means factor == 1. Throws NoConvergence.
QuadratureResult integrate_log(const std::function<double(double)>& log_weight,
                               const std::function<double(double)>& factor, Interval domain,
                               std::span<const double> breaks,
                               const QuadratureOptions& opts = default_quadrature_options());

enum class MomentMethod { automatic, analytic, adaptive };

struct MomentOptions {
    QuadratureOptions quad = default_quadrature_options();
    MomentMethod method = MomentMethod::automatic;
    /// gamma within this distance below a divergence threshold is reported as Divergent.
    double divergence_window = 1e-6;
};

/// Integral of exp(gamma y^2) y^k u0(y) dy, k in {0, 1, 2}. Throws Divergent / NoConvergence.
QuadratureResult weighted_moment(const InitialDatum& d, double gamma, int k, const MomentOptions& opts = {});
inline QuadratureResult weighted_moment(const ValidatedDatum& d, double gamma, int k,
                                        const MomentOptions& opts = {})
{
    return weighted_moment(d.datum(), gamma, k, opts);
}

/// Analytic divergence predicate for the integral of exp(gamma y^2) u0: uses the tail class.
bool detect_divergence(const InitialDatum& d, double gamma, double window = 1e-6);
inline bool detect_divergence(const ValidatedDatum& d, double gamma, double window = 1e-6)
{
    return detect_divergence(d.datum(), gamma, window);
}

/// Numeric tail-growth probe: estimates the local Gaussian decay rate of u0 far out on both sides
/// from log_density and reports the slower side. Infinite for data that vanish far out.
double probe_tail_rate(const InitialDatum& d);

/// Divergence predicate from probe_tail_rate alone, independent of any declared tail class.
bool probe_divergence(const InitialDatum& d, double gamma, double window = 1e-6);

/// Half-width, in Gaussian standard deviations, beyond which tails are below tol / 10.
double truncation_sigmas(double rel_tol);

} // namespace replens
