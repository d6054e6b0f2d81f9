#pragma once

#include <optional>
#include <span>
#include <vector>

#include "replens/gaussian_dynamics.hpp"
#include "replens/model.hpp"
#include "replens/quadrature.hpp"

namespace replens {

enum class EvalStatus {
    regular,
    /// t below the smallest resolvable time; the datum itself was returned.
    small_time,
    /// past the extinction time (or the pi/(4 sigma) cap); u is identically zero.
    extinct,
};

struct FieldValue {
    double u = 0.0;
    EvalStatus status = EvalStatus::regular;

    bool extinct() const { return status == EvalStatus::extinct; }
};

struct EvalOptions {
    MomentOptions moments = {};
};

/// Below this time (scaled by 1/sigma) the mollifying kernel is numerically a Dirac mass.
double small_time_threshold(double sigma);

/// Overflow-free hyperbolic functions of theta = 2 sigma t.
struct HyperbolicTerms {
    double tanh;
    double sech;
    double log_cosh;
};
HyperbolicTerms hyperbolic_terms(double theta);

FieldValue evaluate_harmonic(const ValidatedDatum& d, double sigma, double t, double x, const EvalOptions& opts = {});
std::vector<FieldValue> evaluate_harmonic(const ValidatedDatum& d, double sigma, double t, std::span<const double> xs,
                                          const EvalOptions& opts = {});

FieldValue evaluate_inverted(const ValidatedDatum& d, double sigma, double t, double x, const EvalOptions& opts = {});
std::vector<FieldValue> evaluate_inverted(const ValidatedDatum& d, double sigma, double t, std::span<const double> xs,
                                          const EvalOptions& opts = {});

/// sigma tanh(2 sigma t) + sech^2(2 sigma t) * (weighted y^2 moment / weighted mass): the second moment
/// of u(t, .) under f = -x^2.
double second_moment_harmonic(const ValidatedDatum& d, double sigma, double t, const EvalOptions& opts = {});

/// The trigonometric counterpart; std::nullopt once the weighted moments diverge.
std::optional<double> second_moment_inverted(const ValidatedDatum& d, double sigma, double t,
                                             const EvalOptions& opts = {});

/// Integral of f(x) u(t, x): -second moment for harmonic, +second moment for inverted.
std::optional<double> mean_fitness(const ValidatedDatum& d, const Parameters& p, double t,
                                   const EvalOptions& opts = {});

/// Fundamental solution issued from a Dirac mass at 0.
double asymptotic_profile_psi(double sigma, double t, double x);

/// Universal stationary Gaussian (2 pi sigma)^(-1/2) exp(-x^2 / (2 sigma)).
double stationary_profile_phi(double sigma, double x);

/// Lazily evaluated solution u(t, x) together with its scalar channels.
class SolutionField {
public:
    SolutionField(Parameters params, ValidatedDatum datum, EvalOptions opts = {});

    const Parameters& params() const { return params_; }
    const ValidatedDatum& datum() const { return datum_; }
    const EvalOptions& options() const { return opts_; }

    /// Extinction time; infinite for harmonic fitness.
    double extinction_time() const { return extinction_; }

    FieldValue u(double t, double x) const;
    std::vector<FieldValue> u(double t, std::span<const double> xs) const;

    /// x-window holding all but a negligible part of u(t, .).
    Interval support_window(double t) const;

    /// Integral of u(t, .) by quadrature of the evaluated field.
    double mass(double t) const;
    /// Integral of x^2 u(t, .) by quadrature of the evaluated field.
    double second_moment_quadrature(double t) const;

    /// Closed-form second moment; std::nullopt past extinction.
    std::optional<double> second_moment(double t) const;
    std::optional<double> mean_fitness(double t) const;

private:
    double field_integral(double t, int k) const;

    Parameters params_;
    ValidatedDatum datum_;
    EvalOptions opts_;
    double extinction_;
};

} // namespace replens
