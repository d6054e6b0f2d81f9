#pragma once

#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace replens {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sign of the quadratic fitness: harmonic is f(x) = -x^2, inverted is f(x) = +x^2.
enum class FitnessSign { harmonic, inverted };

std::string to_string(FitnessSign s);
FitnessSign parse_fitness(const std::string& s);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

Interval hull(Interval a, Interval b);

/// Diffusion scale and fitness sign of the rescaled model.
class Parameters {
public:
    Parameters(double sigma, FitnessSign fitness);

    double sigma() const { return sigma_; }
    FitnessSign fitness() const { return fitness_; }

    /// Existence cap pi/(4 sigma) of the inverted lens transform.
    double t_heat() const { return kPi / (4.0 * sigma_); }

private:
    double sigma_;
    FitnessSign fitness_;
};

double heat_cap(double sigma);

namespace tail {
struct CompactSupport {
    bool operator==(const CompactSupport&) const = default;
};
/// u0(y) decays like exp(-c |y|^p) with p > 2.
struct SuperGaussian {
    double p;
    bool operator==(const SuperGaussian&) const = default;
};
/// u0(y) decays like exp(-rate y^2 / 2).
struct Gaussian {
    double rate;
    bool operator==(const Gaussian&) const = default;
};
/// Exponential, algebraic or heavier tails.
struct SubGaussian {
    bool operator==(const SubGaussian&) const = default;
};
} // namespace tail

using TailClass = std::variant<tail::CompactSupport, tail::SuperGaussian, tail::Gaussian, tail::SubGaussian>;

std::string to_string(const TailClass& tc);

struct GaussianDatum {
    double a; // inverse variance
    double m; // mean
};

struct MixtureDatum {
    std::vector<double> weights;
    std::vector<GaussianDatum> components;
};

/// Piecewise-linear density through (nodes[i], values[i]), zero outside [nodes.front(), nodes.back()].
struct TabulatedDatum {
    std::vector<double> nodes;
    std::vector<double> values;

    Interval support() const { return {nodes.front(), nodes.back()}; }
};

struct CustomDatum {
    std::function<double(double)> density;
    TailClass tail;
    Interval suggested_domain;
    /// Optional; when empty, log(density) is used. Supplying it lets tail probes see past underflow.
    std::function<double(double)> log_density = {};
};

using InitialDatum = std::variant<GaussianDatum, MixtureDatum, TabulatedDatum, CustomDatum>;

class DatumError : public std::runtime_error {
public:
    enum class Kind { malformed, not_normalized, negative_density };

    DatumError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

double density(const InitialDatum& d, double y);
double log_density(const InitialDatum& d, double y);

/// Region holding essentially all of the mass of exp(gamma y^2) u0(y); `k_sigmas` is the half-width in
/// units of the (weighted) Gaussian scale. Finite-support data return their support.
Interval effective_domain(const InitialDatum& d, double gamma, double k_sigmas);

/// Points where the integrand of a datum integral has kinks or concentration (table nodes, centers).
std::vector<double> breakpoints(const InitialDatum& d);

/// True when the datum vanishes identically outside a bounded interval.
bool has_bounded_support(const InitialDatum& d);

struct ValidationOptions {
    double tol = 1e-8;
    /// Rescale tabulated values to unit mass instead of rejecting them.
    bool renormalize_table = false;
};

/// An initial datum whose unit mass and nonnegativity have been checked numerically.
class ValidatedDatum {
public:
    const InitialDatum& datum() const { return datum_; }
    double mass_defect() const { return mass_defect_; }

    double density(double y) const { return replens::density(datum_, y); }
    double log_density(double y) const { return replens::log_density(datum_, y); }

private:
    friend ValidatedDatum validate_datum(const InitialDatum& d, const ValidationOptions& opts);
    ValidatedDatum(InitialDatum d, double defect) : datum_(std::move(d)), mass_defect_(defect) {}

    InitialDatum datum_;
    double mass_defect_;
};

ValidatedDatum validate_datum(const InitialDatum& d, const ValidationOptions& opts = {});
ValidatedDatum validate_datum(const ValidatedDatum& d, const ValidationOptions& opts = {});

TailClass classify_tail(const InitialDatum& d);
inline TailClass classify_tail(const ValidatedDatum& d) { return classify_tail(d.datum()); }

} // namespace replens
