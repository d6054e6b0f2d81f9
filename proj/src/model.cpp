#include "replens/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "replens/quadrature.hpp"

namespace replens {

namespace {

constexpr int kNonnegativitySamples = 1024;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double gaussian_log_density(const GaussianDatum& g, double y)
{
    const double d = y - g.m;
    return 0.5 * std::log(g.a / (2.0 * kPi)) - 0.5 * g.a * d * d;
}

double table_density(const TabulatedDatum& t, double y)
{
    const auto& xs = t.nodes;
    if (y < xs.front() || y > xs.back())
        return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), y);
    if (it == xs.end())
        return t.values.back();
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double x0 = xs[i - 1], x1 = xs[i];
    const double s = (y - x0) / (x1 - x0);
    return (1.0 - s) * t.values[i - 1] + s * t.values[i];
}

void check_gaussian(const GaussianDatum& g)
{
    if (!(g.a > 0.0) || !std::isfinite(g.a) || !std::isfinite(g.m))
        throw DatumError(DatumError::Kind::malformed, "gaussian datum needs finite a > 0 and finite m");
}

void check_structure(const InitialDatum& d, double tol)
{
    std::visit(overloaded{
                   [](const GaussianDatum& g) { check_gaussian(g); },
                   [tol](const MixtureDatum& mix) {
                       if (mix.components.empty() || mix.weights.size() != mix.components.size())
                           throw DatumError(DatumError::Kind::malformed,
                                            "mixture needs one positive weight per component");
                       double total = 0.0;
                       for (double w : mix.weights) {
                           if (!(w > 0.0) || !std::isfinite(w))
                               throw DatumError(DatumError::Kind::malformed, "mixture weights must be positive");
                           total += w;
                       }
                       for (const auto& g : mix.components)
                           check_gaussian(g);
                       if (std::abs(total - 1.0) > tol)
                           throw DatumError(DatumError::Kind::not_normalized, "mixture weights do not sum to 1");
                   },
                   [](const TabulatedDatum& t) {
                       if (t.nodes.size() < 2 || t.nodes.size() != t.values.size())
                           throw DatumError(DatumError::Kind::malformed,
                                            "table needs at least two (x, u0) rows");
                       for (std::size_t i = 0; i < t.nodes.size(); ++i) {
                           if (!std::isfinite(t.nodes[i]) || !std::isfinite(t.values[i]))
                               throw DatumError(DatumError::Kind::malformed, "table entries must be finite");
                           if (i > 0 && !(t.nodes[i] > t.nodes[i - 1]))
                               throw DatumError(DatumError::Kind::malformed,
                                                "table nodes must be strictly increasing");
                           if (t.values[i] < 0.0)
                               throw DatumError(DatumError::Kind::negative_density, "table value below zero");
                       }
                   },
                   [](const CustomDatum& c) {
                       if (!c.density)
                           throw DatumError(DatumError::Kind::malformed, "custom datum has no density");
                       if (!(c.suggested_domain.hi > c.suggested_domain.lo))
                           throw DatumError(DatumError::Kind::malformed, "custom datum needs a nonempty domain");
                       if (const auto* g = std::get_if<tail::Gaussian>(&c.tail); g && !(g->rate > 0.0))
                           throw DatumError(DatumError::Kind::malformed, "Gaussian tail rate must be positive");
                       if (const auto* s = std::get_if<tail::SuperGaussian>(&c.tail); s && !(s->p > 2.0))
                           throw DatumError(DatumError::Kind::malformed, "super-Gaussian exponent must exceed 2");
                   },
               },
               d);
}

Interval sample_domain(const InitialDatum& d)
{
    return std::visit(overloaded{
                          [](const TabulatedDatum& t) { return t.support(); },
                          [](const CustomDatum& c) { return c.suggested_domain; },
                          [&d](const auto&) { return effective_domain(d, 0.0, 8.0); },
                      },
                      d);
}

} // namespace

std::string to_string(FitnessSign s) { return s == FitnessSign::harmonic ? "harmonic" : "inverted"; }

FitnessSign parse_fitness(const std::string& s)
{
    if (s == "harmonic")
        return FitnessSign::harmonic;
    if (s == "inverted")
        return FitnessSign::inverted;
    throw std::invalid_argument("fitness must be 'harmonic' or 'inverted', got '" + s + "'");
}

Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

Parameters::Parameters(double sigma, FitnessSign fitness) : sigma_(sigma), fitness_(fitness)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("sigma must be positive and finite");
}

double heat_cap(double sigma) { return kPi / (4.0 * sigma); }

std::string to_string(const TailClass& tc)
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const tail::CompactSupport&) { os << "compact_support"; },
                   [&](const tail::SuperGaussian& s) { os << "super_gaussian(p=" << s.p << ")"; },
                   [&](const tail::Gaussian& g) { os << "gaussian(rate=" << g.rate << ")"; },
                   [&](const tail::SubGaussian&) { os << "sub_gaussian"; },
               },
               tc);
    return os.str();
}

double density(const InitialDatum& d, double y)
{
    return std::visit(overloaded{
                          [y](const GaussianDatum& g) { return std::exp(gaussian_log_density(g, y)); },
                          [y](const MixtureDatum& mix) {
                              double s = 0.0;
                              for (std::size_t i = 0; i < mix.components.size(); ++i)
                                  s += mix.weights[i] * std::exp(gaussian_log_density(mix.components[i], y));
                              return s;
                          },
                          [y](const TabulatedDatum& t) { return table_density(t, y); },
                          [y](const CustomDatum& c) { return c.density(y); },
                      },
                      d);
}

double log_density(const InitialDatum& d, double y)
{
    return std::visit(overloaded{
                          [y](const GaussianDatum& g) { return gaussian_log_density(g, y); },
                          [y](const MixtureDatum& mix) {
                              double top = -kInf;
                              std::vector<double> terms(mix.components.size());
                              for (std::size_t i = 0; i < terms.size(); ++i) {
                                  terms[i] = std::log(mix.weights[i]) + gaussian_log_density(mix.components[i], y);
                                  top = std::max(top, terms[i]);
                              }
                              if (!std::isfinite(top))
                                  return top;
                              double s = 0.0;
                              for (double v : terms)
                                  s += std::exp(v - top);
                              return top + std::log(s);
                          },
                          [y](const TabulatedDatum& t) { return std::log(table_density(t, y)); },
                          [y](const CustomDatum& c) {
                              return c.log_density ? c.log_density(y) : std::log(c.density(y));
                          },
                      },
                      d);
}

Interval effective_domain(const InitialDatum& d, double gamma, double k_sigmas)
{
    auto gaussian_window = [gamma, k_sigmas](const GaussianDatum& g) {
        const double b = g.a - 2.0 * gamma;
        if (!(b > 0.0))
            return Interval{-kInf, kInf};
        const double center = g.a * g.m / b;
        const double half = k_sigmas / std::sqrt(b);
        return Interval{center - half, center + half};
    };
    return std::visit(overloaded{
                          [&](const GaussianDatum& g) { return gaussian_window(g); },
                          [&](const MixtureDatum& mix) {
                              Interval out = gaussian_window(mix.components.front());
                              for (const auto& g : mix.components)
                                  out = hull(out, gaussian_window(g));
                              return out;
                          },
                          [](const TabulatedDatum& t) { return t.support(); },
                          [](const CustomDatum& c) { return c.suggested_domain; },
                      },
                      d);
}

std::vector<double> breakpoints(const InitialDatum& d)
{
    return std::visit(overloaded{
                          [](const GaussianDatum& g) { return std::vector<double>{g.m}; },
                          [](const MixtureDatum& mix) {
                              std::vector<double> out;
                              for (const auto& g : mix.components)
                                  out.push_back(g.m);
                              return out;
                          },
                          [](const TabulatedDatum& t) { return t.nodes; },
                          [](const CustomDatum&) { return std::vector<double>{}; },
                      },
                      d);
}

bool has_bounded_support(const InitialDatum& d)
{
    return std::holds_alternative<TabulatedDatum>(d) ||
           (std::holds_alternative<CustomDatum>(d) &&
            std::holds_alternative<tail::CompactSupport>(std::get<CustomDatum>(d).tail));
}

ValidatedDatum validate_datum(const InitialDatum& input, const ValidationOptions& opts)
{
    check_structure(input, opts.tol);
    InitialDatum d = input;

    const Interval dom = sample_domain(d);
    for (int i = 0; i < kNonnegativitySamples; ++i) {
        const double y = dom.lo + dom.width() * i / (kNonnegativitySamples - 1);
        const double v = density(d, y);
        if (!(v >= 0.0))
            throw DatumError(DatumError::Kind::negative_density, "density is negative or NaN at a sample point");
    }

    MomentOptions mo;
    mo.method = MomentMethod::adaptive;
    mo.quad.rel_tol = std::min(mo.quad.rel_tol, opts.tol * 1e-2);
    double mass = weighted_moment(d, 0.0, 0, mo).value();

    if (auto* t = std::get_if<TabulatedDatum>(&d); t && opts.renormalize_table && std::abs(mass - 1.0) > opts.tol) {
        if (!(mass > 0.0))
            throw DatumError(DatumError::Kind::not_normalized, "table has zero mass");
        for (double& v : t->values)
            v /= mass;
        mass = weighted_moment(d, 0.0, 0, mo).value();
    }
    if (!(std::abs(mass - 1.0) <= opts.tol)) {
        std::ostringstream os;
        os.precision(17);
        os << "datum mass " << mass << " differs from 1 by more than " << opts.tol;
        throw DatumError(DatumError::Kind::not_normalized, os.str());
    }

    return ValidatedDatum(std::move(d), mass - 1.0);
}

ValidatedDatum validate_datum(const ValidatedDatum& d, const ValidationOptions& opts)
{
    return validate_datum(d.datum(), opts);
}

TailClass classify_tail(const InitialDatum& d)
{
    return std::visit(overloaded{
                          [](const GaussianDatum& g) -> TailClass { return tail::Gaussian{g.a}; },
                          [](const MixtureDatum& mix) -> TailClass {
                              double rate = kInf;
                              for (const auto& g : mix.components)
                                  rate = std::min(rate, g.a);
                              return tail::Gaussian{rate};
                          },
                          [](const TabulatedDatum&) -> TailClass { return tail::CompactSupport{}; },
                          [](const CustomDatum& c) -> TailClass { return c.tail; },
                      },
                      d);
}

} // namespace replens
