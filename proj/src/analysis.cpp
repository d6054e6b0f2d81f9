#include "replens/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace replens {

std::vector<double> sup_grid(const SolutionField& field, double t, int points)
{
    const double sigma = field.params().sigma();
    const double c = std::max(1.0, std::sqrt(std::tanh(2.0 * sigma * t)));
    const double half = 6.0 * std::sqrt(sigma) * c;
    Interval span{-half, half};
    const Interval window = field.support_window(t);
    span = hull(span, {std::max(window.lo, -4.0 * half), std::min(window.hi, 4.0 * half)});

    // Uniform grid plus a refined block around the origin where both profiles peak.
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(points) + 401);
    for (int i = 0; i < points; ++i)
        xs.push_back(span.lo + span.width() * i / (points - 1));
    const double inner = std::sqrt(sigma) * 1.5;
    for (int i = 0; i <= 400; ++i)
        xs.push_back(-inner + 2.0 * inner * i / 400);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

ConvergenceReport deviation_profile(const ValidatedDatum& d, double sigma, std::span<const double> times,
                                    std::span<const double> x_grid, const EvalOptions& opts)
{
    const SolutionField field(Parameters(sigma, FitnessSign::harmonic), d, opts);
    ConvergenceReport r;
    r.sigma = sigma;
    for (double t : times) {
        if (!(t > 0.0))
            throw std::invalid_argument("deviation_profile needs t > 0");
        const std::vector<double> own = x_grid.empty() ? sup_grid(field, t) : std::vector<double>{};
        const std::span<const double> xs = x_grid.empty() ? std::span<const double>(own) : x_grid;
        const std::vector<FieldValue> u = field.u(t, xs);
        double sup = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            sup = std::max(sup, std::abs(u[i].u - asymptotic_profile_psi(sigma, t, xs[i])));
        r.times.push_back(t);
        r.sup_deviation.push_back(sup);
        r.scaled.push_back(sup * std::sinh(2.0 * sigma * t));
        if (t >= 1.0)
            r.C_estimate = std::max(r.C_estimate, r.scaled.back());
    }
    return r;
}

double sup_distance_to_phi(const SolutionField& field, double t)
{
    const std::vector<double> xs = sup_grid(field, t);
    const std::vector<FieldValue> u = field.u(t, xs);
    double sup = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        sup = std::max(sup, std::abs(u[i].u - stationary_profile_phi(field.params().sigma(), xs[i])));
    return sup;
}

std::vector<PhaseRow> phase_diagram(std::span<const LabeledDatum> data, double sigma, ExtinctionMethod method)
{
    std::vector<PhaseRow> rows;
    rows.reserve(data.size());
    for (const auto& item : data) {
        const ExtinctionReport rep = extinction_time(item.datum, sigma, method);
        rows.push_back({item.label, rep.tail, rep.time, rep.time / rep.t_heat, rep.source});
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const PhaseRow& a, const PhaseRow& b) { return a.extinction_time < b.extinction_time; });
    return rows;
}

double mass_drift(const SolutionField& field, std::span<const double> times)
{
    double worst = 0.0;
    for (double t : times)
        worst = std::max(worst, std::abs(field.mass(t) - 1.0));
    return worst;
}

double mass_drift(const OracleTrajectory& traj)
{
    double worst = 0.0;
    for (double m : traj.step_mass)
        worst = std::max(worst, std::abs(m - 1.0));
    return worst;
}

double mass_drift_psi(double sigma, std::span<const double> times)
{
    double worst = 0.0;
    for (double t : times) {
        const double v = sigma * std::tanh(2.0 * sigma * t);
        const double half = truncation_sigmas(1e-15) * std::sqrt(v);
        auto psi = [sigma, t](double x) { return asymptotic_profile_psi(sigma, t, x); };
        QuadratureOptions o;
        o.rel_tol = 1e-13;
        worst = std::max(worst, std::abs(integrate(psi, -half, half, o).value() - 1.0));
    }
    return worst;
}

} // namespace replens
