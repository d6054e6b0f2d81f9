#pragma once

#include <span>
#include <string>
#include <vector>

#include "replens/closed_form.hpp"
#include "replens/gaussian_dynamics.hpp"
#include "replens/pde_oracle.hpp"

namespace replens {

struct ConvergenceReport {
    double sigma = 0.0;
    std::vector<double> times;
    std::vector<double> sup_deviation; // sup_x |u(t, x) - psi(t, x)|
    std::vector<double> scaled;        // sup_deviation * sinh(2 sigma t)
    double C_estimate = 0.0;           // max of scaled over t >= 1
};

/// Grid for sup-norm estimates: [-6 sqrt(sigma) c, 6 sqrt(sigma) c] with c = max(1, sqrt(tanh 2 sigma t)),
/// widened to cover the field's support window, with extra resolution near 0.
std::vector<double> sup_grid(const SolutionField& field, double t, int points = 1201);

/// Harmonic fitness only. An empty x_grid selects sup_grid per time.
ConvergenceReport deviation_profile(const ValidatedDatum& d, double sigma, std::span<const double> times,
                                    std::span<const double> x_grid = {}, const EvalOptions& opts = {});

/// sup_x |u(t, x) - phi(x)| on sup_grid.
double sup_distance_to_phi(const SolutionField& field, double t);

struct LabeledDatum {
    std::string label;
    ValidatedDatum datum;
};

struct PhaseRow {
    std::string label;
    TailClass tail;
    double extinction_time;
    double ratio_to_heat; // T / (pi / (4 sigma))
    ExtinctionSource source;
};

/// Rows sorted by extinction time (stable for ties).
std::vector<PhaseRow> phase_diagram(std::span<const LabeledDatum> data, double sigma,
                                    ExtinctionMethod method = ExtinctionMethod::automatic);

/// max over times of |mass - 1|, mass by quadrature of the closed-form field.
double mass_drift(const SolutionField& field, std::span<const double> times);
/// max over every stored step of |mass - 1|.
double mass_drift(const OracleTrajectory& traj);
/// max over times of |integral of psi(t, .) - 1|.
double mass_drift_psi(double sigma, std::span<const double> times);

} // namespace replens
