#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "replens/closed_form.hpp"
#include "replens/model.hpp"

namespace replens {

struct OracleConfig {
    double half_width = 8.0; // L
    int nx = 801;            // odd, >= 201
    double dt = 1e-4;
    bool renormalize = false;
    /// Debug mode: drop the reaction term so the solver integrates the plain heat equation.
    bool disable_reaction = false;
    /// Times at which full snapshots are stored; t = 0 is always stored.
    std::vector<double> snapshot_times;
    /// Snapshots, f-bar or max u beyond this magnitude abort with BlowUp.
    double overflow_guard = 1e100;
    /// Mass drift beyond this aborts with Instability.
    double mass_drift_limit = 1e-2;
    /// Optional progress callback receiving the fraction of t_end completed.
    std::function<void(double)> progress = {};
};

/// L = max(8 sqrt(sigma), R + 6 sqrt(sigma)) with R the datum half-extent; for inverted fitness the
/// window also covers the spread y / cos(2 sigma t_end) + 8 sqrt(sigma tan(2 sigma t_end)).
double default_half_width(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t_end);

class OracleError : public std::runtime_error {
public:
    enum class Kind { bad_config, blow_up, instability };

    OracleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct OracleTrajectory {
    std::vector<double> grid;
    std::vector<double> times;                  // snapshot times, strictly increasing
    std::vector<std::vector<double>> snapshots; // u(times[i], grid)
    std::vector<double> step_times;             // every step, starting at 0
    std::vector<double> step_mass;
    std::vector<double> step_fbar;
    int clipped_points = 0;      // undershoots below -1e-12 that were clipped
    double min_undershoot = 0.0; // most negative value seen before clipping
};

/// Crank-Nicolson diffusion with explicitly coupled reaction (f(x) - fbar^n) u^n on [-L, L] with
/// homogeneous Dirichlet conditions; fbar^n is the trapezoid rule of f u^n. The sampled datum is scaled
/// to unit trapezoid mass before the first step.
OracleTrajectory solve_oracle(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t_end,
                              const OracleConfig& cfg);

/// Thomas algorithm for a tridiagonal system; sub[0] and super[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs);

double trapezoid(std::span<const double> values, double dx);

struct ErrorReport {
    std::vector<double> times;
    std::vector<double> linf;
    std::vector<double> l1;
    std::vector<double> fbar_deviation;
    double max_linf = 0.0;
    double max_l1 = 0.0;
    double max_fbar_deviation = 0.0;
};

/// Compares every snapshot with t >= t_min against the closed form on the oracle grid.
ErrorReport compare(const OracleTrajectory& traj, const SolutionField& field, double t_min = 0.0);

/// f-bar of the trajectory at a snapshot time, from the recorded per-step channel.
double trajectory_fbar_at(const OracleTrajectory& traj, double t);

} // namespace replens
