#include "replens/pde_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace replens {

namespace {

constexpr double kUndershootFloor = -1e-12;

double fitness_value(FitnessSign s, double x) { return s == FitnessSign::harmonic ? -x * x : x * x; }

void validate_config(const OracleConfig& cfg)
{
    if (!(cfg.half_width > 0.0))
        throw OracleError(OracleError::Kind::bad_config, "half width L must be positive");
    if (cfg.nx < 201 || cfg.nx % 2 == 0)
        throw OracleError(OracleError::Kind::bad_config, "nx must be odd and at least 201");
    if (!(cfg.dt > 0.0))
        throw OracleError(OracleError::Kind::bad_config, "dt must be positive");
}

} // namespace

double default_half_width(const ValidatedDatum& d, double sigma, FitnessSign fitness, double t_end)
{
    const Interval dom = effective_domain(d.datum(), 0.0, 4.0);
    const double extent = std::max(std::abs(dom.lo), std::abs(dom.hi));
    const double root = std::sqrt(sigma);
    double L = std::max(8.0 * root, extent + 6.0 * root);
    if (fitness == FitnessSign::inverted && t_end > 0.0 && t_end < heat_cap(sigma)) {
        const double theta = 2.0 * sigma * t_end;
        L = std::max(L, extent / std::cos(theta) + 8.0 * std::sqrt(sigma * std::tan(theta)));
    }
    return L;
}

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs)
{
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n), x(n);
    c[0] = super[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
        const double m = diag[i] - sub[i] * c[i - 1];
        c[i] = i + 1 < n ? super[i] / m : 0.0;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

double trapezoid(std::span<const double> values, double dx)
{
    if (values.size() < 2)
        return 0.0;
    double s = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        s += values[i];
    return s * dx;
}

OracleTrajectory solve_oracle(const ValidatedDatum& datum, double sigma, FitnessSign fitness, double t_end,
                              const OracleConfig& cfg)
{
    validate_config(cfg);
    if (!(t_end >= 0.0))
        throw OracleError(OracleError::Kind::bad_config, "t_end must be nonnegative");

    const int nx = cfg.nx;
    const double L = cfg.half_width;
    const double dx = 2.0 * L / (nx - 1);
    const double diff = sigma * sigma / (dx * dx);

    OracleTrajectory traj;
    traj.grid.resize(nx);
    std::vector<double> f(nx), u(nx), fu(nx);
    for (int i = 0; i < nx; ++i) {
        traj.grid[i] = -L + i * dx;
        f[i] = cfg.disable_reaction ? 0.0 : fitness_value(fitness, traj.grid[i]);
        u[i] = datum.density(traj.grid[i]);
    }
    traj.grid[nx - 1] = L;
    u.front() = u.back() = 0.0;
    // Sampling a datum with jumps or kinks misses unit grid mass by O(dx); since unit mass is an
    // unstable equilibrium of the mass ODE when fbar < 0, start exactly on it.
    const double grid_mass = trapezoid(u, dx);
    if (grid_mass > 0.0)
        for (double& v : u)
            v /= grid_mass;

    auto fbar_of = [&](const std::vector<double>& v) {
        for (int i = 0; i < nx; ++i)
            fu[i] = f[i] * v[i];
        return trapezoid(fu, dx);
    };
    auto record = [&](double t) {
        traj.step_times.push_back(t);
        traj.step_mass.push_back(trapezoid(u, dx));
        traj.step_fbar.push_back(fbar_of(u));
    };
    auto reaction_bound = [&](double fbar) {
        double worst = 0.0;
        for (int i = 0; i < nx; ++i)
            worst = std::max(worst, std::abs(f[i] - fbar));
        return worst;
    };

    record(0.0);
    traj.times.push_back(0.0);
    traj.snapshots.push_back(u);
    if (cfg.dt * reaction_bound(traj.step_fbar.back()) > 0.5)
        throw OracleError(OracleError::Kind::bad_config, "dt exceeds the explicit reaction bound dt max|f - fbar| <= 0.5");

    std::vector<double> targets;
    for (double s : cfg.snapshot_times)
        if (s > 0.0 && s < t_end)
            targets.push_back(s);
    if (t_end > 0.0)
        targets.push_back(t_end);
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

    const int m = nx - 2;
    std::vector<double> sub(m), diag(m), super(m), rhs(m);
    double t = 0.0;
    for (double target : targets) {
        const int steps = std::max(1, static_cast<int>(std::ceil((target - t) / cfg.dt - 1e-9)));
        const double h = (target - t) / steps;
        std::fill(sub.begin(), sub.end(), -0.5 * h * diff);
        std::fill(super.begin(), super.end(), -0.5 * h * diff);
        std::fill(diag.begin(), diag.end(), 1.0 + h * diff);

        for (int n = 0; n < steps; ++n) {
            const double fbar = traj.step_fbar.back();
            if (h * reaction_bound(fbar) > 0.5) {
                std::ostringstream os;
                os << "explicit reaction bound violated at t = " << t << " (fbar = " << fbar << ")";
                throw OracleError(OracleError::Kind::instability, os.str());
            }
            for (int i = 1; i <= m; ++i) {
                const double lap = u[i - 1] - 2.0 * u[i] + u[i + 1];
                rhs[i - 1] = u[i] + 0.5 * h * diff * lap + h * (f[i] - fbar) * u[i];
            }
            const std::vector<double> next = solve_tridiagonal(sub, diag, super, rhs);
            double peak = 0.0;
            for (int i = 1; i <= m; ++i) {
                double v = next[i - 1];
                if (v < kUndershootFloor) {
                    traj.min_undershoot = std::min(traj.min_undershoot, v);
                    ++traj.clipped_points;
                    v = 0.0;
                }
                u[i] = v;
                peak = std::max(peak, v);
            }
            t = n + 1 == steps ? target : t + h;
            if (cfg.renormalize) {
                const double mass = trapezoid(u, dx);
                for (double& v : u)
                    v /= mass;
            }
            record(t);
            const double fb = traj.step_fbar.back();
            if (!std::isfinite(peak) || !std::isfinite(fb) || peak > cfg.overflow_guard ||
                std::abs(fb) > cfg.overflow_guard) {
                std::ostringstream os;
                os << "solution blew up at t = " << t;
                throw OracleError(OracleError::Kind::blow_up, os.str());
            }
            if (std::abs(traj.step_mass.back() - 1.0) > cfg.mass_drift_limit) {
                std::ostringstream os;
                os << "mass drifted to " << traj.step_mass.back() << " at t = " << t;
                throw OracleError(OracleError::Kind::instability, os.str());
            }
        }
        traj.times.push_back(target);
        traj.snapshots.push_back(u);
        if (cfg.progress && t_end > 0.0)
            cfg.progress(target / t_end);
    }
    return traj;
}

double trajectory_fbar_at(const OracleTrajectory& traj, double t)
{
    auto it = std::lower_bound(traj.step_times.begin(), traj.step_times.end(), t);
    if (it == traj.step_times.end())
        --it;
    if (it != traj.step_times.begin() && std::abs(*(it - 1) - t) < std::abs(*it - t))
        --it;
    return traj.step_fbar[static_cast<std::size_t>(it - traj.step_times.begin())];
}

ErrorReport compare(const OracleTrajectory& traj, const SolutionField& field, double t_min)
{
    ErrorReport r;
    const double dx = traj.grid.size() > 1 ? traj.grid[1] - traj.grid[0] : 0.0;
    std::vector<double> diff(traj.grid.size());
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const double t = traj.times[s];
        if (t < t_min)
            continue;
        const std::vector<FieldValue> exact = field.u(t, traj.grid);
        double linf = 0.0;
        for (std::size_t i = 0; i < diff.size(); ++i) {
            diff[i] = std::abs(traj.snapshots[s][i] - exact[i].u);
            linf = std::max(linf, diff[i]);
        }
        const double l1 = trapezoid(diff, dx);
        const auto fbar = field.mean_fitness(t);
        const double dev = fbar ? std::abs(trajectory_fbar_at(traj, t) - *fbar) : kInf;
        r.times.push_back(t);
        r.linf.push_back(linf);
        r.l1.push_back(l1);
        r.fbar_deviation.push_back(dev);
        r.max_linf = std::max(r.max_linf, linf);
        r.max_l1 = std::max(r.max_l1, l1);
        r.max_fbar_deviation = std::max(r.max_fbar_deviation, dev);
    }
    return r;
}

} // namespace replens
