#include "coexist/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "coexist/csv.hpp"
#include "coexist/error.hpp"

namespace coexist
{
namespace
{

constexpr double kClampTol = 1e-12;

Drift raw_drift(double d, double m, double q)
{
    double const denom = (1.0 + d) * (1.0 - d);
    double const tilt = 1.0 + d - 2.0 * q;
    return {-(1.0 - m - d * d) * tilt / denom, d * m * tilt / denom};
}

double corner_distance(ScaledPoint y)
{
    constexpr std::array<ScaledPoint, 3> corners{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}}};
    double best = INFINITY;
    for (auto const& c : corners)
        best = std::min(best, std::hypot(y.d - c.d, y.m - c.m));
    return best;
}

/// Pulls a point that left S by roundoff back onto the boundary.
ScaledPoint clamp_to_triangle(ScaledPoint y)
{
    if (in_triangle(y))
        return y;
    if (!in_triangle(y, kClampTol))
        throw IntegrationError("flow left the triangle S");
    y.d = std::clamp(y.d, -1.0, 1.0);
    y.m = std::clamp(y.m, 0.0, 1.0 - std::abs(y.d));
    return y;
}

}  // namespace

void FlowOptions::validate() const
{
    if (!(dt > 0 && gamma_tol > 0 && t_max > 0 && corner_tol > 0))
        throw ConfigError("flow options must all be positive");
}

double gamma_upper_end(double q)
{
    return 1.0 - std::abs(2.0 * q - 1.0);
}

Drift drift(ScaledPoint y, double q)
{
    if (!(std::abs(y.d) < 1.0))
        throw DomainError("drift is singular at |d| = 1");
    if (!in_triangle(y, kClampTol))
        throw DomainError("point outside the triangle S");
    return raw_drift(y.d, y.m, q);
}

Trajectory integrate_flow(ScaledPoint y0, double q, FlowOptions const& opts)
{
    opts.validate();
    if (!in_triangle(y0, kClampTol))
        throw DomainError("flow start outside the triangle S");
    if (corner_distance(y0) <= opts.corner_tol)
        throw IntegrationError("flow started at a fixed corner of S");

    double const target = gamma_line(q);
    Trajectory traj;
    traj.points.push_back({0.0, y0});
    if (std::abs(y0.d - target) <= opts.gamma_tol)
    {
        traj.reason = TerminalReason::gamma_reached;
        return traj;
    }

    double const h = opts.dt;
    double const side = y0.d > target ? 1.0 : -1.0;
    ScaledPoint y = y0;
    double t = 0.0;
    while (t < opts.t_max)
    {
        auto const k1 = raw_drift(y.d, y.m, q);
        auto const k2 = raw_drift(y.d + 0.5 * h * k1.d, y.m + 0.5 * h * k1.m, q);
        auto const k3 = raw_drift(y.d + 0.5 * h * k2.d, y.m + 0.5 * h * k2.m, q);
        auto const k4 = raw_drift(y.d + h * k3.d, y.m + h * k3.m, q);
        ScaledPoint next{y.d + h / 6.0 * (k1.d + 2.0 * k2.d + 2.0 * k3.d + k4.d),
                         y.m + h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m)};
        if (!std::isfinite(next.d) || !std::isfinite(next.m))
            throw IntegrationError("flow produced a non-finite state");
        next = clamp_to_triangle(next);
        double const t_next = t + h;

        if ((next.d - target) * side <= 0.0)
        {
            // Overshot Gamma within one step: interpolate the crossing.
            double const w = (y.d - target) / (y.d - next.d);
            traj.points.push_back(
                {t + w * h, {target, y.m + w * (next.m - y.m)}});
            traj.reason = TerminalReason::gamma_reached;
            return traj;
        }
        y = next;
        t = t_next;
        traj.points.push_back({t, y});
        if (std::abs(y.d - target) <= opts.gamma_tol)
        {
            traj.reason = TerminalReason::gamma_reached;
            return traj;
        }
        if (corner_distance(y) <= opts.corner_tol)
        {
            traj.reason = TerminalReason::corner_neighborhood;
            return traj;
        }
    }
    traj.reason = TerminalReason::t_max;
    return traj;
}

double trajectory_constant(ScaledPoint y)
{
    if (!(y.m > 0.0))
        throw DomainError("trajectory constant undefined at m = 0");
    return (-1.0 + 2.0 * y.m + y.d * y.d) / (y.m * y.m);
}

double project_mstar(ScaledPoint y0, double q)
{
    if (!in_triangle(y0, kClampTol))
        throw DomainError("projection start outside the triangle S");
    if (!(y0.m > 0.0))
        throw DomainError("projection needs m > 0");
    double const a = 4.0 * q * (1.0 - q);
    double rad = 1.0 - trajectory_constant(y0) * a;
    if (rad < -1e-12)
        throw DomainError("projection radicand negative; point outside S");
    rad = std::max(rad, 0.0);
    return a / (1.0 + std::sqrt(rad));
}

double project_mstar_numeric(ScaledPoint y0, double q, FlowOptions const& opts)
{
    auto const traj = integrate_flow(y0, q, opts);
    if (traj.reason != TerminalReason::gamma_reached)
        throw IntegrationError("flow did not reach Gamma");
    return traj.terminal().y.m;
}

double lyapunov_dissipation(ScaledPoint y, double q)
{
    if (!(std::abs(y.d) < 1.0))
        throw DomainError("dissipation is singular at |d| = 1");
    double const tilt = 1.0 + y.d - 2.0 * q;
    return -2.0 * (1.0 - y.m - y.d * y.d) * tilt * tilt
           / ((1.0 - y.d) * (1.0 + y.d));
}

double gamma_jacobian_eigenvalue(double m, double q)
{
    if (!(m > 0.0 && m < 1.0))
        throw DomainError("eigenvalue needs m in (0, 1)");
    double const d = gamma_line(q);
    return -(1.0 - m - d * d) / (1.0 - d * d);
}

void write_trajectory_csv(Trajectory const& traj, std::ostream& os)
{
    os << "t,d,m\n";
    for (auto const& p : traj.points)
    {
        os << format_number(p.t) << ',' << format_number(p.y.d) << ','
           << format_number(p.y.m) << '\n';
    }
}

}  // namespace coexist
