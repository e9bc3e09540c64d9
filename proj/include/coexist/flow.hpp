#pragma once

// Mean flow of the rescaled process, its conserved quantity, and the
// projection of a starting point onto the coexistence line
// Gamma = {d = 2q - 1}.

#include <iosfwd>
#include <vector>

#include "coexist/model.hpp"

namespace coexist
{

struct FlowOptions
{
    double dt = 1e-3;
    double gamma_tol = 1e-8;
    double t_max = 1e3;
    double corner_tol = 1e-6;

    void validate() const;
};

enum class TerminalReason
{
    gamma_reached,
    corner_neighborhood,
    t_max
};

struct FlowPoint
{
    double t;
    ScaledPoint y;
};

struct Trajectory
{
    std::vector<FlowPoint> points;
    TerminalReason reason = TerminalReason::t_max;

    FlowPoint const& terminal() const { return points.back(); }
};

/// d-coordinate of Gamma.
inline double gamma_line(double q)
{
    return 2.0 * q - 1.0;
}

/// Upper end of Gamma inside S, 1 - |2q - 1|.
double gamma_upper_end(double q);

Drift drift(ScaledPoint y, double q);

/// Classical RK4 with fixed step until Gamma, a corner, or t_max.
Trajectory integrate_flow(ScaledPoint y0, double q, FlowOptions const& opts = {});

/// C(d, m) = (-1 + 2m + d^2) / m^2, constant along flow lines.
double trajectory_constant(ScaledPoint y);

/// m-coordinate where the flow line through y0 meets Gamma.
double project_mstar(ScaledPoint y0, double q);

/// Same quantity read off the terminal point of integrate_flow.
double project_mstar_numeric(ScaledPoint y0, double q, FlowOptions const& opts = {});

/// grad phi . b for phi(y) = (d - 2q + 1)^2; never positive on S.
double lyapunov_dissipation(ScaledPoint y, double q);

/// Non-zero eigenvalue of the drift Jacobian at (2q - 1, m).
double gamma_jacobian_eigenvalue(double m, double q);

/// CSV rows `t,d,m`.
void write_trajectory_csv(Trajectory const& traj, std::ostream& os);

}  // namespace coexist
