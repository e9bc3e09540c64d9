#pragma once

// One-dimensional diffusion of the projected generalist fraction m* on the
// coexistence line, obtained by Ito's formula applied to the projection
// map, plus the post-extinction diffusion of d on the line m = 0.
//
// The projection is m* = g(C) with g(C) = A / (1 + sqrt(1 - A C)) and
// A = 4q(1-q). Its derivatives in m* alone are
//   g'  = m*^3 / (2 (A - m*))
//   g'' = m*^5 (3A - 2m*) / (4 (A - m*)^3)
// and all m*-partials follow from the chain rule through C(d, m).

#include <iosfwd>
#include <vector>

#include "coexist/ctmc.hpp"
#include "coexist/rng.hpp"

namespace coexist
{

struct CPartials
{
    double d = 0.0;
    double m = 0.0;
    double dd = 0.0;
    double mm = 0.0;
    double dm = 0.0;
};

struct MstarPartials
{
    double d = 0.0;
    double m = 0.0;
    double dd = 0.0;
    double mm = 0.0;
    double dm = 0.0;
};

/// Drift beta and infinitesimal variance alpha (the noise coefficient is
/// sqrt(alpha)).
struct GammaCoeffs
{
    double beta = 0.0;
    double alpha = 0.0;
};

struct CancellationResidual
{
    double residual = 0.0;
    double scale = 0.0;  // |m*_d b_d| + |m*_m b_m|
};

CPartials c_partials(double d, double m);
MstarPartials mstar_partials(double d, double m, double q);

/// Coefficients of m*(y_t) for the two-dimensional diffusion at y = (d, m).
/// The first-order drift term cancels identically and is dropped.
GammaCoeffs ito_coefficients(double d, double m, double q);

/// m*_d b_d + m*_m b_m, which vanishes by construction of m*.
CancellationResidual drift_cancellation_residual(double d, double m, double q);

/// Coefficients of the limit diffusion at the point (2q - 1, x) of Gamma.
GammaCoeffs gamma_coefficients(double x, double q);

/// Closed forms for q = 1/2 as printed with the original derivation. Kept
/// for cross-checking only; the printed drift does not agree with the
/// chain-rule drift and is never used downstream.
GammaCoeffs symmetric_explicit_coeffs(double d, double m);

struct EulerOptions
{
    double dt = 1e-4;
    double max_drift_step = 1e-3;  // halve dt while |beta| dt exceeds this
    double t_max = 1e6;
    // Absorb within this distance of either end. At q = 1/2 the upper end is
    // a singular point of the projection and the coefficients lose accuracy
    // inside about 1e-6 of it.
    double boundary_eps = 1e-6;
};

enum class Boundary
{
    lower,  // m* = 0: the generalist is lost
    upper   // m* = 1 - |2q - 1|: end of Gamma inside S
};

struct MstarOutcome
{
    Boundary absorbed_at = Boundary::lower;
    double tau = 0.0;  // Gamma-diffusion time (chain time / N^2)
};

/// Euler-Maruyama path of dx = beta dt + sqrt(alpha) dW until absorption.
MstarOutcome simulate_mstar(double x0, double q, Rng& rng,
                            EulerOptions const& opts = {});

struct DstarOutcome
{
    Species fixed = Species::none;  // c at d = 1, h at d = -1
    double tau = 0.0;               // chain time / N
};

/// Mean-reverting d-diffusion on the line m = 0:
/// dd = -(d - (2q - 1)) dt + sqrt((2 - 2d(2q - 1)) / N) dW, absorbed at +-1.
DstarOutcome simulate_dstar(double d0, double q, int n, Rng& rng,
                            double dt = 1e-3, double t_max = 1e9);

/// Up to `steps` Euler states of the same diffusion, starting with d0 and
/// ending early at absorption.
std::vector<double> dstar_path(double d0, double q, int n, Rng& rng, double dt,
                               int steps);

/// CSV rows `x,beta,alpha` on the interior grid x_i = x_hi * i / points.
void write_coefficient_table(double q, int points, std::ostream& os);

}  // namespace coexist
