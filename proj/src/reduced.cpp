#include "coexist/reduced.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "coexist/csv.hpp"
#include "coexist/error.hpp"
#include "coexist/flow.hpp"

namespace coexist
{
namespace
{

constexpr double kSingularGap = 1e-10;

struct ProjectionDerivs
{
    double g1;  // dm*/dC
    double g2;  // d2m*/dC2
};

ProjectionDerivs projection_derivs(double d, double m, double q)
{
    double const a = 4.0 * q * (1.0 - q);
    double rad = 1.0 - trajectory_constant({d, m}) * a;
    if (rad < -1e-12)
        throw DomainError("projection radicand negative; point outside S");
    rad = std::max(rad, 0.0);
    double const s = std::sqrt(rad);
    double const mstar = a / (1.0 + s);
    double const gap = mstar * s;  // A - m*, without cancellation
    if (gap < kSingularGap)
        throw DomainError("projection derivatives singular as m* -> 4q(1-q)");
    double const m3 = mstar * mstar * mstar;
    return {m3 / (2.0 * gap),
            m3 * mstar * mstar * (3.0 * a - 2.0 * mstar) / (4.0 * gap * gap * gap)};
}

}  // namespace

CPartials c_partials(double d, double m)
{
    if (!(m > 0.0))
        throw DomainError("C partials undefined at m = 0");
    double const m2 = m * m;
    double const m3 = m2 * m;
    CPartials out;
    out.d = 2.0 * d / m2;
    out.m = 2.0 * (1.0 - d * d - m) / m3;
    out.dd = 2.0 / m2;
    out.mm = -2.0 * (3.0 - 3.0 * d * d - 2.0 * m) / (m2 * m2);
    out.dm = -4.0 * d / m3;
    return out;
}

MstarPartials mstar_partials(double d, double m, double q)
{
    auto const c = c_partials(d, m);
    auto const g = projection_derivs(d, m, q);
    MstarPartials out;
    out.d = g.g1 * c.d;
    out.m = g.g1 * c.m;
    out.dd = g.g2 * c.d * c.d + g.g1 * c.dd;
    out.mm = g.g2 * c.m * c.m + g.g1 * c.mm;
    out.dm = g.g2 * c.d * c.m + g.g1 * c.dm;
    return out;
}

GammaCoeffs ito_coefficients(double d, double m, double q)
{
    auto const a = scaled_moments({d, m}, q);
    auto const p = mstar_partials(d, m, q);
    GammaCoeffs out;
    out.beta = 0.5 * p.dd * a.a_dd + 0.5 * p.mm * a.a_mm + p.dm * a.a_dm;
    out.alpha = p.d * p.d * a.a_dd + 2.0 * p.d * p.m * a.a_dm + p.m * p.m * a.a_mm;
    // a is positive semidefinite; only roundoff can push the form below 0.
    out.alpha = std::max(out.alpha, 0.0);
    return out;
}

CancellationResidual drift_cancellation_residual(double d, double m, double q)
{
    auto const b = drift({d, m}, q);
    auto const p = mstar_partials(d, m, q);
    double const td = p.d * b.d;
    double const tm = p.m * b.m;
    return {td + tm, std::abs(td) + std::abs(tm)};
}

GammaCoeffs gamma_coefficients(double x, double q)
{
    if (!(x > 0.0 && x < 1.0))
        throw DomainError("Gamma coefficients need x in (0, 1)");
    return ito_coefficients(gamma_line(q), x, q);
}

GammaCoeffs symmetric_explicit_coeffs(double d, double m)
{
    if (m == 1.0)
        throw DomainError("printed coefficients are not defined at m = 1");
    double const rad = -d * d + (m - 1.0) * (m - 1.0);
    if (!(rad > 0.0))
        throw DomainError("printed coefficients need d^2 < (1 - m)^2");
    double const s = std::sqrt(rad);
    double const denom = 2.0 * (-1.0 + d * d) * s * (s * s * s);
    double const d2 = d * d;
    double const first = -m * (-2.0 * d2 * d2 - 2.0 * (m - 1.0) * (-2.0 + 3.0 * s + 3.0 * m));
    double const second = -m * (d2 * (6.0 - 4.0 * m + 3.0 * m * s + 3.0 * m * m));
    double const sm = s + m;
    GammaCoeffs out;
    out.beta = first / denom + second / denom;
    out.alpha = -m * (-2.0 + d2 + 2.0 * m) / (sm * sm * sm * sm);
    return out;
}

MstarOutcome simulate_mstar(double x0, double q, Rng& rng, EulerOptions const& opts)
{
    if (!(opts.dt > 0.0))
        throw ConfigError("Euler-Maruyama step must be positive");
    double const upper = gamma_upper_end(q);
    if (!(x0 >= 0.0 && x0 <= upper))
        throw DomainError("m* start outside [0, 1 - |2q - 1|]");
    if (!(opts.boundary_eps >= 0.0 && 2.0 * opts.boundary_eps < upper))
        throw ConfigError("boundary_eps must lie in [0, half the line length)");
    double const lo = opts.boundary_eps;
    double const hi = upper - opts.boundary_eps;
    if (x0 <= lo)
        return {Boundary::lower, 0.0};
    if (x0 >= hi)
        return {Boundary::upper, 0.0};

    std::normal_distribution<double> normal;
    double x = x0;
    double t = 0.0;
    while (t < opts.t_max)
    {
        auto const c = gamma_coefficients(x, q);
        double h = opts.dt;
        while (std::abs(c.beta) * h > opts.max_drift_step && h > opts.dt * 1e-6)
            h *= 0.5;
        x += c.beta * h + std::sqrt(c.alpha * h) * normal(rng);
        t += h;
        if (x <= lo)
            return {Boundary::lower, t};
        if (x >= hi)
            return {Boundary::upper, t};
    }
    throw TruncatedRun("m* path not absorbed before t_max");
}

namespace
{

void check_dstar_args(double d0, int n, double dt)
{
    if (!(dt > 0.0))
        throw ConfigError("Euler-Maruyama step must be positive");
    if (n < 2)
        throw ConfigError("population size must be at least 2");
    if (!(d0 >= -1.0 && d0 <= 1.0))
        throw DomainError("d* start outside [-1, 1]");
}

double dstar_step(double d, double center, double dt, double noise, double z)
{
    double const beta = -(d - center);
    double const alpha = 2.0 - 2.0 * d * center;
    return d + beta * dt + std::sqrt(alpha) * noise * z;
}

}  // namespace

DstarOutcome simulate_dstar(double d0, double q, int n, Rng& rng, double dt,
                            double t_max)
{
    check_dstar_args(d0, n, dt);
    if (d0 >= 1.0)
        return {Species::c, 0.0};
    if (d0 <= -1.0)
        return {Species::h, 0.0};

    double const center = gamma_line(q);
    double const noise = std::sqrt(dt / n);
    std::normal_distribution<double> normal;
    double d = d0;
    double t = 0.0;
    while (t < t_max)
    {
        d = dstar_step(d, center, dt, noise, normal(rng));
        t += dt;
        if (d >= 1.0)
            return {Species::c, t};
        if (d <= -1.0)
            return {Species::h, t};
    }
    throw TruncatedRun("d* path not absorbed before t_max");
}

std::vector<double> dstar_path(double d0, double q, int n, Rng& rng, double dt,
                               int steps)
{
    check_dstar_args(d0, n, dt);
    double const center = gamma_line(q);
    double const noise = std::sqrt(dt / n);
    std::normal_distribution<double> normal;
    std::vector<double> out{d0};
    double d = d0;
    for (int i = 0; i < steps && std::abs(d) < 1.0; ++i)
    {
        d = std::clamp(dstar_step(d, center, dt, noise, normal(rng)), -1.0, 1.0);
        out.push_back(d);
    }
    return out;
}

void write_coefficient_table(double q, int points, std::ostream& os)
{
    if (points < 2)
        throw ConfigError("coefficient table needs at least 2 points");
    double const upper = gamma_upper_end(q);
    os << "x,beta,alpha\n";
    for (int i = 1; i < points; ++i)
    {
        double const x = upper * i / points;
        auto const c = gamma_coefficients(x, q);
        os << format_number(x) << ',' << format_number(c.beta) << ','
           << format_number(c.alpha) << '\n';
    }
}

}  // namespace coexist
