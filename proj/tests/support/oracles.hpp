#pragma once

// Independent oracles shared by the unit and acceptance tests.

#include <cmath>
#include <functional>
#include <random>

#include "coexist/flow.hpp"
#include "coexist/reduced.hpp"

namespace oracle
{

using Fn2 = std::function<double(double, double)>;

/// Richardson-extrapolated central differences of f at (d, m).
struct Partials
{
    double d, m, dd, mm, dm;
};

inline Partials finite_differences(Fn2 const& f, double d, double m, double h)
{
    auto first = [&](double hd, double hm, double step) {
        return (f(d + hd * step, m + hm * step) - f(d - hd * step, m - hm * step))
               / (2.0 * step);
    };
    auto second = [&](double hd, double hm, double step) {
        return (f(d + hd * step, m + hm * step) - 2.0 * f(d, m)
                + f(d - hd * step, m - hm * step))
               / (step * step);
    };
    auto mixed = [&](double step) {
        return (f(d + step, m + step) - f(d + step, m - step) - f(d - step, m + step)
                + f(d - step, m - step))
               / (4.0 * step * step);
    };
    auto extrapolate = [](double coarse, double fine) {
        return (4.0 * fine - coarse) / 3.0;
    };
    return {extrapolate(first(1, 0, h), first(1, 0, h / 2)),
            extrapolate(first(0, 1, h), first(0, 1, h / 2)),
            extrapolate(second(1, 0, 4 * h), second(1, 0, 2 * h)),
            extrapolate(second(0, 1, 4 * h), second(0, 1, 2 * h)),
            extrapolate(mixed(4 * h), mixed(2 * h))};
}

/// Interior point of S whose projection stays away from the upper end of
/// Gamma, where the m* partials blow up.
inline coexist::ScaledPoint random_interior(std::mt19937_64& rng, double q)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double const top = 4.0 * q * (1.0 - q);
    for (;;)
    {
        coexist::ScaledPoint y{2.0 * u(rng) - 1.0, u(rng)};
        if (y.m < 0.05 || std::abs(y.d) + y.m > 0.95)
            continue;
        if (coexist::project_mstar(y, q) < 0.85 * top)
            return y;
    }
}

/// q = 1/2 closed form of E_x[tau] for beta = x, alpha = 2x(1 - x).
inline double expected_tau_symmetric(double x)
{
    return (1.0 - x) * (1.0 - x) / 2.0 * (-std::log(1.0 - x) + x / (1.0 - x))
           - x * (2.0 - x) * std::log(x) / 2.0;
}

inline bool close_rel(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace oracle
