#include "coexist/model.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "coexist/error.hpp"

namespace coexist
{

void Params::validate() const
{
    if (n < 2)
        throw InvalidState("population size must be at least 2, got "
                           + std::to_string(n));
    if (!(q > 0.0 && q < 1.0))
        throw InvalidState("q must lie in (0, 1), got " + std::to_string(q));
}

std::string to_string(JumpKind k)
{
    switch (k)
    {
        case JumpKind::c_replaces_m: return "(1,-1)";
        case JumpKind::c_replaces_h: return "(2,0)";
        case JumpKind::h_replaces_m: return "(-1,-1)";
        case JumpKind::h_replaces_c: return "(-2,0)";
        case JumpKind::m_replaces_h: return "(1,1)";
        case JumpKind::m_replaces_c: return "(-1,1)";
        case JumpKind::hold: return "(0,0)";
    }
    return "?";
}

double RateVector::jump_total() const
{
    return std::accumulate(rate.begin(), rate.begin() + kTrueJumps, 0.0);
}

double RateVector::total() const
{
    return jump_total() + rate[kTrueJumps];
}

bool is_valid(DMState s, int n)
{
    if (s.m < 0 || s.m > n || std::abs(s.d) > n)
        return false;
    if (s.m + std::abs(s.d) > n)
        return false;
    // D = C - H and C + H = N - M have the same parity.
    return ((s.d + s.m - n) % 2) == 0;
}

void validate_state(DMState s, int n)
{
    if (!is_valid(s, n))
    {
        throw InvalidState("invalid state (D=" + std::to_string(s.d) + ", M="
                           + std::to_string(s.m) + ") for N="
                           + std::to_string(n));
    }
}

bool is_absorbing(DMState s, int n)
{
    return (s.m == 0 && std::abs(s.d) == n) || (s.d == 0 && s.m == n);
}

DMState composition_to_dm(Composition const& c)
{
    if (c.c < 0 || c.h < 0 || c.m < 0)
        throw InvalidState("negative species count");
    return {c.c - c.h, c.m};
}

Composition dm_to_composition(DMState s, Params const& p)
{
    validate_state(s, p.n);
    int const ch = p.n - s.m;
    return {(ch + s.d) / 2, (ch - s.d) / 2, s.m};
}

DMState lattice_state(ScaledPoint y, int n)
{
    if (!in_triangle(y, 1e-12))
        throw DomainError("starting point outside the triangle S");
    double const dn = y.d * n;
    double const mn = y.m * n;
    DMState best{};
    double best_dist = std::numeric_limits<double>::infinity();
    int const m0 = static_cast<int>(std::floor(mn));
    int const d0 = static_cast<int>(std::floor(dn));
    for (int m = m0 - 1; m <= m0 + 2; ++m)
    {
        for (int d = d0 - 1; d <= d0 + 2; ++d)
        {
            DMState const s{d, m};
            if (!is_valid(s, n))
                continue;
            double const dist = (d - dn) * (d - dn) + (m - mn) * (m - mn);
            if (dist < best_dist)
            {
                best_dist = dist;
                best = s;
            }
        }
    }
    if (!std::isfinite(best_dist))
        throw InvalidState("no lattice state near the requested point");
    return best;
}

bool in_triangle(ScaledPoint y, double tol)
{
    return y.d >= -1.0 - tol && y.d <= 1.0 + tol && y.m >= -tol
           && y.m <= 1.0 + tol && y.m + y.d <= 1.0 + tol
           && y.m - y.d <= 1.0 + tol;
}

RateVector jump_rates(DMState s, Params const& p)
{
    validate_state(s, p.n);
    RateVector r;
    if (is_absorbing(s, p.n))
    {
        r.absorbing = true;
        r.rate[kTrueJumps] = 1.0;
        return r;
    }
    true_jump_rates(p.n, p.q, s.d, s.m, r.rate.data());

    double const n = p.n;
    double const a = n + s.d;
    double const b = n - s.d;
    double const m = s.m;
    r.rate[kTrueJumps] = p.q * ((a - m) * (a - m) + 2.0 * m * m) / (2.0 * n * a)
                         + (1.0 - p.q) * ((b - m) * (b - m) + 2.0 * m * m)
                               / (2.0 * n * b);
    return r;
}

Drift dm_drift(DMState s, Params const& p)
{
    validate_state(s, p.n);
    if (is_absorbing(s, p.n))
        return {};
    double const n = p.n;
    double const d = s.d;
    double const m = s.m;
    double const denom = n * (n + d) * (n - d);
    double const tilt = n + d - 2.0 * p.q * n;
    return {-(n * n - n * m - d * d) * tilt / denom, d * m * tilt / denom};
}

SecondMoments dm_second_moments(DMState s, Params const& p)
{
    validate_state(s, p.n);
    if (is_absorbing(s, p.n))
        return {};
    double const n = p.n;
    double const d = s.d;
    double const m = s.m;
    double const q = p.q;
    double const ca = q / (n * (n + d));
    double const cb = (1.0 - q) / (n * (n - d));
    SecondMoments out;
    out.dd = ca * (m * d + 2.0 * n * n - 2.0 * d * d - 2.0 * m * n)
             + cb * (-m * d + 2.0 * n * n - 2.0 * d * d - 2.0 * m * n);
    out.mm = ca * m * (2.0 * n + d - 2.0 * m) + cb * m * (2.0 * n - d - 2.0 * m);
    out.dm = ca * m * (-n - 2.0 * d + m) + cb * m * (n - 2.0 * d - m);
    return out;
}

ChainMoments moments_from_rates(DMState s, Params const& p)
{
    auto const r = jump_rates(s, p);
    ChainMoments out;
    for (int k = 0; k < kTrueJumps; ++k)
    {
        auto const j = kJumpDelta[k];
        double const w = r.rate[k];
        out.drift.d += w * j.dd;
        out.drift.m += w * j.dm;
        out.second.dd += w * j.dd * j.dd;
        out.second.mm += w * j.dm * j.dm;
        out.second.dm += w * j.dd * j.dm;
    }
    return out;
}

MomentSet scaled_moments(ScaledPoint y, double q)
{
    if (!(std::abs(y.d) < 1.0))
        throw DomainError("moments are singular at |d| = 1");
    if (!in_triangle(y, 1e-12))
        throw DomainError("point outside the triangle S");
    double const d = y.d;
    double const m = y.m;
    double const plus = 1.0 + d;
    double const minus = 1.0 - d;
    double const tilt = 1.0 + d - 2.0 * q;
    MomentSet out;
    out.b_d = -(1.0 - m - d * d) * tilt / (plus * minus);
    out.b_m = d * m * tilt / (plus * minus);
    out.a_dd = q * (m * d + 2.0 - 2.0 * d * d - 2.0 * m) / plus
               + (1.0 - q) * (-m * d + 2.0 - 2.0 * d * d - 2.0 * m) / minus;
    out.a_mm = q * m * (2.0 + d - 2.0 * m) / plus
               + (1.0 - q) * m * (2.0 - d - 2.0 * m) / minus;
    out.a_dm = q * m * (-1.0 - 2.0 * d + m) / plus
               + (1.0 - q) * m * (1.0 - 2.0 * d - m) / minus;
    return out;
}

}  // namespace coexist
