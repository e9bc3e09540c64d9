#pragma once

// State space, jump-rate table and moment formulas of the three-species
// Moran chain (specialists C and H, generalist M) in an i.i.d. two-state
// environment. The environment is in state c with probability q.

#include <array>
#include <cstdint>
#include <string>

namespace coexist
{

struct Params
{
    int n = 1000;    // population size N
    double q = 0.5;  // probability of environment state c

    void validate() const;
};

struct Composition
{
    int c = 0;
    int h = 0;
    int m = 0;

    int size() const { return c + h + m; }
    friend bool operator==(Composition const&, Composition const&) = default;
};

/// Chain state in (D, M) = (C - H, M) coordinates.
struct DMState
{
    int d = 0;
    int m = 0;

    friend bool operator==(DMState const&, DMState const&) = default;
};

/// The six jumps of (D, M) plus the no-change event. Names read
/// "<born> replaces <dies>".
enum class JumpKind : std::uint8_t
{
    c_replaces_m,  // (+1, -1)
    c_replaces_h,  // (+2,  0)
    h_replaces_m,  // (-1, -1)
    h_replaces_c,  // (-2,  0)
    m_replaces_h,  // (+1, +1)
    m_replaces_c,  // (-1, +1)
    hold           // ( 0,  0)
};

inline constexpr int kJumpKinds = 7;
inline constexpr int kTrueJumps = 6;

struct JumpDelta
{
    int dd;
    int dm;
};

inline constexpr std::array<JumpDelta, kJumpKinds> kJumpDelta{{
    {1, -1}, {2, 0}, {-1, -1}, {-2, 0}, {1, 1}, {-1, 1}, {0, 0}}};

constexpr JumpDelta delta(JumpKind k)
{
    return kJumpDelta[static_cast<std::size_t>(k)];
}

constexpr DMState apply(DMState s, JumpKind k)
{
    auto const j = delta(k);
    return {s.d + j.dd, s.m + j.dm};
}

std::string to_string(JumpKind k);

/// Rates of all seven events; they sum to one for every state.
struct RateVector
{
    std::array<double, kJumpKinds> rate{};
    bool absorbing = false;

    double operator[](JumpKind k) const { return rate[static_cast<std::size_t>(k)]; }
    double jump_total() const;  // sum of the six true jumps
    double total() const;
};

/// Continuous point (d, m) = (D/N, M/N) of the triangle S.
struct ScaledPoint
{
    double d = 0.0;
    double m = 0.0;

    friend bool operator==(ScaledPoint const&, ScaledPoint const&) = default;
};

/// Drift b and symmetric covariance a of the rescaled process.
struct MomentSet
{
    double b_d = 0.0;
    double b_m = 0.0;
    double a_dd = 0.0;
    double a_dm = 0.0;
    double a_mm = 0.0;
};

struct Drift
{
    double d = 0.0;
    double m = 0.0;
};

struct SecondMoments
{
    double dd = 0.0;  // E[(dD)^2]
    double mm = 0.0;  // E[(dM)^2]
    double dm = 0.0;  // E[dD dM]
};

struct ChainMoments
{
    Drift drift;
    SecondMoments second;
};

//---------------------------------------------------------------------------//
// States
//---------------------------------------------------------------------------//

bool is_valid(DMState s, int n);
void validate_state(DMState s, int n);  // throws InvalidState
bool is_absorbing(DMState s, int n);

DMState composition_to_dm(Composition const& c);
Composition dm_to_composition(DMState s, Params const& p);

/// Nearest parity-compatible lattice state to the scaled point y.
DMState lattice_state(ScaledPoint y, int n);

inline ScaledPoint to_scaled(DMState s, int n)
{
    return {static_cast<double>(s.d) / n, static_cast<double>(s.m) / n};
}

bool in_triangle(ScaledPoint y, double tol = 0.0);

//---------------------------------------------------------------------------//
// Rates and moments
//---------------------------------------------------------------------------//

RateVector jump_rates(DMState s, Params const& p);

/// The six true-jump rates for a valid non-absorbing state, no checks.
/// Shared by jump_rates and the simulator inner loop.
inline void true_jump_rates(int n, double q, int d, int m, double* out)
{
    double const nn = n;
    double const a = nn + d;      // N + D = 2C + M
    double const b = nn - d;      // N - D = 2H + M
    double const u = a - m;       // 2C
    double const v = b - m;       // 2H
    double const mm = m;
    double const inv_a = 1.0 / (nn * a);
    double const inv_b = 1.0 / (nn * b);
    double const gen = mm * (nn + (1.0 - 2.0 * q) * d) * 0.5 * inv_a / b;
    out[0] = q * mm * u * inv_a;
    out[1] = 0.5 * q * u * v * inv_a;
    out[2] = (1.0 - q) * mm * v * inv_b;
    out[3] = 0.5 * (1.0 - q) * u * v * inv_b;
    out[4] = gen * v;
    out[5] = gen * u;
}

/// (E[dD | Y], E[dM | Y]) per unit chain time, closed form.
Drift dm_drift(DMState s, Params const& p);

/// Second moments of the jump per unit chain time, closed form.
SecondMoments dm_second_moments(DMState s, Params const& p);

/// Independent route: sums over the rate table.
ChainMoments moments_from_rates(DMState s, Params const& p);

/// Drift and covariance of the rescaled process at an interior point.
MomentSet scaled_moments(ScaledPoint y, double q);

}  // namespace coexist
