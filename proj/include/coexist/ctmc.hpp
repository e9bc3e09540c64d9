#pragma once

// Exact event-by-event simulation of the (D, M) chain.
//
// Time is measured in units of the rate table, whose seven rates sum to one.
// Holds do not change the state, so the default scheme draws the waiting
// time to the next true jump as Exp(R) with R the summed jump rate.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coexist/model.hpp"
#include "coexist/rng.hpp"

namespace coexist
{

enum class StopMode
{
    first_extinction,    // stop when any species count reaches zero
    fixation,            // continue until a single species remains
    gamma_or_extinction  // stop at the first of Gamma-hit and first extinction
};

enum class Scheme
{
    jump_chain,  // Exp(R) waiting times, holds skipped
    unit_rate    // Exp(1) steps, hold with probability 1 - R
};

/// Bit set over the species; used for extinction and fixation labels.
enum class Species : std::uint8_t
{
    none = 0,
    c = 1,
    h = 2,
    m = 4,
    ch = 3  // both specialists at once, only possible at the M corner
};

std::string to_string(Species s);
Species species_from_string(std::string const& label);

struct SimConfig
{
    Params params;
    DMState init;
    StopMode mode = StopMode::first_extinction;
    int gamma_tolerance = 1;
    bool record_path = false;
    std::int64_t path_stride = 1;
    std::uint64_t max_events = 10'000'000'000ULL;
    Scheme scheme = Scheme::jump_chain;

    void validate() const;
    /// Lattice value of D on the coexistence line, round(N(2q-1)).
    int gamma_target() const;
};

struct StoppingRecord
{
    std::optional<double> tau_gamma;
    std::optional<double> tau_e;  // absent only if Gamma stopped the run first
    Species first_extinct = Species::none;
    std::optional<double> tau_f;
    Species fixed = Species::none;
    std::uint64_t event_count = 0;

    bool extinct_before_gamma() const;
};

struct PathPoint
{
    double t;
    DMState state;
};

using PathSample = std::vector<PathPoint>;

struct Event
{
    double dt;
    JumpKind jump;
};

struct RunResult
{
    StoppingRecord record;
    std::optional<PathSample> path;
};

/// One true jump out of a non-absorbing state. Throws InvalidState when
/// called on an absorbing state.
Event next_event(DMState s, Params const& p, Rng& rng);

/// Runs one replicate until the stop condition of `cfg.mode`.
RunResult run_chain(SimConfig const& cfg, Rng& rng);

/// `n_runs` independent replicates; replicate i draws from
/// Rng(replicate_seed(master_seed, i)). Output is ordered by replicate index
/// and does not depend on `threads` (0 = hardware concurrency).
std::vector<StoppingRecord> run_batch(SimConfig const& cfg, int n_runs,
                                      std::uint64_t master_seed,
                                      unsigned threads = 0);

/// CSV rows `t,D,M`.
void write_path_csv(PathSample const& path, std::ostream& os);

}  // namespace coexist
