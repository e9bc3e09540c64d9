#include "coexist/ctmc.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>

#include "coexist/csv.hpp"
#include "coexist/error.hpp"
#include "coexist/parallel.hpp"

namespace coexist
{
namespace
{

constexpr Species operator|(Species a, Species b)
{
    return static_cast<Species>(static_cast<unsigned>(a)
                                | static_cast<unsigned>(b));
}

/// Species whose count is zero in state (d, m).
Species zero_species(int n, int d, int m)
{
    Species out = Species::none;
    if (d == m - n)
        out = out | Species::c;
    if (d == n - m)
        out = out | Species::h;
    if (m == 0)
        out = out | Species::m;
    return out;
}

Species survivor(Species extinct)
{
    switch (static_cast<unsigned>(extinct))
    {
        case 3: return Species::m;
        case 5: return Species::h;
        case 6: return Species::c;
        default: return Species::none;
    }
}

int select_jump(double const* rates, double target)
{
    double acc = 0.0;
    for (int k = 0; k < kTrueJumps - 1; ++k)
    {
        acc += rates[k];
        if (target < acc)
            return k;
    }
    // Roundoff can leave target marginally above the running sum; take the
    // last jump with positive rate.
    for (int k = kTrueJumps - 1; k >= 0; --k)
    {
        if (rates[k] > 0.0)
            return k;
    }
    return kTrueJumps - 1;
}

}  // namespace

std::string to_string(Species s)
{
    switch (static_cast<unsigned>(s))
    {
        case 0: return "";
        case 1: return "C";
        case 2: return "H";
        case 3: return "C+H";
        case 4: return "M";
        case 5: return "C+M";
        case 6: return "H+M";
        default: return "C+H+M";
    }
}

Species species_from_string(std::string const& label)
{
    for (unsigned v = 0; v < 8; ++v)
    {
        if (to_string(static_cast<Species>(v)) == label)
            return static_cast<Species>(v);
    }
    throw ConfigError("unknown species label '" + label + "'");
}

void SimConfig::validate() const
{
    params.validate();
    validate_state(init, params.n);
    if (gamma_tolerance < 0)
        throw ConfigError("gamma tolerance must be non-negative");
    if (path_stride < 1)
        throw ConfigError("path stride must be positive");
}

int SimConfig::gamma_target() const
{
    return static_cast<int>(std::lround(params.n * (2.0 * params.q - 1.0)));
}

bool StoppingRecord::extinct_before_gamma() const
{
    return tau_e && (!tau_gamma || *tau_e < *tau_gamma);
}

Event next_event(DMState s, Params const& p, Rng& rng)
{
    if (is_absorbing(s, p.n))
        throw InvalidState("next_event called on an absorbing state");
    double rates[kTrueJumps];
    true_jump_rates(p.n, p.q, s.d, s.m, rates);
    double total = 0.0;
    for (double r : rates)
        total += r;
    double const dt = standard_exponential(rng) / total;
    int const k = select_jump(rates, uniform_open(rng) * total);
    return {dt, static_cast<JumpKind>(k)};
}

RunResult run_chain(SimConfig const& cfg, Rng& rng)
{
    cfg.validate();
    int const n = cfg.params.n;
    double const q = cfg.params.q;
    int const target = cfg.gamma_target();
    bool const unit_rate = cfg.scheme == Scheme::unit_rate;

    RunResult out;
    StoppingRecord& rec = out.record;
    if (cfg.record_path)
        out.path.emplace();

    int d = cfg.init.d;
    int m = cfg.init.m;
    double t = 0.0;
    std::uint64_t events = 0;
    std::int64_t jumps = 0;

    auto gamma_hit = [&] { return std::abs(d - target) <= cfg.gamma_tolerance; };

    // Classifies the current state; returns true when the run should stop.
    auto settle = [&]() -> bool {
        if (!rec.tau_gamma && gamma_hit())
        {
            rec.tau_gamma = t;
            if (cfg.mode == StopMode::gamma_or_extinction)
                return true;
        }
        if (!rec.tau_e)
        {
            Species const z = zero_species(n, d, m);
            if (z == Species::none)
                return false;
            rec.tau_e = t;
            rec.first_extinct = z;
        }
        // Two species can vanish at once only at a corner, which also fixes it.
        if (is_absorbing({d, m}, n))
        {
            rec.tau_f = t;
            rec.fixed = survivor(zero_species(n, d, m));
            return true;
        }
        return cfg.mode != StopMode::fixation;
    };

    if (out.path)
        out.path->push_back({0.0, {d, m}});

    double rates[kTrueJumps];
    while (!settle())
    {
        if (events >= cfg.max_events)
        {
            throw TruncatedRun("run truncated after "
                               + std::to_string(events) + " events");
        }
        true_jump_rates(n, q, d, m, rates);
        double const total = rates[0] + rates[1] + rates[2] + rates[3]
                             + rates[4] + rates[5];
        int k;
        if (unit_rate)
        {
            t += standard_exponential(rng);
            ++events;
            double const u = uniform_open(rng);
            if (u >= total)
                continue;
            k = select_jump(rates, u);
        }
        else
        {
            t += standard_exponential(rng) / total;
            ++events;
            k = select_jump(rates, uniform_open(rng) * total);
        }
        d += kJumpDelta[k].dd;
        m += kJumpDelta[k].dm;
#ifndef NDEBUG
        validate_state({d, m}, n);
#endif
        ++jumps;
        if (out.path && jumps % cfg.path_stride == 0)
            out.path->push_back({t, {d, m}});
    }
    if (out.path && out.path->back().t < t)
        out.path->push_back({t, {d, m}});
    rec.event_count = events;
    return out;
}

std::vector<StoppingRecord> run_batch(SimConfig const& cfg, int n_runs,
                                      std::uint64_t master_seed,
                                      unsigned threads)
{
    if (n_runs < 1)
        throw ConfigError("n_runs must be at least 1");
    cfg.validate();
    SimConfig local = cfg;
    local.record_path = false;
    std::vector<StoppingRecord> records(static_cast<std::size_t>(n_runs));
    parallel_for(records.size(), threads, [&](std::size_t i) {
        Rng rng(replicate_seed(master_seed, i));
        records[i] = run_chain(local, rng).record;
    });
    return records;
}

void write_path_csv(PathSample const& path, std::ostream& os)
{
    os << "t,D,M\n";
    for (auto const& p : path)
        os << format_number(p.t) << ',' << p.state.d << ',' << p.state.m << '\n';
}

}  // namespace coexist
