#include "coexist/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "coexist/analytics.hpp"
#include "coexist/csv.hpp"
#include "coexist/ctmc.hpp"
#include "coexist/error.hpp"
#include "coexist/flow.hpp"
#include "coexist/parallel.hpp"
#include "coexist/reduced.hpp"

namespace coexist
{
namespace
{

using nlohmann::json;

std::uint64_t group_seed(std::uint64_t master, std::size_t group)
{
    return master + group;
}

SimConfig chain_config(ExperimentConfig const& cfg, Params const& p, ScaledPoint y,
                       StopMode mode)
{
    SimConfig sim;
    sim.params = p;
    sim.init = lattice_state(y, p.n);
    sim.mode = mode;
    sim.gamma_tolerance = cfg.gamma_tolerance;
    return sim;
}

std::filesystem::path prepare_dir(std::string const& dir)
{
    std::filesystem::path out(dir);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec)
        throw Error("cannot create output directory " + dir + ": " + ec.message());
    return out;
}

std::ofstream open_csv(std::filesystem::path const& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open " + path.string() + " for writing");
    return os;
}

void close_csv(std::ofstream& os, std::filesystem::path const& path,
               ExperimentResult& result)
{
    os.close();
    if (!os)
        throw Error("failed writing " + path.string());
    result.files.push_back(path.string());
}

struct Outcome
{
    std::uint64_t seed;
    StoppingRecord record;
};

void write_outcomes(std::vector<std::vector<Outcome>> const& groups, int runs,
                    std::filesystem::path const& dir, ExperimentResult& result)
{
    auto const path = dir / "outcomes.csv";
    auto os = open_csv(path);
    os << "run_id,seed,tau_gamma,tau_e,first_extinct,tau_f,fixed\n";
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        for (std::size_t i = 0; i < groups[g].size(); ++i)
        {
            auto const& o = groups[g][i];
            auto const& r = o.record;
            os << g * runs + i << ',' << o.seed << ',' << format_number(r.tau_gamma)
               << ',' << format_number(r.tau_e) << ',' << to_string(r.first_extinct)
               << ',' << format_number(r.tau_f) << ',' << to_string(r.fixed) << '\n';
        }
    }
    close_csv(os, path, result);
}

std::vector<Outcome> run_group(ExperimentConfig const& cfg, SimConfig const& sim,
                               std::size_t group)
{
    auto const master = group_seed(cfg.master_seed, group);
    auto const records = run_batch(sim, cfg.runs, master, cfg.threads);
    std::vector<Outcome> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
        out.push_back({replicate_seed(master, i), records[i]});
    return out;
}

double mean_of(std::vector<double> const& v)
{
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

ComparisonRow make_row(double x, double analytic, double mc, double se)
{
    ComparisonRow row{x, analytic, mc, se, 0.0, false};
    if (se > 0.0)
        row.z = (mc - analytic) / se;
    else if (mc != analytic)
        row.z = std::copysign(INFINITY, mc - analytic);
    row.flagged = std::abs(row.z) > 3.0;
    return row;
}

// Sweep with per-run outcomes kept for outcomes.csv.
struct Sweep
{
    std::vector<CurvePoint> points;
    std::vector<std::vector<Outcome>> outcomes;
    std::vector<SummaryStats> summaries;
};

Sweep sweep(ExperimentConfig const& cfg)
{
    Params const& p = cfg.params.front();
    auto const table = ScaleTable::build(p.q, cfg.n_grid);
    double const n2 = static_cast<double>(p.n) * p.n;
    Sweep s;
    auto const inits = cfg.resolved_inits();
    for (std::size_t g = 0; g < inits.size(); ++g)
    {
        auto const sim = chain_config(cfg, p, inits[g], StopMode::first_extinction);
        auto outcomes = run_group(cfg, sim, g);
        std::vector<double> taus;
        std::size_t lost_m = 0;
        for (auto const& o : outcomes)
        {
            taus.push_back(*o.record.tau_e / n2);
            if (static_cast<unsigned>(o.record.first_extinct)
                & static_cast<unsigned>(Species::m))
                ++lost_m;
        }
        auto const report = extinction_report(inits[g], p, table);
        CurvePoint pt;
        pt.m0 = inits[g].m;
        pt.pm_analytic = report.p_m;
        pt.pm_mc = static_cast<double>(lost_m) / outcomes.size();
        pt.pm_se = binomial_se(report.p_m, outcomes.size());
        auto stats = summarize(taus);
        stats.proportion = binomial_proportion(lost_m, outcomes.size());
        pt.etau_analytic = report.expected_tau_gamma_units;
        pt.etau_mc = stats.mean;
        pt.etau_se = stats.se;
        s.points.push_back(pt);
        s.summaries.push_back(std::move(stats));
        s.outcomes.push_back(std::move(outcomes));
    }
    return s;
}

struct HitRun
{
    std::vector<GammaHitRow> rows;
    std::vector<std::vector<Outcome>> outcomes;
};

HitRun gamma_hit_runs(ExperimentConfig const& cfg)
{
    Params const& p = cfg.params.front();
    HitRun h;
    auto const inits = cfg.resolved_inits();
    for (std::size_t g = 0; g < inits.size(); ++g)
    {
        auto const sim = chain_config(cfg, p, inits[g], StopMode::gamma_or_extinction);
        auto outcomes = run_group(cfg, sim, g);
        GammaHitRow row;
        row.start = inits[g];
        row.lattice = sim.init;
        std::size_t ext = 0;
        for (auto const& o : outcomes)
        {
            if (o.record.extinct_before_gamma())
                ++ext;
            else
                row.tau_gamma.push_back(*o.record.tau_gamma);
        }
        row.extinct_first = binomial_proportion(ext, outcomes.size());
        row.gamma_first = binomial_proportion(outcomes.size() - ext, outcomes.size());
        h.rows.push_back(std::move(row));
        h.outcomes.push_back(std::move(outcomes));
    }
    return h;
}

struct TauRun
{
    std::vector<TauSample> samples;
    std::vector<std::vector<Outcome>> outcomes;
};

TauRun tau_runs(ExperimentConfig const& cfg)
{
    ScaledPoint const y = cfg.resolved_inits().front();
    TauRun r;
    for (std::size_t g = 0; g < cfg.params.size(); ++g)
    {
        Params const& p = cfg.params[g];
        auto const sim = chain_config(cfg, p, y, StopMode::first_extinction);
        auto outcomes = run_group(cfg, sim, g);
        TauSample s;
        s.n = p.n;
        double const n2 = static_cast<double>(p.n) * p.n;
        for (auto const& o : outcomes)
            s.tau_scaled.push_back(*o.record.tau_e / n2);
        r.samples.push_back(std::move(s));
        r.outcomes.push_back(std::move(outcomes));
    }
    return r;
}

struct ReducedRun
{
    ReducedComparison cmp;
    std::vector<std::vector<Outcome>> outcomes;
};

ReducedRun reduced_runs(ExperimentConfig const& cfg)
{
    Params const& p = cfg.params.front();
    ScaledPoint const y = cfg.resolved_inits().front();
    ReducedRun r;
    auto const sim = chain_config(cfg, p, y, StopMode::first_extinction);
    r.outcomes.push_back(run_group(cfg, sim, 0));
    double const n2 = static_cast<double>(p.n) * p.n;
    for (auto const& o : r.outcomes.front())
        r.cmp.chain.push_back(*o.record.tau_e / n2);

    double const x0 = y.m > 0.0 ? project_mstar(y, p.q) : 0.0;
    EulerOptions opts;
    opts.dt = cfg.dt;
    auto const master = group_seed(cfg.master_seed, 1);
    r.cmp.reduced.resize(static_cast<std::size_t>(cfg.runs));
    parallel_for(r.cmp.reduced.size(), cfg.threads, [&](std::size_t i) {
        Rng rng(replicate_seed(master, i));
        r.cmp.reduced[i] = simulate_mstar(x0, p.q, rng, opts).tau;
    });
    r.cmp.ks = ks_statistic(r.cmp.chain, r.cmp.reduced);
    double const mr = mean_of(r.cmp.reduced);
    r.cmp.mean_rel_diff = mr > 0.0 ? std::abs(mean_of(r.cmp.chain) - mr) / mr : 0.0;
    return r;
}

Params params_from_json(json const& j)
{
    if (!j.is_object())
        throw ConfigError("params entries must be objects with n and q");
    Params p;
    for (auto const& [key, value] : j.items())
    {
        if (key == "n")
            p.n = value.get<int>();
        else if (key == "q")
            p.q = value.get<double>();
        else
            throw ConfigError("unknown params field '" + key + "'");
    }
    return p;
}

}  // namespace

std::string to_string(ExperimentKind k)
{
    switch (k)
    {
        case ExperimentKind::tau_hist: return "tau_hist";
        case ExperimentKind::gamma_hit: return "gamma_hit";
        case ExperimentKind::pm_curve: return "pm_curve";
        case ExperimentKind::etau_curve: return "etau_curve";
        case ExperimentKind::reduced_vs_ctmc: return "reduced_vs_ctmc";
    }
    return "";
}

ExperimentKind experiment_kind_from_string(std::string const& s)
{
    for (auto k : {ExperimentKind::tau_hist, ExperimentKind::gamma_hit,
                   ExperimentKind::pm_curve, ExperimentKind::etau_curve,
                   ExperimentKind::reduced_vs_ctmc})
    {
        if (to_string(k) == s)
            return k;
    }
    throw ConfigError("unknown experiment kind '" + s + "'");
}

std::vector<ScaledPoint> default_inits(ExperimentKind k, double q)
{
    double const d = gamma_line(q);
    switch (k)
    {
        case ExperimentKind::gamma_hit:
            return {{0.334, 0.334}, {0.48, 0.48}, {0.495, 0.495}, {0.5, 0.5},
                    {0.5, 0.02},    {0.5, 0.01},  {0.97, 0.01},   {0.985, 0.005}};
        case ExperimentKind::pm_curve:
        case ExperimentKind::etau_curve:
        {
            std::vector<ScaledPoint> out;
            double const top = gamma_upper_end(q);
            for (int i = 0; i < 10; ++i)
                out.push_back({d, top * i / 10.0});
            return out;
        }
        case ExperimentKind::tau_hist:
        case ExperimentKind::reduced_vs_ctmc:
            return {{d, 1.0 / 3.0}};
    }
    return {};
}

void ExperimentConfig::validate() const
{
    if (runs < 1)
        throw ConfigError("runs must be at least 1");
    if (params.empty())
        throw ConfigError("params must name at least one (n, q)");
    for (auto const& p : params)
    {
        if (p.n < 2)
            throw ConfigError("population size must be at least 2");
        if (!(p.q > 0.0 && p.q < 1.0))
            throw ConfigError("q must lie in (0, 1)");
    }
    if (!(dt > 0.0))
        throw ConfigError("dt must be positive");
    if (n_grid < 100)
        throw ConfigError("n_grid must be at least 100");
    if (gamma_tolerance < 0)
        throw ConfigError("gamma_tolerance must be non-negative");
    for (auto const& y : inits)
    {
        if (!in_triangle(y, 1e-12))
            throw ConfigError("starting point outside S");
    }
    if (kind == ExperimentKind::pm_curve || kind == ExperimentKind::etau_curve)
    {
        double const d = gamma_line(params.front().q);
        for (auto const& y : inits)
        {
            if (std::abs(y.d - d) > 1e-12)
                throw ConfigError("curve starts must lie on the coexistence line");
        }
    }
}

std::vector<ScaledPoint> ExperimentConfig::resolved_inits() const
{
    return inits.empty() ? default_inits(kind, params.front().q) : inits;
}

ExperimentConfig parse_experiment_config(std::string const& json_text)
{
    ExperimentConfig cfg;
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    try
    {
        for (auto const& [key, value] : j.items())
        {
            if (key == "kind")
                cfg.kind = experiment_kind_from_string(value.get<std::string>());
            else if (key == "params")
            {
                cfg.params.clear();
                if (value.is_array())
                {
                    for (auto const& e : value)
                        cfg.params.push_back(params_from_json(e));
                }
                else
                    cfg.params.push_back(params_from_json(value));
            }
            else if (key == "inits")
            {
                cfg.inits.clear();
                for (auto const& e : value)
                {
                    if (!e.is_array() || e.size() != 2)
                        throw ConfigError("inits entries must be [d, m] pairs");
                    cfg.inits.push_back({e[0].get<double>(), e[1].get<double>()});
                }
            }
            else if (key == "runs")
                cfg.runs = value.get<int>();
            else if (key == "master_seed")
                cfg.master_seed = value.get<std::uint64_t>();
            else if (key == "dt")
                cfg.dt = value.get<double>();
            else if (key == "n_grid")
                cfg.n_grid = value.get<int>();
            else if (key == "out_dir")
                cfg.out_dir = value.get<std::string>();
            else if (key == "gamma_tolerance")
                cfg.gamma_tolerance = value.get<int>();
            else if (key == "threads")
                cfg.threads = value.get<unsigned>();
            else
                throw ConfigError("unknown config field '" + key + "'");
        }
    }
    catch (json::exception const& e)
    {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::vector<CurvePoint> run_curve_sweep(ExperimentConfig const& cfg)
{
    cfg.validate();
    return sweep(cfg).points;
}

std::vector<ComparisonRow> compare_pm(std::vector<CurvePoint> const& pts)
{
    std::vector<ComparisonRow> out;
    for (auto const& p : pts)
        out.push_back(make_row(p.m0, p.pm_analytic, p.pm_mc, p.pm_se));
    return out;
}

std::vector<ComparisonRow> compare_etau(std::vector<CurvePoint> const& pts)
{
    std::vector<ComparisonRow> out;
    for (auto const& p : pts)
        out.push_back(make_row(p.m0, p.etau_analytic, p.etau_mc, p.etau_se));
    return out;
}

std::vector<GammaHitRow> run_gamma_hit(ExperimentConfig const& cfg)
{
    cfg.validate();
    return gamma_hit_runs(cfg).rows;
}

std::vector<TauSample> run_tau_hist(ExperimentConfig const& cfg)
{
    cfg.validate();
    return tau_runs(cfg).samples;
}

ReducedComparison run_reduced_vs_ctmc(ExperimentConfig const& cfg)
{
    cfg.validate();
    return reduced_runs(cfg).cmp;
}

ExperimentResult run_experiment(ExperimentConfig const& cfg)
{
    cfg.validate();
    ExperimentResult result;
    auto const dir = prepare_dir(cfg.out_dir);

    switch (cfg.kind)
    {
        case ExperimentKind::pm_curve:
        case ExperimentKind::etau_curve:
        {
            auto s = sweep(cfg);
            bool const pm = cfg.kind == ExperimentKind::pm_curve;
            auto const path = dir / (pm ? "fig5.csv" : "fig6.csv");
            auto os = open_csv(path);
            os << (pm ? "m0,pm_analytic,pm_mc,se\n" : "m0,etau_analytic,etau_mc,se\n");
            for (auto const& p : s.points)
            {
                os << format_number(p.m0) << ','
                   << format_number(pm ? p.pm_analytic : p.etau_analytic) << ','
                   << format_number(pm ? p.pm_mc : p.etau_mc) << ','
                   << format_number(pm ? p.pm_se : p.etau_se) << '\n';
            }
            close_csv(os, path, result);
            write_outcomes(s.outcomes, cfg.runs, dir, result);
            result.comparison = pm ? compare_pm(s.points) : compare_etau(s.points);
            result.summaries = std::move(s.summaries);
            break;
        }
        case ExperimentKind::gamma_hit:
        {
            auto h = gamma_hit_runs(cfg);
            auto const path = dir / "gamma_hit.csv";
            auto os = open_csv(path);
            os << "d0,m0,D0,M0,runs,p_extinct_first,se_extinct_first,"
                  "p_gamma_first,se_gamma_first\n";
            for (auto const& r : h.rows)
            {
                os << format_number(r.start.d) << ',' << format_number(r.start.m)
                   << ',' << r.lattice.d << ',' << r.lattice.m << ',' << cfg.runs
                   << ',' << format_number(r.extinct_first.p) << ','
                   << format_number(r.extinct_first.se) << ','
                   << format_number(r.gamma_first.p) << ','
                   << format_number(r.gamma_first.se) << '\n';
                auto stats = summarize(r.tau_gamma);
                stats.proportion = r.extinct_first;
                result.summaries.push_back(std::move(stats));
            }
            close_csv(os, path, result);

            // Hitting times of the first start, the Fig. 4 histogram.
            auto const path4 = dir / "fig4.csv";
            auto os4 = open_csv(path4);
            os4 << "run_id,tau_gamma\n";
            auto const& first = h.outcomes.front();
            for (std::size_t i = 0; i < first.size(); ++i)
            {
                if (first[i].record.tau_gamma && !first[i].record.extinct_before_gamma())
                    os4 << i << ',' << format_number(*first[i].record.tau_gamma) << '\n';
            }
            close_csv(os4, path4, result);
            write_outcomes(h.outcomes, cfg.runs, dir, result);
            break;
        }
        case ExperimentKind::tau_hist:
        {
            auto t = tau_runs(cfg);
            auto const path = dir / "fig3.csv";
            auto os = open_csv(path);
            os << "N,run_id,tau_e_scaled\n";
            for (auto const& s : t.samples)
            {
                for (std::size_t i = 0; i < s.tau_scaled.size(); ++i)
                    os << s.n << ',' << i << ',' << format_number(s.tau_scaled[i]) << '\n';
                result.summaries.push_back(summarize(s.tau_scaled));
            }
            close_csv(os, path, result);
            write_outcomes(t.outcomes, cfg.runs, dir, result);
            break;
        }
        case ExperimentKind::reduced_vs_ctmc:
        {
            auto r = reduced_runs(cfg);
            auto const path = dir / "reduced_vs_ctmc.csv";
            auto os = open_csv(path);
            os << "source,run_id,tau\n";
            for (std::size_t i = 0; i < r.cmp.chain.size(); ++i)
                os << "ctmc," << i << ',' << format_number(r.cmp.chain[i]) << '\n';
            for (std::size_t i = 0; i < r.cmp.reduced.size(); ++i)
                os << "reduced," << i << ',' << format_number(r.cmp.reduced[i]) << '\n';
            close_csv(os, path, result);
            write_outcomes(r.outcomes, cfg.runs, dir, result);
            result.summaries.push_back(summarize(r.cmp.chain));
            result.summaries.push_back(summarize(r.cmp.reduced));
            break;
        }
    }
    return result;
}

}  // namespace coexist
