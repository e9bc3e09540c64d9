#include "coexist/cli.hpp"

#include <fstream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "coexist/analytics.hpp"
#include "coexist/ctmc.hpp"
#include "coexist/error.hpp"
#include "coexist/flow.hpp"
#include "coexist/harness.hpp"
#include "coexist/reduced.hpp"

namespace coexist
{
namespace
{

using nlohmann::json;

std::string read_file(std::string const& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot read config file " + path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

ScaledPoint parse_point(std::string const& text)
{
    std::istringstream is(text);
    ScaledPoint y;
    char comma = 0;
    if (!(is >> y.d >> comma >> y.m) || comma != ',' || !(is >> std::ws).eof())
        throw ConfigError("expected a point as d,m, got '" + text + "'");
    return y;
}

json record_json(StoppingRecord const& r)
{
    auto opt = [](std::optional<double> v) -> json {
        return v ? json(*v) : json(nullptr);
    };
    auto species = [](Species s) -> json {
        return s == Species::none ? json(nullptr) : json(to_string(s));
    };
    return {{"tau_gamma", opt(r.tau_gamma)},
            {"tau_e", opt(r.tau_e)},
            {"first_extinct", species(r.first_extinct)},
            {"tau_f", opt(r.tau_f)},
            {"fixed", species(r.fixed)},
            {"event_count", r.event_count}};
}

/// Fills options of `sub` that were not given on the command line from a
/// JSON object keyed by long option name.
void apply_json_defaults(CLI::App& sub, std::string const& path)
{
    json j;
    try
    {
        j = json::parse(read_file(path));
    }
    catch (json::parse_error const& e)
    {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    for (auto const& [key, value] : j.items())
    {
        auto* opt = sub.get_option_no_throw("--" + key);
        if (opt == nullptr || key == "config")
            throw ConfigError("unknown config field '" + key + "'");
        if (opt->count() > 0)
            continue;
        auto add = [&](json const& v) {
            opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
        };
        if (value.is_array() && key == "init")
            opt->add_result(value.at(0).dump() + "," + value.at(1).dump());
        else if (value.is_array())
            for (auto const& v : value)
                add(v);
        else
            add(value);
        opt->run_callback();
    }
}

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App& sub, Common& c, char const* out_help)
{
    sub.add_option("--config", c.config, "JSON file of option values")
        ->check(CLI::ExistingFile);
    sub.add_option("--seed", c.seed, "master seed");
    sub.add_option("--out", c.out, out_help);
}

void write_text(std::string const& path, std::string const& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot open " + path + " for writing");
    os << text;
    if (!os)
        throw Error("failed writing " + path);
}

json summary_json(ExperimentResult const& r)
{
    json out;
    out["files"] = r.files;
    out["summaries"] = json::array();
    for (auto const& s : r.summaries)
    {
        json e{{"n", s.n}, {"mean", s.mean}, {"sd", s.sd}, {"se", s.se},
               {"min", s.min}, {"max", s.max}};
        if (s.proportion)
            e["proportion"] = {{"p", s.proportion->p}, {"se", s.proportion->se}};
        out["summaries"].push_back(e);
    }
    out["comparison"] = json::array();
    for (auto const& c : r.comparison)
    {
        out["comparison"].push_back({{"x", c.x}, {"analytic", c.analytic},
                                     {"mc", c.mc}, {"se", c.se},
                                     {"z", std::isfinite(c.z) ? json(c.z) : json("inf")},
                                     {"flagged", c.flagged}});
    }
    return out;
}

}  // namespace

int cli_main(int argc, char const* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Three-species Moran model in a random environment: simulation, "
                 "mean flow, reduced diffusion and analytic absorption quantities"};
    app.name("coexist");
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "one chain run, StoppingRecord as JSON");
    Common sim_c;
    int sim_n = 1000;
    double sim_q = 0.5;
    std::string sim_init = "0,0.333";
    std::string sim_mode = "first_extinction";
    int sim_tol = 1;
    std::int64_t sim_stride = 1;
    add_common(*sim, sim_c, "CSV file for the path t,D,M (optional)");
    sim->add_option("--n", sim_n, "population size N")->capture_default_str();
    sim->add_option("--q", sim_q, "probability of environment c")->capture_default_str();
    sim->add_option("--init", sim_init, "scaled start d,m")->capture_default_str();
    sim->add_option("--mode", sim_mode, "first_extinction | fixation | gamma")
        ->check(CLI::IsMember({"first_extinction", "fixation", "gamma"}))
        ->capture_default_str();
    sim->add_option("--gamma-tol", sim_tol, "Gamma-hit tolerance in D")
        ->capture_default_str();
    sim->add_option("--stride", sim_stride, "record every k-th jump of the path")
        ->capture_default_str();

    // flow
    auto* flw = app.add_subcommand("flow", "RK4 mean-flow trajectory to Gamma");
    Common flw_c;
    double flw_q = 0.5;
    std::string flw_init = "0.5,0.2";
    double flw_dt = 1e-3;
    add_common(*flw, flw_c, "CSV file t,d,m (default stdout)");
    flw->add_option("--q", flw_q, "probability of environment c")->capture_default_str();
    flw->add_option("--init", flw_init, "scaled start d,m")->capture_default_str();
    flw->add_option("--dt", flw_dt, "RK4 step")->capture_default_str();

    // coeffs
    auto* cof = app.add_subcommand("coeffs", "reduced-diffusion coefficients on Gamma");
    Common cof_c;
    double cof_q = 0.5;
    int cof_points = 100;
    add_common(*cof, cof_c, "CSV file x,beta,alpha (default stdout)");
    cof->add_option("--q", cof_q, "probability of environment c")->capture_default_str();
    cof->add_option("--points", cof_points, "number of grid cells")->capture_default_str();

    // analytic
    auto* ana = app.add_subcommand("analytic", "p_M and E[tau] from the scale function");
    Common ana_c;
    double ana_q = 0.5;
    int ana_grid = 1000;
    std::optional<double> ana_x;
    std::string ana_init;
    int ana_n = 1000;
    add_common(*ana, ana_c, "CSV file x,phi,pm,etau over the grid (optional)");
    ana->add_option("--q", ana_q, "probability of environment c")->capture_default_str();
    ana->add_option("--grid", ana_grid, "quadrature grid size")->capture_default_str();
    auto* x_opt = ana->add_option("--x", ana_x, "point x on Gamma");
    ana->add_option("--init", ana_init, "scaled start d,m, projected onto Gamma")
        ->excludes(x_opt);
    ana->add_option("--n", ana_n, "N for chain-time units")->capture_default_str();

    // experiment
    auto* exp = app.add_subcommand("experiment", "run an experiment from a JSON config");
    Common exp_c;
    std::optional<int> exp_runs;
    std::optional<unsigned> exp_threads;
    add_common(*exp, exp_c, "output directory (overrides out_dir)");
    exp->get_option("--config")->required();
    exp->add_option("--runs", exp_runs, "replicates per group");
    exp->add_option("--threads", exp_threads, "worker threads, 0 = all cores");

    // figures
    auto* fig = app.add_subcommand("figures", "figure datasets fig3 | fig4 | fig5 | fig6");
    Common fig_c;
    std::string fig_which;
    std::vector<int> fig_n;
    std::optional<double> fig_q;
    std::optional<int> fig_runs;
    std::optional<int> fig_grid;
    std::optional<unsigned> fig_threads;
    add_common(*fig, fig_c, "output directory");
    fig->add_option("figure", fig_which, "fig3 | fig4 | fig5 | fig6")
        ->required()
        ->check(CLI::IsMember({"fig3", "fig4", "fig5", "fig6"}));
    fig->add_option("--n", fig_n, "population size(s); fig3 takes several");
    fig->add_option("--q", fig_q, "probability of environment c");
    fig->add_option("--runs", fig_runs, "replicates per point");
    fig->add_option("--grid", fig_grid, "quadrature grid size");
    fig->add_option("--threads", fig_threads, "worker threads, 0 = all cores");

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::ParseError const& e)
    {
        int const code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    bool running = false;
    try
    {
        if (sim->parsed())
        {
            if (!sim_c.config.empty())
                apply_json_defaults(*sim, sim_c.config);
            SimConfig cfg;
            cfg.params = {sim_n, sim_q};
            cfg.params.validate();
            cfg.init = lattice_state(parse_point(sim_init), sim_n);
            cfg.mode = sim_mode == "fixation" ? StopMode::fixation
                       : sim_mode == "gamma"  ? StopMode::gamma_or_extinction
                                              : StopMode::first_extinction;
            cfg.gamma_tolerance = sim_tol;
            cfg.record_path = !sim_c.out.empty();
            cfg.path_stride = sim_stride;
            cfg.validate();
            running = true;
            std::uint64_t const seed = sim_c.seed.value_or(1);
            Rng rng(replicate_seed(seed, 0));
            auto const result = run_chain(cfg, rng);
            if (result.path)
            {
                std::ostringstream csv;
                write_path_csv(*result.path, csv);
                write_text(sim_c.out, csv.str());
            }
            json j = record_json(result.record);
            j["N"] = sim_n;
            j["q"] = sim_q;
            j["init"] = {cfg.init.d, cfg.init.m};
            j["seed"] = seed;
            out << j.dump(2) << '\n';
        }
        else if (flw->parsed())
        {
            if (!flw_c.config.empty())
                apply_json_defaults(*flw, flw_c.config);
            auto const y = parse_point(flw_init);
            FlowOptions opts;
            opts.dt = flw_dt;
            opts.validate();
            if (!in_triangle(y, 1e-12))
                throw ConfigError("starting point outside S");
            running = true;
            auto const traj = integrate_flow(y, flw_q, opts);
            std::ostringstream csv;
            write_trajectory_csv(traj, csv);
            if (flw_c.out.empty())
                out << csv.str();
            else
            {
                write_text(flw_c.out, csv.str());
                auto const& end = traj.terminal();
                json j{{"t_end", end.t},
                       {"d_end", end.y.d},
                       {"m_end", end.y.m},
                       {"reached_gamma", traj.reason == TerminalReason::gamma_reached}};
                if (y.m > 0.0)
                    j["mstar"] = project_mstar(y, flw_q);
                out << j.dump(2) << '\n';
            }
        }
        else if (cof->parsed())
        {
            if (!cof_c.config.empty())
                apply_json_defaults(*cof, cof_c.config);
            if (!(cof_q > 0.0 && cof_q < 1.0))
                throw ConfigError("q must lie in (0, 1)");
            running = true;
            std::ostringstream csv;
            write_coefficient_table(cof_q, cof_points, csv);
            if (cof_c.out.empty())
                out << csv.str();
            else
                write_text(cof_c.out, csv.str());
        }
        else if (ana->parsed())
        {
            if (!ana_c.config.empty())
                apply_json_defaults(*ana, ana_c.config);
            Params const p{ana_n, ana_q};
            p.validate();
            ScaledPoint y{gamma_line(ana_q), ana_x.value_or(1.0 / 3.0)};
            if (!ana_init.empty())
                y = parse_point(ana_init);
            if (!in_triangle(y, 1e-12))
                throw ConfigError("point outside S");
            auto const table = ScaleTable::build(ana_q, ana_grid);
            running = true;
            auto const r = extinction_report(y, p, table);
            if (!ana_c.out.empty())
            {
                std::ostringstream csv;
                write_table_csv(table, csv);
                write_text(ana_c.out, csv.str());
            }
            json j{{"q", r.q},
                   {"N", r.n},
                   {"x", r.x_start},
                   {"p_M", r.p_m},
                   {"E_tau", r.expected_tau_gamma_units},
                   {"E_tau_chain", r.expected_tau_chain_units}};
            out << j.dump(2) << '\n';
        }
        else if (exp->parsed())
        {
            auto cfg = parse_experiment_config(read_file(exp_c.config));
            if (exp_c.seed)
                cfg.master_seed = *exp_c.seed;
            if (!exp_c.out.empty())
                cfg.out_dir = exp_c.out;
            if (exp_runs)
                cfg.runs = *exp_runs;
            if (exp_threads)
                cfg.threads = *exp_threads;
            cfg.validate();
            running = true;
            out << summary_json(run_experiment(cfg)).dump(2) << '\n';
        }
        else if (fig->parsed())
        {
            ExperimentConfig cfg;
            if (fig_which == "fig3")
            {
                cfg.kind = ExperimentKind::tau_hist;
                cfg.params = {{100, 0.5}, {1000, 0.5}};
            }
            else if (fig_which == "fig4")
            {
                cfg.kind = ExperimentKind::gamma_hit;
                cfg.inits = {{1.0 / 3.0, 1.0 / 3.0}};
            }
            else
                cfg.kind = fig_which == "fig5" ? ExperimentKind::pm_curve
                                               : ExperimentKind::etau_curve;
            if (!fig_c.config.empty())
            {
                auto const kind = cfg.kind;
                cfg = parse_experiment_config(read_file(fig_c.config));
                if (cfg.kind != kind)
                    throw ConfigError("config kind does not match " + fig_which);
            }
            if (!fig_n.empty() || fig_q)
            {
                double const q = fig_q.value_or(cfg.params.front().q);
                std::vector<int> ns = fig_n;
                if (ns.empty())
                    for (auto const& p : cfg.params)
                        ns.push_back(p.n);
                cfg.params.clear();
                for (int n : ns)
                    cfg.params.push_back({n, q});
            }
            if (fig_c.seed)
                cfg.master_seed = *fig_c.seed;
            if (!fig_c.out.empty())
                cfg.out_dir = fig_c.out;
            if (fig_runs)
                cfg.runs = *fig_runs;
            if (fig_grid)
                cfg.n_grid = *fig_grid;
            if (fig_threads)
                cfg.threads = *fig_threads;
            cfg.validate();
            running = true;
            out << summary_json(run_experiment(cfg)).dump(2) << '\n';
        }
    }
    catch (ConfigError const& e)
    {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (CLI::ParseError const& e)
    {
        err << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (std::exception const& e)
    {
        if (!running)
        {
            err << "config error: " << e.what() << '\n';
            return 1;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

int cli_main(std::vector<std::string> const& args, std::ostream& out,
             std::ostream& err)
{
    std::vector<char const*> argv{"coexist"};
    for (auto const& a : args)
        argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace coexist
