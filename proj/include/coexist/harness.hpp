#pragma once

// Experiment runner behind the `experiment` and `figures` commands.
//
// Replicate i of group g (one group per parameter set or starting point)
// draws from Rng(replicate_seed(master_seed + g, i)), so each CSV is a pure
// function of the config.

#include <cstdint>
#include <string>
#include <vector>

#include "coexist/model.hpp"
#include "coexist/stats.hpp"

namespace coexist
{

enum class ExperimentKind
{
    tau_hist,        // tau_e / N^2 samples per N
    gamma_hit,       // extinction before reaching Gamma, per start
    pm_curve,        // p_M along Gamma, analytic vs Monte Carlo
    etau_curve,      // E[tau_e] along Gamma, analytic vs Monte Carlo
    reduced_vs_ctmc  // chain tau_e / N^2 against the m* diffusion
};

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(std::string const& s);

struct ExperimentConfig
{
    ExperimentKind kind = ExperimentKind::pm_curve;
    std::vector<Params> params{Params{}};
    std::vector<ScaledPoint> inits;  // empty selects the kind's default
    int runs = 1000;
    std::uint64_t master_seed = 1;
    double dt = 1e-4;  // Euler step of the reduced diffusion
    int n_grid = 1000;
    std::string out_dir = ".";
    int gamma_tolerance = 1;
    unsigned threads = 0;

    void validate() const;
    /// Starting points after defaults are applied.
    std::vector<ScaledPoint> resolved_inits() const;
};

/// Parses a JSON object with the field names above. Missing fields keep
/// their defaults; `params` may be one object or a list, `inits` a list of
/// [d, m] pairs.
ExperimentConfig parse_experiment_config(std::string const& json_text);

std::vector<ScaledPoint> default_inits(ExperimentKind k, double q);

struct ComparisonRow
{
    double x = 0.0;  // m0
    double analytic = 0.0;
    double mc = 0.0;
    double se = 0.0;
    double z = 0.0;
    bool flagged = false;  // |z| > 3
};

struct CurvePoint
{
    double m0 = 0.0;
    double pm_analytic = 0.0;
    double pm_mc = 0.0;
    double pm_se = 0.0;  // binomial SE at the analytic p
    double etau_analytic = 0.0;
    double etau_mc = 0.0;  // mean tau_e / N^2
    double etau_se = 0.0;
};

/// Chain sweep over starting points on Gamma for the first parameter set.
std::vector<CurvePoint> run_curve_sweep(ExperimentConfig const& cfg);

std::vector<ComparisonRow> compare_pm(std::vector<CurvePoint> const& pts);
std::vector<ComparisonRow> compare_etau(std::vector<CurvePoint> const& pts);

struct GammaHitRow
{
    ScaledPoint start;
    DMState lattice;
    Proportion extinct_first;  // tau_e < tau_Gamma, or extinct at t = 0
    Proportion gamma_first;
    std::vector<double> tau_gamma;  // chain time, runs that hit Gamma first
};

std::vector<GammaHitRow> run_gamma_hit(ExperimentConfig const& cfg);

struct TauSample
{
    int n = 0;
    std::vector<double> tau_scaled;  // tau_e / N^2
};

std::vector<TauSample> run_tau_hist(ExperimentConfig const& cfg);

struct ReducedComparison
{
    std::vector<double> chain;    // tau_e / N^2
    std::vector<double> reduced;  // m* diffusion absorption time
    double ks = 0.0;
    double mean_rel_diff = 0.0;  // |mean_chain - mean_reduced| / mean_reduced
};

ReducedComparison run_reduced_vs_ctmc(ExperimentConfig const& cfg);

struct ExperimentResult
{
    std::vector<SummaryStats> summaries;
    std::vector<ComparisonRow> comparison;
    std::vector<std::string> files;  // written CSV paths
};

/// Runs the experiment and writes its CSV artifacts into cfg.out_dir.
ExperimentResult run_experiment(ExperimentConfig const& cfg);

}  // namespace coexist
