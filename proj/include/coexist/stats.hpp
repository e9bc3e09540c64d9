#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace coexist
{

struct Histogram
{
    std::vector<double> edges;  // counts.size() + 1 edges
    std::vector<std::size_t> counts;
};

struct Proportion
{
    std::size_t successes = 0;
    double p = 0.0;
    double se = 0.0;  // sqrt(p (1 - p) / n)
};

struct SummaryStats
{
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation
    double se = 0.0;
    double min = 0.0;
    double max = 0.0;
    Histogram histogram;
    std::optional<Proportion> proportion;
};

/// Freedman-Diaconis bin count, at least one bin.
std::size_t freedman_diaconis_bins(std::span<double const> values);

/// `bins` = 0 selects Freedman-Diaconis.
Histogram make_histogram(std::span<double const> values, std::size_t bins = 0);

SummaryStats summarize(std::span<double const> values, std::size_t bins = 0);

Proportion binomial_proportion(std::size_t successes, std::size_t n);

/// Standard error of a proportion p estimated from n trials.
double binomial_se(double p, std::size_t n);

/// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Asymptotic p-value of the two-sample KS statistic.
double ks_pvalue(double statistic, std::size_t n1, std::size_t n2);

double quantile(std::vector<double> values, double p);

}  // namespace coexist
