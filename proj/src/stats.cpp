#include "coexist/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coexist/error.hpp"

namespace coexist
{

double quantile(std::vector<double> values, double p)
{
    if (values.empty())
        throw ConfigError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    double const pos = p * (values.size() - 1);
    auto const lo = static_cast<std::size_t>(std::floor(pos));
    auto const hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - lo) * (values[hi] - values[lo]);
}

std::size_t freedman_diaconis_bins(std::span<double const> values)
{
    if (values.size() < 2)
        return 1;
    std::vector<double> v(values.begin(), values.end());
    double const iqr = quantile(v, 0.75) - quantile(v, 0.25);
    auto const [lo, hi] = std::minmax_element(v.begin(), v.end());
    double const range = *hi - *lo;
    if (!(iqr > 0.0) || !(range > 0.0))
        return 1;
    double const width = 2.0 * iqr / std::cbrt(static_cast<double>(v.size()));
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(range / width)));
}

Histogram make_histogram(std::span<double const> values, std::size_t bins)
{
    Histogram h;
    if (values.empty())
        return h;
    if (bins == 0)
        bins = freedman_diaconis_bins(values);
    auto const [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double const lo = *lo_it;
    double hi = *hi_it;
    if (!(hi > lo))
        hi = lo + 1.0;
    double const width = (hi - lo) / bins;
    h.edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + width * i;
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values)
    {
        auto idx = static_cast<std::size_t>((v - lo) / width);
        ++h.counts[std::min(idx, bins - 1)];
    }
    return h;
}

SummaryStats summarize(std::span<double const> values, std::size_t bins)
{
    SummaryStats s;
    s.n = values.size();
    if (s.n == 0)
        return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    double ss = 0.0;
    for (double v : values)
        ss += (v - s.mean) * (v - s.mean);
    s.sd = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
    s.se = s.sd / std::sqrt(static_cast<double>(s.n));
    auto const [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.histogram = make_histogram(values, bins);
    return s;
}

double binomial_se(double p, std::size_t n)
{
    if (n == 0)
        return 0.0;
    return std::sqrt(std::max(p * (1.0 - p), 0.0) / n);
}

Proportion binomial_proportion(std::size_t successes, std::size_t n)
{
    Proportion out;
    out.successes = successes;
    out.p = n ? static_cast<double>(successes) / n : 0.0;
    out.se = binomial_se(out.p, n);
    return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b)
{
    if (a.empty() || b.empty())
        throw ConfigError("KS statistic needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double const na = a.size();
    double const nb = b.size();
    std::size_t i = 0;
    std::size_t j = 0;
    double best = 0.0;
    while (i < a.size() && j < b.size())
    {
        double const x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        best = std::max(best, std::abs(i / na - j / nb));
    }
    return best;
}

double ks_pvalue(double statistic, std::size_t n1, std::size_t n2)
{
    double const ne = static_cast<double>(n1) * n2 / (n1 + n2);
    double const root = std::sqrt(ne);
    double const lambda = (root + 0.12 + 0.11 / root) * statistic;
    if (lambda < 1e-3)
        return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k)
    {
        double const term = sign * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12)
            break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace coexist
