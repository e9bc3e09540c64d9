#include "coexist/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "coexist/csv.hpp"
#include "coexist/error.hpp"
#include "coexist/flow.hpp"

namespace coexist
{
namespace
{

constexpr double kPi = 3.14159265358979323846;

/// Cumulative integral on an odd-length uniform grid: Simpson over each pair
/// of cells, and the three-point rule (5, 8, -1)/12 for the half-way node.
std::vector<double> cumulative(std::span<double const> f, double step)
{
    std::vector<double> out(f.size(), 0.0);
    for (std::size_t i = 0; i + 2 < f.size(); i += 2)
    {
        double const pair = step / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        double half = step / 12.0 * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        // Near an under-resolved end singularity the half rule can overshoot;
        // keep it between 0 and the pair integral when f has one sign.
        bool const one_sign = (f[i] >= 0.0 && f[i + 1] >= 0.0 && f[i + 2] >= 0.0)
                              || (f[i] <= 0.0 && f[i + 1] <= 0.0 && f[i + 2] <= 0.0);
        if (one_sign)
            half = std::clamp(half, std::min(0.0, pair), std::max(0.0, pair));
        out[i + 1] = out[i] + half;
        out[i + 2] = out[i] + pair;
    }
    return out;
}

/// Integral from each node to the right end.
std::vector<double> cumulative_from_right(std::span<double const> f, double step)
{
    std::vector<double> rev(f.rbegin(), f.rend());
    auto out = cumulative(rev, step);
    std::reverse(out.begin(), out.end());
    return out;
}

}  // namespace

ScaleTable ScaleTable::build(double q, int n_grid, double eps)
{
    if (!(q > 0.0 && q < 1.0))
        throw ConfigError("q must lie in (0, 1)");
    return build([q](double x) { return gamma_coefficients(x, q); }, 0.0,
                 gamma_upper_end(q), n_grid, eps);
}

ScaleTable ScaleTable::build(CoefficientFn coeffs, double a, double b,
                             int n_grid, double eps)
{
    if (n_grid < 100)
        throw ConfigError("scale table needs n_grid >= 100");
    if (!(eps > 0.0 && eps <= 0.01))
        throw ConfigError("eps must lie in (0, 0.01]");
    if (!(b - a > 4.0 * eps))
        throw ConfigError("scale table interval too short");

    ScaleTable t;
    t.coeffs_ = std::move(coeffs);
    t.a_ = a;
    t.b_ = b;
    t.lo_ = a + eps;
    t.hi_ = b - eps;
    t.n_grid_ = n_grid;
    std::size_t const fine = 2 * static_cast<std::size_t>(n_grid) + 1;
    t.step_ = 1.0 / (fine - 1);

    // Nodes x = lo + (hi - lo) (1 - cos(pi s)) / 2, uniform in s, so cells
    // shrink quadratically towards the ends where alpha vanishes.
    double const half = 0.5 * (t.hi_ - t.lo_);
    t.x_.resize(fine);
    t.jac_.resize(fine);
    t.alpha_.resize(fine);
    t.log_slope_.resize(fine);
    for (std::size_t j = 0; j < fine; ++j)
    {
        double const s = j * t.step_;
        double const x = j == 0          ? t.lo_
                         : j + 1 == fine ? t.hi_
                                         : t.lo_ + half * (1.0 - std::cos(kPi * s));
        auto const c = t.coeffs_(x);
        if (!(c.alpha > 0.0) || !std::isfinite(c.alpha) || !std::isfinite(c.beta))
        {
            std::ostringstream msg;
            msg << "diffusion coefficients singular at x = " << x
                << " (beta=" << c.beta << ", alpha=" << c.alpha << ")";
            throw QuadratureError(msg.str());
        }
        t.x_[j] = x;
        t.jac_[j] = half * kPi * std::sin(kPi * s);
        t.alpha_[j] = c.alpha;
        t.log_slope_[j] = -2.0 * c.beta / c.alpha;
    }

    // Inner integral referenced at the grid node in the middle.
    auto const inner = cumulative(t.times_jac(t.log_slope_), t.step_);
    double const ref = inner[fine / 2 - (fine / 2) % 2];

    t.dphi_.resize(fine);
    for (std::size_t j = 0; j < fine; ++j)
        t.dphi_[j] = std::exp(inner[j] - ref);
    t.phi_ = cumulative(t.times_jac(t.dphi_), t.step_);
    for (std::size_t j = 1; j < fine; ++j)
    {
        // Ties are possible in the last cells, where phi is flat to rounding.
        if (!(t.phi_[j] >= t.phi_[j - 1]) || !std::isfinite(t.phi_[j]))
        {
            std::ostringstream msg;
            msg << "scale function decreasing at x = " << t.x_[j];
            throw QuadratureError(msg.str());
        }
    }
    t.finalize();
    return t;
}

ScaleTable ScaleTable::rescaled(double scale, double shift) const
{
    if (!(scale > 0.0))
        throw ConfigError("scale function rescaling must be increasing");
    ScaleTable t = *this;
    for (auto& v : t.phi_)
        v = scale * v + shift;
    for (auto& v : t.dphi_)
        v *= scale;
    t.finalize();
    return t;
}

void ScaleTable::finalize()
{
    phi_a_ = phi_.front() - (lo_ - a_) * dphi_.front();
    phi_b_ = phi_.back() + (b_ - hi_) * dphi_.back();
    std::size_t const fine = x_.size();
    left_density_.resize(fine);
    right_density_.resize(fine);
    for (std::size_t j = 0; j < fine; ++j)
    {
        double const speed = 1.0 / (dphi_[j] * alpha_[j]);
        left_density_[j] = (phi_[j] - phi_a_) * speed;
        right_density_[j] = (phi_b_ - phi_[j]) * speed;
    }
    left_ = cumulative(times_jac(left_density_), step_);
    right_ = cumulative_from_right(times_jac(right_density_), step_);
}

std::vector<double> ScaleTable::grid() const
{
    std::vector<double> out;
    for (std::size_t j = 0; j < x_.size(); j += 2)
        out.push_back(x_[j]);
    return out;
}

std::vector<double> ScaleTable::phi_on_grid() const
{
    std::vector<double> out;
    for (std::size_t j = 0; j < phi_.size(); j += 2)
        out.push_back(phi_[j]);
    return out;
}

std::vector<double> ScaleTable::dphi_on_grid() const
{
    std::vector<double> out;
    for (std::size_t j = 0; j < dphi_.size(); j += 2)
        out.push_back(dphi_[j]);
    return out;
}

std::vector<double> ScaleTable::times_jac(std::span<double const> f) const
{
    std::vector<double> out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j)
        out[j] = f[j] * jac_[j];
    return out;
}

std::size_t ScaleTable::cell(double x) const
{
    auto const last = static_cast<std::ptrdiff_t>(x_.size()) - 2;
    double const c = std::clamp(1.0 - 2.0 * (x - lo_) / (hi_ - lo_), -1.0, 1.0);
    auto j = std::clamp<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(std::floor(std::acos(c) / kPi / step_)), 0, last);
    // acos roundoff can land one cell off.
    while (j > 0 && x < x_[j])
        --j;
    while (j < last && x >= x_[j + 1])
        ++j;
    return static_cast<std::size_t>(j);
}

double ScaleTable::hermite(std::span<double const> v, std::span<double const> dv,
                           double x) const
{
    std::size_t const j = cell(x);
    return hermite_cell(j, v[j], v[j + 1], dv[j], dv[j + 1], x);
}

double ScaleTable::hermite_cell(std::size_t j, double v0, double v1, double dv0,
                                double dv1, double x) const
{
    double const h = x_[j + 1] - x_[j];
    double const t = (x - x_[j]) / h;
    double const t2 = t * t;
    double const t3 = t2 * t;
    return (2.0 * t3 - 3.0 * t2 + 1.0) * v0 + (t3 - 2.0 * t2 + t) * h * dv0
           + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * h * dv1;
}

double ScaleTable::phi(double x) const
{
    if (x <= lo_)
        return phi_.front() + (x - lo_) * dphi_.front();
    if (x >= hi_)
        return phi_.back() + (x - hi_) * dphi_.back();
    return hermite(phi_, dphi_, x);
}

double ScaleTable::dphi(double x) const
{
    if (x <= lo_)
        return dphi_.front();
    if (x >= hi_)
        return dphi_.back();
    std::size_t const j = cell(x);
    return hermite_cell(j, dphi_[j], dphi_[j + 1], dphi_[j] * log_slope_[j],
                        dphi_[j + 1] * log_slope_[j + 1], x);
}

double ScaleTable::alpha(double y) const
{
    return coeffs_(y).alpha;
}

double ScaleTable::green_left(double x) const
{
    if (x <= lo_)
        return 0.0;
    if (x >= hi_)
        return left_.back();
    return hermite(left_, left_density_, x);
}

double ScaleTable::green_right(double x) const
{
    if (x <= lo_)
        return right_.front();
    if (x >= hi_)
        return 0.0;
    std::size_t const j = cell(x);
    return hermite_cell(j, right_[j], right_[j + 1], -right_density_[j],
                        -right_density_[j + 1], x);
}

double hit_prob_pM(double x, ScaleTable const& table)
{
    if (x <= table.left_end())
        return 1.0;
    if (x >= table.right_end())
        return 0.0;
    double const p = (table.phi_right() - table.phi(x))
                     / (table.phi_right() - table.phi_left());
    return std::clamp(p, 0.0, 1.0);
}

double greens(double x, double y, ScaleTable const& table)
{
    double const a = table.left_end();
    double const b = table.right_end();
    if (!(x > a && x < b && y > a && y < b))
        return 0.0;
    double const yy = std::clamp(y, table.lo(), table.hi());
    double const lower = std::min(x, y);
    double const upper = std::max(x, y);
    double const span = table.phi_right() - table.phi_left();
    double const alpha = table.alpha(yy);
    if (!(alpha > 0.0))
        return 0.0;
    return 2.0 * (table.phi_right() - table.phi(upper))
           * (table.phi(lower) - table.phi_left())
           / (span * table.dphi(yy) * alpha);
}

double expected_tau(double x, ScaleTable const& table)
{
    double const a = table.left_end();
    double const b = table.right_end();
    if (x <= a || x >= b)
        return 0.0;
    if (x < table.lo())
        return expected_tau(table.lo(), table) * (x - a) / (table.lo() - a);
    if (x > table.hi())
        return expected_tau(table.hi(), table) * (b - x) / (b - table.hi());
    double const span = table.phi_right() - table.phi_left();
    double const phi = table.phi(x);
    double const value = 2.0 / span
                         * ((table.phi_right() - phi) * table.green_left(x)
                            + (phi - table.phi_left()) * table.green_right(x));
    return std::max(value, 0.0);
}

AbsorptionReport extinction_report(ScaledPoint y0, Params const& p,
                                   ScaleTable const& table)
{
    p.validate();
    AbsorptionReport r;
    r.q = p.q;
    r.n = p.n;
    // With no generalist left the projection is the lower end itself.
    r.x_start = y0.m > 0.0 ? project_mstar(y0, p.q) : 0.0;
    r.p_m = hit_prob_pM(r.x_start, table);
    r.expected_tau_gamma_units = expected_tau(r.x_start, table);
    r.expected_tau_chain_units = r.expected_tau_gamma_units
                                 * static_cast<double>(p.n) * p.n;
    return r;
}

void write_table_csv(ScaleTable const& table, std::ostream& os)
{
    os << "x,phi,pm,etau\n";
    auto const xs = table.grid();
    auto const phis = table.phi_on_grid();
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        os << format_number(xs[i]) << ',' << format_number(phis[i]) << ','
           << format_number(hit_prob_pM(xs[i], table)) << ','
           << format_number(expected_tau(xs[i], table)) << '\n';
    }
}

}  // namespace coexist
