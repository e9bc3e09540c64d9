#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coexist/analytics.hpp"
#include "coexist/error.hpp"
#include "oracles.hpp"

using namespace coexist;

namespace
{

ScaleTable brownian()
{
    return ScaleTable::build([](double) { return GammaCoeffs{0.0, 1.0}; }, 0.0, 1.0, 1000);
}

}  // namespace

TEST_CASE("closed-form oracle values")
{
    // Frozen from the closed form; cross-checked with mpmath quadrature.
    CHECK(oracle::expected_tau_symmetric(1.0 / 3.0)
          == doctest::Approx(0.506384548654067).epsilon(1e-13));
    CHECK(oracle::expected_tau_symmetric(0.5) == doctest::Approx(0.47157).epsilon(1e-5));
}

TEST_CASE("driftless scale function is affine")
{
    auto const t = brownian();
    auto const xs = t.grid();
    auto const phis = t.phi_on_grid();
    double const slope = (phis.back() - phis.front()) / (xs.back() - xs.front());
    for (std::size_t i = 0; i < xs.size(); ++i)
        CHECK(std::abs(phis[i] - phis.front() - slope * (xs[i] - xs.front())) < 1e-9);
}

TEST_CASE("scale function at q = 1/2 is y - y^2/2 up to an affine map")
{
    auto const t = ScaleTable::build(0.5, 1000);
    auto const xs = t.grid();
    auto const phis = t.phi_on_grid();
    auto ref = [](double y) { return y - y * y / 2.0; };
    double const scale = (phis.back() - phis.front()) / (ref(xs.back()) - ref(xs.front()));
    double worst = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        double const affine = phis.front() + scale * (ref(xs[i]) - ref(xs.front()));
        worst = std::max(worst, std::abs(phis[i] - affine) / scale);
    }
    CHECK(worst <= 1e-6);
    for (std::size_t i = 1; i < phis.size(); ++i)
        CHECK(phis[i] >= phis[i - 1]);
}

TEST_CASE("p_M")
{
    auto const t = ScaleTable::build(0.5, 1000);
    CHECK(hit_prob_pM(0.0, t) == 1.0);
    CHECK(hit_prob_pM(1.0, t) == 0.0);
    CHECK(std::abs(hit_prob_pM(0.5, t) - 0.25) <= 1e-4);
    double prev = 1.0;
    for (int i = 1; i < 200; ++i)
    {
        double const x = i / 200.0;
        double const p = hit_prob_pM(x, t);
        CHECK(std::abs(p - (1.0 - x) * (1.0 - x)) <= 1e-4);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("hitting probabilities ignore the normalization of phi")
{
    auto const t = ScaleTable::build(0.3, 1000);
    auto const r = t.rescaled(7.5, -3.0);
    for (double x : {0.05, 0.2, 0.45})
    {
        CHECK(hit_prob_pM(x, r) == doctest::Approx(hit_prob_pM(x, t)).epsilon(1e-12));
        CHECK(expected_tau(x, r) == doctest::Approx(expected_tau(x, t)).epsilon(1e-10));
    }
    CHECK_THROWS_AS(t.rescaled(-1.0, 0.0), ConfigError);
}

TEST_CASE("q and 1 - q give the same curves")
{
    auto const a = ScaleTable::build(0.25, 1000);
    auto const b = ScaleTable::build(0.75, 1000);
    for (double x : {0.1, 0.4, 0.7})
    {
        CHECK(hit_prob_pM(x, a) == doctest::Approx(hit_prob_pM(x, b)).epsilon(1e-9));
        CHECK(expected_tau(x, a) == doctest::Approx(expected_tau(x, b)).epsilon(1e-9));
    }
}

TEST_CASE("driftless Green's function")
{
    auto const t = brownian();
    CHECK(greens(0.5, 0.25, t) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(greens(0.25, 0.5, t) == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(greens(0.5, 0.0, t) == 0.0);
    CHECK(greens(0.5, 1.0, t) == 0.0);
    CHECK(greens(0.5, 1e-9, t) < 1e-6);
    for (int i = 1; i < 100; ++i)
    {
        double const x = i / 100.0;
        CHECK(std::abs(expected_tau(x, t) - x * (1.0 - x)) <= 1e-6);
    }
}

TEST_CASE("E[tau] from the Green's function integrates G")
{
    auto const t = ScaleTable::build(0.5, 1000);
    double const x = 0.4;
    // Midpoint sum of G(x, .) away from the endpoint singularities of 1/alpha.
    int const cells = 200000;
    double sum = 0.0;
    for (int i = 0; i < cells; ++i)
        sum += greens(x, (i + 0.5) / cells, t) / cells;
    CHECK(sum == doctest::Approx(expected_tau(x, t)).epsilon(1e-3));
}

TEST_CASE("E[tau] at q = 1/2")
{
    auto const t = ScaleTable::build(0.5, 1000);
    CHECK(std::abs(expected_tau(1.0 / 3.0, t) - 0.5064) <= 1e-3);
    CHECK(expected_tau(0.0, t) == 0.0);
    CHECK(expected_tau(1.0, t) == 0.0);
    CHECK(expected_tau(1e-9, t) < 1e-6);
    CHECK(expected_tau(1.0 - 1e-9, t) < 1e-6);
    double best_x = 0.0;
    double best = 0.0;
    for (int i = 1; i < 1000; ++i)
    {
        double const x = i / 1000.0;
        double const e = expected_tau(x, t);
        CHECK(std::abs(e - oracle::expected_tau_symmetric(x)) <= 1e-5);
        if (e > best)
        {
            best = e;
            best_x = x;
        }
    }
    CHECK(best_x >= 0.30);
    CHECK(best_x <= 0.42);
    CHECK(best_x == doctest::Approx(0.362).epsilon(0.01));
}

TEST_CASE("extinction report")
{
    auto const t = ScaleTable::build(0.5, 1000);
    auto const r = extinction_report({0.0, 1.0 / 3.0}, Params{1000, 0.5}, t);
    CHECK(r.expected_tau_chain_units == doctest::Approx(0.5064e6).epsilon(2e-3));
    CHECK(r.expected_tau_chain_units == doctest::Approx(r.expected_tau_gamma_units * 1e6));
    auto const half = extinction_report({0.0, 0.5}, Params{1000, 0.5}, t);
    CHECK(std::abs(half.p_m - 0.25) <= 1e-4);
    auto const off = extinction_report({0.5, 0.25}, Params{1000, 0.5}, t);
    CHECK(off.x_start == doctest::Approx(0.309017).epsilon(1e-6));
    auto const none = extinction_report({0.3, 0.0}, Params{1000, 0.5}, t);
    CHECK(none.p_m == 1.0);
    CHECK(none.expected_tau_gamma_units == 0.0);
}

TEST_CASE("table build rejects bad input")
{
    CHECK_THROWS_AS(ScaleTable::build(0.5, 10), ConfigError);
    CHECK_THROWS_AS(ScaleTable::build(0.0, 1000), ConfigError);
    CHECK_THROWS_AS(
        ScaleTable::build([](double) { return GammaCoeffs{0.0, 0.0}; }, 0.0, 1.0, 200),
        QuadratureError);
}

TEST_CASE("table CSV")
{
    auto const t = ScaleTable::build(0.5, 100);
    std::ostringstream os;
    write_table_csv(t, os);
    auto const text = os.str();
    CHECK(text.rfind("x,phi,pm,etau\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 102);
}
