#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "coexist/analytics.hpp"
#include "coexist/error.hpp"
#include "coexist/reduced.hpp"
#include "coexist/stats.hpp"
#include "oracles.hpp"

using namespace coexist;

TEST_CASE("partials of C at (0.5, 0.5)")
{
    auto const c = c_partials(0.5, 0.5);
    CHECK(c.d == doctest::Approx(4.0));
    CHECK(c.m == doctest::Approx(4.0));
    CHECK(c.dd == doctest::Approx(8.0));
    CHECK(c.mm == doctest::Approx(-40.0));
    CHECK(c.dm == doctest::Approx(-16.0));

    auto const z = c_partials(0.0, 0.3);
    CHECK(z.d == 0.0);
    CHECK(z.dm == 0.0);
    CHECK_THROWS_AS(c_partials(0.1, 0.0), DomainError);
}

TEST_CASE("partials of C against finite differences")
{
    std::mt19937_64 rng(4);
    auto const f = [](double d, double m) { return trajectory_constant({d, m}); };
    for (int i = 0; i < 100; ++i)
    {
        auto const y = oracle::random_interior(rng, 0.5);
        auto const c = c_partials(y.d, y.m);
        auto const fd = oracle::finite_differences(f, y.d, y.m, 1e-4);
        CHECK(oracle::close_rel(c.d, fd.d, 1e-6));
        CHECK(oracle::close_rel(c.m, fd.m, 1e-6));
        CHECK(oracle::close_rel(c.dd, fd.dd, 1e-6));
        CHECK(oracle::close_rel(c.mm, fd.mm, 1e-6));
        CHECK(oracle::close_rel(c.dm, fd.dm, 1e-6));
    }
}

TEST_CASE("m* partials at (0, 0.5), q = 1/2")
{
    auto const p = mstar_partials(0.0, 0.5, 0.5);
    CHECK(std::abs(p.d) < 1e-15);
    CHECK(p.m == doctest::Approx(1.0));
    CHECK(p.dd == doctest::Approx(1.0));
    CHECK(std::abs(p.mm) < 1e-12);
    CHECK(std::abs(p.dm) < 1e-15);
    for (double m : {0.1, 0.4, 0.8})
        CHECK(mstar_partials(0.0, m, 0.5).m == doctest::Approx(1.0));
}

TEST_CASE("m* partials against finite differences of the projection")
{
    std::mt19937_64 rng(6);
    for (double q : {0.3, 0.5, 0.7})
    {
        auto const f = [q](double d, double m) { return project_mstar({d, m}, q); };
        for (int i = 0; i < 60; ++i)
        {
            auto const y = oracle::random_interior(rng, q);
            auto const p = mstar_partials(y.d, y.m, q);
            auto const fd = oracle::finite_differences(f, y.d, y.m, 1e-4);
            CHECK(oracle::close_rel(p.d, fd.d, 1e-6));
            CHECK(oracle::close_rel(p.m, fd.m, 1e-6));
            CHECK(oracle::close_rel(p.dd, fd.dd, 1e-6));
            CHECK(oracle::close_rel(p.mm, fd.mm, 1e-6));
            CHECK(oracle::close_rel(p.dm, fd.dm, 1e-6));
        }
    }
}

TEST_CASE("first-order drift term cancels")
{
    auto const r1 = drift_cancellation_residual(0.5, 0.25, 0.5);
    CHECK(std::abs(r1.residual) <= 1e-10 * std::max(1.0, r1.scale));
    auto const r2 = drift_cancellation_residual(0.3, 0.2, 0.7);
    CHECK(std::abs(r2.residual) <= 1e-10 * std::max(1.0, r2.scale));
    CHECK(drift_cancellation_residual(0.4, 0.3, 0.7).residual == 0.0);
}

TEST_CASE("Ito coefficients at (0, 0.5)")
{
    auto const c = ito_coefficients(0.0, 0.5, 0.5);
    CHECK(c.beta == doctest::Approx(0.5));
    CHECK(c.alpha == doctest::Approx(0.5));
}

TEST_CASE("Gamma coefficients at q = 1/2 reduce to beta = x, alpha = 2x(1-x)")
{
    for (int i = 1; i <= 99; ++i)
    {
        double const x = i / 100.0;
        auto const c = gamma_coefficients(x, 0.5);
        CHECK(std::abs(c.beta - x) <= 1e-9);
        CHECK(std::abs(c.alpha - 2.0 * x * (1.0 - x)) <= 1e-9);
    }
    auto const half = gamma_coefficients(0.5, 0.5);
    CHECK(half.beta == doctest::Approx(0.5));
    CHECK(half.alpha == doctest::Approx(0.5));
    for (double q : {0.3, 0.5, 0.8})
        CHECK(gamma_coefficients(1e-7, q).alpha < 1e-5);
    CHECK_THROWS_AS(gamma_coefficients(0.0, 0.5), DomainError);
}

TEST_CASE("coefficients at q and 1 - q coincide")
{
    for (double x : {0.1, 0.3, 0.5})
    {
        auto const a = gamma_coefficients(x, 0.3);
        auto const b = gamma_coefficients(x, 0.7);
        CHECK(a.beta == doctest::Approx(b.beta).epsilon(1e-10));
        CHECK(a.alpha == doctest::Approx(b.alpha).epsilon(1e-10));
    }
}

TEST_CASE("printed symmetric coefficients")
{
    for (double m : {0.1, 0.5, 0.9})
    {
        auto const c = symmetric_explicit_coeffs(0.0, m);
        CHECK(c.alpha == doctest::Approx(2.0 * m * (1.0 - m)));
    }
    auto const c = symmetric_explicit_coeffs(0.0, 0.5);
    CHECK(c.alpha == doctest::Approx(ito_coefficients(0.0, 0.5, 0.5).alpha));
    // The printed drift disagrees with the chain rule.
    CHECK(c.beta == doctest::Approx(4.0));
    CHECK(ito_coefficients(0.0, 0.5, 0.5).beta == doctest::Approx(0.5));
    CHECK_THROWS_AS(symmetric_explicit_coeffs(0.0, 1.0), DomainError);
}

TEST_CASE("m* diffusion started at a boundary")
{
    Rng rng(1);
    auto const lo = simulate_mstar(0.0, 0.5, rng);
    CHECK(lo.absorbed_at == Boundary::lower);
    CHECK(lo.tau == 0.0);
    auto const hi = simulate_mstar(1.0, 0.5, rng);
    CHECK(hi.absorbed_at == Boundary::upper);
    CHECK(hi.tau == 0.0);
    CHECK_THROWS_AS(simulate_mstar(0.7, 0.3, rng), DomainError);
}

TEST_CASE("m* diffusion matches the quadrature oracles")
{
    auto const table = ScaleTable::build(0.5, 1000);
    {
        int const paths = 10000;
        int lower = 0;
        for (int i = 0; i < paths; ++i)
        {
            Rng rng(replicate_seed(31, i));
            lower += simulate_mstar(0.5, 0.5, rng).absorbed_at == Boundary::lower;
        }
        double const p = static_cast<double>(lower) / paths;
        CHECK(std::abs(p - 0.25) <= 3.0 * binomial_se(0.25, paths));
    }
    {
        std::vector<double> taus;
        for (int i = 0; i < 4000; ++i)
        {
            Rng rng(replicate_seed(32, i));
            taus.push_back(simulate_mstar(1.0 / 3.0, 0.5, rng).tau);
        }
        auto const s = summarize(taus);
        CHECK(std::abs(s.mean - expected_tau(1.0 / 3.0, table)) <= 3.0 * s.se);
    }
}

TEST_CASE("d* diffusion on the line m = 0")
{
    Rng rng(3);
    auto const path = dstar_path(0.0, 0.5, 100, rng, 1e-3, 100000);
    REQUIRE(path.size() == 100001);
    // Mean reversion to the centre: no drift at d0 = 0, stationary SD 1/sqrt(N).
    std::vector<double> tail(path.begin() + 5000, path.end());
    auto const s = summarize(tail);
    CHECK(s.sd == doctest::Approx(0.1).epsilon(0.2));

    CHECK(simulate_dstar(1.0, 0.5, 10, rng).fixed == Species::c);
    CHECK(simulate_dstar(-1.0, 0.5, 10, rng).fixed == Species::h);
}

TEST_CASE("d* fixation is symmetric at q = 1/2")
{
    int const paths = 2000;
    int c = 0;
    for (int i = 0; i < paths; ++i)
    {
        Rng rng(replicate_seed(77, i));
        c += simulate_dstar(0.0, 0.5, 10, rng).fixed == Species::c;
    }
    double const p = static_cast<double>(c) / paths;
    CHECK(std::abs(p - 0.5) <= 3.0 * binomial_se(0.5, paths));
}

TEST_CASE("coefficient table CSV")
{
    std::ostringstream os;
    write_coefficient_table(0.5, 4, os);
    CHECK(os.str() == "x,beta,alpha\n0.25,0.25000000000000033,0.375\n0.5,0.5,0.5\n"
                      "0.75,0.7499999999999984,0.3749999999999995\n");
}
