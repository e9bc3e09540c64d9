#pragma once

// Hitting probabilities and expected absorption times of a one-dimensional
// diffusion dx = beta dt + sqrt(alpha) dW on [a, b], computed from its
// natural scale function
//
//   phi(x) = int^x exp( int^y -2 beta(z) / alpha(z) dz ) dy
//
// and the Green's function in speed-measure form
//
//   G(x, y) = 2 (phi(b) - phi(max)) (phi(min) - phi(a))
//             / ((phi(b) - phi(a)) phi'(y) alpha(y)).
//
// Integrands are sampled on [a + eps, b - eps] at cosine-spaced nodes and
// integrated by Simpson's rule in the uniform parameter; phi is continued
// linearly to the absorbing ends.

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "coexist/model.hpp"
#include "coexist/reduced.hpp"

namespace coexist
{

using CoefficientFn = std::function<GammaCoeffs(double)>;

class ScaleTable
{
  public:
    /// Table for the reduced diffusion on Gamma, a = 0, b = 1 - |2q - 1|.
    static ScaleTable build(double q, int n_grid = 1000, double eps = 1e-6);

    /// Table for arbitrary coefficients on [a, b].
    static ScaleTable build(CoefficientFn coeffs, double a, double b,
                            int n_grid = 1000, double eps = 1e-6);

    /// Same diffusion with phi replaced by scale * phi + shift.
    ScaleTable rescaled(double scale, double shift) const;

    double left_end() const { return a_; }
    double right_end() const { return b_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int n_grid() const { return n_grid_; }

    std::vector<double> grid() const;
    std::vector<double> phi_on_grid() const;
    std::vector<double> dphi_on_grid() const;

    double phi(double x) const;
    double dphi(double x) const;
    double phi_left() const { return phi_a_; }
    double phi_right() const { return phi_b_; }
    double alpha(double y) const;

    /// int_lo^x (phi(y) - phi(a)) / (phi'(y) alpha(y)) dy
    double green_left(double x) const;
    /// int_x^hi (phi(b) - phi(y)) / (phi'(y) alpha(y)) dy
    double green_right(double x) const;

  private:
    ScaleTable() = default;
    void finalize();
    std::size_t cell(double x) const;
    std::vector<double> times_jac(std::span<double const> f) const;
    double hermite(std::span<double const> v, std::span<double const> dv,
                   double x) const;
    double hermite_cell(std::size_t j, double v0, double v1, double dv0,
                        double dv1, double x) const;

    CoefficientFn coeffs_;
    double a_ = 0.0;
    double b_ = 1.0;
    double lo_ = 0.0;
    double hi_ = 1.0;
    int n_grid_ = 0;
    double step_ = 0.0;  // fine spacing in the cosine parameter

    // Sampled on the fine grid of 2 n_grid + 1 points.
    std::vector<double> x_;
    std::vector<double> jac_;  // dx/ds
    std::vector<double> alpha_;
    std::vector<double> log_slope_;  // -2 beta / alpha
    std::vector<double> phi_;
    std::vector<double> dphi_;
    std::vector<double> left_density_;
    std::vector<double> right_density_;
    std::vector<double> left_;
    std::vector<double> right_;
    double phi_a_ = 0.0;
    double phi_b_ = 0.0;
};

struct AbsorptionReport
{
    double x_start = 0.0;
    double p_m = 0.0;
    double expected_tau_gamma_units = 0.0;
    double expected_tau_chain_units = 0.0;
    double q = 0.5;
    int n = 0;
};

/// Probability of hitting the lower end first, (phi(b) - phi(x)) / (phi(b) - phi(a)).
double hit_prob_pM(double x, ScaleTable const& table);

double greens(double x, double y, ScaleTable const& table);

/// E_x[tau] = int G(x, y) dy.
double expected_tau(double x, ScaleTable const& table);

/// Projects y0 onto Gamma and reports p_M and E[tau] in both time units.
AbsorptionReport extinction_report(ScaledPoint y0, Params const& p,
                                   ScaleTable const& table);

/// CSV rows `x,phi,pm,etau` over the grid.
void write_table_csv(ScaleTable const& table, std::ostream& os);

}  // namespace coexist
