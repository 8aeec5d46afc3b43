#pragma once

// Two-body zero-energy scattering: a(V), the scattering solution, and the
// truncated solution f_l = 1 - chi(r / l) omega with its error term eps_l.

#include "dilute/potentials.hpp"
#include "dilute/radial.hpp"

#include <vector>

namespace dilute {

/// Solution of u'' = (V / 2) u, u(0) = 0, normalised so that u(r) = r - a for
/// r >= r_match. Tables cover [0, r_match]; beyond it the closed form is used.
struct ScatteringSolution2B {
  std::vector<double> radii;
  std::vector<double> u;
  std::vector<double> du;
  double a = 0.0;
  /// Slope of the unnormalised solution (u'(0) = 1) at the matching radius.
  double c = 1.0;
  double r_match = 0.0;
  /// 4 pi int r V u dr, which equals 8 pi a.
  double quadrature_energy = 0.0;
  int steps = 0;

  double u_at(double r) const;
  double f(double r) const;
  double omega(double r) const { return 1.0 - f(r); }
  double f_derivative(double r) const;
  double omega_derivative(double r) const { return -f_derivative(r); }
};

/// Integrates with RK4 on a mesh aligned to the potential's breakpoints and
/// doubles the step count until a is stable to 1e-8 relative.
ScatteringSolution2B solve_scattering_length(const RadialPotential& p, int min_steps = 256);

/// a from a single RK4 pass with `steps` cells, without refinement.
double scattering_length_on_mesh(const RadialPotential& p, int steps);

/// int 2|grad g|^2 + V |1 - g|^2 over R^3 for the piecewise-linear radial
/// profile (radii, g). A nonzero value at the last node is continued
/// harmonically (g ~ 1/r) so the value stays a valid trial energy. Throws
/// NumericalError when the profile table is too coarse.
double variational_energy_2b(const std::vector<double>& radii, const std::vector<double>& g,
                             const RadialPotential& p);

/// Minimum of the functional over P1 profiles; approximates 8 pi a.
VariationalMinimum variational_minimum_2b(const RadialPotential& p, int elements = 1024);

struct TruncatedSolution2B {
  double ell = 0.0;
  double a = 0.0;
  double step = 0.0;
  std::vector<double> radii;
  std::vector<double> f;
  std::vector<double> df;
  std::vector<double> omega;  // chi(r / l) omega(r)
  std::vector<double> eps;
  double eps_integral = 0.0;
  /// Measured constants: max |eps| l^3 / a, max r |1 - f^2| / a and
  /// max r^2 |f'| / a.
  double c_eps = 0.0;
  double c_one_minus_f2 = 0.0;
  double c_grad = 0.0;
  /// Largest radius with eps != 0.
  double eps_support = 0.0;

  /// f_l and f_l' from the Hermite table; 1 and 0 for r >= l.
  double value(double r) const;
  std::pair<double, double> eval(double r) const;
  const HermiteTable& table() const { return table_; }

  HermiteTable table_;
};

/// Builds f_l on a uniform mesh over [0, l] that has the support edge as a node.
/// eps_l is the residual of -2 Delta f + V f for the finite-volume discrete
/// Laplacian; V at the support edge is the mean of both one-sided limits.
TruncatedSolution2B build_truncated_2b(const RadialPotential& p, double ell, int nodes = 4000);

}  // namespace dilute
