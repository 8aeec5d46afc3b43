#pragma once

// Three-body zero-energy scattering in the coordinates y = M^{-1} x, where
// the problem for an m-radial W is a radial problem in six dimensions.

#include "dilute/potentials.hpp"
#include "dilute/radial.hpp"

#include <random>
#include <vector>

namespace dilute {

/// f'' + (5/s) f' = (U / 2) f with f(0) finite and f -> 1 at infinity.
/// Beyond the profile support f = 1 - beta / s^4.
struct ScatteringSolution3B {
  std::vector<double> radii;
  std::vector<double> f;
  std::vector<double> df;
  double beta = 0.0;
  /// det(M) 8 pi^3 beta.
  double b = 0.0;
  /// det(M) pi^3 int s^5 U f ds.
  double b_quadrature = 0.0;
  double det_m = 0.0;
  double s_match = 0.0;
  int steps = 0;

  double value(double s) const;
  double derivative(double s) const;
  double omega(double s) const { return 1.0 - value(s); }
};

/// Requires an m-radial W. Doubles the step count until b is stable to 1e-8
/// and throws NumericalError if the tail and quadrature routes differ by
/// more than 1e-4 relative.
ScatteringSolution3B solve_scattering_energy(const ThreeBodyPotential& w, int min_steps = 256);

/// b from one RK4 pass with `steps` cells (tail route), without refinement.
double scattering_energy_on_mesh(const ThreeBodyPotential& w, int steps);

/// det(M) pi^3 int s^5 (2 h'^2 + U (1 - h)^2) ds for the piecewise-linear
/// hyperradial profile (radii, h), plus the energy of the harmonic (s^-4)
/// continuation of a nonzero end value. U is the hyperangular average of W,
/// which is W itself for the m-radial kind.
double variational_energy_6d(const std::vector<double>& radii, const std::vector<double>& h,
                             const ThreeBodyPotential& w);

/// Minimum of the functional above over P1 profiles; approximates b.
VariationalMinimum variational_minimum_6d(const ThreeBodyPotential& w, int elements = 1024);

struct TruncatedSolution3B {
  double ell = 0.0;
  double ell_tilde = 0.0;  // sqrt(3/2) l
  double b = 0.0;
  double beta = 0.0;
  double step = 0.0;
  std::vector<double> radii;  // hyperradius
  std::vector<double> f;
  std::vector<double> df;
  std::vector<double> omega;
  std::vector<double> eps;
  double eps_integral = 0.0;
  /// max omega(s) (|M| s)^4 / b: the constant in omega <= C b / |x|^4.
  double c_omega = 0.0;
  /// max |eps| l^6 / b.
  double c_eps = 0.0;
  /// Euclidean radius of the support of eps, and its ratio to 2 l |M|.
  double eps_support = 0.0;
  double support_ratio = 0.0;

  double value(double s) const;
  std::pair<double, double> eval(double s) const;
  double value(const Vec3& x, const Vec3& y) const { return value(hyperradius(x, y)); }

  HermiteTable table_;
};

/// f~_l = 1 - chi(s / l) omega~(s) with eps~_l the finite-volume residual of
/// -2 Delta_y f + U f, so that det(M) int eps~ = b.
TruncatedSolution3B build_truncated_3b(const ThreeBodyPotential& w, double ell, int nodes = 4000);

struct DisentanglingReport {
  long samples = 0;
  long covered = 0;     // pairs with |x1| >= l~ or |x2| >= l~
  long violations = 0;  // covered pairs with f~ != 1, or any f~ outside [0, 1]
};

/// Checks f~_l(x1, x2) >= max(g~(x1), g~(x2)) with g~ = 1{|x| >= l~}.
DisentanglingReport check_disentangling(const TruncatedSolution3B& tr, long samples, std::mt19937_64& rng);

}  // namespace dilute
