#pragma once

// Dyson-type operator inequalities: the softened potentials, numerical
// checks of the two- and three-body Dyson inequalities, and the collision indicators that
// combine them in the many-body bound.

#include "dilute/potentials.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace dilute {

/// U(r) = c (r - R1)^2 (R2 - r)^2 on [R1, R2], normalised so that
/// int U d^3x = 1 under the five-point Gauss rule used by the solvers.
class Softener2B {
 public:
  static Softener2B make(double r1 = 0.25, double r2 = 0.5);

  double operator()(double r) const;
  /// U_R(r) = R^-3 U(r / R).
  double scaled(double r, double scale) const;
  double r1() const { return r1_; }
  double r2() const { return r2_; }
  double coefficient() const { return coeff_; }
  /// int U d^3x recomputed after normalisation.
  double normalization() const { return norm_; }

 private:
  double r1_ = 0.25, r2_ = 0.5, coeff_ = 0.0, norm_ = 0.0;
};

/// Hyperradial bump u(s) = c (s - s1)^2 (s2 - s)^2 with s1 = sqrt(2) R1 and
/// s2 = sqrt(2/3) R2, so that R1 <= |x| <= R2 on its support in R^6.
/// Normalised to det(M) pi^3 int s^5 u ds = 1.
class Softener3B {
 public:
  static Softener3B make(double r1 = 0.25, double r2 = 0.5);

  double operator()(double s) const;
  double operator()(const Vec3& x, const Vec3& y) const { return (*this)(hyperradius(x, y)); }
  /// U~_R(s) = R^-6 u(s / R).
  double scaled(double s, double scale) const;
  double r1() const { return r1_; }
  double r2() const { return r2_; }
  double s1() const { return s1_; }
  double s2() const { return s2_; }
  double coefficient() const { return coeff_; }
  double normalization() const { return norm_; }

 private:
  double r1_ = 0.25, r2_ = 0.5, s1_ = 0.0, s2_ = 0.0, coeff_ = 0.0, norm_ = 0.0;
};

enum class DysonMode { sector, grid };

struct DysonGrid {
  DysonMode mode = DysonMode::sector;
  /// Elements on [0, R R2] in sector mode; cells per axis in grid mode.
  int points = 2000;
  /// Factor on the right-hand side coefficient; 1 is the lemma, 2 the sharpness test.
  double multiplier = 1.0;
  /// The constant in (1 - c R0 / R1) for the three-body lemma.
  double c = 0.0;
};

struct DysonResult {
  double lambda_min = 0.0;
  /// -1e-5 (pi / h)^2.
  double tolerance = 0.0;
  double h = 0.0;
  /// The coefficient in front of the softener (multiplier included).
  double rhs = 0.0;
  long unknowns = 0;
  bool pass() const { return lambda_min >= tolerance; }
};

/// Smallest eigenvalue of -2 div 1{|x| <= R R2} grad + V - m 4 pi a U_R.
/// Sector mode is a P1 Galerkin restriction to radial functions; grid mode a
/// cell-centred finite-difference operator on the ball, solved by Lanczos.
DysonResult dyson2_gap(const RadialPotential& p, const Softener2B& s, double scale, const DysonGrid& grid = {});

/// Same for -2 div_y 1{s <= sqrt(2/3) R R2} grad_y + W - m b (1 - c R0 / (R R1)) U~_R
/// in the coordinates y = M^{-1} x. The hyperradial sector needs an m-radial W;
/// grid mode (at most 10 cells per axis) accepts any W.
DysonResult dyson3_gap(const ThreeBodyPotential& w, const Softener3B& s, double scale, const DysonGrid& grid = {});

/// Largest multiplier keeping lambda_min >= 0, by bisection to `tol`; +inf
/// when lambda_min is still nonnegative at `limit`.
double dyson2_critical_multiplier(const RadialPotential& p, const Softener2B& s, double scale, DysonGrid grid = {},
                                  double limit = 64.0, double tol = 1e-4);
double dyson3_critical_multiplier(const ThreeBodyPotential& w, const Softener3B& s, double scale, DysonGrid grid = {},
                                  double limit = 64.0, double tol = 1e-4);

struct ConvergenceRow {
  int points = 0;
  DysonResult result;
};

/// dyson2_gap on 1, 2, 4, ... times `points`.
std::vector<ConvergenceRow> dyson2_convergence(const RadialPotential& p, const Softener2B& s, double scale,
                                               DysonGrid grid, int levels);

class Configuration {
 public:
  Configuration(std::vector<Vec3> positions, double cut, double margin);

  const std::vector<Vec3>& positions() const { return x_; }
  int size() const { return static_cast<int>(x_.size()); }
  double cut() const { return cut_; }
  double margin() const { return margin_; }
  /// Whether particle i lies in the shrunk box (1 - eta) [-1/2, 1/2]^3.
  bool in_shrunk_box(int i) const;

 private:
  std::vector<Vec3> x_;
  double cut_ = 0.1;
  double margin_ = 0.1;
};

/// Draws n positions in the unit box. Every particle after the first is, with
/// probability 1/2, placed within 1.5 R of an earlier one so that clusters
/// of all sizes occur.
Configuration random_configuration(int n, double cut, double margin, std::mt19937_64& rng);

struct CollisionField {
  int n = 0;
  std::vector<std::uint8_t> pair;    // F_ij at i n + j
  std::vector<std::uint8_t> triple;  // F~_ijk at (i n + j) n + k

  int f(int i, int j) const { return pair[static_cast<std::size_t>(i * n + j)]; }
  int f3(int i, int j, int k) const { return triple[static_cast<std::size_t>((i * n + j) * n + k)]; }
};

/// F_ij = chi_R(x_i - x_j) prod_{m != i,j} theta_2R((x_i + x_j)/2 - x_m) and
/// F~_ijk = chi_R(x_i - x_j) chi_R(x_i - x_k) prod_{m != i,j,k} theta_2R((x_i + x_j + x_k)/3 - x_m),
/// with chi_R = 1{|x| <= R} and theta_2R = 1{|x| > 2R}.
CollisionField collision_indicators(const Configuration& c);

struct ExclusionReport {
  /// S_i = sum_j F_ij + (1/2) sum_{j,k} F~_ijk.
  std::vector<double> sums;
  int pair_partners_max = 0;
  int triple_partners_max = 0;  // unordered pairs {j, k}
};

/// Per-particle sums. Throws NumericalError if some S_i > 1, if a particle has
/// both pair and triple partners, or more than one of either.
ExclusionReport check_exclusion(const Configuration& c);

}  // namespace dilute
