#pragma once

// Shared radial machinery: the smooth cut-off, Hermite tables, Gauss rules
// and a P1 finite-element minimiser for radial energy functionals in
// dimension 3 or 6.

#include <functional>
#include <utility>
#include <vector>

namespace dilute {

/// C-infinity step: 0 on u <= 0, 1 on u >= 1, with S(u) + S(1 - u) = 1.
double rising_step(double u);

/// C-infinity cut-off chi(t) for R^d: 1 on t <= 1/2, 0 on t >= 1. Between,
/// chi = sigma(x) in the harmonic coordinate x = (1 - t^{d-2}) / (1 - 2^{2-d}),
/// so chi(r / l) r^{2-d} is harmonic wherever sigma is linear. sigma' is flat
/// on [ramp, 1 - ramp] and rises and falls with rising_step at the ends.
class HarmonicCutoff {
 public:
  explicit HarmonicCutoff(int dimension, double ramp = 0.1);

  double operator()(double t) const;
  double derivative(double t) const;

  int dimension() const { return dim_; }
  double ramp() const { return ramp_; }

 private:
  double coordinate(double t) const;
  double primitive(double v) const;  // int_0^v rising_step

  int dim_;
  double ramp_;
  double span_;
};

/// Cubic Hermite interpolant on a uniform grid x_k = x0 + k h with prescribed
/// node values and derivatives. Outside the grid the end values are held and
/// the derivative is zero.
class HermiteTable {
 public:
  HermiteTable() = default;
  HermiteTable(double x0, double h, std::vector<double> values, std::vector<double> derivatives);

  double value(double x) const;
  /// (value, derivative).
  std::pair<double, double> eval(double x) const;

  double start() const { return x0_; }
  double step() const { return h_; }
  double end() const { return x0_ + h_ * static_cast<double>(values_.size() - 1); }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivatives() const { return derivs_; }

 private:
  double x0_ = 0.0;
  double h_ = 1.0;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

/// Gauss-Legendre nodes and weights on [-1, 1], five points.
const std::vector<std::pair<double, double>>& gauss5();

/// Integrates fn over [lo, hi], splitting at the given breakpoints and using
/// five-point Gauss on every piece.
double integrate_split(const std::function<double(double)>& fn, double lo, double hi,
                       const std::vector<double>& breakpoints);

/// Radial energy functional
///
///   E[g] = S * int_0^R (2 g'^2 + U (1 - g)^2) r^{d-1} dr + S * 2 (d - 2) g(R)^2 R^{d-2}
///
/// where the last term is the exact energy of the harmonic continuation of
/// g beyond the outer radius R. S is the surface measure of the unit sphere
/// (times any Jacobian).
struct RadialProblem {
  std::function<double(double)> potential;
  std::vector<double> breakpoints;
  double outer = 1.0;
  int dimension = 3;
  double measure = 1.0;
};

/// E[g] for the continuous piecewise-linear g with node values g at `nodes`.
double radial_functional(const RadialProblem& problem, const std::vector<double>& nodes,
                         const std::vector<double>& g);

/// Minimum of E over P1 profiles on a uniform mesh with `elements` cells.
/// Optionally returns the minimising nodal values.
double radial_minimum(const RadialProblem& problem, int elements, std::vector<double>* minimiser = nullptr);

struct VariationalMinimum {
  double energy = 0.0;  // Richardson extrapolation of coarse and fine
  double coarse = 0.0;
  double fine = 0.0;
  int elements = 0;     // fine mesh
};

/// Richardson-extrapolated P1 minimum from meshes with n/2 and n cells.
VariationalMinimum radial_minimum_extrapolated(const RadialProblem& problem, int elements);

/// Solves the symmetric tridiagonal system (diag, off) x = rhs.
std::vector<double> solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                      std::vector<double> rhs);

}  // namespace dilute
