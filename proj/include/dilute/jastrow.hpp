#pragma once

// Jastrow trial state with two- and three-body factors and its variational
// Monte Carlo energy, split into the seven terms I1, I2, J1, J2, K1, K2, K3.

#include "dilute/potentials.hpp"
#include "dilute/scatter2.hpp"
#include "dilute/scatter3.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dilute {

using Positions = std::vector<Vec3>;

/// Psi = prod_{i<j} f_l1(x_i - x_j) prod_{i<j<k} f~_l2(x_i - x_j, x_i - x_k) for
/// N particles in [0, L]^3. A vanishing V or W drops the corresponding factor.
struct TrialParams {
  int n = 0;
  double box = 1.0;
  double ell1 = 0.0;
  double ell2 = 0.0;  // hyperradial cut-off of f~
  RadialPotential v = RadialPotential::zero();
  ThreeBodyPotential w = ThreeBodyPotential::zero();
  double a = 0.0;
  double b = 0.0;
  std::shared_ptr<const TruncatedSolution2B> pair;     // null without V
  std::shared_ptr<const TruncatedSolution3B> triple;   // null without W

  /// Defaults: l1 = rho^{-1/3}, l2 = b^{1/4} (rho b^{3/4})^{-1/7}. Requires
  /// a < l1 < L and b^{1/4} < l2 < L for the active factors.
  static TrialParams make(int n, double box, const RadialPotential& v, const ThreeBodyPotential& w,
                          std::optional<double> ell1 = {}, std::optional<double> ell2 = {}, int table_nodes = 4000);

  double density() const { return n / (box * box * box); }
  /// Largest distance at which particles interact through Psi or H.
  double range() const;
  double pair_factor(double r) const;
  double triple_factor(const Vec3& xi, const Vec3& xj, const Vec3& xk) const;
};

/// log Psi; -inf when a factor vanishes.
double log_trial(const Positions& x, const TrialParams& tp);

/// grad_i log Psi for every particle.
std::vector<Vec3> log_trial_gradient(const Positions& x, const TrialParams& tp);

enum Term { I1, I2, J1, J2, K1, K2, K3 };
inline constexpr std::array<const char*, 7> kTermNames = {"I1", "I2", "J1", "J2", "K1", "K2", "K3"};

/// Per-configuration integrands of the seven terms, symmetrised over labels,
/// whose |Psi|^2 averages are the seven terms.
struct LocalTerms {
  std::array<double, 7> terms{};
  double total() const;
};

LocalTerms local_terms(const Positions& x, const TrialParams& tp);

struct McConfig {
  int chains = 4;
  long steps = 20000;    // sweeps per chain
  long burn_in = 4000;   // sweeps discarded per chain
  double step_size = 0.1;
  std::uint64_t seed = 1;
  int batches = 20;      // batch means per chain
  long dump_every = 0;   // thinning of recorded configurations, 0 for none

  /// burn_in = steps / 5.
  static McConfig with_steps(long steps, double step_size, std::uint64_t seed, int chains = 4);
  void validate(double box) const;
};

struct EnergyBreakdown {
  std::array<double, 7> value{};
  std::array<double, 7> error{};
  double total = 0.0;
  double total_error = 0.0;
  double acceptance = 0.0;
  double effective_samples = 0.0;
  long samples = 0;
  /// Non-empty when the acceptance rate is outside [0.2, 0.7].
  std::string warning;
};

struct Snapshot {
  int chain = 0;
  long sweep = 0;
  Positions x;
};

/// Metropolis sampling of |Psi|^2 with single-particle moves, one local-term
/// measurement per sweep. Chain c uses seed_seq{seed, c}; chains run on up to
/// `workers` threads and are merged in chain order. Throws NumericalError on a
/// non-finite local term.
EnergyBreakdown mc_estimate(const TrialParams& tp, const McConfig& mc, int workers = 1,
                            std::vector<Snapshot>* dump = nullptr);

struct UpperBoundReport {
  double leading = 0.0;  // N (4 pi a rho + b rho^2 / 6)
  /// rho a l1^2, a / l1, rho l2^3, b / l2^4 with unit constants.
  std::array<double, 4> corrections{};
  double bound() const;
};

/// Throws ValidationError when a correction is >= 1. Corrections of an absent
/// interaction (a = 0 or b = 0) are zero.
UpperBoundReport upper_bound_formula(double rho, double a, double b, double ell1, double ell2, int n);

/// Sum of the four corrections, used to scan for good cut-offs.
double combined_correction(double rho, double a, double b, double ell1, double ell2);

}  // namespace dilute
