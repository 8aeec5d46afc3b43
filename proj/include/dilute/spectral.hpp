#pragma once

// Few-particle Hamiltonians on Neumann finite-difference grids, Temple's
// lower bound, the short-scale lower bound formula and superadditivity.

#include "dilute/lanczos.hpp"
#include "dilute/potentials.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace dilute {

/// Largest number of grid unknowns a Hamiltonian may have.
constexpr long kMaxUnknowns = 10'000'000;

/// H = sum -Delta_i + sum_{i<j} V(x_i - x_j) + sum_{i<j<k} W(x_i - x_j, x_i - x_k)
/// for n <= 3 particles in the box [-l/2, l/2]^3. Cell-centred nodes, mirror
/// ghosts at the walls (second-order Neumann), potentials sampled at node
/// tuples and cached together with the kinetic diagonal.
class SparseHamiltonian {
 public:
  int particles() const { return n_; }
  int grid() const { return g_; }
  double box() const { return ell_; }
  double spacing() const { return ell_ / g_; }
  long dimension() const { return dim_; }
  const std::vector<double>& potential() const { return pot_; }
  const std::vector<double>& diagonal() const { return diag_; }

  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  /// Kinetic part alone.
  void apply_kinetic(const Eigen::VectorXd& in, Eigen::VectorXd& out) const;
  LinearOperator op() const;

  /// Coordinates of particle p at flat index idx.
  Vec3 position(long idx, int p) const;
  /// Flat index with the particle labels permuted: particle p takes the
  /// node of particle perm[p].
  long permuted(long idx, const std::vector<int>& perm) const;

  /// Lowest eigenvalue of the discrete one-particle Neumann Laplacian above 0,
  /// (4 / h^2) sin^2(pi / 2G).
  double kinetic_gap() const;

 private:
  friend SparseHamiltonian build_hamiltonian(int, double, int, const RadialPotential&, const ThreeBodyPotential&);
  int n_ = 1;
  int g_ = 2;
  double ell_ = 1.0;
  long dim_ = 0;
  std::vector<double> pot_;
  std::vector<double> diag_;  // kinetic diagonal plus potential
};

/// Throws ValidationError when n is not 1, 2 or 3 or G^{3n} exceeds kMaxUnknowns.
SparseHamiltonian build_hamiltonian(int n, double ell, int grid, const RadialPotential& v, const ThreeBodyPotential& w);

/// The rescaled Hamiltonian on the unit box with l^2 V(l .) and l^2 W(l .);
/// its spectrum is l^2 times that of build_hamiltonian(n, l, grid, v, w).
SparseHamiltonian build_rescaled_hamiltonian(int n, double ell, int grid, const RadialPotential& v,
                                             const ThreeBodyPotential& w);

/// Lanczos from the constant vector plus a small seeded perturbation.
/// The residual satisfies |H psi - lambda psi| <= tol |psi|.
EigenPair ground_state(const SparseHamiltonian& h, double tol = 1e-8, std::uint64_t seed = 0);

double rayleigh(const SparseHamiltonian& h, const Eigen::VectorXd& psi);

/// Largest |psi(sigma idx) - psi(idx)| / max |psi| over label permutations.
double symmetry_defect(const SparseHamiltonian& h, const Eigen::VectorXd& psi);

/// <A> - (<A^2> - <A>^2) / (gamma - <A>). Throws ValidationError when <A> >= gamma.
double temple_bound(const SparseHamiltonian& h, const Eigen::VectorXd& psi, double gamma);

enum class AlphaWindow { statement, proof };

struct TempleConfig {
  double epsilon = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  /// epsilon = (Y^{alpha - 6 beta} + Y^{7 alpha - 2 - 12 beta})^{1/2} and
  /// gamma = epsilon pi^2 / 2. The statement window is 1/3 < alpha < 12/35,
  /// the proof window 1/3 < alpha < 2/5; both need alpha - 1/3 < beta < (7 alpha - 2) / 12.
  static TempleConfig make(double y, double alpha, double beta, AlphaWindow window = AlphaWindow::statement);
};

/// Throws ValidationError outside the window.
void validate_window(double alpha, double beta, AlphaWindow window);

struct LowerBoundReport {
  int n = 0;
  double ell = 0.0;
  double gas_parameter = 0.0;
  double two_body = 0.0;    // 4 pi a n (n - 1) / l
  double three_body = 0.0;  // b n (n - 1) (n - 2) / (6 l^4)
  /// rho^2 a_eff l^5, the scale of the error terms.
  double error_scale = 0.0;
  /// Error scale times Y^{1 - 3(alpha - beta)}, Y^beta, Y^{alpha - beta}, Y^{1 + 3 beta - 2 alpha}.
  std::vector<double> collision_terms;
  /// Error scale times epsilon, Y^{alpha - 6 beta} / epsilon, Y^{7 alpha - 2 - 12 beta} / epsilon.
  std::vector<double> temple_terms;
  double error = 0.0;
  /// Smallest exponent among the terms above as Y -> 0.
  double nu_budget = 0.0;

  double leading() const { return two_body + three_body; }
  double bound() const { return leading() - error; }
  /// error / leading, or +inf when the leading term vanishes.
  double error_ratio() const;
};

/// Requires n <= 10 rho l^3 and a valid window.
LowerBoundReport prop_lower_bound(int n, double ell, double a, double b, double rho, const TempleConfig& cfg,
                                  AlphaWindow window = AlphaWindow::statement);

struct SuperadditivityReport {
  double combined = 0.0;  // E(l, k + k')
  double first = 0.0;     // E(l, k)
  double second = 0.0;    // E(l, k')
  double slack() const { return combined - first - second; }
  bool holds = false;
};

/// E(l, k + k') >= E(l, k) + E(l, k') - tolerance with E(l, 0) = 0.
SuperadditivityReport superadditivity_check(double ell, int k, int kp, const RadialPotential& v,
                                            const ThreeBodyPotential& w, int grid, double tolerance = 1e-8);

}  // namespace dilute
