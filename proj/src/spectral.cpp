#include "dilute/spectral.hpp"

#include "dilute/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

namespace dilute {

namespace {

constexpr double kPi = std::numbers::pi;

long ipow(long base, int exp) {
  long r = 1;
  for (int k = 0; k < exp; ++k) {
    if (r > std::numeric_limits<long>::max() / base) return std::numeric_limits<long>::max();
    r *= base;
  }
  return r;
}

// Adds -(1/h^2) times the neighbour sum along every axis.
void add_hops(int axes, int g, double inv_h2, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
  const long dim = in.size();
  long stride = 1;
  for (int a = 0; a < axes; ++a) {
    const long block = stride * g;
    for (long base = 0; base < dim; base += block) {
      for (int i = 0; i + 1 < g; ++i) {
        const long lo = base + i * stride;
        for (long t = 0; t < stride; ++t) {
          const long p = lo + t, q = p + stride;
          out(p) -= inv_h2 * in(q);
          out(q) -= inv_h2 * in(p);
        }
      }
    }
    stride = block;
  }
}

// Kinetic diagonal at idx: (number of in-box neighbours) / h^2.
double kinetic_diagonal(long idx, int axes, int g, double inv_h2) {
  double d = 0.0;
  for (int a = 0; a < axes; ++a) {
    const int i = static_cast<int>(idx % g);
    idx /= g;
    d += (i > 0 ? inv_h2 : 0.0) + (i + 1 < g ? inv_h2 : 0.0);
  }
  return d;
}

std::vector<std::vector<int>> permutations(int n) {
  std::vector<int> p(static_cast<std::size_t>(n));
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  return out;
}

}  // namespace

SparseHamiltonian build_hamiltonian(int n, double ell, int grid, const RadialPotential& v, const ThreeBodyPotential& w) {
  require(n >= 1 && n <= 3, "build_hamiltonian: particle count must be 1, 2 or 3");
  require(ell > 0.0, "build_hamiltonian: box side must be positive");
  require(grid >= 2, "build_hamiltonian: need at least 2 nodes per axis");
  const long dim = ipow(grid, 3 * n);
  require(dim <= kMaxUnknowns, "build_hamiltonian: " + std::to_string(grid) + " nodes per axis for " +
                                   std::to_string(n) + " particles exceeds the budget of " +
                                   std::to_string(kMaxUnknowns) + " unknowns");
  SparseHamiltonian h;
  h.n_ = n;
  h.g_ = grid;
  h.ell_ = ell;
  h.dim_ = dim;
  h.pot_.assign(static_cast<std::size_t>(dim), 0.0);
  const bool pair = n >= 2 && !v.is_zero();
  const bool triple = n == 3 && !w.is_zero();
  const double inv_h2 = 1.0 / (h.spacing() * h.spacing());
  h.diag_.resize(static_cast<std::size_t>(dim));
  for (long idx = 0; idx < dim; ++idx) h.diag_[static_cast<std::size_t>(idx)] = kinetic_diagonal(idx, 3 * n, grid, inv_h2);
  if (!pair && !triple) return h;
  Vec3 x[3];
  for (long idx = 0; idx < dim; ++idx) {
    for (int p = 0; p < n; ++p) x[p] = h.position(idx, p);
    double e = 0.0;
    if (pair)
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e += v((x[i] - x[j]).norm());
    if (triple) e += w.at_positions(x[0], x[1], x[2]);
    h.pot_[static_cast<std::size_t>(idx)] = e;
    h.diag_[static_cast<std::size_t>(idx)] += e;
  }
  return h;
}

SparseHamiltonian build_rescaled_hamiltonian(int n, double ell, int grid, const RadialPotential& v,
                                             const ThreeBodyPotential& w) {
  require(ell > 0.0, "build_rescaled_hamiltonian: l must be positive");
  return build_hamiltonian(n, 1.0, grid, v.rescaled(1.0 / ell), w.rescaled(1.0 / ell));
}

Vec3 SparseHamiltonian::position(long idx, int p) const {
  const double h = spacing();
  idx /= ipow(g_, 3 * p);
  Vec3 x;
  for (int c = 0; c < 3; ++c) {
    x(c) = -0.5 * ell_ + (static_cast<double>(idx % g_) + 0.5) * h;
    idx /= g_;
  }
  return x;
}

long SparseHamiltonian::permuted(long idx, const std::vector<int>& perm) const {
  const long block = ipow(g_, 3);
  std::vector<long> node(static_cast<std::size_t>(n_));
  for (int p = 0; p < n_; ++p) {
    node[static_cast<std::size_t>(p)] = idx % block;
    idx /= block;
  }
  long out = 0;
  for (int p = n_ - 1; p >= 0; --p) out = out * block + node[static_cast<std::size_t>(perm[static_cast<std::size_t>(p)])];
  return out;
}

void SparseHamiltonian::apply_kinetic(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  const double inv_h2 = 1.0 / (spacing() * spacing());
  out.resize(dim_);
  for (long idx = 0; idx < dim_; ++idx) out(idx) = kinetic_diagonal(idx, 3 * n_, g_, inv_h2) * in(idx);
  add_hops(3 * n_, g_, inv_h2, in, out);
}

void SparseHamiltonian::apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
  const double inv_h2 = 1.0 / (spacing() * spacing());
  out.resize(dim_);
  for (long idx = 0; idx < dim_; ++idx) out(idx) = diag_[static_cast<std::size_t>(idx)] * in(idx);
  add_hops(3 * n_, g_, inv_h2, in, out);
}

LinearOperator SparseHamiltonian::op() const {
  return [this](const Eigen::VectorXd& in, Eigen::VectorXd& out) { apply(in, out); };
}

double SparseHamiltonian::kinetic_gap() const {
  const double h = spacing();
  const double s = std::sin(kPi / (2.0 * g_));
  return 4.0 * s * s / (h * h);
}

EigenPair ground_state(const SparseHamiltonian& h, double tol, std::uint64_t seed) {
  require(tol > 0.0, "ground_state: tolerance must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd start(h.dimension());
  for (long i = 0; i < h.dimension(); ++i) start(i) = 1.0 + 1e-3 * u(rng);
  LanczosOptions opt;
  opt.tolerance = tol;
  return lanczos_lowest(h.op(), start, opt);
}

double rayleigh(const SparseHamiltonian& h, const Eigen::VectorXd& psi) {
  require(psi.size() == h.dimension(), "rayleigh: vector size mismatch");
  const double nn = psi.squaredNorm();
  require(nn > 0.0, "rayleigh: zero vector");
  Eigen::VectorXd hp;
  h.apply(psi, hp);
  return psi.dot(hp) / nn;
}

double symmetry_defect(const SparseHamiltonian& h, const Eigen::VectorXd& psi) {
  require(psi.size() == h.dimension(), "symmetry_defect: vector size mismatch");
  const double scale = psi.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& perm : permutations(h.particles()))
    for (long idx = 0; idx < h.dimension(); ++idx)
      worst = std::max(worst, std::abs(psi(h.permuted(idx, perm)) - psi(idx)));
  return worst / scale;
}

double temple_bound(const SparseHamiltonian& h, const Eigen::VectorXd& psi, double gamma) {
  require(psi.size() == h.dimension(), "temple_bound: vector size mismatch");
  const double nn = psi.squaredNorm();
  require(nn > 0.0, "temple_bound: zero vector");
  Eigen::VectorXd hp;
  h.apply(psi, hp);
  const double mean = psi.dot(hp) / nn;
  if (!(mean < gamma))
    throw ValidationError("temple_bound: Temple inapplicable, <A> = " + std::to_string(mean) +
                          " is not below gamma = " + std::to_string(gamma));
  const double variance = (hp - mean * psi).squaredNorm() / nn;
  return mean - variance / (gamma - mean);
}

void validate_window(double alpha, double beta, AlphaWindow window) {
  const double upper = window == AlphaWindow::statement ? 12.0 / 35.0 : 0.4;
  require(alpha > 1.0 / 3.0 && alpha < upper,
          "alpha = " + std::to_string(alpha) + " outside (1/3, " + (window == AlphaWindow::statement ? "12/35" : "2/5") + ")");
  require(beta > alpha - 1.0 / 3.0 && beta < (7.0 * alpha - 2.0) / 12.0,
          "beta = " + std::to_string(beta) + " outside (alpha - 1/3, (7 alpha - 2) / 12)");
}

TempleConfig TempleConfig::make(double y, double alpha, double beta, AlphaWindow window) {
  require(y > 0.0 && y < 1.0, "TempleConfig: Y must lie in (0, 1)");
  validate_window(alpha, beta, window);
  TempleConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.epsilon = std::sqrt(std::pow(y, alpha - 6.0 * beta) + std::pow(y, 7.0 * alpha - 2.0 - 12.0 * beta));
  c.gamma = c.epsilon * kPi * kPi / 2.0;
  return c;
}

double LowerBoundReport::error_ratio() const {
  return leading() > 0.0 ? error / leading() : std::numeric_limits<double>::infinity();
}

LowerBoundReport prop_lower_bound(int n, double ell, double a, double b, double rho, const TempleConfig& cfg,
                                  AlphaWindow window) {
  require(n >= 0, "prop_lower_bound: n must be nonnegative");
  require(ell > 0.0 && rho > 0.0, "prop_lower_bound: l and rho must be positive");
  require(a >= 0.0 && b >= 0.0, "prop_lower_bound: a and b must be nonnegative");
  require(n <= 10.0 * rho * ell * ell * ell, "prop_lower_bound: n exceeds 10 rho l^3");
  validate_window(cfg.alpha, cfg.beta, window);
  const GasState gas = GasState::make(rho, a, b);
  const double y = gas.gas_parameter, al = cfg.alpha, be = cfg.beta;
  require(y > 0.0, "prop_lower_bound: vanishing gas parameter");
  LowerBoundReport r;
  r.n = n;
  r.ell = ell;
  r.gas_parameter = y;
  const double nn = n;
  r.two_body = 4.0 * kPi * a * nn * (nn - 1.0) / ell;
  r.three_body = n >= 3 ? b * nn * (nn - 1.0) * (nn - 2.0) / (6.0 * std::pow(ell, 4)) : 0.0;
  if (n < 2) r.two_body = 0.0;
  r.error_scale = rho * rho * gas.effective_length * std::pow(ell, 5);
  for (double e : {1.0 - 3.0 * (al - be), be, al - be, 1.0 + 3.0 * be - 2.0 * al})
    r.collision_terms.push_back(r.error_scale * std::pow(y, e));
  r.temple_terms = {r.error_scale * cfg.epsilon, r.error_scale * std::pow(y, al - 6.0 * be) / cfg.epsilon,
                    r.error_scale * std::pow(y, 7.0 * al - 2.0 - 12.0 * be) / cfg.epsilon};
  for (double t : r.collision_terms) r.error += t;
  for (double t : r.temple_terms) r.error += t;
  const double m = std::min(al - 6.0 * be, 7.0 * al - 2.0 - 12.0 * be);
  r.nu_budget = std::min({1.0 - 3.0 * (al - be), be, al - be, 1.0 + 3.0 * be - 2.0 * al, 0.5 * m});
  return r;
}

SuperadditivityReport superadditivity_check(double ell, int k, int kp, const RadialPotential& v,
                                            const ThreeBodyPotential& w, int grid, double tolerance) {
  require(k >= 0 && kp >= 0 && k + kp <= 3, "superadditivity_check: need k, k' >= 0 and k + k' <= 3");
  auto energy = [&](int m) {
    if (m == 0) return 0.0;
    return ground_state(build_hamiltonian(m, ell, grid, v, w), 1e-9).value;
  };
  SuperadditivityReport r;
  r.combined = energy(k + kp);
  r.first = energy(k);
  r.second = energy(kp);
  r.holds = r.slack() >= -tolerance;
  return r;
}

}  // namespace dilute
