#include "dilute/lanczos.hpp"

#include "dilute/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <vector>

namespace dilute {

namespace {

struct Cycle {
  std::vector<double> alpha, beta;
  int steps = 0;
};

// Runs the three-term recurrence from unit vector v0. When `coeffs` is
// non-null, accumulates sum_j coeffs[j] v_j into `ritz` instead of recording.
Cycle run_cycle(const LinearOperator& apply, const Eigen::VectorXd& v0, int krylov, const Eigen::VectorXd* coeffs,
                Eigen::VectorXd* ritz, int& matvecs) {
  Cycle c;
  const Eigen::Index n = v0.size();
  Eigen::VectorXd v = v0, v_prev = Eigen::VectorXd::Zero(n), w(n);
  double beta_prev = 0.0;
  const int limit = coeffs ? static_cast<int>(coeffs->size()) : krylov;
  for (int j = 0; j < limit; ++j) {
    if (coeffs) *ritz += (*coeffs)(j) * v;
    if (coeffs && j + 1 == limit) break;
    apply(v, w);
    ++matvecs;
    w -= beta_prev * v_prev;
    const double alpha = w.dot(v);
    w -= alpha * v;
    const double beta = w.norm();
    c.alpha.push_back(alpha);
    c.steps = j + 1;
    if (beta <= 1e-14 * (std::abs(alpha) + beta_prev + 1e-300)) break;
    if (j + 1 < limit) c.beta.push_back(beta);
    v_prev.swap(v);
    v = w / beta;
    beta_prev = beta;
  }
  return c;
}

}  // namespace

EigenPair lanczos_lowest(const LinearOperator& apply, Eigen::VectorXd start, const LanczosOptions& options) {
  require(start.size() > 0, "lanczos: empty start vector");
  require(options.krylov >= 2, "lanczos: krylov dimension must be >= 2");
  EigenPair out;
  const double norm = start.norm();
  require(norm > 0.0 && std::isfinite(norm), "lanczos: start vector must be nonzero and finite");
  Eigen::VectorXd v = start / norm;
  Eigen::VectorXd av(v.size());
  const int krylov = static_cast<int>(std::min<Eigen::Index>(options.krylov, v.size()));

  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    out.restarts = restart;
    const Cycle c = run_cycle(apply, v, krylov, nullptr, nullptr, out.matvecs);
    const int m = c.steps;
    Eigen::VectorXd diag(m), sub(std::max(m - 1, 0));
    for (int i = 0; i < m; ++i) diag(i) = c.alpha[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < m; ++i) sub(i) = c.beta[static_cast<std::size_t>(i)];
    Eigen::VectorXd coeffs;
    if (m == 1) {
      coeffs = Eigen::VectorXd::Ones(1);
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      coeffs = tri.eigenvectors().col(0);
    }
    Eigen::VectorXd ritz = Eigen::VectorXd::Zero(v.size());
    run_cycle(apply, v, krylov, &coeffs, &ritz, out.matvecs);
    ritz.normalize();
    apply(ritz, av);
    ++out.matvecs;
    const double theta = ritz.dot(av);
    const double residual = (av - theta * ritz).norm();
    out.value = theta;
    out.vector = ritz;
    out.residual = residual;
    if (residual <= options.tolerance) return out;
    v = ritz;
  }
  throw NumericalError("lanczos: no convergence, residual " + std::to_string(out.residual));
}

}  // namespace dilute
