#pragma once

// Lowest eigenpair of a symmetric operator given only through its action.

#include <Eigen/Core>

#include <functional>

namespace dilute {

using LinearOperator = std::function<void(const Eigen::VectorXd& in, Eigen::VectorXd& out)>;

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  double residual = 0.0;  // |A v - value v| with |v| = 1
  int matvecs = 0;
  int restarts = 0;
};

struct LanczosOptions {
  double tolerance = 1e-8;  // absolute residual target
  int krylov = 80;
  int max_restarts = 400;
};

/// Restarted Lanczos without a stored basis: each cycle runs `krylov` steps
/// keeping only the tridiagonal coefficients, then replays the recurrence to
/// assemble the Ritz vector, which starts the next cycle. Throws
/// NumericalError when the residual target is not met.
EigenPair lanczos_lowest(const LinearOperator& apply, Eigen::VectorXd start, const LanczosOptions& options = {});

}  // namespace dilute
