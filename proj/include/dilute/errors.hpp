#pragma once

#include <stdexcept>
#include <string>

namespace dilute {

/// Bad input: parameters outside a documented precondition or window.
/// The CLI maps this to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed to reach its stated accuracy (non-convergence,
/// route disagreement, violated invariant). The CLI maps this to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace dilute
