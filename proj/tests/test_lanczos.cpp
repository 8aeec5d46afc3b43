#include "dilute/errors.hpp"
#include "dilute/lanczos.hpp"

#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace dilute;
using Catch::Approx;

TEST_CASE("path laplacian", "[lanczos]") {
  const int n = 400;
  LinearOperator lap = [n](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(n);
    for (int i = 0; i < n; ++i) {
      double v = 2.0 * in(i);
      if (i > 0) v -= in(i - 1);
      if (i + 1 < n) v -= in(i + 1);
      out(i) = v;
    }
  };
  Eigen::VectorXd start = Eigen::VectorXd::LinSpaced(n, 1.0, 2.0);
  auto ev = lanczos_lowest(lap, start, {1e-10, 60, 2000});
  const double exact = 2.0 - 2.0 * std::cos(std::numbers::pi / (n + 1));
  CHECK(ev.value == Approx(exact).epsilon(1e-8));
  CHECK(ev.residual <= 1e-10);
  CHECK(ev.vector.norm() == Approx(1.0));
  CHECK(ev.restarts > 0);
}

TEST_CASE("random sparse symmetric against dense", "[lanczos]") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g;
  const int n = 150;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 4.0 + g(rng);
    for (int k = 0; k < 3; ++k) {
      const int j = static_cast<int>(rng() % n);
      const double v = g(rng);
      a(i, j) += v;
      a(j, i) += v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> dense(a);
  LinearOperator op = [&a](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = a * in; };
  auto ev = lanczos_lowest(op, Eigen::VectorXd::Ones(n), {1e-9, 40, 500});
  CHECK(ev.value == Approx(dense.eigenvalues()(0)).margin(1e-9));
  CHECK(std::abs(ev.vector.dot(dense.eigenvectors().col(0))) == Approx(1.0).margin(1e-8));
}

TEST_CASE("invariant start and failures", "[lanczos]") {
  Eigen::VectorXd d(3);
  d << 1.0, 2.0, 3.0;
  LinearOperator diag = [&d](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = d.cwiseProduct(in); };
  Eigen::VectorXd e0 = Eigen::VectorXd::Unit(3, 0);
  auto ev = lanczos_lowest(diag, e0);
  CHECK(ev.value == 1.0);
  CHECK(ev.residual == 0.0);
  CHECK_THROWS_AS(lanczos_lowest(diag, Eigen::VectorXd::Zero(3)), ValidationError);
  LanczosOptions tight{1e-30, 2, 0};
  Eigen::VectorXd big = Eigen::VectorXd::Ones(50);
  LinearOperator ramp = [](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::LinSpaced(in.size(), 1.0, 50.0).cwiseProduct(in);
  };
  CHECK_THROWS_AS(lanczos_lowest(ramp, big, tight), NumericalError);
}
