#include "dilute/radial.hpp"

#include <Eigen/Dense>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace dilute;
using Catch::Approx;

TEST_CASE("rising step", "[radial]") {
  CHECK(rising_step(-1.0) == 0.0);
  CHECK(rising_step(0.0) == 0.0);
  CHECK(rising_step(1.0) == 1.0);
  CHECK(rising_step(0.5) == Approx(0.5));
  for (int k = 1; k < 100; ++k) {
    const double u = k / 100.0;
    CHECK(rising_step(u) + rising_step(1.0 - u) == Approx(1.0).epsilon(1e-15));
    CHECK(rising_step(u) >= rising_step(u - 0.01));
  }
}

TEST_CASE("harmonic cut-off shape", "[radial]") {
  for (int d : {3, 6}) {
    const HarmonicCutoff chi(d);
    CHECK(chi(0.0) == 1.0);
    CHECK(chi(0.5) == 1.0);
    CHECK(chi(1.0) == 0.0);
    CHECK(chi(2.0) == 0.0);
    double prev = 1.0;
    for (int k = 0; k <= 1000; ++k) {
      const double t = 0.5 + 0.5 * k / 1000.0;
      const double v = chi(t);
      CHECK(v <= prev + 1e-15);
      CHECK(v >= 0.0);
      prev = v;
    }
    for (double t : {0.52, 0.6, 0.75, 0.9, 0.98}) {
      const double h = 1e-6;
      const double fd = (chi(t + h) - chi(t - h)) / (2 * h);
      CHECK(chi.derivative(t) == Approx(fd).epsilon(1e-6).margin(1e-9));
    }
    CHECK(chi.derivative(0.5) == 0.0);
    CHECK(chi.derivative(0.5 + 1e-4) == Approx(0.0).margin(1e-100));
    CHECK(chi.derivative(1.0 - 1e-4) == Approx(0.0).margin(1e-100));
  }
  CHECK_THROWS(HarmonicCutoff(2));
  CHECK_THROWS(HarmonicCutoff(3, 0.0));
}

TEST_CASE("harmonic cut-off is harmonic away from the ramps", "[radial]") {
  for (int d : {3, 6}) {
    const HarmonicCutoff chi(d);
    // chi(t) t^{2-d} = A t^{2-d} + B on the flat part of sigma'.
    const double span = 1.0 - std::pow(2.0, 2.0 - d);
    auto t_of = [&](double x) { return std::pow(1.0 - x * span, 1.0 / (d - 2)); };
    const double t1 = t_of(0.3), t2 = t_of(0.5), t3 = t_of(0.7);
    Eigen::Matrix2d m;
    m << std::pow(t1, 2 - d), 1.0, std::pow(t3, 2 - d), 1.0;
    const Eigen::Vector2d rhs(chi(t1) * std::pow(t1, 2 - d), chi(t3) * std::pow(t3, 2 - d));
    const Eigen::Vector2d ab = m.lu().solve(rhs);
    CHECK(chi(t2) * std::pow(t2, 2 - d) == Approx(ab(0) * std::pow(t2, 2 - d) + ab(1)).epsilon(1e-12));
  }
}

TEST_CASE("truncation energy penalty of the cut-off", "[radial]") {
  // Extra Dirichlet energy of omega = chi(r) / r over 1 / r on r > 1/2 with
  // l = 1, in units of 8 pi. The harmonic shell gives exactly 2.
  auto penalty = [](const std::function<double(double)>& c, const std::function<double(double)>& dc) {
    const int n = 200000;
    const double h = 0.5 / n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = 0.5 + (k + 0.5) * h;
      const double g = dc(r) / r - c(r) / (r * r);
      acc += 2.0 * (g * g - 1.0 / std::pow(r, 4)) * 4.0 * std::numbers::pi * r * r * h;
    }
    acc -= 2.0 * 4.0 * std::numbers::pi;  // int_1^inf 2 |grad 1/r|^2
    return acc / (8.0 * std::numbers::pi);
  };
  const HarmonicCutoff chi(3);
  const double p = penalty([&](double r) { return chi(r); }, [&](double r) { return chi.derivative(r); });
  const double shell = penalty([](double r) { return 2.0 * (1.0 - r); }, [](double) { return -2.0; });
  CHECK(shell == Approx(2.0).epsilon(1e-6));
  CHECK(p > 2.0);
  CHECK(p < 2.2);
}

TEST_CASE("hermite table reproduces cubics", "[radial]") {
  auto p = [](double x) { return 1.0 - 2.0 * x + 0.5 * x * x * x; };
  auto dp = [](double x) { return -2.0 + 1.5 * x * x; };
  std::vector<double> v, d;
  for (int k = 0; k <= 10; ++k) {
    v.push_back(p(0.3 * k));
    d.push_back(dp(0.3 * k));
  }
  HermiteTable t(0.0, 0.3, v, d);
  for (double x : {0.01, 0.45, 1.234, 2.99}) {
    auto [val, der] = t.eval(x);
    CHECK(val == Approx(p(x)).epsilon(1e-13));
    CHECK(der == Approx(dp(x)).epsilon(1e-12));
  }
  CHECK(t.value(5.0) == v.back());
  CHECK(t.eval(5.0).second == 0.0);
}

TEST_CASE("gauss rule exactness", "[radial]") {
  for (int deg = 0; deg <= 9; ++deg) {
    auto fn = [deg](double x) { return std::pow(x, deg); };
    const double exact = 1.0 / (deg + 1);
    CHECK(integrate_split(fn, 0.0, 1.0, {}) == Approx(exact).epsilon(1e-14));
  }
  auto step = [](double x) { return x < 0.3 ? 1.0 : 0.0; };
  CHECK(integrate_split(step, 0.0, 1.0, {0.3}) == Approx(0.3).epsilon(1e-14));
}

TEST_CASE("tridiagonal solver matches dense", "[radial]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 30;
  std::vector<double> d(n), o(n - 1), b(n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) {
    d[i] = 4.0 + u(rng);
    b[i] = u(rng);
    a(i, i) = d[i];
    rhs(i) = b[i];
    if (i + 1 < n) {
      o[i] = u(rng);
      a(i, i + 1) = a(i + 1, i) = o[i];
    }
  }
  auto x = solve_tridiagonal(d, o, b);
  Eigen::VectorXd ref = a.ldlt().solve(rhs);
  for (int i = 0; i < n; ++i) CHECK(x[i] == Approx(ref(i)).epsilon(1e-12));
}

TEST_CASE("radial minimiser", "[radial]") {
  RadialProblem pb;
  pb.potential = [](double) { return 0.0; };
  pb.outer = 1.0;
  pb.dimension = 3;
  pb.measure = 4.0 * std::numbers::pi;
  CHECK(radial_minimum(pb, 16) == Approx(0.0).margin(1e-14));

  // Soft sphere of height 2 and radius 1: kappa = 1, a = 1 - tanh(1).
  pb.potential = [](double r) { return r <= 1.0 ? 2.0 : 0.0; };
  pb.breakpoints = {1.0};
  const double exact = 8.0 * std::numbers::pi * (1.0 - std::tanh(1.0));
  auto vm = radial_minimum_extrapolated(pb, 256);
  CHECK(vm.coarse >= vm.fine);
  CHECK(vm.fine >= exact - 1e-12);
  CHECK(vm.energy == Approx(exact).epsilon(1e-6));

  std::vector<double> g;
  const double e = radial_minimum(pb, 64, &g);
  std::vector<double> nodes;
  for (int k = 0; k <= 64; ++k) nodes.push_back(k / 64.0);
  CHECK(radial_functional(pb, nodes, g) == Approx(e).epsilon(1e-12));
  auto bumped = g;
  bumped[20] += 0.01;
  CHECK(radial_functional(pb, nodes, bumped) > e);
}
