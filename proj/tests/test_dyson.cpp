#include "dilute/dyson.hpp"
#include "dilute/errors.hpp"
#include "dilute/radial.hpp"
#include "dilute/scatter2.hpp"

#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace dilute;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<RadialPotential> battery2() {
  return {RadialPotential::soft_sphere(1.0, 1.0), RadialPotential::soft_sphere(100.0, 1.0),
          RadialPotential::truncated_gaussian(20.0, 1.0, 0.4),
          RadialPotential::tabulated({0.0, 0.25, 0.6, 1.0}, {8.0, 6.0, 3.0, 1.0})};
}

std::vector<ThreeBodyPotential> battery3() {
  return {ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(5.0, 1.0)),
          ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(200.0, 1.0)),
          ThreeBodyPotential::m_radial(RadialPotential::truncated_gaussian(30.0, 1.0, 0.4)),
          ThreeBodyPotential::m_radial(RadialPotential::tabulated({0.0, 0.4, 0.8, 1.2}, {6.0, 9.0, 4.0, 1.0}))};
}

// Midpoint rule on a fine mesh.
double midpoint(const std::function<double(double)>& fn, double lo, double hi, int n) {
  double sum = 0.0;
  const double h = (hi - lo) / n;
  for (int k = 0; k < n; ++k) sum += fn(lo + (k + 0.5) * h);
  return sum * h;
}

// Consistent-mass P1 Galerkin with a dense generalised eigensolver, midpoint
// quadrature on each element.
double dense_sector_minimum(const std::function<double(double)>& q, double outer, int elements) {
  const int n = elements + 1;
  const double h = outer / elements;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n), m = Eigen::MatrixXd::Zero(n, n);
  const int sub = 64;
  for (int e = 0; e < elements; ++e) {
    for (int t = 0; t < sub; ++t) {
      const double r = e * h + (t + 0.5) * h / sub;
      const double w = r * r * h / sub;
      const double p1 = (r - e * h) / h, p0 = 1.0 - p1;
      const double phi[2] = {p0, p1}, dphi[2] = {-1.0 / h, 1.0 / h};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          k(e + a, e + b) += w * (2.0 * dphi[a] * dphi[b] + q(r) * phi[a] * phi[b]);
          m(e + a, e + b) += w * phi[a] * phi[b];
        }
    }
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

// Definition of the indicators, evaluated literally.
CollisionField brute_force(const Configuration& c) {
  const int n = c.size();
  const auto& x = c.positions();
  const double r = c.cut();
  auto chi = [r](const Vec3& v) { return v.norm() <= r ? 1 : 0; };
  auto theta = [r](const Vec3& v) { return v.norm() > 2.0 * r ? 1 : 0; };
  CollisionField f;
  f.n = n;
  f.pair.assign(static_cast<std::size_t>(n * n), 0);
  f.triple.assign(static_cast<std::size_t>(n * n * n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      int v = chi(x[i] - x[j]);
      for (int m = 0; m < n; ++m)
        if (m != i && m != j) v *= theta((x[i] + x[j]) / 2.0 - x[m]);
      f.pair[static_cast<std::size_t>(i * n + j)] = static_cast<std::uint8_t>(v);
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        int t = chi(x[i] - x[j]) * chi(x[i] - x[k]);
        for (int m = 0; m < n; ++m)
          if (m != i && m != j && m != k) t *= theta((x[i] + x[j] + x[k]) / 3.0 - x[m]);
        f.triple[static_cast<std::size_t>((i * n + j) * n + k)] = static_cast<std::uint8_t>(t);
      }
    }
  return f;
}

}  // namespace

TEST_CASE("softeners", "[dyson]") {
  auto s2 = Softener2B::make();
  CHECK(std::abs(s2.normalization() - 1.0) < 1e-12);
  const double oracle2 = midpoint([&](double r) { return 4.0 * kPi * r * r * s2(r); }, 0.0, 1.0, 200000);
  CHECK(oracle2 == Approx(1.0).epsilon(1e-8));
  CHECK(s2(0.2) == 0.0);
  CHECK(s2(0.6) == 0.0);
  CHECK(s2(0.3) > 0.0);
  CHECK(s2.scaled(3.0, 8.0) == Approx(s2(3.0 / 8.0) / 512.0));

  auto s3 = Softener3B::make();
  CHECK(std::abs(s3.normalization() - 1.0) < 1e-12);
  const double det = scattering_matrix().determinant;
  const double oracle3 =
      midpoint([&](double s) { return det * kPi * kPi * kPi * std::pow(s, 5) * s3(s); }, 0.0, 1.0, 200000);
  CHECK(oracle3 == Approx(1.0).epsilon(1e-8));
  CHECK(s3.scaled(2.0, 2.0) == Approx(s3(1.0) / 64.0));

  SECTION("support lies in the Euclidean annulus") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    int inside = 0;
    for (int k = 0; k < 200000; ++k) {
      const Vec3 x(u(rng), u(rng), u(rng)), y(u(rng), u(rng), u(rng));
      const double v = s3(x, y);
      CHECK(v >= 0.0);
      if (v > 0.0) {
        ++inside;
        const double r = std::sqrt(x.squaredNorm() + y.squaredNorm());
        CHECK(r >= 0.25);
        CHECK(r <= 0.5);
      }
    }
    CHECK(inside > 0);
  }

  CHECK_THROWS_AS(Softener2B::make(0.5, 0.25), ValidationError);
  CHECK_THROWS_AS(Softener3B::make(0.25, 0.4), ValidationError);
}

TEST_CASE("dyson gaps vanish without interaction", "[dyson]") {
  auto s2 = Softener2B::make();
  auto r = dyson2_gap(RadialPotential::zero(), s2, 4.0);
  CHECK(r.lambda_min >= -1e-10);
  CHECK(r.rhs == 0.0);
  auto s3 = Softener3B::make();
  auto r3 = dyson3_gap(ThreeBodyPotential::zero(), s3, 6.0);
  CHECK(r3.lambda_min >= -1e-10);
}

TEST_CASE("two-body dyson lemma on the battery", "[dyson]") {
  auto s = Softener2B::make();
  for (const auto& p : battery2()) {
    auto r = dyson2_gap(p, s, 6.0);
    CHECK(r.pass());
    CHECK(r.h == Approx(3.0 / 2000.0));
    CHECK(r.tolerance == Approx(-1e-5 * std::pow(kPi / r.h, 2)));
    CHECK(r.lambda_min >= -1e-10);
    const double a = solve_scattering_length(p).a;
    CHECK(r.rhs == Approx(4.0 * kPi * a));
  }
  CHECK_THROWS_AS(dyson2_gap(RadialPotential::soft_sphere(1.0, 1.0), s, 3.0), ValidationError);
}

TEST_CASE("sector sign agrees with a dense consistent-mass oracle", "[dyson]") {
  auto s = Softener2B::make();
  const auto p = RadialPotential::soft_sphere(100.0, 1.0);
  const double a = solve_scattering_length(p).a;
  for (double m : {1.0, 3.0, 5.0}) {
    DysonGrid g;
    g.points = 240;
    g.multiplier = m;
    const double lumped = dyson2_gap(p, s, 6.0, g).lambda_min;
    auto q = [&](double r) { return p(r) - m * 4.0 * kPi * a * s.scaled(r, 6.0); };
    const double dense = dense_sector_minimum(q, 3.0, 240);
    CHECK((lumped >= 0.0) == (dense >= 0.0));
  }
}

TEST_CASE("two-body critical multiplier exceeds two", "[dyson]") {
  auto s = Softener2B::make();
  DysonGrid g;
  g.points = 500;
  for (const auto& p : battery2()) {
    const double crit = dyson2_critical_multiplier(p, s, 6.0, g, 16.0, 1e-3);
    CHECK(crit > 2.0);
    g.multiplier = 0.999 * crit;
    CHECK(dyson2_gap(p, s, 6.0, g).lambda_min >= 0.0);
    g.multiplier = 1.0;
  }
}

TEST_CASE("three-body dyson lemma and sharpness", "[dyson]") {
  auto s = Softener3B::make();
  int flipped = 0;
  for (const auto& w : battery3()) {
    auto r = dyson3_gap(w, s, 6.0);
    CHECK(r.pass());
    CHECK(r.lambda_min >= -1e-10);
    DysonGrid twice;
    twice.multiplier = 2.0;
    if (dyson3_gap(w, s, 6.0, twice).lambda_min < 0.0) ++flipped;
    DysonGrid tempered;
    tempered.c = 0.5;
    CHECK(dyson3_gap(w, s, 6.0, tempered).rhs < r.rhs);
  }
  CHECK(flipped >= 1);
  auto tab = ThreeBodyPotential::tabulate(
      [](const Vec3& x, const Vec3& y) { return x.squaredNorm() + y.squaredNorm() < 0.25 ? 1.0 : 0.0; }, 0.5, 5);
  CHECK_THROWS_AS(dyson3_gap(tab, s, 6.0), ValidationError);
}

TEST_CASE("grid modes", "[dyson]") {
  SECTION("three dimensions") {
    auto s = Softener2B::make();
    const auto p = RadialPotential::soft_sphere(100.0, 1.0);
    DysonGrid g;
    g.mode = DysonMode::grid;
    g.points = 30;
    auto r = dyson2_gap(p, s, 6.0, g);
    CHECK(r.pass());
    CHECK(r.h == Approx(0.2));
    CHECK(r.unknowns > 10000);
    CHECK(r.unknowns < 27000);
  }
  SECTION("six dimensions") {
    auto s = Softener3B::make();
    DysonGrid g;
    g.mode = DysonMode::grid;
    g.points = 10;
    auto r = dyson3_gap(battery3()[0], s, 6.0, g);
    CHECK(r.pass());
    g.points = 12;
    CHECK_THROWS_AS(dyson3_gap(battery3()[0], s, 6.0, g), ValidationError);
  }
}

TEST_CASE("sector convergence table", "[dyson]") {
  auto s = Softener2B::make();
  DysonGrid g;
  g.points = 250;
  auto rows = dyson2_convergence(RadialPotential::soft_sphere(100.0, 1.0), s, 6.0, g, 4);
  REQUIRE(rows.size() == 4);
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(rows[k].points == 2 * rows[k - 1].points);
    CHECK(rows[k].result.lambda_min <= rows[k - 1].result.lambda_min + 1e-12);
    CHECK(rows[k].result.lambda_min >= 0.0);
  }
}

TEST_CASE("collision indicators", "[dyson]") {
  SECTION("pair") {
    Configuration c({Vec3(0, 0, 0), Vec3(0.05, 0, 0)}, 0.1, 0.1);
    auto f = collision_indicators(c);
    CHECK(f.f(0, 1) == 1);
    CHECK(f.f(1, 0) == 1);
    auto rep = check_exclusion(c);
    CHECK(rep.sums[0] == 1.0);
    CHECK(rep.sums[1] == 1.0);
  }
  SECTION("triple") {
    Configuration c({Vec3(0, 0, 0), Vec3(0.05, 0, 0), Vec3(0, 0.05, 0), Vec3(0.4, 0.4, 0.4)}, 0.1, 0.1);
    auto f = collision_indicators(c);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(f.f(i, j) == 0);
    CHECK(f.f3(0, 1, 2) == 1);
    CHECK(f.f3(0, 2, 1) == 1);
    auto rep = check_exclusion(c);
    for (int i = 0; i < 3; ++i) CHECK(rep.sums[static_cast<std::size_t>(i)] == 1.0);
    CHECK(rep.sums[3] == 0.0);
  }
  SECTION("validation") {
    CHECK_THROWS_AS(Configuration({Vec3(0.6, 0, 0)}, 0.1, 0.1), ValidationError);
    CHECK_THROWS_AS(Configuration({}, 1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(Configuration({}, 0.1, 0.0), ValidationError);
    Configuration c({Vec3(0.46, 0, 0), Vec3(0.1, 0, 0)}, 0.1, 0.1);
    CHECK_FALSE(c.in_shrunk_box(0));
    CHECK(c.in_shrunk_box(1));
  }
}

TEST_CASE("optimised indicators match the definition", "[dyson]") {
  std::mt19937_64 rng(2024);
  long pairs = 0, triples = 0;
  for (int draw = 0; draw < 100000; ++draw) {
    const double cut = draw % 3 == 0 ? 0.05 : (draw % 3 == 1 ? 0.1 : 0.2);
    auto c = random_configuration(4, cut, 0.1, rng);
    auto fast = collision_indicators(c);
    auto slow = brute_force(c);
    REQUIRE(fast.pair == slow.pair);
    REQUIRE(fast.triple == slow.triple);
    for (auto v : fast.pair) pairs += v;
    for (auto v : fast.triple) triples += v;
  }
  CHECK(pairs > 1000);
  CHECK(triples > 1000);
}

TEST_CASE("exclusion bound on random configurations", "[dyson]") {
  std::mt19937_64 rng(7);
  const double cuts[] = {0.05, 0.1, 0.2};
  double largest = 0.0;
  for (int draw = 0; draw < 100000; ++draw) {
    auto c = random_configuration(3 + draw % 10, cuts[draw % 3], 0.1, rng);
    auto rep = check_exclusion(c);
    CHECK(rep.pair_partners_max <= 1);
    CHECK(rep.triple_partners_max <= 1);
    for (double s : rep.sums) largest = std::max(largest, s);
  }
  CHECK(largest == 1.0);
}
