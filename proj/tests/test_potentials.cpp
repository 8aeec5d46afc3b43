#include "dilute/errors.hpp"
#include "dilute/potentials.hpp"

#include <Eigen/Eigenvalues>
#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace dilute;
using Catch::Approx;

TEST_CASE("soft sphere evaluation", "[potentials]") {
  auto p = RadialPotential::soft_sphere(1.0, 1.0);
  CHECK(p(2.0) == 0.0);
  auto q = RadialPotential::soft_sphere(5.0, 1.0);
  CHECK(q(0.5) == 5.0);
  CHECK(q(1.0) == 5.0);
  CHECK(q(1.0 + 1e-12) == 0.0);
  CHECK_THROWS_AS(q(-0.1), ValidationError);
}

TEST_CASE("truncated gaussian and tables", "[potentials]") {
  auto g = RadialPotential::truncated_gaussian(2.0, 1.5, 0.5);
  CHECK(g(0.0) == Approx(2.0));
  CHECK(g(0.5) == Approx(2.0 * std::exp(-0.5)));
  CHECK(g(1.6) == 0.0);

  auto t = RadialPotential::tabulated({0.0, 0.5, 1.0}, {3.0, 1.0, 2.0});
  CHECK(t(0.5) == 1.0);
  CHECK(t(0.25) == Approx(2.0));
  CHECK(t(1.0) == 2.0);
  CHECK(t(1.01) == 0.0);
  CHECK(t.support_radius() == 1.0);

  CHECK_THROWS_AS(RadialPotential::tabulated({0.1, 0.5}, {1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(RadialPotential::tabulated({0.0, 0.5, 0.5}, {1.0, 1.0, 1.0}), ValidationError);
  CHECK_THROWS_AS(RadialPotential::tabulated({0.0, 0.5}, {1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(RadialPotential::soft_sphere(-1.0, 1.0), ValidationError);
}

TEST_CASE("table file loader", "[potentials]") {
  const auto path = std::filesystem::temp_directory_path() / "dilute_table_test.txt";
  {
    std::ofstream out(path);
    out << "# radius value\n0 4\n0.5 2\n\n1.0 0\n";
  }
  auto p = load_radial_table(path);
  CHECK(p.kind() == RadialKind::tabulated);
  CHECK(p(0.25) == Approx(3.0));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_radial_table("/nonexistent/table.txt"), ValidationError);
}

TEST_CASE("rescaling", "[potentials]") {
  auto p = RadialPotential::soft_sphere(3.0, 1.0);
  auto same = p.rescaled(1.0);
  CHECK(same.amplitude() == 3.0);
  CHECK(same.support_radius() == 1.0);
  auto q = p.rescaled(2.0);
  CHECK(q.amplitude() == Approx(0.75));
  CHECK(q.support_radius() == Approx(2.0));
  CHECK_THROWS_AS(p.rescaled(0.0), ValidationError);
  CHECK_THROWS_AS(p.rescaled(-1.0), ValidationError);

  SECTION("composition is multiplicative") {
    for (const auto& base : {RadialPotential::truncated_gaussian(4.0, 1.0, 0.4),
                             RadialPotential::tabulated({0.0, 0.3, 1.0}, {2.0, 5.0, 1.0})}) {
      auto twice = base.rescaled(1.7).rescaled(0.6);
      auto once = base.rescaled(1.7 * 0.6);
      for (int k = 0; k <= 200; ++k) {
        const double r = 1.5 * k / 200.0;
        CHECK(twice(r) == Approx(once(r)).margin(1e-12));
      }
    }
  }

  SECTION("three-body") {
    auto w = ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(2.0, 1.0));
    auto w2 = w.rescaled(2.0);
    CHECK(w2.support_radius() == Approx(2.0 * w.support_radius()));
    const Vec3 x(0.3, 0.1, -0.2), y(0.0, 0.4, 0.1);
    CHECK(w2(2.0 * x, 2.0 * y) == Approx(w(x, y) / 4.0));
    CHECK_THROWS_AS(w.rescaled(0.0), ValidationError);
  }
}

TEST_CASE("scattering matrix", "[potentials]") {
  const auto& sm = scattering_matrix();
  CHECK((sm.m - sm.m.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((sm.m * sm.inverse - Mat6::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  Mat6 expected = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    expected(i, i) = expected(i + 3, i + 3) = 1.0;
    expected(i, i + 3) = expected(i + 3, i) = 0.5;
  }
  CHECK((sm.squared - expected).cwiseAbs().maxCoeff() < 1e-14);
  for (int i = 0; i < 3; ++i) {
    CHECK(sm.squared_eigenvalues(i) == Approx(0.5).margin(1e-12));
    CHECK(sm.squared_eigenvalues(i + 3) == Approx(1.5).margin(1e-12));
  }
  double prod = 1.0;
  for (int i = 0; i < 6; ++i) prod *= sm.squared_eigenvalues(i);
  CHECK(sm.determinant * sm.determinant == Approx(prod).epsilon(1e-14));
  CHECK(sm.determinant == Approx(std::pow(0.75, 1.5)).epsilon(1e-13));
  CHECK(sm.norm == Approx(std::sqrt(1.5)).epsilon(1e-13));
  Eigen::SelfAdjointEigenSolver<Mat6> eig(sm.m);
  CHECK(eig.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("hyperradius identity", "[potentials]") {
  CHECK(hyperradius(Vec3::Zero(), Vec3::Zero()) == 0.0);
  CHECK(hyperradius(Vec3(1, 0, 0), Vec3::Zero()) == Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  double worst = 0.0;
  for (int n = 0; n < 10000; ++n) {
    const Vec3 x1(g(rng), g(rng), g(rng)), x2(g(rng), g(rng), g(rng)), x3(g(rng), g(rng), g(rng));
    const Vec3 x = x1 - x2, y = x1 - x3;
    const double s = hyperradius(x, y);
    const double d2 = (x1 - x2).squaredNorm() + (x1 - x3).squaredNorm() + (x2 - x3).squaredNorm();
    worst = std::max(worst, std::abs(s * s - 2.0 / 3.0 * d2) / d2);
    Eigen::Matrix<double, 6, 1> z;
    z << x, y;
    CHECK((scattering_matrix().inverse * z).norm() == Approx(s).epsilon(1e-14));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("three-body potentials", "[potentials]") {
  auto w = ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(7.0, 1.0));
  CHECK(w(Vec3(0.2, 0, 0), Vec3(0, 0.3, 0)) == 7.0);
  CHECK(w.support_radius() == Approx(std::sqrt(1.5)));
  CHECK(w(Vec3(2, 0, 0), Vec3::Zero()) == 0.0);
  std::mt19937_64 rng(3);
  CHECK(three_body_symmetry_defect(w, 2000, 1.0, rng) == 0.0);

  auto gw = ThreeBodyPotential::m_radial(RadialPotential::truncated_gaussian(3.0, 1.2, 0.5));
  CHECK(three_body_symmetry_defect(gw, 2000, 0.8, rng, true) == 0.0);
  // Relative coordinates carry one rounding of x - y.
  CHECK(three_body_symmetry_defect(gw, 2000, 0.8, rng) < 1e-14);
  const Vec3 a(0.1, 0.2, 0.3), b(-0.2, 0.05, 0.1), c(0.3, -0.1, 0.0);
  CHECK(gw.at_positions(a, b, c) == Approx(gw(a - b, a - c)).epsilon(1e-14));

  SECTION("constant profile at half radius") {
    auto c = ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(2.5, 2.0));
    const Vec3 x(0.5, 0.0, 0.0);
    const double s = hyperradius(x, Vec3::Zero());
    REQUIRE(s < 2.0);
    CHECK(c(x, Vec3::Zero()) == 2.5);
  }

  SECTION("tabulated kind") {
    auto fn = [&gw](const Vec3& x, const Vec3& y) { return gw(x, y); };
    auto tab = ThreeBodyPotential::tabulate(fn, gw.support_radius(), 9);
    CHECK(tab.kind() == ThreeBodyKind::tabulated_6d);
    const double h = 2.0 * gw.support_radius() / 8.0;
    const Vec3 node_x(-gw.support_radius() + 4 * h, -gw.support_radius() + 4 * h, -gw.support_radius() + 5 * h);
    const Vec3 node_y(-gw.support_radius() + 4 * h, -gw.support_radius() + 3 * h, -gw.support_radius() + 4 * h);
    CHECK(tab(node_x, node_y) == Approx(gw(node_x, node_y)).epsilon(1e-12));
    CHECK(tab(Vec3(2, 0, 0), Vec3::Zero()) == 0.0);
    CHECK(tab.rescaled(2.0).support_radius() == Approx(2.0 * tab.support_radius()));
    CHECK(tab.hyperangular_average(0.0) == Approx(gw(Vec3::Zero(), Vec3::Zero())).epsilon(1e-12));
    std::mt19937_64 r2(5);
    CHECK(three_body_symmetry_defect(tab, 200, 0.5, r2) < 1.0);
  }
}

TEST_CASE("gas state", "[potentials]") {
  auto g = GasState::make(0.01, 0.5, 3.0);
  CHECK(g.effective_length == 0.5);
  CHECK(g.gas_parameter == Approx(0.01 * 0.125));
  CHECK(g.gp_length == Approx(0.5 / std::sqrt(g.gas_parameter)));
  auto h = GasState::make(1.0, 0.1, 2.0);
  CHECK(h.effective_length == 2.0);
  CHECK(h.effective_length >= h.a);
  CHECK(h.effective_length >= h.density * h.b);
  auto z = GasState::make(1.0, 0.0, 0.0);
  CHECK(z.gas_parameter == 0.0);
  CHECK(std::isinf(z.gp_length));
  CHECK_THROWS_AS(GasState::make(0.0, 1.0, 1.0), ValidationError);
}
