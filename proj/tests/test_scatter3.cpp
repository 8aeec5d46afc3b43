#include "dilute/errors.hpp"
#include "dilute/scatter3.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace dilute;
using Catch::Approx;

namespace {

constexpr double kPi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;

// Hyperradial soft sphere: interior f = I_2(k s) / s^2 with k^2 = U0 / 2,
// matched to A + B / s^4 at the support edge.
double soft_sphere_b(double u0, double radius) {
  const double k = std::sqrt(u0 / 2.0);
  const double i2 = std::cyl_bessel_i(2.0, k * radius);
  const double i3 = std::cyl_bessel_i(3.0, k * radius);
  const double beta = k * i3 * std::pow(radius, 5) / (4.0 * i2 + k * radius * i3);
  return scattering_matrix().determinant * 8.0 * kPi3 * beta;
}

std::vector<ThreeBodyPotential> battery() {
  return {ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(5.0, 1.0)),
          ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(200.0, 1.0)),
          ThreeBodyPotential::m_radial(RadialPotential::truncated_gaussian(30.0, 1.0, 0.4)),
          ThreeBodyPotential::m_radial(RadialPotential::tabulated({0.0, 0.4, 0.8, 1.2}, {6.0, 9.0, 4.0, 1.0}))};
}

}  // namespace

TEST_CASE("hyperradial soft sphere closed form", "[scatter3]") {
  for (double u0 : {0.1, 1.0, 10.0, 200.0}) {
    auto sol = solve_scattering_energy(ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(u0, 1.0)));
    CHECK(sol.b == Approx(soft_sphere_b(u0, 1.0)).epsilon(1e-7));
  }
}

TEST_CASE("zero three-body potential", "[scatter3]") {
  auto w = ThreeBodyPotential::zero();
  auto sol = solve_scattering_energy(w);
  CHECK(sol.b == 0.0);
  CHECK(sol.value(0.3) == 1.0);
  auto tr = build_truncated_3b(w, 3.0);
  for (std::size_t k = 0; k < tr.f.size(); ++k) {
    CHECK(tr.f[k] == 1.0);
    CHECK(tr.eps[k] == 0.0);
  }
  std::vector<double> r{0.0, 0.5, 1.0}, h(3, 0.0);
  CHECK(variational_energy_6d(r, h, w) == 0.0);
}

TEST_CASE("b routes and tail", "[scatter3]") {
  for (const auto& w : battery()) {
    auto sol = solve_scattering_energy(w);
    CHECK(sol.b_quadrature == Approx(sol.b).epsilon(1e-6));
    CHECK(sol.det_m == Approx(std::pow(0.75, 1.5)));
    for (double v : sol.f) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    for (std::size_t k = 1; k < sol.f.size(); ++k) CHECK(sol.f[k] >= sol.f[k - 1]);
    // The table meets the exterior 1 - beta / s^4 at the support edge.
    const double s = sol.s_match;
    CHECK(std::abs(sol.f.back() - (1.0 - sol.beta / std::pow(s, 4))) < 1e-8);
    CHECK(std::abs(sol.df.back() - 4.0 * sol.beta / std::pow(s, 5)) < 1e-8 * (1.0 + std::abs(sol.df.back())));
    CHECK(sol.value(3.0) == Approx(1.0 - sol.beta / 81.0));

    auto vm = variational_minimum_6d(w);
    CHECK(vm.energy == Approx(sol.b).epsilon(1e-2));
    CHECK(vm.fine >= sol.b * (1.0 - 1e-9));
  }
}

TEST_CASE("three-body scaling law", "[scatter3]") {
  for (const auto& w : battery()) {
    const double b = solve_scattering_energy(w).b;
    for (double delta : {0.5, 2.0, 4.0})
      CHECK(solve_scattering_energy(w.rescaled(delta)).b == Approx(std::pow(delta, 4) * b).epsilon(1e-4));
  }
}

TEST_CASE("three-body integrator order", "[scatter3]") {
  auto w = ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(10.0, 1.0));
  const double ref = soft_sphere_b(10.0, 1.0);
  const double e1 = std::abs(scattering_energy_on_mesh(w, 16) - ref);
  const double e2 = std::abs(scattering_energy_on_mesh(w, 32) - ref);
  const double e3 = std::abs(scattering_energy_on_mesh(w, 64) - ref);
  CHECK(e1 / e2 > 4.0);
  CHECK(e2 / e3 > 4.0);
}

TEST_CASE("six-dimensional variational functional", "[scatter3]") {
  for (const auto& w : battery()) {
    auto sol = solve_scattering_energy(w);
    std::vector<double> r, h;
    const int n = 2000;
    for (int k = 0; k <= n; ++k) {
      r.push_back(3.0 * k / n);
      h.push_back(sol.omega(r.back()));
    }
    CHECK(variational_energy_6d(r, h, w) == Approx(sol.b).epsilon(1e-2));
    auto bumped = h;
    for (int k = 0; k <= n; ++k)
      if (r[k] > 0.3 && r[k] < 1.3) bumped[k] += 0.05 * std::sin(std::numbers::pi * (r[k] - 0.3));
    CHECK(variational_energy_6d(r, bumped, w) >= sol.b * (1.0 - 1e-3));
  }
}

TEST_CASE("tabulated three-body potential", "[scatter3]") {
  auto w = ThreeBodyPotential::m_radial(RadialPotential::truncated_gaussian(8.0, 1.0, 0.5));
  auto tab = ThreeBodyPotential::tabulate([&w](const Vec3& x, const Vec3& y) { return w(x, y); },
                                          w.support_radius(), 11);
  CHECK_THROWS_AS(solve_scattering_energy(tab), ValidationError);
  const double b = solve_scattering_energy(w).b;
  auto vm = variational_minimum_6d(tab, 256);
  CHECK(vm.energy == Approx(b).epsilon(0.1));
}

TEST_CASE("truncated three-body solution", "[scatter3]") {
  auto probe = battery().front();
  CHECK_THROWS_AS(build_truncated_3b(probe, 1.9 * probe.support_radius()), ValidationError);
  std::mt19937_64 rng(7);
  for (const auto& w : battery()) {
    for (double factor : {2.0, 3.0, 6.0}) {
      const double ell = factor * w.support_radius();
      auto tr = build_truncated_3b(w, ell);
      CHECK(tr.ell_tilde == Approx(std::sqrt(1.5) * ell));
      for (double v : tr.f) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      CHECK(tr.eps_integral == Approx(tr.b).epsilon(2e-2));
      CHECK(tr.support_ratio <= 1.0);
      CHECK(std::isfinite(tr.c_omega));
      CHECK(tr.c_omega < 1.0);
      CHECK(tr.value(ell) == 1.0);
      auto rep = check_disentangling(tr, 20000, rng);
      CHECK(rep.violations == 0);
      CHECK(rep.covered > 0);
    }
  }
}

TEST_CASE("truncated profile respects relabeling", "[scatter3]") {
  auto tr = build_truncated_3b(battery()[2], 3.0);
  const Vec3 x1(0.1, 0.2, -0.3), x2(-0.4, 0.3, 0.2), x3(0.5, -0.1, 0.0);
  const double v = tr.value(x1 - x2, x1 - x3);
  CHECK(tr.value(x2 - x1, x2 - x3) == Approx(v).epsilon(1e-14));
  CHECK(tr.value(x3 - x2, x3 - x1) == Approx(v).epsilon(1e-14));
  CHECK(tr.value(x1 - x3, x1 - x2) == v);
}
