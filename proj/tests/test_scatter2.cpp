#include "dilute/errors.hpp"
#include "dilute/scatter2.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

using namespace dilute;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double soft_sphere_a(double v0, double r) {
  const double kappa = std::sqrt(v0 / 2.0);
  return r - std::tanh(kappa * r) / kappa;
}

std::vector<RadialPotential> battery() {
  return {RadialPotential::soft_sphere(1.0, 1.0), RadialPotential::soft_sphere(100.0, 1.0),
          RadialPotential::truncated_gaussian(20.0, 1.0, 0.4),
          RadialPotential::tabulated({0.0, 0.25, 0.6, 1.0}, {8.0, 6.0, 3.0, 1.0})};
}

}  // namespace

TEST_CASE("soft sphere closed form", "[scatter2]") {
  for (double v0 : {0.1, 1.0, 10.0, 100.0}) {
    auto sol = solve_scattering_length(RadialPotential::soft_sphere(v0, 1.0));
    CHECK(sol.a == Approx(soft_sphere_a(v0, 1.0)).epsilon(1e-7));
    CHECK(sol.r_match == 1.0);
  }
  auto wide = solve_scattering_length(RadialPotential::soft_sphere(3.0, 2.5));
  CHECK(wide.a == Approx(soft_sphere_a(3.0, 2.5)).epsilon(1e-7));
}

TEST_CASE("free equation", "[scatter2]") {
  auto sol = solve_scattering_length(RadialPotential::zero());
  CHECK(sol.a == 0.0);
  CHECK(sol.f(0.3) == 1.0);
  auto tr = build_truncated_2b(RadialPotential::zero(), 3.0);
  for (std::size_t k = 0; k < tr.f.size(); ++k) {
    CHECK(tr.f[k] == 1.0);
    CHECK(tr.eps[k] == 0.0);
  }
  CHECK(tr.eps_integral == 0.0);
}

TEST_CASE("scaling law", "[scatter2]") {
  for (const auto& p : battery()) {
    const double a = solve_scattering_length(p).a;
    for (double alpha : {0.5, 2.0, 4.0})
      CHECK(solve_scattering_length(p.rescaled(alpha)).a == Approx(alpha * a).epsilon(1e-6));
  }
}

TEST_CASE("solution shape", "[scatter2]") {
  for (const auto& p : battery()) {
    auto sol = solve_scattering_length(p);
    CHECK(sol.u.front() == 0.0);
    for (std::size_t k = 1; k < sol.u.size(); ++k) CHECK(sol.u[k] >= sol.u[k - 1]);
    // Exterior is exactly linear by construction; the table must meet it.
    CHECK(std::abs(sol.u.back() - (sol.r_match - sol.a)) <= 1e-10 * sol.r_match);
    CHECK(std::abs(sol.du.back() - 1.0) <= 1e-10);
    CHECK(sol.u_at(3.0) == Approx(3.0 - sol.a));
    CHECK(sol.quadrature_energy == Approx(8.0 * kPi * sol.a).epsilon(1e-7));
    for (double r : {0.1, 0.5, 0.9, 1.5, 4.0}) CHECK(sol.omega(r) <= sol.a / r + 1e-12);
  }
}

TEST_CASE("integrator order", "[scatter2]") {
  for (const auto& p : {RadialPotential::soft_sphere(10.0, 1.0), RadialPotential::truncated_gaussian(20.0, 1.0, 0.4)}) {
    const double ref = solve_scattering_length(p).a;
    const double e1 = std::abs(scattering_length_on_mesh(p, 16) - ref);
    const double e2 = std::abs(scattering_length_on_mesh(p, 32) - ref);
    const double e3 = std::abs(scattering_length_on_mesh(p, 64) - ref);
    CHECK(e1 / e2 > 4.0);
    CHECK(e2 / e3 > 4.0);
  }
}

TEST_CASE("variational route", "[scatter2]") {
  for (const auto& p : battery()) {
    auto sol = solve_scattering_length(p);
    const double target = 8.0 * kPi * sol.a;
    auto vm = variational_minimum_2b(p);
    CHECK(vm.energy == Approx(target).epsilon(1e-4));
    CHECK(vm.fine >= target * (1.0 - 1e-9));

    std::vector<double> r, g;
    const int n = 2000;
    for (int k = 0; k <= n; ++k) {
      r.push_back(4.0 * k / n);
      g.push_back(sol.omega(r.back()));
    }
    const double e = variational_energy_2b(r, g, p);
    CHECK(e == Approx(target).epsilon(1e-2));
    auto bumped = g;
    for (int k = 0; k <= n; ++k) {
      const double x = r[k];
      if (x > 0.5 && x < 1.5) bumped[k] += 0.05 * std::sin(kPi * (x - 0.5));
    }
    CHECK(variational_energy_2b(r, bumped, p) >= target * (1.0 - 1e-3));
  }
  std::vector<double> r{0.0, 0.5, 1.0, 1.5, 2.0}, g(5, 0.0);
  CHECK(variational_energy_2b(r, g, RadialPotential::zero()) == 0.0);
  std::vector<double> spiky{0.0, 1.0, 0.0, 1.0, 0.0};
  CHECK_THROWS_AS(variational_energy_2b(r, spiky, RadialPotential::soft_sphere(1.0, 1.0)), NumericalError);
}

TEST_CASE("truncated solution bounds", "[scatter2]") {
  CHECK_THROWS_AS(build_truncated_2b(RadialPotential::soft_sphere(1.0, 1.0), 1.9), ValidationError);
  for (const auto& p : battery()) {
    for (double ell : {2.0, 2.5, 8.0}) {
      auto tr = build_truncated_2b(p, ell);
      const double a = tr.a;
      for (std::size_t k = 0; k < tr.f.size(); ++k) {
        CHECK(tr.f[k] >= 0.0);
        CHECK(tr.f[k] <= 1.0);
        if (tr.radii[k] > 0.0) CHECK(tr.omega[k] <= a / tr.radii[k] + 1e-12);
      }
      CHECK(tr.eps_support <= ell);
      CHECK(tr.eps_integral == Approx(8.0 * kPi * a).epsilon(1e-2));
      CHECK(tr.c_one_minus_f2 <= 2.0 + 1e-9);
      CHECK(std::isfinite(tr.c_eps));
      CHECK(tr.c_eps < 400.0);
      CHECK(tr.value(ell) == 1.0);
      CHECK(tr.value(ell * 2) == 1.0);
    }
  }
}

TEST_CASE("truncated derivative table", "[scatter2]") {
  auto tr = build_truncated_2b(RadialPotential::truncated_gaussian(20.0, 1.0, 0.4), 3.0);
  for (double r : {0.3, 0.95, 1.2, 1.7, 2.2, 2.8}) {
    const double h = 1e-5;
    const double fd = (tr.value(r + h) - tr.value(r - h)) / (2 * h);
    CHECK(tr.eval(r).second == Approx(fd).epsilon(1e-5).margin(1e-9));
  }
}

TEST_CASE("eps constant does not drift with the cut-off", "[scatter2]") {
  for (const auto& p : battery()) {
    const double c1 = build_truncated_2b(p, 3.0).c_eps;
    const double c2 = build_truncated_2b(p, 12.0).c_eps;
    CHECK(c1 == Approx(c2).epsilon(0.05));
  }
}
