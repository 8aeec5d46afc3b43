#include "dilute/scatter2.hpp"

#include "dilute/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dilute {

namespace {

constexpr double kPi = std::numbers::pi;

struct OdeRun {
  std::vector<double> r, u, du;
  double integral = 0.0;
};

// RK4 for (u, u', I) with u'' = V u / 2 and I' = r V u on [0, R0].
OdeRun integrate_two_body(const RadialPotential& p, int steps, bool aligned) {
  const double r_end = p.support_radius();
  std::vector<double> cuts;
  if (aligned)
    for (double b : p.breakpoints())
      if (b > 0.0 && b < r_end) cuts.push_back(b);
  cuts.push_back(r_end);

  OdeRun run;
  run.r.push_back(0.0);
  run.u.push_back(0.0);
  run.du.push_back(1.0);
  std::array<double, 3> y{0.0, 1.0, 0.0};
  auto rhs = [&p](double r, const std::array<double, 3>& s) {
    const double v = p.value_unchecked(r);
    return std::array<double, 3>{s[1], 0.5 * v * s[0], r * v * s[0]};
  };
  double lo = 0.0;
  for (double hi : cuts) {
    const int n = std::max(1, static_cast<int>(std::ceil(steps * (hi - lo) / r_end)));
    const double h = (hi - lo) / n;
    for (int k = 0; k < n; ++k) {
      const double r = lo + h * k;
      const double r_next = k + 1 == n ? hi : lo + h * (k + 1);
      const double rm = r + 0.5 * h;
      const auto k1 = rhs(r, y);
      std::array<double, 3> t{};
      for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k1[i];
      const auto k2 = rhs(rm, t);
      for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k2[i];
      const auto k3 = rhs(rm, t);
      for (int i = 0; i < 3; ++i) t[i] = y[i] + h * k3[i];
      const auto k4 = rhs(r_next, t);
      for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      run.r.push_back(r_next);
      run.u.push_back(y[0]);
      run.du.push_back(y[1]);
    }
    lo = hi;
  }
  run.integral = y[2];
  return run;
}

}  // namespace

double scattering_length_on_mesh(const RadialPotential& p, int steps) {
  require(steps >= 1, "scatter2: need at least one step");
  const OdeRun run = integrate_two_body(p, steps, true);
  return p.support_radius() - run.u.back() / run.du.back();
}

ScatteringSolution2B solve_scattering_length(const RadialPotential& p, int min_steps) {
  require(min_steps >= 8, "scatter2: need at least 8 steps");
  ScatteringSolution2B sol;
  sol.r_match = p.support_radius();
  if (p.is_zero()) {
    sol.radii = {0.0, sol.r_match};
    sol.u = {0.0, sol.r_match};
    sol.du = {1.0, 1.0};
    sol.steps = 1;
    return sol;
  }
  double previous = 0.0;
  bool have_previous = false;
  for (int steps = min_steps; steps <= (1 << 22); steps *= 2) {
    OdeRun run = integrate_two_body(p, steps, true);
    for (double d : run.du)
      if (!(d > 0.0)) throw NumericalError("scatter2: u' not positive; zero-energy bound state or overflow");
    const double c = run.du.back();
    const double a = sol.r_match - run.u.back() / c;
    if (!std::isfinite(a)) throw NumericalError("scatter2: non-finite scattering length");
    if (have_previous && std::abs(a - previous) <= 1e-8 * std::abs(a) + 1e-15 * sol.r_match) {
      sol.a = a;
      sol.c = c;
      sol.steps = steps;
      sol.radii = std::move(run.r);
      sol.u = std::move(run.u);
      sol.du = std::move(run.du);
      for (auto& v : sol.u) v /= c;
      for (auto& v : sol.du) v /= c;
      sol.quadrature_energy = 4.0 * kPi * run.integral / c;
      return sol;
    }
    previous = a;
    have_previous = true;
  }
  throw NumericalError("scatter2: scattering length did not converge under step refinement");
}

double ScatteringSolution2B::u_at(double r) const {
  if (r >= r_match) return r - a;
  if (r <= 0.0) return 0.0;
  auto it = std::upper_bound(radii.begin(), radii.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - radii.begin()) - 1;
  const double h = radii[k + 1] - radii[k];
  const double s = (r - radii[k]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * u[k] + (s3 - 2 * s2 + s) * h * du[k] + (-2 * s3 + 3 * s2) * u[k + 1] +
         (s3 - s2) * h * du[k + 1];
}

double ScatteringSolution2B::f(double r) const {
  if (r >= r_match) return 1.0 - a / r;
  if (r <= 0.0) return du.front();
  return u_at(r) / r;
}

double ScatteringSolution2B::f_derivative(double r) const {
  if (r >= r_match) return a / (r * r);
  if (r <= 1e-5 * r_match) return 0.0;
  auto it = std::upper_bound(radii.begin(), radii.end(), r);
  const std::size_t k = static_cast<std::size_t>(it - radii.begin()) - 1;
  const double h = radii[k + 1] - radii[k];
  const double s = (r - radii[k]) / h;
  const double s2 = s * s;
  const double dudr = ((6 * s2 - 6 * s) * u[k] + (3 * s2 - 4 * s + 1) * h * du[k] +
                       (-6 * s2 + 6 * s) * u[k + 1] + (3 * s2 - 2 * s) * h * du[k + 1]) /
                      h;
  return (dudr * r - u_at(r)) / (r * r);
}

namespace {

RadialProblem two_body_problem(const RadialPotential& p, double outer) {
  RadialProblem pb;
  pb.potential = [p](double r) { return p.value_unchecked(r); };
  pb.breakpoints = p.breakpoints();
  pb.outer = outer;
  pb.dimension = 3;
  pb.measure = 4.0 * kPi;
  return pb;
}

}  // namespace

double variational_energy_2b(const std::vector<double>& radii, const std::vector<double>& g,
                             const RadialPotential& p) {
  require(radii.size() == g.size() && radii.size() >= 2, "variational_energy_2b: bad profile table");
  const auto pb = two_body_problem(p, radii.back());
  const double fine = radial_functional(pb, radii, g);
  if (radii.size() >= 5 && radii.size() % 2 == 1) {
    std::vector<double> rc, gc;
    for (std::size_t k = 0; k < radii.size(); k += 2) {
      rc.push_back(radii[k]);
      gc.push_back(g[k]);
    }
    const double coarse = radial_functional(pb, rc, gc);
    const double extrapolated = (4.0 * fine - coarse) / 3.0;
    if (std::abs(extrapolated - fine) > 1e-2 * std::abs(fine) + 1e-300)
      throw NumericalError("variational_energy_2b: profile grid too coarse (Richardson disagreement > 1%)");
  }
  return fine;
}

VariationalMinimum variational_minimum_2b(const RadialPotential& p, int elements) {
  return radial_minimum_extrapolated(two_body_problem(p, p.support_radius()), elements);
}

double TruncatedSolution2B::value(double r) const { return eval(r).first; }

std::pair<double, double> TruncatedSolution2B::eval(double r) const {
  if (r >= ell) return {1.0, 0.0};
  const auto [f, df] = table_.eval(r);
  return {std::clamp(f, 0.0, 1.0), df};
}

TruncatedSolution2B build_truncated_2b(const RadialPotential& p, double ell, int nodes) {
  const double r0 = p.support_radius();
  require(ell >= 2.0 * r0, "build_truncated_2b: cut-off must satisfy l >= 2 R0");
  require(nodes >= 64, "build_truncated_2b: need at least 64 nodes");
  const auto sol = solve_scattering_length(p);

  TruncatedSolution2B tr;
  tr.ell = ell;
  const int per_support = std::max(8, static_cast<int>(std::lround(nodes * r0 / ell)));
  const double h = r0 / per_support;
  tr.step = h;

  // Interior values come from an RK4 run whose mesh refines this one, so the
  // residual below never sees interpolation error.
  const bool free = p.is_zero();
  int refine = 1;
  OdeRun run;
  double a = 0.0;
  for (; !free; refine *= 2) {
    run = integrate_two_body(p, per_support * refine, false);
    a = r0 - run.u.back() / run.du.back();
    if (std::abs(a - sol.a) <= 1e-9 * sol.a + 1e-15 * r0) break;
    if (refine >= 256) throw NumericalError("build_truncated_2b: interior mesh failed to resolve a");
  }
  const double c = free ? 1.0 : run.du.back();
  tr.a = a;

  const int last = static_cast<int>(std::ceil(ell / h)) + 2;
  const std::size_t count = static_cast<std::size_t>(last) + 1;
  tr.radii.resize(count);
  tr.f.resize(count);
  tr.df.resize(count);
  tr.omega.resize(count);
  tr.eps.assign(count, 0.0);
  std::vector<double> v_node(count, 0.0);
  const HarmonicCutoff cutoff(3);
  for (std::size_t k = 0; k < count; ++k) {
    const int ki = static_cast<int>(k);
    const double r = ki <= per_support ? r0 * ki / per_support : h * static_cast<double>(k);
    tr.radii[k] = r;
    double f0, df0;
    if (free) {
      f0 = 1.0;
      df0 = 0.0;
    } else if (ki == 0) {
      f0 = 1.0 / c;
      df0 = 0.0;
    } else if (ki <= per_support) {
      const double u = run.u[static_cast<std::size_t>(ki * refine)] / c;
      const double du = run.du[static_cast<std::size_t>(ki * refine)] / c;
      f0 = u / r;
      df0 = (du * r - u) / (r * r);
    } else {
      f0 = 1.0 - a / r;
      df0 = a / (r * r);
    }
    const double t = r / ell;
    const double chi = cutoff(t);
    const double w = chi > 0.0 ? chi * (1.0 - f0) : 0.0;
    tr.omega[k] = w;
    tr.f[k] = 1.0 - w;
    tr.df[k] = chi > 0.0 ? -cutoff.derivative(t) * (1.0 - f0) / ell + chi * df0 : 0.0;
    if (ki < per_support)
      v_node[k] = p.value_unchecked(r);
    else if (ki == per_support)
      v_node[k] = 0.5 * p.value_unchecked(r0);
  }

  double max_eps = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double rp = tr.radii[k] + 0.5 * h;
    const double rm = k == 0 ? 0.0 : tr.radii[k] - 0.5 * h;
    const double volume = (rp * rp * rp - rm * rm * rm) / 3.0;
    const double flux = rp * rp * (tr.f[k + 1] - tr.f[k]) - (k == 0 ? 0.0 : rm * rm * (tr.f[k] - tr.f[k - 1]));
    const double lap = flux / (h * volume);
    tr.eps[k] = -2.0 * lap + v_node[k] * tr.f[k];
    tr.eps_integral += 4.0 * kPi * volume * tr.eps[k];
    if (tr.eps[k] != 0.0) tr.eps_support = tr.radii[k];
    max_eps = std::max(max_eps, std::abs(tr.eps[k]));
  }

  if (tr.a > 0.0) {
    tr.c_eps = max_eps * ell * ell * ell / tr.a;
    for (std::size_t k = 1; k < count; ++k) {
      const double r = tr.radii[k];
      tr.c_one_minus_f2 = std::max(tr.c_one_minus_f2, r * std::abs(1.0 - tr.f[k] * tr.f[k]) / tr.a);
      tr.c_grad = std::max(tr.c_grad, r * r * std::abs(tr.df[k]) / tr.a);
    }
  }
  tr.table_ = HermiteTable(0.0, h, tr.f, tr.df);
  return tr;
}

}  // namespace dilute
