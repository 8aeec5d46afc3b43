#include "dilute/scatter3.hpp"

#include "dilute/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace dilute {

namespace {

constexpr double kPi3 = std::numbers::pi * std::numbers::pi * std::numbers::pi;

struct OdeRun {
  std::vector<double> s, f, df;
  double integral = 0.0;
};

// RK4 for (f, f', I) with f'' = U f / 2 - 5 f' / s and I' = s^5 U f on
// [0, S0]. The first cell uses the series f = 1 + l s^2/12 + l^2 s^4/384,
// l = U(0)/2, to step over the singular point.
OdeRun integrate_three_body(const RadialPotential& u, int steps, bool aligned) {
  const double s_end = u.support_radius();
  std::vector<double> cuts;
  if (aligned)
    for (double b : u.breakpoints())
      if (b > 0.0 && b < s_end) cuts.push_back(b);
  cuts.push_back(s_end);

  OdeRun run;
  run.s.push_back(0.0);
  run.f.push_back(1.0);
  run.df.push_back(0.0);
  std::array<double, 3> y{1.0, 0.0, 0.0};
  auto rhs = [&u](double s, const std::array<double, 3>& st) {
    const double v = u.value_unchecked(s);
    const double s2 = s * s;
    return std::array<double, 3>{st[1], 0.5 * v * st[0] - 5.0 * st[1] / s, s2 * s2 * s * v * st[0]};
  };
  double lo = 0.0;
  bool first = true;
  for (double hi : cuts) {
    const int n = std::max(1, static_cast<int>(std::ceil(steps * (hi - lo) / s_end)));
    const double h = (hi - lo) / n;
    for (int k = 0; k < n; ++k) {
      const double s = lo + h * k;
      const double s_next = k + 1 == n ? hi : lo + h * (k + 1);
      if (first) {
        const double u0 = u.value_unchecked(0.0);
        const double lam = 0.5 * u0;
        const double t = s_next, t2 = t * t;
        y[0] = 1.0 + lam * t2 / 12.0 + lam * lam * t2 * t2 / 384.0;
        y[1] = lam * t / 6.0 + lam * lam * t2 * t / 96.0;
        y[2] = u0 * t2 * t2 * t2 / 6.0;
        first = false;
      } else {
        const double sm = s + 0.5 * h;
        const auto k1 = rhs(s, y);
        std::array<double, 3> t{};
        for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k1[i];
        const auto k2 = rhs(sm, t);
        for (int i = 0; i < 3; ++i) t[i] = y[i] + 0.5 * h * k2[i];
        const auto k3 = rhs(sm, t);
        for (int i = 0; i < 3; ++i) t[i] = y[i] + h * k3[i];
        const auto k4 = rhs(s_next, t);
        for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
      }
      run.s.push_back(s_next);
      run.f.push_back(y[0]);
      run.df.push_back(y[1]);
    }
    lo = hi;
  }
  run.integral = y[2];
  return run;
}

struct TailFit {
  double amplitude = 1.0;  // A in f = A (1 - beta / s^4)
  double beta = 0.0;
};

TailFit fit_tail(const OdeRun& run) {
  const double s = run.s.back();
  TailFit fit;
  fit.amplitude = run.f.back() + run.df.back() * s / 4.0;
  const double s2 = s * s;
  fit.beta = run.df.back() * s2 * s2 * s / (4.0 * fit.amplitude);
  return fit;
}

const RadialPotential& require_profile(const ThreeBodyPotential& w) {
  require(w.kind() == ThreeBodyKind::m_radial,
          "scatter3: the ODE route needs an m-radial W; use variational_energy_6d for tabulated W");
  return w.profile();
}

}  // namespace

double scattering_energy_on_mesh(const ThreeBodyPotential& w, int steps) {
  require(steps >= 2, "scatter3: need at least two steps");
  const auto& profile = require_profile(w);
  const auto fit = fit_tail(integrate_three_body(profile, steps, true));
  return scattering_matrix().determinant * 8.0 * kPi3 * fit.beta;
}

ScatteringSolution3B solve_scattering_energy(const ThreeBodyPotential& w, int min_steps) {
  require(min_steps >= 8, "scatter3: need at least 8 steps");
  const auto& profile = require_profile(w);
  ScatteringSolution3B sol;
  sol.det_m = scattering_matrix().determinant;
  sol.s_match = profile.support_radius();
  if (profile.is_zero()) {
    sol.radii = {0.0, sol.s_match};
    sol.f = {1.0, 1.0};
    sol.df = {0.0, 0.0};
    sol.steps = 1;
    return sol;
  }
  double previous = 0.0;
  bool have_previous = false;
  for (int steps = min_steps; steps <= (1 << 22); steps *= 2) {
    OdeRun run = integrate_three_body(profile, steps, true);
    const auto fit = fit_tail(run);
    const double b = sol.det_m * 8.0 * kPi3 * fit.beta;
    if (!std::isfinite(b) || !(fit.amplitude > 0.0))
      throw NumericalError("scatter3: non-finite scattering energy");
    if (have_previous && std::abs(b - previous) <= 1e-8 * std::abs(b)) {
      sol.steps = steps;
      sol.beta = fit.beta;
      sol.b = b;
      sol.b_quadrature = sol.det_m * kPi3 * run.integral / fit.amplitude;
      sol.radii = std::move(run.s);
      sol.f = std::move(run.f);
      sol.df = std::move(run.df);
      for (auto& v : sol.f) v /= fit.amplitude;
      for (auto& v : sol.df) v /= fit.amplitude;
      if (std::abs(sol.b - sol.b_quadrature) > 1e-4 * std::abs(sol.b))
        throw NumericalError("scatter3: tail and quadrature routes for b disagree; grid too coarse");
      for (double v : sol.f)
        if (v < 0.0 || v > 1.0 + 1e-12) throw NumericalError("scatter3: profile left [0, 1]");
      return sol;
    }
    previous = b;
    have_previous = true;
  }
  throw NumericalError("scatter3: scattering energy did not converge under step refinement");
}

double ScatteringSolution3B::value(double s) const {
  if (s >= s_match) {
    const double s2 = s * s;
    return 1.0 - beta / (s2 * s2);
  }
  if (s <= 0.0) return f.front();
  auto it = std::upper_bound(radii.begin(), radii.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - radii.begin()) - 1;
  const double h = radii[k + 1] - radii[k];
  const double t = (s - radii[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * f[k] + (t3 - 2 * t2 + t) * h * df[k] + (-2 * t3 + 3 * t2) * f[k + 1] +
         (t3 - t2) * h * df[k + 1];
}

double ScatteringSolution3B::derivative(double s) const {
  if (s >= s_match) {
    const double s2 = s * s;
    return 4.0 * beta / (s2 * s2 * s);
  }
  if (s <= 0.0) return 0.0;
  auto it = std::upper_bound(radii.begin(), radii.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - radii.begin()) - 1;
  const double h = radii[k + 1] - radii[k];
  const double t = (s - radii[k]) / h;
  const double t2 = t * t;
  return ((6 * t2 - 6 * t) * f[k] + (3 * t2 - 4 * t + 1) * h * df[k] + (-6 * t2 + 6 * t) * f[k + 1] +
          (3 * t2 - 2 * t) * h * df[k + 1]) /
         h;
}

namespace {

RadialProblem six_dim_problem(const ThreeBodyPotential& w, double outer) {
  RadialProblem pb;
  pb.dimension = 6;
  pb.measure = scattering_matrix().determinant * kPi3;
  pb.outer = outer;
  if (w.kind() == ThreeBodyKind::m_radial) {
    const auto profile = w.profile();
    pb.potential = [profile](double s) { return profile.value_unchecked(s); };
    pb.breakpoints = profile.breakpoints();
    return pb;
  }
  // Hyperangular average on a fine table, linearly interpolated.
  const double s_max = std::sqrt(2.0) * w.support_radius();
  const int n = 400;
  std::vector<double> table(n + 1);
  for (int k = 0; k <= n; ++k) table[static_cast<std::size_t>(k)] = w.hyperangular_average(s_max * k / n);
  pb.potential = [table, s_max, n](double s) {
    if (s >= s_max) return 0.0;
    const double t = s / s_max * n;
    const auto k = std::min(static_cast<std::size_t>(t), static_cast<std::size_t>(n - 1));
    const double frac = t - static_cast<double>(k);
    return (1.0 - frac) * table[k] + frac * table[k + 1];
  };
  return pb;
}

double default_outer(const ThreeBodyPotential& w) {
  if (w.kind() == ThreeBodyKind::m_radial) return w.profile().support_radius();
  return std::sqrt(2.0) * w.support_radius();
}

}  // namespace

double variational_energy_6d(const std::vector<double>& radii, const std::vector<double>& h,
                             const ThreeBodyPotential& w) {
  require(radii.size() == h.size() && radii.size() >= 2, "variational_energy_6d: bad profile table");
  const auto pb = six_dim_problem(w, radii.back());
  const double fine = radial_functional(pb, radii, h);
  if (radii.size() >= 5 && radii.size() % 2 == 1) {
    std::vector<double> rc, hc;
    for (std::size_t k = 0; k < radii.size(); k += 2) {
      rc.push_back(radii[k]);
      hc.push_back(h[k]);
    }
    const double coarse = radial_functional(pb, rc, hc);
    const double extrapolated = (4.0 * fine - coarse) / 3.0;
    if (std::abs(extrapolated - fine) > 1e-2 * std::abs(fine) + 1e-300)
      throw NumericalError("variational_energy_6d: profile grid too coarse (Richardson disagreement > 1%)");
  }
  return fine;
}

VariationalMinimum variational_minimum_6d(const ThreeBodyPotential& w, int elements) {
  return radial_minimum_extrapolated(six_dim_problem(w, default_outer(w)), elements);
}

double TruncatedSolution3B::value(double s) const { return eval(s).first; }

std::pair<double, double> TruncatedSolution3B::eval(double s) const {
  if (s >= ell) return {1.0, 0.0};
  const auto [f, df] = table_.eval(s);
  return {std::clamp(f, 0.0, 1.0), df};
}

TruncatedSolution3B build_truncated_3b(const ThreeBodyPotential& w, double ell, int nodes) {
  const double r0 = w.support_radius();
  require(ell >= 2.0 * r0, "build_truncated_3b: cut-off must satisfy l >= 2 R0");
  require(nodes >= 64, "build_truncated_3b: need at least 64 nodes");
  const auto& profile = require_profile(w);
  const auto sol = solve_scattering_energy(w);
  const auto& sm = scattering_matrix();
  const double s0 = profile.support_radius();
  const bool free = profile.is_zero();

  TruncatedSolution3B tr;
  tr.ell = ell;
  tr.ell_tilde = std::sqrt(1.5) * ell;
  const int per_support = std::max(8, static_cast<int>(std::lround(nodes * s0 / ell)));
  const double h = s0 / per_support;
  tr.step = h;

  int refine = 1;
  OdeRun run;
  TailFit fit;
  for (; !free; refine *= 2) {
    run = integrate_three_body(profile, per_support * refine, false);
    fit = fit_tail(run);
    const double b = sm.determinant * 8.0 * kPi3 * fit.beta;
    if (std::abs(b - sol.b) <= 1e-8 * sol.b) break;
    if (refine >= 256) throw NumericalError("build_truncated_3b: interior mesh failed to resolve b");
  }
  tr.beta = free ? 0.0 : fit.beta;
  tr.b = sm.determinant * 8.0 * kPi3 * tr.beta;

  const int last = static_cast<int>(std::ceil(ell / h)) + 2;
  const std::size_t count = static_cast<std::size_t>(last) + 1;
  tr.radii.resize(count);
  tr.f.resize(count);
  tr.df.resize(count);
  tr.omega.resize(count);
  tr.eps.assign(count, 0.0);
  std::vector<double> u_node(count, 0.0);
  const HarmonicCutoff cutoff(6);
  for (std::size_t k = 0; k < count; ++k) {
    const int ki = static_cast<int>(k);
    const double s = ki <= per_support ? s0 * ki / per_support : h * static_cast<double>(k);
    tr.radii[k] = s;
    double f0, df0;
    if (free) {
      f0 = 1.0;
      df0 = 0.0;
    } else if (ki <= per_support) {
      f0 = run.f[static_cast<std::size_t>(ki * refine)] / fit.amplitude;
      df0 = run.df[static_cast<std::size_t>(ki * refine)] / fit.amplitude;
    } else {
      const double s4 = s * s * s * s;
      f0 = 1.0 - tr.beta / s4;
      df0 = 4.0 * tr.beta / (s4 * s);
    }
    const double t = s / ell;
    const double chi = cutoff(t);
    const double om = chi > 0.0 ? chi * (1.0 - f0) : 0.0;
    tr.omega[k] = om;
    tr.f[k] = 1.0 - om;
    tr.df[k] = chi > 0.0 ? -cutoff.derivative(t) * (1.0 - f0) / ell + chi * df0 : 0.0;
    if (ki < per_support)
      u_node[k] = profile.value_unchecked(s);
    else if (ki == per_support)
      u_node[k] = 0.5 * profile.value_unchecked(s0);
  }

  const double measure = sm.determinant * kPi3;
  double max_eps = 0.0, support_s = 0.0;
  for (std::size_t k = 0; k + 1 < count; ++k) {
    const double sp = tr.radii[k] + 0.5 * h;
    const double sm_ = k == 0 ? 0.0 : tr.radii[k] - 0.5 * h;
    const double sp5 = std::pow(sp, 5), sm5 = std::pow(sm_, 5);
    const double volume = (sp5 * sp - sm5 * sm_) / 6.0;
    const double flux = sp5 * (tr.f[k + 1] - tr.f[k]) - (k == 0 ? 0.0 : sm5 * (tr.f[k] - tr.f[k - 1]));
    tr.eps[k] = -2.0 * flux / (h * volume) + u_node[k] * tr.f[k];
    tr.eps_integral += measure * volume * tr.eps[k];
    if (tr.eps[k] != 0.0) support_s = tr.radii[k];
    max_eps = std::max(max_eps, std::abs(tr.eps[k]));
  }
  tr.eps_support = sm.norm * support_s;
  tr.support_ratio = tr.eps_support / (2.0 * ell * sm.norm);
  if (tr.b > 0.0) {
    tr.c_eps = max_eps * std::pow(ell, 6) / tr.b;
    for (std::size_t k = 1; k < count; ++k)
      tr.c_omega = std::max(tr.c_omega, tr.omega[k] * std::pow(sm.norm * tr.radii[k], 4) / tr.b);
  }
  tr.table_ = HermiteTable(0.0, h, tr.f, tr.df);
  return tr;
}

DisentanglingReport check_disentangling(const TruncatedSolution3B& tr, long samples, std::mt19937_64& rng) {
  DisentanglingReport rep;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto draw = [&]() {
    Vec3 d(gauss(rng), gauss(rng), gauss(rng));
    d.normalize();
    return Vec3(d * (2.0 * tr.ell_tilde * uni(rng)));
  };
  for (long n = 0; n < samples; ++n) {
    const Vec3 x1 = draw(), x2 = draw();
    const double v = tr.value(x1, x2);
    ++rep.samples;
    if (v < 0.0 || v > 1.0) ++rep.violations;
    if (x1.norm() >= tr.ell_tilde || x2.norm() >= tr.ell_tilde) {
      ++rep.covered;
      if (v != 1.0) ++rep.violations;
    }
  }
  return rep;
}

}  // namespace dilute
