// dilute_acceptance: end-to-end acceptance run, one PASS/FAIL line per criterion.

#include "dilute/dyson.hpp"
#include "dilute/errors.hpp"
#include "dilute/experiment.hpp"
#include "dilute/jastrow.hpp"
#include "dilute/scatter2.hpp"
#include "dilute/scatter3.hpp"
#include "dilute/spectral.hpp"

#include <fmt/format.h>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

using namespace dilute;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

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

int workers() { return static_cast<int>(std::max(1u, std::min(8u, std::thread::hardware_concurrency()))); }

Outcome scattering_length() {
  Outcome o;
  double worst = 0.0, worst_var = 0.0;
  for (double v0 : {0.1, 1.0, 10.0}) {
    const auto p = RadialPotential::soft_sphere(v0, 1.0);
    const double kappa = std::sqrt(v0 / 2.0);
    const double exact = 1.0 - std::tanh(kappa) / kappa;
    const double a = solve_scattering_length(p).a;
    const double var = variational_minimum_2b(p).energy / (8.0 * kPi);
    worst = std::max(worst, rel(a, exact));
    worst_var = std::max(worst_var, rel(var, exact));
  }
  o.require(worst <= 1e-6, fmt::format("ode error {:.2e}", worst));
  o.require(worst_var <= 1e-4, fmt::format("variational error {:.2e}", worst_var));
  if (o.pass) o.detail = fmt::format("ode {:.1e}, variational {:.1e}", worst, worst_var);
  return o;
}

Outcome scaling_laws() {
  Outcome o;
  double worst_a = 0.0, worst_b = 0.0;
  for (const auto& p : battery2()) {
    const double a = solve_scattering_length(p).a;
    for (double alpha : {0.5, 1.0, 2.0, 4.0})
      worst_a = std::max(worst_a, rel(solve_scattering_length(p.rescaled(alpha)).a, alpha * a));
  }
  for (const auto& w : battery3()) {
    const double b = solve_scattering_energy(w).b;
    for (double delta : {0.5, 1.0, 2.0, 4.0})
      worst_b = std::max(worst_b, rel(solve_scattering_energy(w.rescaled(delta)).b, std::pow(delta, 4) * b));
  }
  o.require(worst_a <= 1e-6, fmt::format("a scaling {:.2e}", worst_a));
  o.require(worst_b <= 1e-4, fmt::format("b scaling {:.2e}", worst_b));
  if (o.pass) o.detail = fmt::format("a {:.1e}, b {:.1e}", worst_a, worst_b);
  return o;
}

Outcome b_routes() {
  Outcome o;
  double worst_var = 0.0, worst_tail = 0.0;
  const auto battery = battery3();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto sol = solve_scattering_energy(battery[k]);
    worst_var = std::max(worst_var, rel(variational_minimum_6d(battery[k]).energy, sol.b));
    worst_tail = std::max(worst_tail, rel(sol.b_quadrature, sol.b));
  }
  o.require(worst_var <= 1e-2, fmt::format("variational route {:.2e}", worst_var));
  o.require(worst_tail <= 1e-4, fmt::format("tail identity {:.2e}", worst_tail));
  if (o.pass) o.detail = fmt::format("variational {:.1e}, tail {:.1e}", worst_var, worst_tail);
  return o;
}

Outcome bound_suite() {
  Outcome o;
  double c_min = 1e300, c_max = 0.0, worst_int2 = 0.0, worst_int3 = 0.0;
  long checked = 0;
  for (const auto& p : battery2()) {
    std::vector<double> consts;
    for (double factor : {2.0, 3.0, 8.0}) {
      const auto tr = build_truncated_2b(p, factor * p.support_radius());
      for (std::size_t k = 0; k < tr.f.size(); ++k) {
        o.require(tr.f[k] >= 0.0 && tr.f[k] <= 1.0, "f_l outside [0, 1]");
        if (tr.radii[k] > 0.0) o.require(tr.omega[k] <= tr.a / tr.radii[k] + 1e-12, "omega_l above a / r");
        const double cube = std::pow(tr.ell, 3);
        o.require(std::abs(tr.eps[k]) * cube / tr.a <= tr.c_eps * (1.0 + 1e-12), "eps_l above its constant");
        ++checked;
      }
      o.require(tr.eps_support <= tr.ell, "eps_l support beyond l");
      o.require(std::isfinite(tr.c_eps), "eps constant not finite");
      consts.push_back(tr.c_eps);
      worst_int2 = std::max(worst_int2, rel(tr.eps_integral, 8.0 * kPi * tr.a));
    }
    const auto [lo, hi] = std::minmax_element(consts.begin(), consts.end());
    o.require(*hi <= 1.05 * *lo, fmt::format("eps constant drifts {:.3g} to {:.3g}", *lo, *hi));
    c_min = std::min(c_min, *lo);
    c_max = std::max(c_max, *hi);
  }
  std::mt19937_64 rng(20240611);
  long covered = 0;
  for (const auto& w : battery3()) {
    for (double factor : {2.0, 3.0, 6.0}) {
      const auto tr = build_truncated_3b(w, factor * w.support_radius());
      for (double v : tr.f) o.require(v >= 0.0 && v <= 1.0, "f~_l outside [0, 1]");
      checked += static_cast<long>(tr.f.size());
      o.require(tr.support_ratio <= 1.0, "eps~ support too wide");
      o.require(std::isfinite(tr.c_eps) && std::isfinite(tr.c_omega), "three-body constants not finite");
      worst_int3 = std::max(worst_int3, rel(tr.eps_integral, tr.b));
      const auto rep = check_disentangling(tr, 100000, rng);
      o.require(rep.violations == 0, fmt::format("{} disentangling violations", rep.violations));
      covered += rep.covered;
    }
  }
  o.require(worst_int2 <= 1e-2, fmt::format("int eps_l off by {:.2e}", worst_int2));
  o.require(worst_int3 <= 2e-2, fmt::format("int eps~_l off by {:.2e}", worst_int3));
  if (o.pass)
    o.detail = fmt::format("{} nodes, C_eps in [{:.4g}, {:.4g}], int eps {:.1e}, int eps~ {:.1e}, {} covered samples",
                           checked, c_min, c_max, worst_int2, worst_int3, covered);
  return o;
}

Outcome dyson_gaps() {
  Outcome o;
  int flipped = 0;
  const auto s2 = Softener2B::make();
  const auto s3 = Softener3B::make();
  DysonGrid twice;
  twice.multiplier = 2.0;
  double worst = 1e300;
  for (const auto& p : battery2()) {
    const auto r = dyson2_gap(p, s2, 6.0);
    o.require(r.pass(), fmt::format("two-body gap {:.3e} below {:.3e}", r.lambda_min, r.tolerance));
    worst = std::min(worst, r.lambda_min);
    if (dyson2_gap(p, s2, 6.0, twice).lambda_min < 0.0) ++flipped;
  }
  for (const auto& w : battery3()) {
    const auto r = dyson3_gap(w, s3, 6.0);
    o.require(r.pass(), fmt::format("three-body gap {:.3e} below {:.3e}", r.lambda_min, r.tolerance));
    worst = std::min(worst, r.lambda_min);
    if (dyson3_gap(w, s3, 6.0, twice).lambda_min < 0.0) ++flipped;
  }
  o.require(flipped >= 1, "doubling the right-hand side flips no gap");
  if (o.pass) o.detail = fmt::format("smallest gap {:.2e}, {} of 8 flip when doubled", worst, flipped);
  return o;
}

Outcome collision_exclusion() {
  Outcome o;
  const long draws = 1000000;
  const double cuts[] = {0.05, 0.1, 0.2};
  std::vector<long> violations(static_cast<std::size_t>(workers()), 0);
  std::vector<std::thread> pool;
  for (int t = 0; t < workers(); ++t)
    pool.emplace_back([&, t] {
      std::seed_seq seq{91u, static_cast<unsigned>(t)};
      std::mt19937_64 rng(seq);
      for (long d = t; d < draws; d += workers()) {
        const auto c = random_configuration(3 + static_cast<int>(d % 10), cuts[d % 3], 0.1, rng);
        try {
          check_exclusion(c);
        } catch (const NumericalError&) {
          ++violations[static_cast<std::size_t>(t)];
        }
      }
    });
  for (auto& th : pool) th.join();
  long total = 0;
  for (long v : violations) total += v;
  o.require(total == 0, fmt::format("{} violating configurations", total));
  if (o.pass) o.detail = fmt::format("{} configurations, n = 3..12", draws);
  return o;
}

Outcome temple_sandwich() {
  Outcome o;
  struct Case {
    int n;
    int g;
    RadialPotential v;
    ThreeBodyPotential w;
  };
  const std::vector<Case> cases = {
      {2, 8, RadialPotential::truncated_gaussian(0.5, 1.0, 0.5), ThreeBodyPotential::zero()},
      {2, 10, RadialPotential::soft_sphere(2.0, 0.5), ThreeBodyPotential::zero()},
      {3, 4, RadialPotential::truncated_gaussian(0.5, 1.0, 0.5),
       ThreeBodyPotential::m_radial(RadialPotential::soft_sphere(1.0, 0.8))}};
  std::string detail;
  for (const auto& c : cases) {
    const auto h = build_hamiltonian(c.n, 1.0, c.g, c.v, c.w);
    const auto gs = ground_state(h, 1e-10, 3);
    const Eigen::VectorXd flat = Eigen::VectorXd::Ones(h.dimension());
    const double gamma = h.kinetic_gap();
    const double lower = temple_bound(h, flat, gamma);
    const double upper = rayleigh(h, flat);
    o.require(lower <= gs.value + 1e-8, fmt::format("n={} temple {:.10g} above {:.10g}", c.n, lower, gs.value));
    o.require(gs.value <= upper + 1e-8, fmt::format("n={} rayleigh {:.10g} below {:.10g}", c.n, upper, gs.value));
    const double equal = temple_bound(h, gs.vector, gamma);
    o.require(std::abs(equal - gs.value) <= 1e-8 * std::max(1.0, std::abs(gs.value)),
              fmt::format("n={} eigenvector gives {:.12g} vs {:.12g}", c.n, equal, gs.value));
    detail += fmt::format("{}n={}: {:.5g} <= {:.5g} <= {:.5g}", detail.empty() ? "" : ", ", c.n, lower, gs.value,
                          upper);
  }
  if (o.pass) o.detail = detail;
  return o;
}

Outcome variational_upper() {
  Outcome o;
  const auto v = RadialPotential::truncated_gaussian(8.0, 0.5, 0.2);
  const auto w = ThreeBodyPotential::m_radial(RadialPotential::truncated_gaussian(60.0, 0.5, 0.25));
  struct Case {
    std::string name;
    int n;
    RadialPotential v;
    ThreeBodyPotential w;
    int coarse, fine;
  };
  const std::vector<Case> cases = {{"V-only N=2", 2, v, ThreeBodyPotential::zero(), 6, 10},
                                   {"V-only N=3", 3, v, ThreeBodyPotential::zero(), 4, 5},
                                   {"W-only N=3", 3, RadialPotential::zero(), w, 4, 5},
                                   {"combined N=3", 3, v, w, 4, 5}};
  const double box = 3.0;
  std::string detail;
  for (const auto& c : cases) {
    const auto tp = TrialParams::make(c.n, box, c.v, c.w, {}, 1.4);
    const auto e = mc_estimate(tp, McConfig::with_steps(20000, 0.8, 17), workers());
    const double coarse = ground_state(build_hamiltonian(c.n, box, c.coarse, c.v, c.w)).value;
    const double fine = ground_state(build_hamiltonian(c.n, box, c.fine, c.v, c.w)).value;
    // Discretisation uncertainty of the grid ground state: |coarse - fine|.
    const double lambda0 = fine - std::abs(coarse - fine);
    o.require(e.total >= lambda0 - 2.0 * e.total_error,
              fmt::format("{}: {:.5g} +- {:.2g} below {:.5g}", c.name, e.total, e.total_error, lambda0));
    detail += fmt::format("{}{} {:.4g}+-{:.2g} vs {:.4g}", detail.empty() ? "" : ", ", c.name, e.total,
                          e.total_error, fine);
  }
  if (o.pass) o.detail = detail;
  return o;
}

ExperimentConfig dilute_config(long steps) {
  const double a = solve_scattering_length(RadialPotential::soft_sphere(10.0, 1.0)).a;
  std::string densities;
  for (double y : {3e-3, 1e-3, 3e-4}) densities += fmt::format("{}{:.12g}", densities.empty() ? "" : ", ", y / (a * a * a));
  auto cfg = parse_config(fmt::format(R"([potentials]
two_body = soft_sphere 10 1
three_body = m_radial soft_sphere 20 0.5
[sweep]
density = {}
[mc]
particles = 64
steps = {}
chains = 4
[run]
seed = 2024
)",
                                      densities, steps));
  cfg.workers = workers();
  return cfg;
}

Outcome dilute_limit() {
  Outcome o;
  const auto rows = run_sweep(dilute_config(60000));
  std::string detail;
  double previous = 1e300;
  for (const auto& r : rows) {
    if (!r.ok()) {
      o.require(false, fmt::format("row rho={:.3g} aborted: {}", r.rho, r.status));
      continue;
    }
    const double s = r.ratio_upper_error;
    o.require(r.n == 64, fmt::format("Y={:.1e} ran with N={}", r.y, r.n));
    o.require(r.ratio_upper >= 1.0 - 2.0 * s && r.ratio_upper <= 1.25,
              fmt::format("Y={:.1e} ratio {:.4f} +- {:.4f} outside [1 - 2 sigma, 1.25]", r.y, r.ratio_upper, s));
    o.require(std::abs(r.ratio_upper - 1.0) < previous, fmt::format("Y={:.1e} not closer to 1", r.y));
    previous = std::abs(r.ratio_upper - 1.0);
    detail += fmt::format("{}Y={:.0e}: {:.4f}+-{:.4f}", detail.empty() ? "" : ", ", r.y, r.ratio_upper, s);
  }
  const auto fit = fit_exponent(rows);
  o.require(fit.has_value() && fit->nu > 0.0, "no positive exponent");
  if (fit) detail += fmt::format(", nu_hat {:.3f}+-{:.3f}", fit->nu, fit->nu_error);
  o.detail = o.pass ? detail : o.detail + " [" + detail + "]";
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism(const std::string& cli) {
  Outcome o;
  auto cfg = dilute_config(400);
  cfg.particles = 16;
  cfg.workers = 1;
  const std::string once = sweep_csv(run_sweep(cfg));
  cfg.workers = workers();
  o.require(sweep_csv(run_sweep(cfg)) == once, "in-process sweep differs on rerun");

  const auto dir = std::filesystem::temp_directory_path() / "dilute_acceptance";
  std::filesystem::create_directories(dir);
  const auto ini = dir / "run.ini";
  std::ofstream(ini) << R"([potentials]
two_body = soft_sphere 10 1
three_body = m_radial soft_sphere 20 0.5
[scaling]
alpha = 1, 2
[sweep]
density = 3e-3
[mc]
particles = 16
steps = 400
chains = 2
[grid]
nodes = 6
[dyson]
points = 400
[run]
seed = 99
)";
  int compared = 0;
  for (const std::string sub : {"scatter2", "scatter3", "dyson-check", "temple", "exact", "jastrow", "sweep"}) {
    std::string outputs[2];
    for (int k = 0; k < 2; ++k) {
      const auto out = dir / fmt::format("{}_{}.csv", sub, k);
      const std::string cmd = fmt::format("{} --config {} --workers {} --out {} {} 2>/dev/null", cli, ini.string(),
                                          k + 1, out.string(), sub);
      const int status = std::system(cmd.c_str());
      o.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, sub + " failed");
      outputs[k] = slurp(out);
    }
    o.require(!outputs[0].empty() && outputs[0] == outputs[1], sub + " output differs on rerun");
    ++compared;
  }
  std::filesystem::remove_all(dir);
  if (o.pass) o.detail = fmt::format("sweep in-process and {} subcommands byte-identical", compared);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = DILUTE_CLI;
  bool quick = false;
  for (int k = 1; k < argc; ++k) {
    const std::string arg = argv[k];
    if (arg == "--quick") quick = true;
    else if (arg == "--cli" && k + 1 < argc) cli = argv[++k];
  }

  struct Criterion {
    std::string name;
    double budget;  // seconds
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"scattering length", 1.0, scattering_length},
      {"scaling laws", 10.0, scaling_laws},
      {"three-body routes", 30.0, b_routes},
      {"truncation bounds", 60.0, bound_suite},
      {"dyson gaps", 120.0, dyson_gaps},
      {"collision exclusion", 60.0, collision_exclusion},
      {"temple sandwich", 300.0, temple_sandwich},
      {"variational upper bound", 600.0, variational_upper},
      {"dilute limit", 7200.0, dilute_limit},
      {"determinism", 60.0, [&cli] { return determinism(cli); }},
  };

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& c = criteria[k];
    if (quick && k == 8) {
      std::cout << fmt::format("SKIP {:2d} {}\n", k + 1, c.name) << std::flush;
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget) o.require(false, fmt::format("took {:.1f} s, budget {:.0f} s", secs, c.budget));
    if (!o.pass) ++failed;
    std::cout << fmt::format("{} {:2d} {} ({:.1f} s): {}\n", o.pass ? "PASS" : "FAIL", k + 1, c.name, secs, o.detail)
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
