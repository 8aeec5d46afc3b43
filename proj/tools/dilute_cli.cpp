// dilute: command-line front end for the scattering solvers, the Dyson and
// Temple checks, exact grid ground states, Jastrow Monte Carlo and sweeps.

#include "dilute/dyson.hpp"
#include "dilute/errors.hpp"
#include "dilute/experiment.hpp"
#include "dilute/jastrow.hpp"
#include "dilute/scatter2.hpp"
#include "dilute/scatter3.hpp"
#include "dilute/spectral.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

using namespace dilute;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> workers;
};

std::string num(double v) { return fmt::format("{:.12g}", v); }

ExperimentConfig load(const Globals& g) {
  require(!g.config.empty(), "--config is required for this subcommand");
  ExperimentConfig cfg = load_config(g.config);
  if (g.seed) cfg.seed = g.seed;
  if (g.workers) cfg.workers = *g.workers;
  if (!g.out.empty()) cfg.output = g.out;
  require(cfg.seed.has_value(), "run.seed in the config or --seed is required");
  return cfg;
}

void emit(const ExperimentConfig& cfg, const std::string& text) {
  if (cfg.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.output);
  require(static_cast<bool>(out), "cannot write " + cfg.output.string());
  out << text;
}

struct Options {
  std::string table;   // scatter2 / scatter3 profile dump
  double ell = 0.0;    // truncation length for the scatter2 dump
  long draws = 10000;  // dyson-check collision configurations
  double cut = 0.1;
  int levels = 3;
  std::optional<int> particles;
  std::optional<double> density, box, ell1, ell2;
  std::string dump_path;
  long dump_every = 100;
};

void write_table(const std::string& path, const std::vector<double>& x, const std::vector<double>& y) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write " + path);
  for (std::size_t k = 0; k < x.size(); ++k) out << num(x[k]) << ' ' << num(y[k]) << '\n';
}

void run_scatter2(const Globals& g, const Options& o) {
  const auto cfg = load(g);
  require(!cfg.two_body.is_zero(), "scatter2: potentials.two_body is zero");
  std::string text = "# dilute-scatter2 v1\nalpha,a,c,r_match,a_variational,steps\n";
  for (double alpha : cfg.alphas) {
    const auto v = cfg.two_body.rescaled(alpha);
    const auto sol = solve_scattering_length(v);
    const double var = variational_minimum_2b(v).energy / (8.0 * std::numbers::pi);
    text += fmt::format("{},{},{},{},{},{}\n", num(alpha), num(sol.a), num(sol.c), num(sol.r_match), num(var), sol.steps);
  }
  emit(cfg, text);
  if (!o.table.empty()) {
    const auto& v = cfg.two_body;
    const double ell = o.ell > 0.0 ? o.ell : 4.0 * v.support_radius();
    const auto tr = build_truncated_2b(v, ell);
    write_table(o.table, tr.radii, tr.f);
  }
}

void run_scatter3(const Globals& g, const Options& o) {
  const auto cfg = load(g);
  require(!cfg.three_body.is_zero(), "scatter3: potentials.three_body is zero");
  std::string text = "# dilute-scatter3 v1\ndelta,beta,b,det_m,b_quadrature,b_variational\n";
  for (double delta : cfg.deltas) {
    const auto w = cfg.three_body.rescaled(delta);
    const double var = variational_minimum_6d(w).energy;
    if (w.kind() == ThreeBodyKind::m_radial) {
      const auto sol = solve_scattering_energy(w);
      text += fmt::format("{},{},{},{},{},{}\n", num(delta), num(sol.beta), num(sol.b), num(sol.det_m),
                          num(sol.b_quadrature), num(var));
    } else {
      text += fmt::format("{},nan,{},{},nan,{}\n", num(delta), num(var), num(scattering_matrix().determinant), num(var));
    }
  }
  emit(cfg, text);
  if (!o.table.empty()) {
    require(cfg.three_body.kind() == ThreeBodyKind::m_radial, "scatter3: --dump-table needs an m_radial potential");
    const auto sol = solve_scattering_energy(cfg.three_body);
    write_table(o.table, sol.radii, sol.f);
  }
}

void run_dyson(const Globals& g, const Options& o) {
  const auto cfg = load(g);
  DysonGrid grid;
  grid.points = cfg.dyson_points;
  std::string text = "# dilute-dyson v1\nkind,scaling,lambda_min,tolerance,rhs,pass,critical_multiplier\n";
  bool pass = true;
  const auto s2 = Softener2B::make();
  const auto s3 = Softener3B::make();
  std::string convergence;
  if (!cfg.two_body.is_zero())
    for (double alpha : cfg.alphas) {
      const auto v = cfg.two_body.rescaled(alpha);
      const auto r = dyson2_gap(v, s2, cfg.dyson_scale * alpha, grid);
      const double crit = dyson2_critical_multiplier(v, s2, cfg.dyson_scale * alpha, grid);
      pass = pass && r.pass();
      text += fmt::format("two_body,{},{},{},{},{},{}\n", num(alpha), num(r.lambda_min), num(r.tolerance), num(r.rhs),
                          r.pass() ? 1 : 0, num(crit));
      for (const auto& row : dyson2_convergence(v, s2, cfg.dyson_scale * alpha, grid, o.levels))
        convergence += fmt::format("{},{},{},{}\n", num(alpha), row.points, num(row.result.lambda_min),
                                   num(row.result.tolerance));
    }
  if (!cfg.three_body.is_zero())
    for (double delta : cfg.deltas) {
      const auto w = cfg.three_body.rescaled(delta);
      const auto r = dyson3_gap(w, s3, cfg.dyson_scale * delta, grid);
      const double crit = dyson3_critical_multiplier(w, s3, cfg.dyson_scale * delta, grid);
      pass = pass && r.pass();
      text += fmt::format("three_body,{},{},{},{},{},{}\n", num(delta), num(r.lambda_min), num(r.tolerance), num(r.rhs),
                          r.pass() ? 1 : 0, num(crit));
    }

  std::mt19937_64 rng(*cfg.seed);
  double largest = 0.0;
  long violations = 0;
  for (long d = 0; d < o.draws; ++d) {
    const auto c = random_configuration(3 + static_cast<int>(d % 10), o.cut, 0.1, rng);
    try {
      for (double s : check_exclusion(c).sums) largest = std::max(largest, s);
    } catch (const NumericalError&) {
      ++violations;
    }
  }
  pass = pass && violations == 0;
  text += fmt::format("# exclusion\ndraws,cut,max_sum,violations\n{},{},{},{}\n", o.draws, num(o.cut), num(largest),
                      violations);
  if (!convergence.empty()) text += "# convergence\nalpha,points,lambda_min,tolerance\n" + convergence;
  text += fmt::format("# summary\n{}\n", pass ? "pass" : "fail");
  emit(cfg, text);
}

void run_temple(const Globals& g) {
  const auto cfg = load(g);
  const auto h = build_hamiltonian(cfg.grid_particles, cfg.grid_box, cfg.grid_nodes, cfg.two_body, cfg.three_body);
  const auto gs = ground_state(h, 1e-10, *cfg.seed);
  const Eigen::VectorXd flat = Eigen::VectorXd::Ones(gs.vector.size());
  const double gamma = h.kinetic_gap();
  const double upper = rayleigh(h, flat);
  const double lower = temple_bound(h, flat, gamma);
  std::string text = "# dilute-temple v1\nn,box,nodes,temple,lambda0,rayleigh,gamma\n";
  text += fmt::format("{},{},{},{},{},{},{}\n", cfg.grid_particles, num(cfg.grid_box), cfg.grid_nodes, num(lower),
                      num(gs.value), num(upper), num(gamma));
  emit(cfg, text);
}

void run_exact(const Globals& g) {
  const auto cfg = load(g);
  const auto h = build_hamiltonian(cfg.grid_particles, cfg.grid_box, cfg.grid_nodes, cfg.two_body, cfg.three_body);
  const auto gs = ground_state(h, 1e-10, *cfg.seed);
  std::string text = "# dilute-exact v1\nn,box,nodes,lambda0,residual,seed,unknowns,matvecs,symmetry_defect\n";
  text += fmt::format("{},{},{},{},{},{},{},{},{}\n", cfg.grid_particles, num(cfg.grid_box), cfg.grid_nodes,
                      num(gs.value), num(gs.residual), *cfg.seed, gs.vector.size(), gs.matvecs,
                      num(symmetry_defect(h, gs.vector)));
  emit(cfg, text);
}

void run_jastrow(const Globals& g, const Options& o) {
  const auto cfg = load(g);
  const int n = o.particles.value_or(cfg.particles);
  double box = 0.0;
  if (o.box) {
    box = *o.box;
  } else if (o.density) {
    box = std::cbrt(n / *o.density);
  } else {
    require(cfg.densities.size() == 1, "jastrow: give --density, --box or exactly one sweep.density");
    box = std::cbrt(n / cfg.densities.front());
  }
  const auto tp = TrialParams::make(n, box, cfg.two_body, cfg.three_body, o.ell1, o.ell2);
  const double rho = tp.density();
  McConfig mc;
  mc.steps = cfg.steps;
  mc.burn_in = cfg.steps / 5;
  mc.chains = cfg.chains;
  mc.batches = cfg.batches;
  mc.seed = *cfg.seed;
  mc.step_size = cfg.step_size > 0.0 ? cfg.step_size : std::min(0.5 / std::cbrt(rho), 0.45 * tp.box);
  mc.dump_every = o.dump_path.empty() ? 0 : o.dump_every;
  std::vector<Snapshot> snaps;
  const auto e = mc_estimate(tp, mc, cfg.workers, o.dump_path.empty() ? nullptr : &snaps);
  if (!e.warning.empty()) std::cerr << "warning: " << e.warning << "\n";

  std::string header = "n,box,rho,ell1,ell2,a,b";
  for (const char* t : kTermNames) header += fmt::format(",{0},{0}_error", t);
  header += ",total,total_error,per_volume,ratio_to_prediction,ratio_error,acceptance,effective_samples,steps,chains,seed";
  const double volume = tp.box * tp.box * tp.box;
  const double pred = 4.0 * std::numbers::pi * tp.a * rho * rho + tp.b * rho * rho * rho / 6.0;
  std::string row = fmt::format("{},{},{},{},{},{},{}", n, num(tp.box), num(rho), num(tp.ell1), num(tp.ell2), num(tp.a),
                                num(tp.b));
  for (int k = 0; k < 7; ++k) row += fmt::format(",{},{}", num(e.value[k]), num(e.error[k]));
  row += fmt::format(",{},{},{},{},{},{},{},{},{},{}", num(e.total), num(e.total_error), num(e.total / volume),
                     num(e.total / volume / pred), num(e.total_error / volume / pred), num(e.acceptance),
                     num(e.effective_samples), mc.steps, mc.chains, mc.seed);
  emit(cfg, "# dilute-jastrow v1\n" + header + "\n" + row + "\n");
  if (!o.dump_path.empty()) {
    std::ofstream out(o.dump_path);
    require(static_cast<bool>(out), "cannot write " + o.dump_path);
    out << "# dilute-samples v1\nchain,sweep,particle,x,y,z\n";
    for (const auto& s : snaps)
      for (std::size_t i = 0; i < s.x.size(); ++i)
        out << fmt::format("{},{},{},{},{},{}\n", s.chain, s.sweep, i, num(s.x[i](0)), num(s.x[i](1)), num(s.x[i](2)));
  }
}

void run_sweep_cmd(const Globals& g) {
  const auto cfg = load(g);
  const auto rows = run_sweep(cfg);
  for (const auto& r : rows)
    if (!r.ok()) std::cerr << fmt::format("row rho={} alpha={} delta={} aborted: {}\n", r.rho, r.alpha, r.delta, r.status);
  emit(cfg, sweep_csv(rows));
}

void run_report(const Globals& g, const std::string& input) {
  std::ifstream in(input);
  require(static_cast<bool>(in), "report: cannot open " + input);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto rep = emit_report(parse_sweep_csv(buf.str()));
  std::cout << rep.summary;
  if (!g.out.empty()) {
    std::ofstream out(g.out);
    require(static_cast<bool>(out), "cannot write " + g.out);
    out << rep.plot_data;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dilute Bose gas laboratory: two- and three-body scattering, operator checks and Monte Carlo bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "INI configuration file");
  app.add_option("--seed", g.seed, "Override run.seed");
  app.add_option("--out", g.out, "Output file (stdout when absent)");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);

  Options o;
  auto* scatter2 = app.add_subcommand("scatter2", "Scattering length a(V_alpha) for each alpha");
  scatter2->add_option("--dump-table", o.table, "Write the truncated profile r f_l(r) as two-column text");
  scatter2->add_option("--ell", o.ell, "Truncation length for --dump-table (default 4 R0)")->check(CLI::PositiveNumber);
  auto* scatter3 = app.add_subcommand("scatter3", "Three-body scattering energy b(W_delta) for each delta");
  scatter3->add_option("--dump-table", o.table, "Write the hyperradial profile s f(s) as two-column text");
  auto* dyson = app.add_subcommand("dyson-check", "Dyson operator inequalities and collision exclusion");
  dyson->add_option("--draws", o.draws, "Random configurations for the exclusion check")->check(CLI::NonNegativeNumber);
  dyson->add_option("--cut", o.cut, "Collision radius R for the exclusion check")->check(CLI::PositiveNumber);
  dyson->add_option("--levels", o.levels, "Grid doublings in the convergence table")->check(CLI::PositiveNumber);
  auto* temple = app.add_subcommand("temple", "Temple lower bound of the grid Hamiltonian");
  auto* exact = app.add_subcommand("exact", "Lanczos ground state of the grid Hamiltonian");
  auto* jastrow = app.add_subcommand("jastrow", "Jastrow Monte Carlo energy with the seven-term breakdown");
  jastrow->add_option("--particles", o.particles, "Particle number N (default mc.particles)")->check(CLI::PositiveNumber);
  auto* density_opt = jastrow->add_option("--density", o.density, "Density rho")->check(CLI::PositiveNumber);
  jastrow->add_option("--box", o.box, "Box side L")->check(CLI::PositiveNumber)->excludes(density_opt);
  jastrow->add_option("--ell1", o.ell1, "Pair truncation length")->check(CLI::PositiveNumber);
  jastrow->add_option("--ell2", o.ell2, "Triple truncation length")->check(CLI::PositiveNumber);
  jastrow->add_option("--dump-samples", o.dump_path, "Write sampled configurations to this CSV file");
  jastrow->add_option("--dump-every", o.dump_every, "Sweeps between dumped configurations")->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "Sweep over scalings and densities, writing a CSV table");
  auto* report = app.add_subcommand("report", "Summarise a sweep table and fit the exponent");
  std::string input;
  report->add_option("input", input, "Sweep CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*scatter2) run_scatter2(g, o);
    if (*scatter3) run_scatter3(g, o);
    if (*dyson) run_dyson(g, o);
    if (*temple) run_temple(g);
    if (*exact) run_exact(g);
    if (*jastrow) run_jastrow(g, o);
    if (*sweep) run_sweep_cmd(g);
    if (*report) run_report(g, input);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
