#include "dilute/experiment.hpp"

#include "dilute/errors.hpp"
#include "dilute/scatter2.hpp"
#include "dilute/scatter3.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <thread>

namespace dilute {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

double number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ValidationError("expected a number for " + what + ", got '" + text + "'");
}

std::vector<double> number_list(const std::string& text, const std::string& what) {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(","));
  std::vector<double> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(number(p, what));
  }
  return out;
}

RadialPotential two_body_from(const std::vector<std::string>& w, std::size_t at, const std::filesystem::path& base) {
  require(w.size() > at, "potential spec is empty");
  const std::string& kind = w[at];
  const std::size_t args = w.size() - at - 1;
  auto arg = [&](std::size_t i) { return number(w[at + 1 + i], "potential " + kind); };
  if (kind == "zero" && args == 0) return RadialPotential::zero();
  if (kind == "soft_sphere" && args == 2) return RadialPotential::soft_sphere(arg(0), arg(1));
  if (kind == "gaussian" && args == 3) return RadialPotential::truncated_gaussian(arg(0), arg(1), arg(2));
  if (kind == "table" && args == 1) {
    std::filesystem::path p = w[at + 1];
    if (p.is_relative() && !base.empty()) p = base / p;
    return load_radial_table(p);
  }
  throw ValidationError("unknown potential spec '" + boost::join(std::vector<std::string>(w.begin() + static_cast<long>(at), w.end()), " ") +
                        "'; use zero, soft_sphere V0 R, gaussian V0 R w or table PATH");
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

std::string num(double v) { return fmt::format("{:.12g}", v); }

}  // namespace

RadialPotential parse_two_body(const std::string& spec, const std::filesystem::path& base) {
  return two_body_from(words(spec), 0, base);
}

ThreeBodyPotential parse_three_body(const std::string& spec, const std::filesystem::path& base) {
  const auto w = words(spec);
  require(!w.empty(), "three-body spec is empty");
  if (w.size() == 1 && w[0] == "zero") return ThreeBodyPotential::zero();
  require(w[0] == "m_radial", "unknown three-body spec '" + spec + "'; use zero or m_radial <two-body spec>");
  return ThreeBodyPotential::m_radial(two_body_from(w, 1, base));
}

void ExperimentConfig::validate() const {
  require(!alphas.empty() && !deltas.empty() && !densities.empty(), "config: alpha, delta and density lists must be non-empty");
  for (double v : alphas) require(v > 0.0, "config: alpha values must be positive");
  for (double v : deltas) require(v > 0.0, "config: delta values must be positive");
  for (double v : densities) require(v > 0.0, "config: densities must be positive");
  require(particles >= 2, "config: mc.particles must be at least 2");
  require(steps > 0 && chains >= 1 && batches >= 2, "config: invalid Monte Carlo settings");
  require(step_size >= 0.0, "config: mc.step_size must be nonnegative");
  require(grid_particles >= 1 && grid_box > 0.0 && grid_nodes >= 2, "config: invalid grid settings");
  require(dyson_scale > 0.0 && dyson_points >= 10, "config: invalid dyson settings");
  require(workers >= 1, "config: workers must be at least 1");
  require(seed.has_value(), "config: run.seed must be set");
  validate_window(lower_alpha, lower_beta > 0.0 ? lower_beta : 0.5 * (lower_alpha - 1.0 / 3.0 + (7.0 * lower_alpha - 2.0) / 12.0), window);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "potentials.two_body", "potentials.three_body", "scaling.alpha", "scaling.delta", "sweep.density",
      "mc.particles",        "mc.steps",              "mc.chains",     "mc.batches",    "mc.step_size",
      "lower.alpha",         "lower.beta",            "lower.window",  "grid.particles", "grid.box",
      "grid.nodes",          "dyson.scale",           "dyson.points",  "output.path",   "run.seed",
      "run.workers"};
  return keys;
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  const std::set<std::string> known(config_keys().begin(), config_keys().end());
  for (const auto& [section, body] : tree) {
    require(!body.empty() || body.data().empty(), "config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body)
      require(known.count(section + "." + key) > 0, "config: unknown key '" + section + "." + key + "'");
  }
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(key)) return boost::trim_copy(*v);
    return std::nullopt;
  };
  auto integer = [&](const std::string& key, long fallback) {
    const auto v = get(key);
    if (!v) return fallback;
    const double d = number(*v, key);
    require(d == std::floor(d) && std::abs(d) < 1e15, "config: " + key + " must be an integer");
    return static_cast<long>(d);
  };
  auto real = [&](const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? number(*v, key) : fallback;
  };

  ExperimentConfig cfg;
  if (auto v = get("potentials.two_body")) cfg.two_body_spec = *v;
  if (auto v = get("potentials.three_body")) cfg.three_body_spec = *v;
  cfg.two_body = parse_two_body(cfg.two_body_spec, base);
  cfg.three_body = parse_three_body(cfg.three_body_spec, base);
  if (auto v = get("scaling.alpha")) cfg.alphas = number_list(*v, "scaling.alpha");
  if (auto v = get("scaling.delta")) cfg.deltas = number_list(*v, "scaling.delta");
  if (auto v = get("sweep.density")) cfg.densities = number_list(*v, "sweep.density");
  cfg.particles = static_cast<int>(integer("mc.particles", cfg.particles));
  cfg.steps = integer("mc.steps", cfg.steps);
  cfg.chains = static_cast<int>(integer("mc.chains", cfg.chains));
  cfg.batches = static_cast<int>(integer("mc.batches", cfg.batches));
  cfg.step_size = real("mc.step_size", cfg.step_size);
  cfg.lower_alpha = real("lower.alpha", cfg.lower_alpha);
  cfg.lower_beta = real("lower.beta", cfg.lower_beta);
  if (auto v = get("lower.window")) {
    require(*v == "statement" || *v == "proof", "config: lower.window must be statement or proof");
    cfg.window = *v == "proof" ? AlphaWindow::proof : AlphaWindow::statement;
  }
  cfg.grid_particles = static_cast<int>(integer("grid.particles", cfg.grid_particles));
  cfg.grid_box = real("grid.box", cfg.grid_box);
  cfg.grid_nodes = static_cast<int>(integer("grid.nodes", cfg.grid_nodes));
  cfg.dyson_scale = real("dyson.scale", cfg.dyson_scale);
  cfg.dyson_points = static_cast<int>(integer("dyson.points", cfg.dyson_points));
  if (auto v = get("output.path")) cfg.output = *v;
  if (auto v = get("run.seed")) {
    require(!v->empty() && v->find_first_not_of("0123456789") == std::string::npos, "config: run.seed must be an unsigned integer");
    cfg.seed = std::stoull(*v);
  }
  cfg.workers = static_cast<int>(integer("run.workers", cfg.workers));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

std::optional<ExponentFit> fit_exponent(const std::vector<SweepRow>& rows) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!r.ok() || !(r.y > 0.0) || !std::isfinite(r.ratio_upper)) continue;
    const double dev = std::abs(r.ratio_upper - 1.0);
    if (!(dev > 0.0)) return std::nullopt;
    xs.push_back(std::log(r.y));
    ys.push_back(std::log(dev));
  }
  const std::size_t n = xs.size();
  if (n < 3) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i] / static_cast<double>(n);
    my += ys[i] / static_cast<double>(n);
  }
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 1e-12 * static_cast<double>(n)) return std::nullopt;
  ExponentFit fit;
  fit.nu = sxy / sxx;
  fit.intercept = my - fit.nu * mx;
  fit.points = static_cast<int>(n);
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = ys[i] - fit.intercept - fit.nu * xs[i];
    rss += e * e;
  }
  fit.nu_error = n > 2 ? std::sqrt(rss / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

SweepRow sweep_row(const ExperimentConfig& cfg, double alpha, double delta, double rho, std::size_t index) {
  SweepRow row;
  row.alpha = alpha;
  row.delta = delta;
  row.rho = rho;
  row.e_upper = row.e_upper_error = row.e_lower = row.ratio_upper = row.ratio_upper_error = row.ratio_lower = kNaN;
  row.nu_hat = kNaN;
  try {
    const RadialPotential v = cfg.two_body.rescaled(alpha);
    const ThreeBodyPotential w = cfg.three_body.rescaled(delta);
    row.a = v.is_zero() ? 0.0 : solve_scattering_length(v).a;
    if (!w.is_zero())
      row.b = w.kind() == ThreeBodyKind::m_radial ? solve_scattering_energy(w).b : variational_minimum_6d(w).energy;
    const GasState gas = GasState::make(rho, row.a, row.b);
    row.a_eff = gas.effective_length;
    row.y = gas.gas_parameter;
    row.e_pred = 4.0 * std::numbers::pi * row.a * rho * rho + row.b * rho * rho * rho / 6.0;
    require(row.e_pred > 0.0, "both interactions vanish");

    std::optional<TrialParams> tp;
    std::string last_reason;
    for (int n = cfg.particles; n >= 2 && !tp; --n) {
      try {
        tp = TrialParams::make(n, std::cbrt(n / rho), v, w);
      } catch (const ValidationError& e) {
        last_reason = e.what();
      }
    }
    if (!tp) throw ValidationError("no feasible particle number: " + last_reason);
    row.n = tp->n;
    McConfig mc;
    mc.steps = cfg.steps;
    mc.burn_in = cfg.steps / 5;
    mc.chains = cfg.chains;
    mc.batches = cfg.batches;
    mc.seed = *cfg.seed + 1000003ULL * static_cast<std::uint64_t>(index);
    mc.step_size = cfg.step_size > 0.0 ? cfg.step_size : std::min(0.5 / std::cbrt(rho), 0.45 * tp->box);
    const EnergyBreakdown e = mc_estimate(*tp, mc);
    const double volume = tp->box * tp->box * tp->box;
    row.e_upper = e.total / volume;
    row.e_upper_error = e.total_error / volume;
    row.acceptance = e.acceptance;
    row.ratio_upper = row.e_upper / row.e_pred;
    row.ratio_upper_error = row.e_upper_error / row.e_pred;

    const double beta =
        cfg.lower_beta > 0.0 ? cfg.lower_beta : 0.5 * (cfg.lower_alpha - 1.0 / 3.0 + (7.0 * cfg.lower_alpha - 2.0) / 12.0);
    const TempleConfig temple = TempleConfig::make(row.y, cfg.lower_alpha, beta, cfg.window);
    const double ell = row.a_eff * std::pow(row.y, -cfg.lower_alpha);
    const int n_box = static_cast<int>(std::floor(rho * ell * ell * ell));
    const LowerBoundReport lower = prop_lower_bound(n_box, ell, row.a, row.b, rho, temple, cfg.window);
    row.e_lower = lower.bound() / (ell * ell * ell);
    row.ratio_lower = row.e_lower / row.e_pred;
  } catch (const std::exception& e) {
    row.status = clean(e.what());
  }
  return row;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  struct Job {
    double alpha, delta, rho;
  };
  std::vector<Job> jobs;
  for (double a : cfg.alphas)
    for (double d : cfg.deltas)
      for (double r : cfg.densities) jobs.push_back({a, d, r});
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) rows[i] = sweep_row(cfg, jobs[i].alpha, jobs[i].delta, jobs[i].rho, i);
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (const auto fit = fit_exponent(rows))
    for (auto& r : rows) r.nu_hat = fit->nu;
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  out += "rho,a,b,a_eff,Y,e_pred,e_upper,e_upper_error,e_lower,ratio_upper,ratio_upper_error,ratio_lower,nu_hat,"
         "alpha,delta,n,acceptance,status\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.rho), num(r.a), num(r.b),
                       num(r.a_eff), num(r.y), num(r.e_pred), num(r.e_upper), num(r.e_upper_error), num(r.e_lower),
                       num(r.ratio_upper), num(r.ratio_upper_error), num(r.ratio_lower), num(r.nu_hat), num(r.alpha),
                       num(r.delta), r.n, num(r.acceptance), clean(r.status));
  }
  return out;
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(std::getline(in, line) && boost::trim_copy(line) == kSweepHeader,
          std::string("sweep table: first line must be '") + kSweepHeader + "'");
  require(static_cast<bool>(std::getline(in, line)), "sweep table: missing column header");
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (boost::trim_copy(line).empty() || line[0] == '#') continue;
    std::vector<std::string> f;
    boost::split(f, line, boost::is_any_of(","));
    require(f.size() == 18, "sweep table: expected 18 columns, got " + std::to_string(f.size()));
    SweepRow r;
    double* fields[] = {&r.rho,     &r.a,           &r.b,       &r.a_eff,       &r.y,
                        &r.e_pred,  &r.e_upper,     &r.e_upper_error,           &r.e_lower,
                        &r.ratio_upper, &r.ratio_upper_error, &r.ratio_lower, &r.nu_hat,
                        &r.alpha,   &r.delta};
    for (std::size_t k = 0; k < 15; ++k) *fields[k] = number(boost::trim_copy(f[k]), "sweep column " + std::to_string(k + 1));
    r.n = static_cast<int>(number(boost::trim_copy(f[15]), "sweep column n"));
    r.acceptance = number(boost::trim_copy(f[16]), "sweep column acceptance");
    r.status = boost::trim_copy(f[17]);
    rows.push_back(r);
  }
  return rows;
}

Report emit_report(const std::vector<SweepRow>& rows) {
  require(!rows.empty(), "report: the sweep table has no rows");
  Report rep;
  int ok = 0;
  std::string lines;
  for (const auto& r : rows) {
    if (r.ok()) {
      ++ok;
      lines += fmt::format("  Y={:<12.4g} rho={:<12.4g} N={:<4} upper/pred={:.4f} +- {:.4f}  lower/pred={:.4g}\n", r.y,
                           r.rho, r.n, r.ratio_upper, r.ratio_upper_error, r.ratio_lower);
      rep.plot_data += fmt::format("{} {} {} {}\n", num(r.y), num(r.ratio_upper), num(r.ratio_upper_error), num(r.ratio_lower));
    } else {
      lines += fmt::format("  rho={:<12.4g} aborted: {}\n", r.rho, r.status);
    }
  }
  rep.plot_data = "# Y ratio_upper ratio_upper_error ratio_lower\n" + rep.plot_data;
  rep.summary = fmt::format("{} rows, {} ok\n", rows.size(), ok) + lines;
  if (ok < 3) {
    rep.summary += "fit skipped: fewer than 3 usable rows\n";
  } else if ((rep.fit = fit_exponent(rows))) {
    rep.summary += fmt::format("nu_hat = {:.4f} +- {:.4f} from {} rows (|ratio - 1| ~ Y^nu)\n", rep.fit->nu,
                               rep.fit->nu_error, rep.fit->points);
  } else {
    rep.summary += "fit refused: degenerate regression (identical Y or ratio exactly 1)\n";
  }
  return rep;
}

}  // namespace dilute
