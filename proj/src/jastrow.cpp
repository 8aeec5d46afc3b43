#include "dilute/jastrow.hpp"

#include "dilute/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace dilute {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class CellList {
 public:
  CellList(const Positions& x, double box, double range) : box_(box), range_(range) {
    nc_ = std::clamp(static_cast<int>(std::floor(box / std::max(range, 1e-300))), 1, 32);
    cells_.resize(static_cast<std::size_t>(nc_ * nc_ * nc_));
    where_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      where_[i] = cell(x[i]);
      cells_[static_cast<std::size_t>(where_[i])].push_back(static_cast<int>(i));
    }
  }

  // Particles j != i with |x_j - at| < range, appended to out.
  void near(int i, const Vec3& at, const Positions& x, std::vector<int>& out) const {
    out.clear();
    const int c = cell(at);
    const int cx = c % nc_, cy = (c / nc_) % nc_, cz = c / (nc_ * nc_);
    const double r2 = range_ * range_;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int ax = cx + dx, ay = cy + dy, az = cz + dz;
          if (ax < 0 || ay < 0 || az < 0 || ax >= nc_ || ay >= nc_ || az >= nc_) continue;
          for (int j : cells_[static_cast<std::size_t>((az * nc_ + ay) * nc_ + ax)])
            if (j != i && (x[static_cast<std::size_t>(j)] - at).squaredNorm() < r2) out.push_back(j);
        }
  }

  void move(int i, const Vec3& to) {
    const int c = cell(to);
    int& from = where_[static_cast<std::size_t>(i)];
    if (c == from) return;
    auto& old = cells_[static_cast<std::size_t>(from)];
    *std::find(old.begin(), old.end(), i) = old.back();
    old.pop_back();
    cells_[static_cast<std::size_t>(c)].push_back(i);
    from = c;
  }

 private:
  int cell(const Vec3& p) const {
    int idx[3];
    for (int k = 0; k < 3; ++k) idx[k] = std::clamp(static_cast<int>(std::floor(p(k) / box_ * nc_)), 0, nc_ - 1);
    return (idx[2] * nc_ + idx[1]) * nc_ + idx[0];
  }

  double box_, range_;
  int nc_ = 1;
  std::vector<std::vector<int>> cells_;
  std::vector<int> where_;
};

double hyper_s(const Vec3& a, const Vec3& b, const Vec3& c) {
  return std::sqrt((2.0 / 3.0) * ((a - b).squaredNorm() + (a - c).squaredNorm() + (b - c).squaredNorm()));
}

// grad_{x_i} log f_l1(x_i - x_p).
Vec3 pair_gradient(const TrialParams& tp, const Vec3& xi, const Vec3& xp) {
  if (!tp.pair) return Vec3::Zero();
  const Vec3 d = xi - xp;
  const double r = d.norm();
  if (r >= tp.ell1 || r == 0.0) return Vec3::Zero();
  const auto [f, df] = tp.pair->eval(r);
  return (df / (f * r)) * d;
}

// grad_{x_i} log f~_l2 for the triple (i, q, r).
Vec3 triple_gradient(const TrialParams& tp, const Vec3& xi, const Vec3& xq, const Vec3& xr) {
  if (!tp.triple) return Vec3::Zero();
  const double s = hyper_s(xi, xq, xr);
  if (s >= tp.ell2 || s == 0.0) return Vec3::Zero();
  const auto [f, df] = tp.triple->eval(s);
  return (df / f) * (2.0 / (3.0 * s)) * (2.0 * xi - xq - xr);
}

// Terms of log Psi that involve particle i placed at xi; neighbours nb of xi.
double log_part(int i, const Vec3& xi, const Positions& x, const std::vector<int>& nb, const TrialParams& tp) {
  double acc = 0.0;
  for (std::size_t a = 0; a < nb.size(); ++a) {
    const Vec3& xa = x[static_cast<std::size_t>(nb[a])];
    if (tp.pair) {
      const double f = tp.pair_factor((xi - xa).norm());
      if (f <= 0.0) return kNegInf;
      acc += std::log(f);
    }
    if (tp.triple)
      for (std::size_t b = a + 1; b < nb.size(); ++b) {
        const double f = tp.triple_factor(xi, xa, x[static_cast<std::size_t>(nb[b])]);
        if (f <= 0.0) return kNegInf;
        acc += std::log(f);
      }
  }
  (void)i;
  return acc;
}

LocalTerms local_terms_with(const Positions& x, const TrialParams& tp, const CellList& cells) {
  LocalTerms out;
  auto& t = out.terms;
  std::vector<int> nb;
  std::vector<Vec3> a_vec, h_vec;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    const Vec3& xi = x[static_cast<std::size_t>(i)];
    cells.near(i, xi, x, nb);
    std::sort(nb.begin(), nb.end());
    const std::size_t m = nb.size();
    a_vec.assign(m, Vec3::Zero());
    h_vec.assign(m, Vec3::Zero());
    Vec3 ga = Vec3::Zero(), gb = Vec3::Zero();
    double a2 = 0.0, b2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const Vec3& xk = x[static_cast<std::size_t>(nb[k])];
      a_vec[k] = pair_gradient(tp, xi, xk);
      ga += a_vec[k];
      a2 += a_vec[k].squaredNorm();
      if (nb[k] > i && !tp.v.is_zero()) {
        const double r = (xi - xk).norm();
        if (r <= tp.v.support_radius()) t[I1] += tp.v.value_unchecked(r);
      }
      for (std::size_t l = k + 1; l < m; ++l) {
        const Vec3& xl = x[static_cast<std::size_t>(nb[l])];
        const Vec3 bv = triple_gradient(tp, xi, xk, xl);
        gb += bv;
        b2 += bv.squaredNorm();
        h_vec[k] += bv;
        h_vec[l] += bv;
        if (nb[k] > i && !tp.w.is_zero()) t[K1] += tp.w.at_positions(xi, xk, xl);
      }
    }
    double ah = 0.0, h2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      ah += a_vec[k].dot(h_vec[k]);
      h2 += h_vec[k].squaredNorm();
    }
    t[I1] += a2;
    t[I2] += ga.squaredNorm() - a2;
    t[J1] += 2.0 * ah;
    t[J2] += 2.0 * (ga.dot(gb) - ah);
    t[K1] += b2;
    t[K2] += h2 - 2.0 * b2;
    t[K3] += gb.squaredNorm() - b2 - (h2 - 2.0 * b2);
  }
  return out;
}

void check_positions(const Positions& x, const TrialParams& tp) {
  require(static_cast<int>(x.size()) == tp.n, "jastrow: expected " + std::to_string(tp.n) + " positions");
  for (const auto& p : x)
    require(p.minCoeff() >= 0.0 && p.maxCoeff() <= tp.box, "jastrow: positions must lie in [0, L]^3");
}

struct ChainResult {
  std::vector<std::array<double, 8>> batch_means;
  double sum = 0.0, sum2 = 0.0;
  long samples = 0;
  long accepted = 0, proposed = 0;
  std::vector<Snapshot> dump;
};

ChainResult run_chain(const TrialParams& tp, const McConfig& mc, int chain) {
  std::seed_seq seq{mc.seed, static_cast<std::uint64_t>(chain)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0), sym(-1.0, 1.0);
  const int n = tp.n;
  const int side = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  const double spacing = tp.box / side;
  Positions x;
  for (int s = 0; s < side * side * side && static_cast<int>(x.size()) < n; ++s) {
    const int ix = s % side, iy = (s / side) % side, iz = s / (side * side);
    Vec3 p((ix + 0.5) * spacing, (iy + 0.5) * spacing, (iz + 0.5) * spacing);
    for (int k = 0; k < 3; ++k) p(k) += 0.1 * spacing * sym(rng);
    x.push_back(p);
  }
  if (!std::isfinite(log_trial(x, tp))) throw NumericalError("mc_estimate: initial configuration has Psi = 0");
  CellList cells(x, tp.box, tp.range());
  std::vector<int> nb_old, nb_new;
  ChainResult res;
  const long measured = mc.steps - mc.burn_in;
  const long batch = measured / mc.batches;
  std::array<double, 8> acc{};
  long in_batch = 0;
  for (long sweep = 0; sweep < mc.steps; ++sweep) {
    for (int i = 0; i < n; ++i) {
      const Vec3 old = x[static_cast<std::size_t>(i)];
      const Vec3 trial = old + mc.step_size * Vec3(sym(rng), sym(rng), sym(rng));
      const double u = unit(rng);
      ++res.proposed;
      if (trial.minCoeff() < 0.0 || trial.maxCoeff() > tp.box) continue;
      cells.near(i, old, x, nb_old);
      cells.near(i, trial, x, nb_new);
      const double delta = log_part(i, trial, x, nb_new, tp) - log_part(i, old, x, nb_old, tp);
      if (std::log(u) < 2.0 * delta) {
        x[static_cast<std::size_t>(i)] = trial;
        cells.move(i, trial);
        ++res.accepted;
      }
    }
    if (sweep < mc.burn_in) continue;
    if (mc.dump_every > 0 && (sweep - mc.burn_in) % mc.dump_every == 0) res.dump.push_back({chain, sweep, x});
    if (res.batch_means.size() >= static_cast<std::size_t>(mc.batches)) continue;
    const LocalTerms lt = local_terms_with(x, tp, cells);
    const double total = lt.total();
    for (double v : lt.terms)
      if (!std::isfinite(v)) throw NumericalError("mc_estimate: non-finite local term");
    if (!std::isfinite(total)) throw NumericalError("mc_estimate: non-finite local energy");
    for (int k = 0; k < 7; ++k) acc[static_cast<std::size_t>(k)] += lt.terms[static_cast<std::size_t>(k)];
    acc[7] += total;
    res.sum += total;
    res.sum2 += total * total;
    ++res.samples;
    if (++in_batch == batch) {
      for (double& v : acc) v /= static_cast<double>(batch);
      res.batch_means.push_back(acc);
      acc.fill(0.0);
      in_batch = 0;
    }
  }
  return res;
}

}  // namespace

TrialParams TrialParams::make(int n, double box, const RadialPotential& v, const ThreeBodyPotential& w,
                              std::optional<double> ell1, std::optional<double> ell2, int table_nodes) {
  require(n >= 1, "TrialParams: need at least one particle");
  require(box > 0.0, "TrialParams: box side must be positive");
  TrialParams tp;
  tp.n = n;
  tp.box = box;
  tp.v = v;
  tp.w = w;
  const double rho = tp.density();
  if (!v.is_zero()) {
    tp.a = solve_scattering_length(v).a;
    tp.ell1 = ell1.value_or(std::cbrt(1.0 / rho));
    require(tp.a < tp.ell1 && tp.ell1 < box, "TrialParams: need a < l1 < L");
    tp.pair = std::make_shared<TruncatedSolution2B>(build_truncated_2b(v, tp.ell1, table_nodes));
  }
  if (!w.is_zero()) {
    tp.b = solve_scattering_energy(w).b;
    tp.ell2 = ell2.value_or(std::pow(tp.b, 0.25) * std::pow(rho * std::pow(tp.b, 0.75), -1.0 / 7.0));
    require(std::pow(tp.b, 0.25) < tp.ell2 && tp.ell2 < box, "TrialParams: need b^{1/4} < l2 < L");
    tp.triple = std::make_shared<TruncatedSolution3B>(build_truncated_3b(w, tp.ell2, table_nodes));
  }
  return tp;
}

double TrialParams::range() const {
  double r = 0.0;
  if (pair) r = std::max({r, ell1, v.support_radius()});
  if (triple) r = std::max({r, ell2, w.support_radius()});
  return r > 0.0 ? r : box;
}

double TrialParams::pair_factor(double r) const { return pair ? pair->value(r) : 1.0; }

double TrialParams::triple_factor(const Vec3& xi, const Vec3& xj, const Vec3& xk) const {
  return triple ? triple->value(hyper_s(xi, xj, xk)) : 1.0;
}

double log_trial(const Positions& x, const TrialParams& tp) {
  check_positions(x, tp);
  CellList cells(x, tp.box, tp.range());
  std::vector<int> nb, upper;
  double acc = 0.0;
  for (int i = 0; i < tp.n; ++i) {
    const Vec3& xi = x[static_cast<std::size_t>(i)];
    cells.near(i, xi, x, nb);
    upper.clear();
    for (int j : nb)
      if (j > i) upper.push_back(j);
    std::sort(upper.begin(), upper.end());
    for (std::size_t a = 0; a < upper.size(); ++a) {
      const Vec3& xa = x[static_cast<std::size_t>(upper[a])];
      const double f = tp.pair_factor((xi - xa).norm());
      if (f <= 0.0) return kNegInf;
      acc += std::log(f);
      if (!tp.triple) continue;
      for (std::size_t b = a + 1; b < upper.size(); ++b) {
        const double g = tp.triple_factor(xi, xa, x[static_cast<std::size_t>(upper[b])]);
        if (g <= 0.0) return kNegInf;
        acc += std::log(g);
      }
    }
  }
  return acc;
}

std::vector<Vec3> log_trial_gradient(const Positions& x, const TrialParams& tp) {
  check_positions(x, tp);
  CellList cells(x, tp.box, tp.range());
  std::vector<int> nb;
  std::vector<Vec3> out(x.size(), Vec3::Zero());
  for (int i = 0; i < tp.n; ++i) {
    const Vec3& xi = x[static_cast<std::size_t>(i)];
    cells.near(i, xi, x, nb);
    std::sort(nb.begin(), nb.end());
    Vec3& g = out[static_cast<std::size_t>(i)];
    for (std::size_t a = 0; a < nb.size(); ++a) {
      const Vec3& xa = x[static_cast<std::size_t>(nb[a])];
      g += pair_gradient(tp, xi, xa);
      for (std::size_t b = a + 1; b < nb.size(); ++b) g += triple_gradient(tp, xi, xa, x[static_cast<std::size_t>(nb[b])]);
    }
  }
  return out;
}

double LocalTerms::total() const {
  double s = 0.0;
  for (double v : terms) s += v;
  return s;
}

LocalTerms local_terms(const Positions& x, const TrialParams& tp) {
  check_positions(x, tp);
  return local_terms_with(x, tp, CellList(x, tp.box, tp.range()));
}

McConfig McConfig::with_steps(long steps, double step_size, std::uint64_t seed, int chains) {
  McConfig mc;
  mc.steps = steps;
  mc.burn_in = steps / 5;
  mc.step_size = step_size;
  mc.seed = seed;
  mc.chains = chains;
  return mc;
}

void McConfig::validate(double box) const {
  require(chains >= 1, "McConfig: need at least one chain");
  require(burn_in >= 0 && steps > burn_in, "McConfig: steps must exceed burn-in");
  require(batches >= 2 && steps - burn_in >= batches, "McConfig: too few measured sweeps for the batches");
  require(step_size > 0.0 && step_size < box / 2.0, "McConfig: step size must lie in (0, L/2)");
  require(dump_every >= 0, "McConfig: dump_every must be nonnegative");
}

EnergyBreakdown mc_estimate(const TrialParams& tp, const McConfig& mc, int workers, std::vector<Snapshot>* dump) {
  mc.validate(tp.box);
  require(workers >= 1, "mc_estimate: need at least one worker");
  std::vector<ChainResult> results(static_cast<std::size_t>(mc.chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(mc.chains));
  for (int first = 0; first < mc.chains; first += workers) {
    const int last = std::min(mc.chains, first + workers);
    auto work = [&](int c) {
      try {
        results[static_cast<std::size_t>(c)] = run_chain(tp, mc, c);
      } catch (...) {
        errors[static_cast<std::size_t>(c)] = std::current_exception();
      }
    };
    if (last - first == 1) {
      work(first);
    } else {
      std::vector<std::thread> pool;
      for (int c = first; c < last; ++c) pool.emplace_back(work, c);
      for (auto& th : pool) th.join();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  EnergyBreakdown out;
  std::vector<std::array<double, 8>> means;
  double sum = 0.0, sum2 = 0.0;
  long accepted = 0, proposed = 0;
  for (auto& r : results) {
    means.insert(means.end(), r.batch_means.begin(), r.batch_means.end());
    sum += r.sum;
    sum2 += r.sum2;
    out.samples += r.samples;
    accepted += r.accepted;
    proposed += r.proposed;
    if (dump) dump->insert(dump->end(), r.dump.begin(), r.dump.end());
  }
  const double nb = static_cast<double>(means.size());
  std::array<double, 8> mean{}, var{};
  for (const auto& m : means)
    for (std::size_t k = 0; k < 8; ++k) mean[k] += m[k] / nb;
  for (const auto& m : means)
    for (std::size_t k = 0; k < 8; ++k) var[k] += (m[k] - mean[k]) * (m[k] - mean[k]) / (nb - 1.0);
  for (std::size_t k = 0; k < 7; ++k) {
    out.value[k] = mean[k];
    out.error[k] = std::sqrt(var[k] / nb);
  }
  out.total = 0.0;
  for (double v : out.value) out.total += v;
  out.total_error = std::sqrt(var[7] / nb);
  out.acceptance = proposed > 0 ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  const double ns = static_cast<double>(out.samples);
  const double sample_var = ns > 1.0 ? (sum2 - sum * sum / ns) / (ns - 1.0) : 0.0;
  out.effective_samples = out.total_error > 0.0 ? sample_var / (out.total_error * out.total_error) : ns;
  if (out.acceptance < 0.2 || out.acceptance > 0.7)
    out.warning = "acceptance rate " + std::to_string(out.acceptance) + " outside [0.2, 0.7]; " +
                  (out.acceptance < 0.2 ? "decrease" : "increase") + " the step size";
  return out;
}

double UpperBoundReport::bound() const {
  double c = 1.0;
  for (double v : corrections) c += v;
  return leading * c;
}

double combined_correction(double rho, double a, double b, double ell1, double ell2) {
  double c = 0.0;
  if (a > 0.0) c += rho * a * ell1 * ell1 + a / ell1;
  if (b > 0.0) c += rho * ell2 * ell2 * ell2 + b / std::pow(ell2, 4);
  return c;
}

UpperBoundReport upper_bound_formula(double rho, double a, double b, double ell1, double ell2, int n) {
  require(rho > 0.0 && a >= 0.0 && b >= 0.0 && n >= 0, "upper_bound_formula: invalid arguments");
  UpperBoundReport r;
  r.leading = n * (4.0 * kPi * a * rho + b * rho * rho / 6.0);
  if (a > 0.0) {
    require(ell1 > 0.0, "upper_bound_formula: l1 must be positive");
    r.corrections[0] = rho * a * ell1 * ell1;
    r.corrections[1] = a / ell1;
  }
  if (b > 0.0) {
    require(ell2 > 0.0, "upper_bound_formula: l2 must be positive");
    r.corrections[2] = rho * ell2 * ell2 * ell2;
    r.corrections[3] = b / std::pow(ell2, 4);
  }
  for (double c : r.corrections)
    require(c < 1.0, "upper_bound_formula: correction " + std::to_string(c) + " >= 1, outside the asymptotic regime");
  return r;
}

}  // namespace dilute
