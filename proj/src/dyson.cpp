#include "dilute/dyson.hpp"

#include "dilute/errors.hpp"
#include "dilute/lanczos.hpp"
#include "dilute/radial.hpp"
#include "dilute/scatter2.hpp"
#include "dilute/scatter3.hpp"


#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

namespace dilute {

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double t, double lo, double hi) {
  if (t < lo || t > hi) return 0.0;
  const double u = (t - lo) * (hi - t);
  return u * u;
}

// int_lo^hi bump(t) t^power dt with one five-point Gauss panel (exact up to degree 9).
double bump_moment(double lo, double hi, int power) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  double sum = 0.0;
  for (const auto& [x, w] : gauss5()) {
    const double t = mid + half * x;
    sum += w * bump(t, lo, hi) * std::pow(t, power);
  }
  return half * sum;
}

double kinetic_tolerance(double h) { return -1e-5 * (kPi / h) * (kPi / h); }

// Smallest eigenvalue of the P1 Galerkin form
//   int_0^B (2 psi'^2 + q psi^2) r^{d-1} dr
// against the lumped mass int psi^2 r^{d-1}. Eigenvalues below sigma are
// counted from the LDL^T pivots of K - sigma M, written as a weighted path
// Laplacian plus row sums so that no pivot suffers cancellation.
double sector_minimum(const std::function<double(double)>& q, std::vector<double> breakpoints, double outer,
                      int dim, int elements) {
  const auto n = static_cast<std::size_t>(elements + 1);
  const double h = outer / elements;
  std::vector<double> edge(n - 1, 0.0), load(n, 0.0), mass(n, 0.0);
  std::sort(breakpoints.begin(), breakpoints.end());
  std::vector<double> cuts;
  double qmin = 0.0;
  for (int e = 0; e < elements; ++e) {
    const double lo = e * h, hi = (e + 1) * h;
    cuts.assign({lo});
    for (double b : breakpoints)
      if (b > lo && b < hi) cuts.push_back(b);
    cuts.push_back(hi);
    const auto i = static_cast<std::size_t>(e);
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      const double a = cuts[piece], b = cuts[piece + 1];
      const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (const auto& [x, w] : gauss5()) {
        const double r = mid + half * x;
        const double jw = half * w * std::pow(r, dim - 1);
        const double p1 = (r - lo) / h, p0 = 1.0 - p1;
        const double qr = q(r);
        qmin = std::min(qmin, qr);
        // Off-diagonal entry is -edge; row sums of the potential part go to load.
        edge[i] += jw * (2.0 / (h * h) - qr * p0 * p1);
        load[i] += jw * qr * p0;
        load[i + 1] += jw * qr * p1;
        mass[i] += jw * p0;
        mass[i + 1] += jw * p1;
      }
    }
  }
  auto below = [&](double sigma) {
    int count = 0;
    double excess = 0.0, pivot = 1.0, prev_edge = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      excess = load[i] - sigma * mass[i] + (i > 0 ? prev_edge * excess / pivot : 0.0);
      const double next_edge = i + 1 < n ? edge[i] : 0.0;
      pivot = next_edge + excess;
      if (pivot < 0.0) ++count;
      if (pivot == 0.0) pivot = -1e-300;
      prev_edge = next_edge;
    }
    return count;
  };
  double lo = 2.0 * qmin - 1.0, hi = 0.0;
  while (below(lo) > 0) lo *= 2.0;
  if (below(hi) == 0) {
    hi = 1.0;
    while (below(hi) == 0) hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > 1e-15 + 1e-13 * std::abs(hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (below(mid) > 0 ? hi : lo) = mid;
  }
  return lo;
}

// Cell-centred grid on [-B, B]^d restricted to nodes with |x| <= B; faces
// join neighbouring nodes that are both inside. Operator: -2 Laplacian + q.
struct BallGrid {
  int dim = 3;
  double h = 0.0;
  std::vector<std::vector<double>> nodes;
  std::vector<int> neighbours;  // 2 dim entries per node, -1 when absent
  std::vector<double> diag;
};

BallGrid make_ball_grid(int dim, int cells, double outer) {
  BallGrid g;
  g.dim = dim;
  g.h = 2.0 * outer / cells;
  long total = 1;
  for (int k = 0; k < dim; ++k) total *= cells;
  std::vector<int> compressed(static_cast<std::size_t>(total), -1);
  std::vector<int> idx(static_cast<std::size_t>(dim));
  std::vector<double> pt(static_cast<std::size_t>(dim));
  for (long t = 0; t < total; ++t) {
    long rem = t;
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) {
      idx[static_cast<std::size_t>(k)] = static_cast<int>(rem % cells);
      rem /= cells;
      pt[static_cast<std::size_t>(k)] = -outer + (idx[static_cast<std::size_t>(k)] + 0.5) * g.h;
      r2 += pt[static_cast<std::size_t>(k)] * pt[static_cast<std::size_t>(k)];
    }
    if (r2 <= outer * outer) {
      compressed[static_cast<std::size_t>(t)] = static_cast<int>(g.nodes.size());
      g.nodes.push_back(pt);
    }
  }
  g.neighbours.assign(g.nodes.size() * static_cast<std::size_t>(2 * dim), -1);
  g.diag.assign(g.nodes.size(), 0.0);
  long stride = 1;
  for (int k = 0; k < dim; ++k) {
    for (long t = 0; t < total; ++t) {
      const int here = compressed[static_cast<std::size_t>(t)];
      if (here < 0 || (t / stride) % cells == cells - 1) continue;
      const int there = compressed[static_cast<std::size_t>(t + stride)];
      if (there < 0) continue;
      g.neighbours[static_cast<std::size_t>(here) * (2 * dim) + static_cast<std::size_t>(2 * k + 1)] = there;
      g.neighbours[static_cast<std::size_t>(there) * (2 * dim) + static_cast<std::size_t>(2 * k)] = here;
      g.diag[static_cast<std::size_t>(here)] += 2.0 / (g.h * g.h);
      g.diag[static_cast<std::size_t>(there)] += 2.0 / (g.h * g.h);
    }
    stride *= cells;
  }
  return g;
}

double grid_minimum(const BallGrid& g, const std::vector<double>& q, double tolerance) {
  const std::size_t n = g.nodes.size();
  const int width = 2 * g.dim;
  const double off = -2.0 / (g.h * g.h);
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = g.diag[i] + q[i];
  LinearOperator apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    out.resize(in.size());
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * in(static_cast<Eigen::Index>(i));
      const int* nb = &g.neighbours[i * static_cast<std::size_t>(width)];
      for (int k = 0; k < width; ++k)
        if (nb[k] >= 0) acc += off * in(nb[k]);
      out(static_cast<Eigen::Index>(i)) = acc;
    }
  };
  LanczosOptions opt;
  opt.tolerance = 1e-2 * std::abs(tolerance);
  return lanczos_lowest(apply, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), opt).value;
}

std::vector<double> with(std::vector<double> v, std::initializer_list<double> extra) {
  v.insert(v.end(), extra.begin(), extra.end());
  return v;
}

template <class Gap>
double critical_multiplier(Gap gap, DysonGrid grid, double limit, double tol) {
  require(limit > 0.0 && tol > 0.0, "dyson: multiplier search needs positive limit and tolerance");
  grid.multiplier = limit;
  if (gap(grid).lambda_min >= 0.0) return std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = limit;
  while (hi - lo > tol) {
    grid.multiplier = 0.5 * (lo + hi);
    (gap(grid).lambda_min >= 0.0 ? lo : hi) = grid.multiplier;
  }
  return lo;
}

}  // namespace

Softener2B Softener2B::make(double r1, double r2) {
  require(r1 > 0.0 && r2 > r1, "Softener2B: need 0 < R1 < R2");
  Softener2B s;
  s.r1_ = r1;
  s.r2_ = r2;
  s.coeff_ = 1.0;
  s.coeff_ = 1.0 / (4.0 * kPi * bump_moment(r1, r2, 2));
  s.norm_ = 4.0 * kPi * s.coeff_ * bump_moment(r1, r2, 2);
  return s;
}

double Softener2B::operator()(double r) const { return coeff_ * bump(r, r1_, r2_); }

double Softener2B::scaled(double r, double scale) const {
  return (*this)(r / scale) / (scale * scale * scale);
}

Softener3B Softener3B::make(double r1, double r2) {
  require(r1 > 0.0 && r2 > r1, "Softener3B: need 0 < R1 < R2");
  Softener3B s;
  s.r1_ = r1;
  s.r2_ = r2;
  s.s1_ = std::sqrt(2.0) * r1;
  s.s2_ = std::sqrt(2.0 / 3.0) * r2;
  require(s.s1_ < s.s2_, "Softener3B: the annulus R1 <= |x| <= R2 contains no hypersphere; need R2 > sqrt(3) R1");
  const double measure = scattering_matrix().determinant * kPi * kPi * kPi;
  s.coeff_ = 1.0 / (measure * bump_moment(s.s1_, s.s2_, 5));
  s.norm_ = measure * s.coeff_ * bump_moment(s.s1_, s.s2_, 5);
  return s;
}

double Softener3B::operator()(double s) const { return coeff_ * bump(s, s1_, s2_); }

double Softener3B::scaled(double s, double scale) const { return (*this)(s / scale) / std::pow(scale, 6); }

DysonResult dyson2_gap(const RadialPotential& p, const Softener2B& s, double scale, const DysonGrid& grid) {
  require(scale > 0.0, "dyson2_gap: scale must be positive");
  require(grid.points >= 4, "dyson2_gap: grid too small");
  const double outer = scale * s.r2();
  require(p.support_radius() < scale * s.r1() || p.is_zero(), "dyson2_gap: need R0 < R R1");
  const double a = p.is_zero() ? 0.0 : solve_scattering_length(p).a;
  DysonResult out;
  out.rhs = grid.multiplier * 4.0 * kPi * a;
  auto q = [&](double r) {
    const double v = r <= p.support_radius() ? p.value_unchecked(r) : 0.0;
    return v - out.rhs * s.scaled(r, scale);
  };
  if (grid.mode == DysonMode::sector) {
    out.h = outer / grid.points;
    out.unknowns = grid.points + 1;
    out.lambda_min =
        sector_minimum(q, with(p.breakpoints(), {scale * s.r1(), scale * s.r2()}), outer, 3, grid.points);
  } else {
    BallGrid g = make_ball_grid(3, grid.points, outer);
    std::vector<double> rr(g.nodes.size()), qv(g.nodes.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const auto& x = g.nodes[i];
      rr[i] = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      mass += s.scaled(rr[i], scale) * g.h * g.h * g.h;
    }
    require(mass > 0.0, "dyson2_gap: softener not resolved by the grid");
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const double v = rr[i] <= p.support_radius() ? p.value_unchecked(rr[i]) : 0.0;
      qv[i] = v - out.rhs * s.scaled(rr[i], scale) / mass;
    }
    out.h = g.h;
    out.unknowns = static_cast<long>(g.nodes.size());
    out.lambda_min = grid_minimum(g, qv, kinetic_tolerance(g.h));
  }
  out.tolerance = kinetic_tolerance(out.h);
  return out;
}

DysonResult dyson3_gap(const ThreeBodyPotential& w, const Softener3B& s, double scale, const DysonGrid& grid) {
  require(scale > 0.0, "dyson3_gap: scale must be positive");
  require(grid.points >= 4, "dyson3_gap: grid too small");
  const double r1 = scale * s.r1();
  require(w.support_radius() < r1 || w.is_zero(), "dyson3_gap: need R0 < R R1");
  const double outer = scale * s.s2();
  const bool radial = w.kind() == ThreeBodyKind::m_radial;
  double b = 0.0;
  if (!w.is_zero()) b = radial ? solve_scattering_energy(w).b : variational_minimum_6d(w).energy;
  DysonResult out;
  out.rhs = grid.multiplier * b * (1.0 - grid.c * w.support_radius() / r1);
  if (grid.mode == DysonMode::sector) {
    require(radial, "dyson3_gap: the hyperradial sector needs an m-radial W");
    const RadialPotential& u = w.profile();
    auto q = [&](double r) {
      const double v = r <= u.support_radius() ? u.value_unchecked(r) : 0.0;
      return v - out.rhs * s.scaled(r, scale);
    };
    out.h = outer / grid.points;
    out.unknowns = grid.points + 1;
    out.lambda_min = sector_minimum(q, with(u.breakpoints(), {scale * s.s1(), scale * s.s2()}), outer, 6, grid.points);
  } else {
    require(grid.points <= 10, "dyson3_gap: grid mode allows at most 10 cells per axis");
    BallGrid g = make_ball_grid(6, grid.points, outer);
    const auto& sm = scattering_matrix();
    const double cell = std::pow(g.h, 6) * sm.determinant;
    std::vector<double> ss(g.nodes.size()), qv(g.nodes.size());
    double mass = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      const auto& y = g.nodes[i];
      double r2 = 0.0;
      for (double c : y) r2 += c * c;
      ss[i] = std::sqrt(r2);
      mass += s.scaled(ss[i], scale) * cell;
    }
    require(mass > 0.0, "dyson3_gap: softener not resolved by the grid");
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
      Eigen::Matrix<double, 6, 1> y;
      for (int k = 0; k < 6; ++k) y(k) = g.nodes[i][static_cast<std::size_t>(k)];
      const Eigen::Matrix<double, 6, 1> z = sm.m * y;
      qv[i] = w(z.head<3>(), z.tail<3>()) - out.rhs * s.scaled(ss[i], scale) / mass;
    }
    out.h = g.h;
    out.unknowns = static_cast<long>(g.nodes.size());
    out.lambda_min = grid_minimum(g, qv, kinetic_tolerance(g.h));
  }
  out.tolerance = kinetic_tolerance(out.h);
  return out;
}

double dyson2_critical_multiplier(const RadialPotential& p, const Softener2B& s, double scale, DysonGrid grid,
                                  double limit, double tol) {
  return critical_multiplier([&](const DysonGrid& g) { return dyson2_gap(p, s, scale, g); }, grid, limit, tol);
}

double dyson3_critical_multiplier(const ThreeBodyPotential& w, const Softener3B& s, double scale, DysonGrid grid,
                                  double limit, double tol) {
  return critical_multiplier([&](const DysonGrid& g) { return dyson3_gap(w, s, scale, g); }, grid, limit, tol);
}

std::vector<ConvergenceRow> dyson2_convergence(const RadialPotential& p, const Softener2B& s, double scale,
                                               DysonGrid grid, int levels) {
  require(levels >= 1, "dyson2_convergence: need at least one level");
  std::vector<ConvergenceRow> rows;
  const int base = grid.points;
  for (int l = 0; l < levels; ++l) {
    grid.points = base << l;
    rows.push_back({grid.points, dyson2_gap(p, s, scale, grid)});
  }
  return rows;
}

Configuration::Configuration(std::vector<Vec3> positions, double cut, double margin)
    : x_(std::move(positions)), cut_(cut), margin_(margin) {
  require(cut > 0.0 && cut < 1.0, "Configuration: R must lie in (0, 1)");
  require(margin > 0.0 && margin < 1.0, "Configuration: eta must lie in (0, 1)");
  for (const auto& x : x_)
    require(x.cwiseAbs().maxCoeff() <= 0.5, "Configuration: positions must lie in [-1/2, 1/2]^3");
}

bool Configuration::in_shrunk_box(int i) const {
  return x_.at(static_cast<std::size_t>(i)).cwiseAbs().maxCoeff() <= 0.5 * (1.0 - margin_);
}

Configuration random_configuration(int n, double cut, double margin, std::mt19937_64& rng) {
  require(n >= 0, "random_configuration: n must be nonnegative");
  std::uniform_real_distribution<double> box(-0.5, 0.5), unit(-1.0, 1.0), coin(0.0, 1.0);
  std::vector<Vec3> x;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && coin(rng) < 0.5) {
      std::uniform_int_distribution<int> pick(0, i - 1);
      const Vec3& base = x[static_cast<std::size_t>(pick(rng))];
      Vec3 d;
      do d = Vec3(unit(rng), unit(rng), unit(rng));
      while (d.squaredNorm() > 1.0);
      x.push_back((base + 1.5 * cut * d).cwiseMax(-0.5).cwiseMin(0.5));
    } else {
      x.emplace_back(box(rng), box(rng), box(rng));
    }
  }
  return Configuration(std::move(x), cut, margin);
}

CollisionField collision_indicators(const Configuration& c) {
  const int n = c.size();
  const auto& x = c.positions();
  const double r2 = c.cut() * c.cut(), far2 = 4.0 * r2;
  CollisionField out;
  out.n = n;
  out.pair.assign(static_cast<std::size_t>(n * n), 0);
  out.triple.assign(static_cast<std::size_t>(n * n * n), 0);
  std::vector<std::uint8_t> close(static_cast<std::size_t>(n * n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]).squaredNorm() <= r2)
        close[static_cast<std::size_t>(i * n + j)] = 1;
  auto isolated = [&](const Vec3& centre, int i, int j, int k) {
    for (int m = 0; m < n; ++m) {
      if (m == i || m == j || m == k) continue;
      if ((centre - x[static_cast<std::size_t>(m)]).squaredNorm() <= far2) return false;
    }
    return true;
  };
  for (int i = 0; i < n; ++i) {
    const Vec3& xi = x[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      if (!close[static_cast<std::size_t>(i * n + j)]) continue;
      const Vec3& xj = x[static_cast<std::size_t>(j)];
      if (isolated((xi + xj) / 2.0, i, j, -1)) out.pair[static_cast<std::size_t>(i * n + j)] = 1;
      for (int k = j + 1; k < n; ++k) {
        if (!close[static_cast<std::size_t>(i * n + k)]) continue;
        if (isolated((xi + xj + x[static_cast<std::size_t>(k)]) / 3.0, i, j, k)) {
          out.triple[static_cast<std::size_t>((i * n + j) * n + k)] = 1;
          out.triple[static_cast<std::size_t>((i * n + k) * n + j)] = 1;
        }
      }
    }
  }
  return out;
}

ExclusionReport check_exclusion(const Configuration& c) {
  const CollisionField f = collision_indicators(c);
  const int n = f.n;
  ExclusionReport rep;
  rep.sums.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    int pairs = 0, triples = 0;
    for (int j = 0; j < n; ++j) {
      pairs += f.f(i, j);
      for (int k = j + 1; k < n; ++k) triples += f.f3(i, j, k);
    }
    rep.sums[static_cast<std::size_t>(i)] = pairs + triples;
    rep.pair_partners_max = std::max(rep.pair_partners_max, pairs);
    rep.triple_partners_max = std::max(rep.triple_partners_max, triples);
    if (pairs > 1 || triples > 1 || (pairs > 0 && triples > 0) || pairs + triples > 1)
      throw NumericalError("check_exclusion: collision bound violated at particle " + std::to_string(i));
  }
  return rep;
}

}  // namespace dilute
