#include "dilute/radial.hpp"

#include "dilute/errors.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace dilute {

namespace {

double bump_side(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

}  // namespace

double rising_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double p = bump_side(u);
  const double q = bump_side(1.0 - u);
  return p / (p + q);
}

HarmonicCutoff::HarmonicCutoff(int dimension, double ramp) : dim_(dimension), ramp_(ramp) {
  require(dimension >= 3, "cut-off: dimension must be at least 3");
  require(ramp > 0.0 && ramp <= 0.5, "cut-off: ramp must lie in (0, 1/2]");
  span_ = 1.0 - std::pow(2.0, 2.0 - dimension);
}

double HarmonicCutoff::coordinate(double t) const { return (1.0 - std::pow(t, dim_ - 2)) / span_; }

double HarmonicCutoff::primitive(double v) const {
  // Hermite table of the primitive, built once from Gauss-Kronrod panels.
  static const HermiteTable table = [] {
    const int cells = 4096;
    const double h = 1.0 / cells;
    std::vector<double> values(cells + 1, 0.0), derivs(cells + 1, 0.0);
    for (int k = 0; k < cells; ++k) {
      values[k + 1] = values[k] + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                                      rising_step, k * h, (k + 1) * h, 0);
      derivs[k + 1] = rising_step((k + 1) * h);
    }
    return HermiteTable(0.0, h, std::move(values), std::move(derivs));
  }();
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 0.5 + (v - 1.0);
  return table.value(v);
}

double HarmonicCutoff::operator()(double t) const {
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double x = coordinate(t), d = ramp_;
  double acc;
  if (x <= d)
    acc = d * primitive(x / d);
  else if (x >= 1.0 - d)
    acc = (1.0 - d) - d * primitive((1.0 - x) / d);
  else
    acc = 0.5 * d + (x - d);
  return std::clamp(acc / (1.0 - d), 0.0, 1.0);
}

double HarmonicCutoff::derivative(double t) const {
  if (t <= 0.5 || t >= 1.0) return 0.0;
  const double x = coordinate(t);
  const double phi = rising_step(x / ramp_) * rising_step((1.0 - x) / ramp_);
  return -phi / (1.0 - ramp_) * (dim_ - 2) * std::pow(t, dim_ - 3) / span_;
}

HermiteTable::HermiteTable(double x0, double h, std::vector<double> values, std::vector<double> derivatives)
    : x0_(x0), h_(h), values_(std::move(values)), derivs_(std::move(derivatives)) {
  require(h_ > 0.0, "hermite table: step must be positive");
  require(values_.size() >= 2 && values_.size() == derivs_.size(), "hermite table: bad sizes");
}

double HermiteTable::value(double x) const { return eval(x).first; }

std::pair<double, double> HermiteTable::eval(double x) const {
  const double t = (x - x0_) / h_;
  const auto last = static_cast<double>(values_.size() - 1);
  if (t <= 0.0) return {values_.front(), t == 0.0 ? derivs_.front() : 0.0};
  if (t >= last) return {values_.back(), t == last ? derivs_.back() : 0.0};
  auto k = static_cast<std::size_t>(t);
  if (k + 1 >= values_.size()) k = values_.size() - 2;
  const double s = t - static_cast<double>(k);
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double y0 = values_[k], y1 = values_[k + 1];
  const double m0 = derivs_[k] * h_, m1 = derivs_[k + 1] * h_;
  const double v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  const double d = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h_;
  return {v, d};
}

const std::vector<std::pair<double, double>>& gauss5() {
  static const std::vector<std::pair<double, double>> rule = [] {
    const double a = std::sqrt(5.0 - 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double b = std::sqrt(5.0 + 2.0 * std::sqrt(10.0 / 7.0)) / 3.0;
    const double wa = (322.0 + 13.0 * std::sqrt(70.0)) / 900.0;
    const double wb = (322.0 - 13.0 * std::sqrt(70.0)) / 900.0;
    return std::vector<std::pair<double, double>>{
        {-b, wb}, {-a, wa}, {0.0, 128.0 / 225.0}, {a, wa}, {b, wb}};
  }();
  return rule;
}

namespace {

// Interior breakpoints of [lo, hi] in increasing order, with both ends.
std::vector<double> pieces(double lo, double hi, const std::vector<double>& breakpoints) {
  std::vector<double> cuts{lo};
  for (double b : breakpoints)
    if (b > lo && b < hi) cuts.push_back(b);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

double integrate_split(const std::function<double(double)>& fn, double lo, double hi,
                       const std::vector<double>& breakpoints) {
  const auto cuts = pieces(lo, hi, breakpoints);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
    const double half = 0.5 * (cuts[k + 1] - cuts[k]);
    for (const auto& [x, w] : gauss5()) total += w * half * fn(mid + half * x);
  }
  return total;
}

namespace {

struct Assembly {
  std::vector<double> diag, off, rhs;
  double constant = 0.0;
};

// Quadratic form of E in the nodal values: E = g^T A g - 2 b^T g + c.
Assembly assemble(const RadialProblem& pb, const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  Assembly as;
  as.diag.assign(n, 0.0);
  as.off.assign(n - 1, 0.0);
  as.rhs.assign(n, 0.0);
  const double power = pb.dimension - 1;
  const auto& rule = gauss5();
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double r0 = nodes[e], r1 = nodes[e + 1], len = r1 - r0;
    const auto cuts = pieces(r0, r1, pb.breakpoints);
    double kin = 0.0, m00 = 0.0, m01 = 0.0, m11 = 0.0, b0 = 0.0, b1 = 0.0, c = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
      const double half = 0.5 * (cuts[k + 1] - cuts[k]);
      for (const auto& [x, w] : rule) {
        const double r = mid + half * x;
        const double wr = w * half * std::pow(r, power);
        const double u = pb.potential(r);
        const double phi1 = (r - r0) / len, phi0 = 1.0 - phi1;
        kin += wr;
        m00 += wr * u * phi0 * phi0;
        m01 += wr * u * phi0 * phi1;
        m11 += wr * u * phi1 * phi1;
        b0 += wr * u * phi0;
        b1 += wr * u * phi1;
        c += wr * u;
      }
    }
    const double k2 = 2.0 * kin / (len * len);
    as.diag[e] += pb.measure * (k2 + m00);
    as.diag[e + 1] += pb.measure * (k2 + m11);
    as.off[e] += pb.measure * (-k2 + m01);
    as.rhs[e] += pb.measure * b0;
    as.rhs[e + 1] += pb.measure * b1;
    as.constant += pb.measure * c;
  }
  const double outer = nodes.back();
  as.diag[n - 1] += pb.measure * 2.0 * (pb.dimension - 2) * std::pow(outer, pb.dimension - 2);
  return as;
}

std::vector<double> uniform_nodes(double outer, int elements) {
  std::vector<double> nodes(static_cast<std::size_t>(elements) + 1);
  for (int k = 0; k <= elements; ++k) nodes[static_cast<std::size_t>(k)] = outer * k / elements;
  return nodes;
}

}  // namespace

double radial_functional(const RadialProblem& problem, const std::vector<double>& nodes,
                         const std::vector<double>& g) {
  require(nodes.size() >= 2 && nodes.size() == g.size(), "radial functional: bad profile table");
  require(nodes.front() == 0.0, "radial functional: profile must start at r = 0");
  const auto as = assemble(problem, nodes);
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    quad += as.diag[i] * g[i] * g[i];
    if (i + 1 < g.size()) quad += 2.0 * as.off[i] * g[i] * g[i + 1];
    lin += as.rhs[i] * g[i];
  }
  return quad - 2.0 * lin + as.constant;
}

std::vector<double> solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  std::vector<double> c(n, 0.0), d(n, 0.0);
  double denom = diag[0];
  if (denom == 0.0) throw NumericalError("tridiagonal solve: zero pivot");
  c[0] = n > 1 ? off[0] / denom : 0.0;
  d[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = diag[i] - off[i - 1] * c[i - 1];
    if (denom == 0.0) throw NumericalError("tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? off[i] / denom : 0.0;
    d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
  return d;
}

double radial_minimum(const RadialProblem& problem, int elements, std::vector<double>* minimiser) {
  require(elements >= 2, "radial minimum: need at least two elements");
  const auto nodes = uniform_nodes(problem.outer, elements);
  const auto as = assemble(problem, nodes);
  const auto g = solve_tridiagonal(as.diag, as.off, as.rhs);
  double dot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) dot += as.rhs[i] * g[i];
  if (minimiser) *minimiser = g;
  return as.constant - dot;
}

VariationalMinimum radial_minimum_extrapolated(const RadialProblem& problem, int elements) {
  require(elements >= 4 && elements % 2 == 0, "radial minimum: element count must be even and >= 4");
  VariationalMinimum out;
  out.elements = elements;
  out.coarse = radial_minimum(problem, elements / 2);
  out.fine = radial_minimum(problem, elements);
  out.energy = (4.0 * out.fine - out.coarse) / 3.0;
  return out;
}

}  // namespace dilute
