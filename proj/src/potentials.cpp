#include "dilute/potentials.hpp"

#include "dilute/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dilute {

std::string to_string(RadialKind kind) {
  switch (kind) {
    case RadialKind::soft_sphere: return "soft-sphere";
    case RadialKind::truncated_gaussian: return "truncated-gaussian";
    case RadialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

std::string to_string(ThreeBodyKind kind) {
  return kind == ThreeBodyKind::m_radial ? "m-radial" : "tabulated-6d";
}

RadialPotential RadialPotential::soft_sphere(double amplitude, double radius) {
  require(amplitude >= 0.0 && std::isfinite(amplitude), "soft sphere: amplitude must be finite and >= 0");
  require(radius > 0.0 && std::isfinite(radius), "soft sphere: radius must be positive");
  RadialPotential p;
  p.kind_ = RadialKind::soft_sphere;
  p.amplitude_ = amplitude;
  p.radius_ = radius;
  return p;
}

RadialPotential RadialPotential::truncated_gaussian(double amplitude, double radius, double width) {
  require(amplitude >= 0.0 && std::isfinite(amplitude), "gaussian: amplitude must be finite and >= 0");
  require(radius > 0.0 && std::isfinite(radius), "gaussian: radius must be positive");
  require(width > 0.0 && std::isfinite(width), "gaussian: width must be positive");
  RadialPotential p;
  p.kind_ = RadialKind::truncated_gaussian;
  p.amplitude_ = amplitude;
  p.radius_ = radius;
  p.width_ = width;
  return p;
}

RadialPotential RadialPotential::tabulated(std::vector<double> radii, std::vector<double> values) {
  require(radii.size() >= 2, "table: need at least two nodes");
  require(radii.size() == values.size(), "table: radius and value columns differ in length");
  require(radii.front() == 0.0, "table: radius grid must start at 0");
  for (std::size_t k = 1; k < radii.size(); ++k)
    require(radii[k] > radii[k - 1], "table: radius grid must be strictly increasing");
  for (double v : values) require(v >= 0.0 && std::isfinite(v), "table: values must be finite and >= 0");
  RadialPotential p;
  p.kind_ = RadialKind::tabulated;
  p.radius_ = radii.back();
  p.amplitude_ = *std::max_element(values.begin(), values.end());
  p.radii_ = std::make_shared<const std::vector<double>>(std::move(radii));
  p.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  return p;
}

double RadialPotential::operator()(double r) const {
  if (!(r >= 0.0)) throw ValidationError("potential evaluated at negative radius");
  return value_unchecked(r);
}

double RadialPotential::value_unchecked(double r) const {
  if (r > radius_) return 0.0;
  switch (kind_) {
    case RadialKind::soft_sphere: return amplitude_;
    case RadialKind::truncated_gaussian: return amplitude_ * std::exp(-r * r / (2.0 * width_ * width_));
    case RadialKind::tabulated: {
      const auto& rs = *radii_;
      const auto& vs = *values_;
      auto it = std::upper_bound(rs.begin(), rs.end(), r);
      if (it == rs.end()) return vs.back();
      const std::size_t k = static_cast<std::size_t>(it - rs.begin());
      const double t = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
      return (1.0 - t) * vs[k - 1] + t * vs[k];
    }
  }
  return 0.0;
}

bool RadialPotential::is_zero() const {
  if (kind_ == RadialKind::tabulated)
    return std::all_of(values_->begin(), values_->end(), [](double v) { return v == 0.0; });
  return amplitude_ == 0.0;
}

std::vector<double> RadialPotential::breakpoints() const {
  if (kind_ == RadialKind::tabulated) return *radii_;
  return {0.0, radius_};
}

RadialPotential RadialPotential::rescaled(double alpha) const {
  require(alpha > 0.0 && std::isfinite(alpha), "rescale: factor must be positive");
  const double a2 = alpha * alpha;
  switch (kind_) {
    case RadialKind::soft_sphere: return soft_sphere(amplitude_ / a2, radius_ * alpha);
    case RadialKind::truncated_gaussian:
      return truncated_gaussian(amplitude_ / a2, radius_ * alpha, width_ * alpha);
    case RadialKind::tabulated: {
      std::vector<double> rs(*radii_), vs(*values_);
      for (auto& r : rs) r *= alpha;
      for (auto& v : vs) v /= a2;
      return tabulated(std::move(rs), std::move(vs));
    }
  }
  return *this;
}

RadialPotential load_radial_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open potential table " + path.string());
  std::vector<double> rs, vs;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    double r = 0.0, v = 0.0;
    if (!(row >> r >> v)) throw ValidationError("malformed row in " + path.string() + ": " + line);
    rs.push_back(r);
    vs.push_back(v);
  }
  return RadialPotential::tabulated(std::move(rs), std::move(vs));
}

namespace {

Mat6 block(double diag, double off) {
  Mat6 out = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    out(i, i) = diag;
    out(i + 3, i + 3) = diag;
    out(i, i + 3) = off;
    out(i + 3, i) = off;
  }
  return out;
}

ScatteringMatrix make_matrix() {
  ScatteringMatrix sm;
  const double r3 = std::sqrt(3.0);
  const double c = 1.0 / (2.0 * std::sqrt(2.0));
  const double p = (r3 + 1.0) * c;
  const double q = (r3 - 1.0) * c;
  sm.m = block(p, q);
  const double d = p * p - q * q;
  sm.inverse_diag = p / d;
  sm.inverse_off = -q / d;
  sm.inverse = block(sm.inverse_diag, sm.inverse_off);
  sm.squared = sm.m * sm.m;
  Eigen::SelfAdjointEigenSolver<Mat6> eig(sm.squared);
  sm.squared_eigenvalues = eig.eigenvalues();
  double prod = 1.0;
  for (int i = 0; i < 6; ++i) prod *= sm.squared_eigenvalues(i);
  sm.determinant = std::sqrt(prod);
  sm.norm = std::sqrt(sm.squared_eigenvalues(5));
  return sm;
}

}  // namespace

const ScatteringMatrix& scattering_matrix() {
  static const ScatteringMatrix instance = make_matrix();
  return instance;
}

double hyperradius(const Vec3& x, const Vec3& y) {
  const auto& sm = scattering_matrix();
  const Vec3 u = sm.inverse_diag * x + sm.inverse_off * y;
  const Vec3 v = sm.inverse_off * x + sm.inverse_diag * y;
  return std::sqrt(u.squaredNorm() + v.squaredNorm());
}

ThreeBodyPotential ThreeBodyPotential::m_radial(RadialPotential profile) {
  ThreeBodyPotential w;
  w.kind_ = ThreeBodyKind::m_radial;
  w.profile_ = std::make_shared<const RadialPotential>(std::move(profile));
  return w;
}

ThreeBodyPotential ThreeBodyPotential::tabulate(
    const std::function<double(const Vec3&, const Vec3&)>& fn, double support_radius, int nodes) {
  require(support_radius > 0.0, "tabulated W: support radius must be positive");
  require(nodes >= 2 && nodes <= 21, "tabulated W: nodes per axis must be in [2, 21]");
  std::size_t total = 1;
  for (int k = 0; k < 6; ++k) total *= static_cast<std::size_t>(nodes);
  std::vector<double> table(total);
  const double h = 2.0 * support_radius / (nodes - 1);
  std::array<int, 6> idx{};
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (int k = 5; k >= 0; --k) {
      idx[k] = static_cast<int>(rest % nodes);
      rest /= nodes;
    }
    Vec3 x, y;
    for (int k = 0; k < 3; ++k) {
      x(k) = -support_radius + h * idx[k];
      y(k) = -support_radius + h * idx[k + 3];
    }
    const double v = fn(x, y);
    require(v >= 0.0 && std::isfinite(v), "tabulated W: samples must be finite and >= 0");
    table[flat] = v;
  }
  ThreeBodyPotential w;
  w.kind_ = ThreeBodyKind::tabulated_6d;
  w.table_radius_ = support_radius;
  w.table_nodes_ = nodes;
  w.table_ = std::make_shared<const std::vector<double>>(std::move(table));
  return w;
}

double ThreeBodyPotential::interpolate(const Eigen::Matrix<double, 6, 1>& z) const {
  const int n = table_nodes_;
  const double h = 2.0 * table_radius_ / (n - 1);
  std::array<int, 6> base{};
  std::array<double, 6> frac{};
  for (int k = 0; k < 6; ++k) {
    const double t = (z(k) + table_radius_) / h;
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, n - 2);
    base[k] = i;
    frac[k] = std::clamp(t - i, 0.0, 1.0);
  }
  const auto& tab = *table_;
  double acc = 0.0;
  for (int corner = 0; corner < 64; ++corner) {
    double weight = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < 6; ++k) {
      const int bit = (corner >> k) & 1;
      weight *= bit ? frac[k] : 1.0 - frac[k];
      flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(base[k] + bit);
    }
    if (weight != 0.0) acc += weight * tab[flat];
  }
  return acc;
}

double ThreeBodyPotential::operator()(const Vec3& x, const Vec3& y) const {
  if (kind_ == ThreeBodyKind::m_radial) return profile_->value_unchecked(hyperradius(x, y));
  Eigen::Matrix<double, 6, 1> z;
  z << x, y;
  if (z.norm() > table_radius_) return 0.0;
  return interpolate(z);
}

double ThreeBodyPotential::at_positions(const Vec3& x1, const Vec3& x2, const Vec3& x3) const {
  if (kind_ != ThreeBodyKind::m_radial) return (*this)(x1 - x2, x1 - x3);
  std::array<double, 3> d{(x1 - x2).squaredNorm(), (x1 - x3).squaredNorm(), (x2 - x3).squaredNorm()};
  std::sort(d.begin(), d.end());
  return profile_->value_unchecked(std::sqrt(2.0 / 3.0 * ((d[0] + d[1]) + d[2])));
}

double ThreeBodyPotential::support_radius() const {
  if (kind_ == ThreeBodyKind::m_radial) return scattering_matrix().norm * profile_->support_radius();
  return table_radius_;
}

const RadialPotential& ThreeBodyPotential::profile() const {
  if (kind_ != ThreeBodyKind::m_radial) throw ValidationError("tabulated W has no hyperradial profile");
  return *profile_;
}

bool ThreeBodyPotential::is_zero() const {
  if (kind_ == ThreeBodyKind::m_radial) return profile_->is_zero();
  return std::all_of(table_->begin(), table_->end(), [](double v) { return v == 0.0; });
}

ThreeBodyPotential ThreeBodyPotential::rescaled(double delta) const {
  require(delta > 0.0 && std::isfinite(delta), "rescale: factor must be positive");
  if (kind_ == ThreeBodyKind::m_radial) return m_radial(profile_->rescaled(delta));
  ThreeBodyPotential w = *this;
  w.table_radius_ = table_radius_ * delta;
  std::vector<double> values(*table_);
  for (auto& v : values) v /= delta * delta;
  w.table_ = std::make_shared<const std::vector<double>>(std::move(values));
  return w;
}

namespace {

const std::vector<Eigen::Matrix<double, 6, 1>>& sphere_directions() {
  static const std::vector<Eigen::Matrix<double, 6, 1>> dirs = [] {
    std::mt19937_64 rng(0x5eed6d);
    std::normal_distribution<double> gauss;
    std::vector<Eigen::Matrix<double, 6, 1>> out;
    const int count = 2000;
    out.reserve(2 * count);
    for (int k = 0; k < count; ++k) {
      Eigen::Matrix<double, 6, 1> d;
      for (int i = 0; i < 6; ++i) d(i) = gauss(rng);
      d.normalize();
      out.push_back(d);
      out.push_back(-d);
    }
    return out;
  }();
  return dirs;
}

}  // namespace

double ThreeBodyPotential::hyperangular_average(double s) const {
  if (kind_ == ThreeBodyKind::m_radial) return profile_->value_unchecked(s);
  const auto& m = scattering_matrix().m;
  double acc = 0.0;
  const auto& dirs = sphere_directions();
  for (const auto& d : dirs) {
    const Eigen::Matrix<double, 6, 1> z = s * (m * d);
    acc += (*this)(z.head<3>(), z.tail<3>());
  }
  return acc / static_cast<double>(dirs.size());
}

double three_body_symmetry_defect(const ThreeBodyPotential& w, int samples, double extent,
                                  std::mt19937_64& rng, bool from_positions) {
  std::uniform_real_distribution<double> uni(-extent, extent);
  static constexpr std::array<std::array<int, 3>, 6> perms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  double worst = 0.0;
  for (int n = 0; n < samples; ++n) {
    std::array<Vec3, 3> pts;
    for (auto& p : pts) p = Vec3(uni(rng), uni(rng), uni(rng));
    auto eval = [&](int i, int j, int k) {
      return from_positions ? w.at_positions(pts[i], pts[j], pts[k]) : w(pts[i] - pts[j], pts[i] - pts[k]);
    };
    const double ref = eval(0, 1, 2);
    for (const auto& p : perms) {
      const double v = eval(p[0], p[1], p[2]);
      worst = std::max(worst, std::abs(v - ref));
    }
  }
  return worst;
}

GasState GasState::make(double density, double a, double b) {
  require(density > 0.0 && std::isfinite(density), "gas state: density must be positive");
  require(a >= 0.0 && b >= 0.0, "gas state: a and b must be nonnegative");
  GasState g;
  g.density = density;
  g.a = a;
  g.b = b;
  g.effective_length = std::max(a, density * b);
  g.gas_parameter = density * std::pow(g.effective_length, 3);
  g.gp_length = g.gas_parameter > 0.0 ? g.effective_length / std::sqrt(g.gas_parameter)
                                      : std::numeric_limits<double>::infinity();
  return g;
}

}  // namespace dilute
