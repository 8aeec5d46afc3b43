#pragma once

// Interaction potentials, the three-body coordinate matrix M, and the
// dilute-gas bookkeeping record.

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace dilute {

using Vec3 = Eigen::Vector3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

enum class RadialKind { soft_sphere, truncated_gaussian, tabulated };

std::string to_string(RadialKind kind);

/// Nonnegative radial potential with compact support [0, R0].
///
/// Soft sphere: V0 on r <= R0. Truncated Gaussian: V0 exp(-r^2 / (2 w^2)) on
/// r <= R0. Tabulated: linear interpolation of (r_k, v_k) with r_0 = 0 and the
/// support ending at the last node. All kinds are closed at R0, so evaluating
/// exactly at the support edge gives the left limit.
class RadialPotential {
 public:
  static RadialPotential soft_sphere(double amplitude, double radius);
  static RadialPotential truncated_gaussian(double amplitude, double radius, double width);
  static RadialPotential tabulated(std::vector<double> radii, std::vector<double> values);
  /// The zero potential with a nominal support radius.
  static RadialPotential zero(double radius = 1.0) { return soft_sphere(0.0, radius); }

  /// V(r); throws ValidationError for r < 0.
  double operator()(double r) const;
  /// V(r) without the sign check, for hot loops over validated radii.
  double value_unchecked(double r) const;

  RadialKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double support_radius() const { return radius_; }
  double width() const { return width_; }
  const std::vector<double>& table_radii() const { return *radii_; }
  const std::vector<double>& table_values() const { return *values_; }
  bool is_zero() const;

  /// Radii where V may fail to be smooth (table nodes and the support edge).
  std::vector<double> breakpoints() const;

  /// V_alpha = alpha^-2 V(. / alpha); the support radius becomes alpha R0.
  RadialPotential rescaled(double alpha) const;

 private:
  RadialPotential() = default;

  RadialKind kind_ = RadialKind::soft_sphere;
  double amplitude_ = 0.0;
  double radius_ = 1.0;
  double width_ = 0.0;
  std::shared_ptr<const std::vector<double>> radii_;
  std::shared_ptr<const std::vector<double>> values_;
};

/// Reads a two-column (radius, value) text table. Lines starting with '#' are skipped.
RadialPotential load_radial_table(const std::filesystem::path& path);

/// The constant 6x6 matrix M = ((1/2)[[2,1],[1,2]])^{1/2} (x) I_3 together
/// with derived quantities.
struct ScatteringMatrix {
  Mat6 m;
  Mat6 inverse;
  Mat6 squared;
  /// Eigenvalues of M^2 in ascending order.
  Eigen::Matrix<double, 6, 1> squared_eigenvalues;
  double determinant = 0.0;
  /// Operator norm of M (largest singular value, sqrt(3/2)).
  double norm = 0.0;
  /// Diagonal and off-diagonal block coefficients of M^{-1}.
  double inverse_diag = 0.0;
  double inverse_off = 0.0;
};

/// Process-wide immutable instance.
const ScatteringMatrix& scattering_matrix();

/// s = |M^{-1}(x, y)|. Permutation symmetric in the particle labels when
/// x = x1 - x2 and y = x1 - x3.
double hyperradius(const Vec3& x, const Vec3& y);

enum class ThreeBodyKind { m_radial, tabulated_6d };

std::string to_string(ThreeBodyKind kind);

/// Nonnegative three-body potential W(x, y) on R^6.
///
/// m-radial: W(x, y) = w(hyperradius(x, y)) for a radial profile w. The
/// Euclidean support radius is |M| times the profile support.
/// tabulated-6d: samples on a uniform grid over [-R0, R0]^6 with multilinear
/// interpolation; zero outside the Euclidean ball of radius R0.
class ThreeBodyPotential {
 public:
  static ThreeBodyPotential m_radial(RadialPotential profile);
  static ThreeBodyPotential zero(double profile_radius = 1.0) {
    return m_radial(RadialPotential::zero(profile_radius));
  }
  /// Samples `fn` on `nodes`^6 grid points covering [-R0, R0]^6.
  static ThreeBodyPotential tabulate(const std::function<double(const Vec3&, const Vec3&)>& fn,
                                     double support_radius, int nodes);

  double operator()(const Vec3& x, const Vec3& y) const;
  /// W for the particle triple (x1, x2, x3). For the m-radial kind the
  /// hyperradius is formed from the sorted pair distances, so the value is
  /// bitwise invariant under relabeling.
  double at_positions(const Vec3& x1, const Vec3& x2, const Vec3& x3) const;

  ThreeBodyKind kind() const { return kind_; }
  /// Euclidean support radius R0 in R^6.
  double support_radius() const;
  /// Hyperradial profile (m-radial only).
  const RadialPotential& profile() const;
  bool is_zero() const;

  /// W_delta = delta^-2 W(. / delta).
  ThreeBodyPotential rescaled(double delta) const;

  /// Average of W over the hypersphere {|M^{-1} x| = s}, using a fixed
  /// deterministic set of directions. Exact for the m-radial kind.
  double hyperangular_average(double s) const;

 private:
  ThreeBodyPotential() = default;
  double interpolate(const Eigen::Matrix<double, 6, 1>& z) const;

  ThreeBodyKind kind_ = ThreeBodyKind::m_radial;
  std::shared_ptr<const RadialPotential> profile_;
  double table_radius_ = 0.0;
  int table_nodes_ = 0;
  std::shared_ptr<const std::vector<double>> table_;
};

/// Largest |W(x_{p1}-x_{p2}, x_{p1}-x_{p3}) - W(x1-x2, x1-x3)| over all six
/// label permutations p, for random triples drawn in a cube of half-side
/// `extent`. With `from_positions` the values come from at_positions.
double three_body_symmetry_defect(const ThreeBodyPotential& w, int samples, double extent,
                                  std::mt19937_64& rng, bool from_positions = false);

/// Density together with the combined scattering length and gas parameter.
struct GasState {
  double density = 0.0;
  double a = 0.0;
  double b = 0.0;
  double effective_length = 0.0;  // max(a, rho b)
  double gas_parameter = 0.0;     // Y = rho * effective_length^3
  double gp_length = 0.0;         // effective_length / sqrt(Y); +inf when Y = 0

  static GasState make(double density, double a, double b);
};

}  // namespace dilute
