#pragma once

// Experiment plumbing: INI configuration, sweeps over scaled potential
// families with CSV output, and the ratio-versus-Y report.

#include "dilute/jastrow.hpp"
#include "dilute/potentials.hpp"
#include "dilute/spectral.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dilute {

/// Two-body spec: "zero", "soft_sphere V0 R", "gaussian V0 R w" or
/// "table PATH" (relative paths resolve against `base`).
RadialPotential parse_two_body(const std::string& spec, const std::filesystem::path& base = {});
/// Three-body spec: "zero" or "m_radial <two-body spec>" for the profile.
ThreeBodyPotential parse_three_body(const std::string& spec, const std::filesystem::path& base = {});

struct ExperimentConfig {
  std::string two_body_spec = "zero";
  std::string three_body_spec = "zero";
  RadialPotential two_body = RadialPotential::zero();
  ThreeBodyPotential three_body = ThreeBodyPotential::zero();
  std::vector<double> alphas{1.0};     // V_alpha = alpha^-2 V(. / alpha)
  std::vector<double> deltas{1.0};     // W_delta = delta^-2 W(. / delta)
  std::vector<double> densities;
  // Monte Carlo.
  int particles = 64;                  // largest N tried per row
  long steps = 20000;
  int chains = 4;
  int batches = 20;
  double step_size = 0.0;              // 0 picks rho^{-1/3} / 2
  // Lower-bound formula window.
  double lower_alpha = 0.34;
  double lower_beta = 0.0;             // 0 picks the middle of the beta window
  AlphaWindow window = AlphaWindow::statement;
  // Grid Hamiltonians (temple, exact).
  int grid_particles = 2;
  double grid_box = 3.0;
  int grid_nodes = 8;
  // Dyson checks.
  double dyson_scale = 6.0;
  int dyson_points = 2000;
  std::filesystem::path output;
  std::optional<std::uint64_t> seed;
  int workers = 1;

  /// Throws ValidationError unless all lists are non-empty and positive and
  /// the seed is set.
  void validate() const;
};

/// Reads sections [potentials], [scaling], [sweep], [mc], [lower], [grid],
/// [dyson], [output] and [run] of an INI file. Lists are comma separated.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base = {});

/// Sections and keys accepted by parse_config, one "section.key" per entry.
const std::vector<std::string>& config_keys();

struct SweepRow {
  double rho = 0.0;
  double a = 0.0;
  double b = 0.0;
  double a_eff = 0.0;     // max(a, rho b)
  double y = 0.0;         // rho a_eff^3
  double e_pred = 0.0;    // 4 pi a rho^2 + b rho^3 / 6
  double e_upper = 0.0;   // Monte Carlo energy per volume
  double e_upper_error = 0.0;
  double e_lower = 0.0;   // lower-bound formula per volume
  double ratio_upper = 0.0;
  double ratio_upper_error = 0.0;
  double ratio_lower = 0.0;
  double nu_hat = 0.0;    // sweep-wide fit, NaN when refused
  double alpha = 1.0;
  double delta = 1.0;
  int n = 0;
  double acceptance = 0.0;
  std::string status = "ok";  // or the reason the row was aborted

  bool ok() const { return status == "ok"; }
};

struct ExponentFit {
  double nu = 0.0;
  double nu_error = 0.0;
  double intercept = 0.0;
  int points = 0;
};

/// Least-squares fit of log|ratio - 1| against log Y over rows with status
/// ok. Empty with fewer than 3 rows, identical Y values, or a ratio of
/// exactly 1.
std::optional<ExponentFit> fit_exponent(const std::vector<SweepRow>& rows);

/// One row per (alpha, delta, rho), in that nesting order. Rows run on up to
/// cfg.workers threads; a failing row records its reason in `status`.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg);

/// Single row of the sweep; `index` selects the row's Monte Carlo seed.
SweepRow sweep_row(const ExperimentConfig& cfg, double alpha, double delta, double rho, std::size_t index);

inline constexpr const char* kSweepHeader = "# dilute-sweep v1";
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

struct Report {
  std::string summary;
  std::optional<ExponentFit> fit;
  std::string plot_data;  // whitespace-separated columns Y ratio_upper error ratio_lower
};

/// Throws ValidationError on an empty table.
Report emit_report(const std::vector<SweepRow>& rows);

}  // namespace dilute
