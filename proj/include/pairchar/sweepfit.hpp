#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairchar/correlate.hpp"
#include "pairchar/source_sim.hpp"

namespace pairchar {

/// Raw counts for one excitation density; one line of the sweep CSV.
struct SweepRow {
  double density = 0.0;  // nJ/cm^2
  std::uint64_t pulses = 0;
  std::uint64_t count_a = 0;
  std::uint64_t count_b = 0;
  std::uint64_t coinc_zero = 0;
  std::uint64_t coinc_off_sum = 0;
  std::uint64_t off_slots = 0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// Per-pulse rates with Poisson standard errors (one-count floor).
struct SweepPoint {
  double density = 0.0;
  std::uint64_t pulses = 0;
  double c_a = 0.0, c_a_err = 0.0;
  double c_b = 0.0, c_b_err = 0.0;
  double c_s = 0.0, c_s_err = 0.0;
  double c_r = 0.0, c_r_err = 0.0;
};

SweepRow make_sweep_row(double density, std::uint64_t count_a, std::uint64_t count_b,
                        const CoincidenceHistogram& histogram, std::int64_t guard = 0);
SweepPoint to_sweep_point(const SweepRow& row);
std::vector<SweepPoint> to_sweep_points(std::span<const SweepRow> rows);

inline constexpr std::array<const char*, 7> kSweepCsvColumns = {
    "density_nj_cm2", "pulses", "count_a", "count_b", "coinc_zero", "coinc_off_sum", "off_slots"};

/// Header line required. Throws FormatError with the offending line number.
std::vector<SweepRow> read_sweep_csv(std::istream& in);
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct SinglesFit {
  double alpha = 0.0, beta_a = 0.0, beta_b = 0.0;
  double alpha_err = 0.0, beta_a_err = 0.0, beta_b_err = 0.0;
  /// Covariance in (alpha, beta_a, beta_b) order. Clamped parameters have
  /// zero rows and columns.
  std::array<std::array<double, 3>, 3> covariance{};
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::vector<std::string> clamped;
};

/// Weighted linear least squares of both singles channels against
/// eta * (alpha I^2 + beta I), alpha shared. Negative estimates are clamped
/// to zero and the rest refit.
SinglesFit fit_singles(std::span<const SweepPoint> points, double eta_sa, double eta_sb);

struct EtaXFit {
  double eta_x = 0.0;
  double eta_x_err = 0.0;  // infinite when undetermined
  double chi2 = 0.0;
  std::size_t dof = 0;
  bool degenerate = false;  // all c_s zero or no usable point
  bool clamped = false;
};

/// Closed-form weighted fit of c_s against eta_x * eta_sa * eta_sb * alpha I^2.
EtaXFit fit_eta_x(std::span<const SweepPoint> points, double alpha, double eta_sa, double eta_sb);

/// Singles-model log-log slope d ln C / d ln I = (2 alpha I + beta) / (alpha I + beta).
double singles_log_slope(double density, double alpha, double beta) noexcept;

/// eta_sa * eta_sb * (alpha I^2 + beta_a I)(alpha I^2 + beta_b I).
double predict_cr(double density, const SourceParams& params) noexcept;
/// eta_x * eta_sa * eta_sb * alpha I^2.
double predict_cs(double density, const SourceParams& params) noexcept;
/// C_S / C_R without the detection factors; absent when the denominator is 0.
std::optional<double> predict_car(double density, const SourceParams& params) noexcept;
/// Log-log slope of predict_cr; 2 at low density, 4 at high density.
double cr_log_slope(double density, const SourceParams& params) noexcept;

struct FitResult {
  double alpha = 0.0, alpha_err = 0.0;
  double beta_a = 0.0, beta_a_err = 0.0;
  double beta_b = 0.0, beta_b_err = 0.0;
  double eta_x = 0.0, eta_x_err = 0.0;
  double eta_sa = 0.0, eta_sb = 0.0;
  double singles_chi2_per_dof = 0.0;
  double coincidence_chi2_per_dof = 0.0;
  std::vector<std::string> clamped;
  bool eta_x_degenerate = false;
  std::string method = "linear";
  std::size_t points = 0;
  std::optional<double> car_max;
  std::optional<double> car_prime_max;

  SourceParams params() const noexcept;
};

/// fit_singles followed by fit_eta_x at the fitted alpha.
FitResult fit_sweep(std::span<const SweepPoint> points, double eta_sa, double eta_sb);

/// Damped Gauss-Newton refit of (alpha, beta_a, beta_b, eta_x) against C_A,
/// C_B, C_S and C_R together, started from fit_sweep. Stops at relative step
/// < 1e-10 or 100 iterations.
FitResult fit_joint(std::span<const SweepPoint> points, double eta_sa, double eta_sb);

struct ComparisonRow {
  std::string method;
  std::optional<double> car_prime_max;
  double alpha = 0.0;  // pairs / pulse / (nJ/cm^2)^2
  double alpha_ratio = 0.0;  // fitted alpha over this row's alpha
};

struct FiguresOfMerit {
  std::optional<double> car_max;        // eta_x alpha / (beta_a beta_b)
  std::optional<double> car_prime_max;  // alpha / (beta_a beta_b)
  std::vector<ComparisonRow> comparison;
};

FiguresOfMerit figures_of_merit(const FitResult& fit);

void write_comparison_tsv(std::ostream& out, const FiguresOfMerit& fom);

}  // namespace pairchar
