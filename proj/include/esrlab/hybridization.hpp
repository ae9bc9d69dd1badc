#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esrlab {

struct NormalModes {
  double omega_minus;
  double omega_plus;
};

/// Positive roots of w^4 - w^2 (w1^2 + w2^2) + (1 - delta12^2) w1^2 w2^2 = 0.
/// Works in any consistent frequency unit; omega_minus <= omega_plus.
NormalModes normal_modes(double omega1, double omega2, double delta12);

/// omega_plus - omega_minus as (w+^2 - w-^2) / (w+ + w-), free of the
/// cancellation in the plain difference when delta12 is small.
double normal_mode_splitting(double omega1, double omega2, double delta12);

/// Spin line linear in field crossing a field-independent cavity mode.
/// Angular frequencies in rad/s, slope in rad/s per tesla.
struct TwoModeModel {
  double slope = 0.0;
  double b0 = 0.0;
  double omega_cross = 0.0;
  double omega2 = 0.0;
  double delta12 = 0.0;
  double q1 = 1.0;  // spin ensemble
  double q2 = 1.0;  // cavity mode

  double omega1(double field_tesla) const { return slope * (field_tesla - b0) + omega_cross; }
  /// Throws std::invalid_argument unless omega2 > 0, 0 <= delta12 < 1, q1, q2 > 0.
  void validate() const;
  /// Model whose spin line crosses omega2 at b0.
  static TwoModeModel crossing(double b0, double slope, double omega2, double delta12);
};

struct NormalModeQs {
  double q_minus;
  double q_plus;
};

/// Normal-mode quality factors from the linear relation
///   [w+/Q+, w-/Q-] = [[1, 1], [w-^2, w+^2]]^-1 [[1, 1], [w2^2, w1^2]] [w1/Q1, w2/Q2].
/// Throws std::invalid_argument when w+ = w- (decoupled and degenerate).
NormalModeQs normal_mode_qs(const TwoModeModel& model, double field_tesla);

/// Coupling strength g_CS = omega2 / 2pi * delta12, in Hz.
double coupling_strength_hz(const TwoModeModel& model);

enum class Branch { lower, upper };

std::string to_string(Branch b);
std::optional<Branch> parse_branch(std::string_view text);

struct CrossingPoint {
  double field_tesla = 0.0;
  double frequency_ghz = 0.0;
  Branch branch = Branch::lower;
  std::optional<double> q;
};

struct CrossingData {
  std::vector<CrossingPoint> points;

  /// Throws DataError on non-positive frequencies, negative fields, or an
  /// upper-branch point not above a lower-branch point at the same field.
  void validate() const;
};

struct CrossingFit {
  TwoModeModel model;  // q1, q2 left at 1
  double g_cs_hz = 0.0;
  std::optional<double> g_cs_sigma_hz;  // 1 sigma, residual-variance scaled
  std::vector<std::optional<double>> sigmas;  // b0 [T], slope [rad/s/T], omega2 [rad/s], delta12
  std::vector<double> residuals_ghz;
  double rms_ghz = 0.0;
  int iterations = 0;
};

struct CrossingFitOptions {
  int restarts = 4;  // extra seeded restarts around the data-driven guess
  std::uint64_t seed = 1;
  /// Pins the spin-line slope (GHz/T), e.g. to dDeltaE/dB from a sweep.
  std::optional<double> fixed_slope_ghz_per_tesla;
};

/// Least-squares fit of (b0, slope, omega2, delta12) to branch-labelled points.
/// Throws DataError for fewer than 4 points or a single branch, FitError when
/// the crossing geometry leaves the parameters undetermined.
CrossingFit fit_avoided_crossing(const CrossingData& data, const CrossingFitOptions& options = {});

struct QProfileFit {
  double q_spin = 0.0;
  double q_wgm = 0.0;
  std::optional<double> q_spin_sigma;
  std::optional<double> q_wgm_sigma;
  std::vector<double> relative_residuals;
  int iterations = 0;
};

struct QProfileOptions {
  int restarts = 4;
  std::uint64_t seed = 1;
};

/// Fits (q1, q2) of normal_mode_qs to measured Qs with fractional residuals.
/// Throws DataError for fewer than 3 Q values or all points at one field.
QProfileFit fit_q_profile(const CrossingData& data, const TwoModeModel& crossing_model,
                          const QProfileOptions& options = {});

struct TraceSample {
  double frequency_ghz;
  double magnitude;
};

struct LorentzianFit {
  double f0_ghz = 0.0;
  double q = 0.0;
  double amplitude = 0.0;
  double baseline = 0.0;
  double rms = 0.0;
  int iterations = 0;
};

double lorentzian(double f_ghz, double f0_ghz, double q, double amplitude, double baseline);

/// baseline + amplitude / (1 + 4 Q^2 (f/f0 - 1)^2). Throws DataError for fewer
/// than 5 samples or a trace without an interior maximum.
LorentzianFit fit_lorentzian(const std::vector<TraceSample>& trace);

}  // namespace esrlab
