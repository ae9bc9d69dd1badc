#pragma once

#include "esrlab/hamiltonian.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace esrlab {

enum class SnrClass { high_broad, high_narrow, low_narrow };

std::string to_string(SnrClass c);
std::optional<SnrClass> parse_snr_class(std::string_view text);

inline constexpr double default_sigma_f_ghz = 0.05;

struct InteractionPoint {
  double field_tesla = 0.0;
  double frequency_ghz = 0.0;
  SnrClass snr_class = SnrClass::high_narrow;
  double sigma_f_ghz = default_sigma_f_ghz;

  void validate() const;
};

enum class SpinParameter { g, d, e, a };

std::string to_string(SpinParameter p);
std::optional<SpinParameter> parse_spin_parameter(std::string_view text);
double get(const SpinSystem& sys, SpinParameter p);
void set(SpinSystem& sys, SpinParameter p, double value);

struct FreeParameter {
  SpinParameter parameter;
  double lower;
  double upper;
};

/// Default box for a parameter: g in [1.5, 2.5], D and E in [0, 10] GHz, A in [0, 5] GHz.
FreeParameter default_bounds(SpinParameter p);

/// Which transitions a measured point may be assigned to.
enum class LineSelection {
  allowed,    // every transition not forbidden by the intensity filter
  principal,  // Delta m_S = +-1, Delta m_I = 0 lines (see principal_lines)
};

struct SpinFitProblem {
  std::vector<InteractionPoint> points;
  SpinSystem base;  // spins plus values of the fixed parameters
  std::vector<FreeParameter> free;
  LineSelection lines = LineSelection::allowed;

  /// Throws std::invalid_argument on an empty/duplicated free set, bad bounds,
  /// or A free while I = 0.
  void validate() const;
  SpinSystem with(const std::vector<double>& values) const;
};

/// min over selected transitions of |f_mn - f_point| at the point's field;
/// +infinity when no transition is selectable there.
double point_residual(const SpinSystem& sys, const InteractionPoint& p,
                      LineSelection lines = LineSelection::allowed);

/// Weighted least-squares objective sum((residual / sigma_f)^2) with the
/// Hamiltonian diagonalized once per distinct field.
class SpinObjective {
 public:
  explicit SpinObjective(const SpinFitProblem& problem);

  double operator()(const std::vector<double>& free_values) const;
  double evaluate(const SpinSystem& sys) const;
  /// Soft-min assignment: each point's squared residual becomes
  /// -tau^2 log sum_l exp(-d_l^2 / tau^2); tau = 0 recovers evaluate().
  double evaluate_smoothed(const SpinSystem& sys, double tau_ghz) const;
  /// Signed residual f_nearest - f_point per point, GHz (+inf when no line).
  std::vector<double> residuals(const SpinSystem& sys) const;

  const SpinFitProblem& problem() const { return problem_; }

 private:
  struct FieldGroup {
    double field;
    std::vector<std::size_t> points;
  };
  std::vector<double> selectable_frequencies(const SpinSystem& sys, double field) const;

  SpinFitProblem problem_;
  HamiltonianTerms terms_;
  std::vector<FieldGroup> groups_;
};

struct SimplexOptions {
  int max_evaluations = 4000;
  double f_tolerance = 1e-12;  // relative spread of simplex values
  double x_tolerance = 1e-9;   // simplex size in unit-box coordinates
  double initial_step = 0.05;  // unit-box coordinates
  int restarts = 3;            // fresh simplices started from the incumbent
};

struct SimplexResult {
  std::vector<double> x;  // unit-box coordinates
  double value = 0.0;
  int evaluations = 0;
};

/// Nelder-Mead on the unit box [0,1]^n; every trial vertex is clamped to the box.
template <typename F>
SimplexResult minimize_bounded_simplex(F&& f, std::vector<double> start, const SimplexOptions& options);

/// Cranley-Patterson rotated Halton points in [0,1)^dim, deterministic in seed.
std::vector<std::vector<double>> halton_points(int count, int dim, std::uint64_t seed);

/// Deterministic annealing of the point-to-line assignment: each start runs
/// the simplex on evaluate_smoothed() with tau shrinking geometrically from
/// initial_tau_ghz, then polishes on the hard nearest-line objective.
struct AnnealingSchedule {
  double initial_tau_ghz = 4.0;  // 0 disables annealing
  double factor = 0.5;
  double final_tau_ghz = 0.02;
  SimplexOptions stage{200, 1e-3, 1e-7, 0.05, 0};
};

struct MultiStartOptions {
  int starts = 32;
  std::uint64_t seed = 1;
  AnnealingSchedule annealing;
  SimplexOptions simplex;  // final hard-objective stage
};

struct SpinFitResult {
  SpinSystem best;
  double objective = 0.0;
  std::vector<double> per_point_residuals;  // signed, GHz
  std::vector<SpinParameter> free_parameters;
  std::vector<std::optional<double>> uncertainties;  // 1 sigma; nullopt = not estimable
  std::vector<double> start_objectives;              // objective at each simplex start point
  std::vector<double> local_optima;                  // objective reached from each start
  int best_start = 0;
  long evaluations = 0;
};

SpinFitResult fit_spin_parameters(const SpinFitProblem& problem, const MultiStartOptions& options = {});

/// Single-threaded reference for the multi-start loop; results must match.
SpinFitResult fit_spin_parameters_reference(const SpinFitProblem& problem, const MultiStartOptions& options = {});

struct DBoundOptions {
  double threshold_factor = 1.05;
  int scan_points = 401;
};

struct DBoundResult {
  double bound_ghz = 0.0;
  bool bounded = false;  // false: acceptable region reaches the box upper limit
  double minimum_objective = 0.0;
  std::vector<double> scan_d;
  std::vector<double> scan_objective;
};

/// Largest D (others held at the fit) whose objective stays within
/// threshold_factor of the minimum over the scan and the fit itself.
DBoundResult d_upper_bound_scan(const SpinFitProblem& problem, const SpinFitResult& fit,
                                const DBoundOptions& options = {});
DBoundResult d_upper_bound_scan(const SpinFitProblem& problem, const MultiStartOptions& fit_options,
                                const DBoundOptions& options = {});

}  // namespace esrlab

#include "esrlab/detail/simplex_impl.hpp"
