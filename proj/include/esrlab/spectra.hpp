#pragma once

#include "esrlab/hamiltonian.hpp"

#include <iosfwd>
#include <map>
#include <utility>
#include <vector>

namespace esrlab {

struct SpectrumCurve {
  int lower = 0;  // level indices at the first grid point (ascending there)
  int upper = 0;
  std::vector<double> frequency_ghz;
  std::vector<double> intensity;
  std::vector<bool> allowed;
};

struct SpectrumSweep {
  std::vector<double> field_grid;
  std::vector<SpectrumCurve> curves;
  /// level_tracks[k][p] is the ascending index, at grid point p, of the level
  /// that started as index k.
  std::vector<std::vector<int>> level_tracks;
};

/// Overlap below which continuation falls back to energy order.
inline constexpr double tracking_overlap_threshold = 0.6;

/// Per-point diagonalization runs in parallel; level continuation is a
/// serial pass afterwards, so the result is independent of thread count.
SpectrumSweep sweep(const SpinSystem& sys, const std::vector<double>& field_grid,
                    Populations populations = Populations::uniform());

/// Single-threaded reference for sweep(); must agree bit for bit.
SpectrumSweep sweep_reference(const SpinSystem& sys, const std::vector<double>& field_grid,
                              Populations populations = Populations::uniform());

/// Same curves ordered purely by ascending energy at each point (no tracking).
SpectrumSweep sweep_sorted(const SpinSystem& sys, const std::vector<double>& field_grid);

std::vector<double> linear_grid(double start, double stop, int points);

/// Maps each previous level to a current one by maximal |<prev|cur>|^2.
/// Levels whose best overlap is ambiguous are filled in energy order.
std::vector<int> continue_levels(const RealMatrix& previous, const RealMatrix& current);

struct ResonanceHit {
  double field_tesla = 0.0;
  int lower = 0;  // ascending level indices at the hit field
  int upper = 0;
  double frequency_residual_ghz = 0.0;
};

struct ResonanceOptions {
  bool include_forbidden = false;
  double field_tolerance_tesla = 1e-6;
  double frequency_tolerance_ghz = 1e-6;
};

/// All fields in [b_min, b_max] where an allowed transition matches f_wg.
/// Roots are bracketed on a scan grid of scan_points and refined by
/// bisection; a curve tangent to f_wg between scan points can be missed.
std::vector<ResonanceHit> resonance_fields(const SpinSystem& sys, double f_wg_ghz, double b_min, double b_max,
                                           int scan_points, ResonanceOptions options = {});

/// Principal EPR lines: Delta m_S = +-1, Delta m_I = 0 between the dominant
/// |m_S, m_I> labels of the two levels, and not forbidden.
struct PrincipalLine {
  Transition transition;
  int twice_ms_lower = 0;  // electron transition m_S -> m_S + 1
  int twice_mi = 0;
};

std::vector<PrincipalLine> principal_lines(const SpinSystem& sys, double field_tesla);

/// Principal lines grouped by electron transition (keyed by 2 m_S of the lower state).
std::map<int, std::vector<PrincipalLine>> group_by_electron_transition(const std::vector<PrincipalLine>& lines);

/// Delimited export: curve_id,m,n,B_tesla,f_GHz,intensity,allowed
void write_spectrum(std::ostream& out, const SpectrumSweep& sweep);
SpectrumSweep read_spectrum(std::istream& in);

}  // namespace esrlab
