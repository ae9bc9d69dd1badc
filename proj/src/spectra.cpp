#include "esrlab/spectra.hpp"

#include "esrlab/error.hpp"
#include "esrlab/parallel.hpp"
#include "esrlab/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace esrlab {

namespace {

void validate_grid(const std::vector<double>& grid) {
  if (grid.size() < 2) throw std::invalid_argument("field grid needs at least two points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k])) throw std::invalid_argument("field grid contains a non-finite value");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw std::invalid_argument("field grid must be strictly increasing");
  }
}

double max_pair_intensity(const LevelSolution& lv) {
  const int n = static_cast<int>(lv.eig.energies.size());
  double best = 0.0;
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) best = std::max(best, transition_intensity(lv.s_plus_eigenbasis, m, k));
  }
  return best;
}

std::vector<LevelSolution> solve_grid(const HamiltonianTerms& terms, const SpinSystem& sys,
                                      const std::vector<double>& grid, bool parallel) {
  std::vector<LevelSolution> levels(grid.size());
  const long n = static_cast<long>(grid.size());
  if (parallel) {
    ESRLAB_OMP_DYNAMIC_LOOP
    for (long p = 0; p < n; ++p) levels[p] = solve_levels(terms, sys, grid[p]);
  } else {
    for (long p = 0; p < n; ++p) levels[p] = solve_levels(terms, sys, grid[p]);
  }
  return levels;
}

SpectrumSweep assemble_sweep(const std::vector<double>& grid, const std::vector<LevelSolution>& levels,
                             bool track) {
  const int dim = static_cast<int>(levels.front().eig.energies.size());
  const std::size_t points = grid.size();

  SpectrumSweep out;
  out.field_grid = grid;
  out.level_tracks.assign(dim, std::vector<int>(points));
  for (int k = 0; k < dim; ++k) out.level_tracks[k][0] = k;
  for (std::size_t p = 1; p < points; ++p) {
    std::vector<int> map(dim);
    if (track) {
      map = continue_levels(levels[p - 1].eig.vectors, levels[p].eig.vectors);
    } else {
      for (int k = 0; k < dim; ++k) map[k] = k;
    }
    for (int k = 0; k < dim; ++k) out.level_tracks[k][p] = map[out.level_tracks[k][p - 1]];
  }

  std::vector<double> thresholds(points);
  for (std::size_t p = 0; p < points; ++p) {
    thresholds[p] = forbidden_relative_threshold * max_pair_intensity(levels[p]);
  }

  out.curves.reserve(static_cast<std::size_t>(dim) * (dim - 1) / 2);
  for (int m = 0; m < dim; ++m) {
    for (int n = m + 1; n < dim; ++n) {
      SpectrumCurve c;
      c.lower = m;
      c.upper = n;
      c.frequency_ghz.resize(points);
      c.intensity.resize(points);
      c.allowed.resize(points);
      for (std::size_t p = 0; p < points; ++p) {
        const int a = out.level_tracks[m][p];
        const int b = out.level_tracks[n][p];
        const auto& lv = levels[p];
        c.frequency_ghz[p] = std::abs(lv.eig.energies[b] - lv.eig.energies[a]);
        c.intensity[p] = transition_intensity(lv.s_plus_eigenbasis, a, b);
        c.allowed[p] = c.intensity[p] > thresholds[p];
      }
      out.curves.push_back(std::move(c));
    }
  }
  return out;
}

SpectrumSweep run_sweep(const SpinSystem& sys, const std::vector<double>& grid, bool parallel, bool track) {
  sys.validate();
  validate_grid(grid);
  const HamiltonianTerms terms(sys.s, sys.i);
  return assemble_sweep(grid, solve_grid(terms, sys, grid, parallel), track);
}

}  // namespace

// Intensities below do not depend on populations; the argument is kept for
// interface symmetry with transition_table.
SpectrumSweep sweep(const SpinSystem& sys, const std::vector<double>& field_grid, Populations) {
  return run_sweep(sys, field_grid, true, true);
}

SpectrumSweep sweep_reference(const SpinSystem& sys, const std::vector<double>& field_grid, Populations) {
  return run_sweep(sys, field_grid, false, true);
}

SpectrumSweep sweep_sorted(const SpinSystem& sys, const std::vector<double>& field_grid) {
  return run_sweep(sys, field_grid, true, false);
}

std::vector<double> linear_grid(double start, double stop, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least two points");
  if (!(stop > start)) throw std::invalid_argument("grid range must be increasing");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = start + (stop - start) * k / (points - 1);
  g.back() = stop;
  return g;
}

std::vector<int> continue_levels(const RealMatrix& previous, const RealMatrix& current) {
  const int dim = static_cast<int>(previous.cols());
  const RealMatrix overlap = (previous.transpose() * current).cwiseAbs2();
  std::vector<int> map(dim, -1);
  std::vector<bool> taken(dim, false);
  for (int k = 0; k < dim; ++k) {
    Eigen::Index j = 0;
    const double best = overlap.row(k).maxCoeff(&j);
    if (best >= tracking_overlap_threshold && !taken[j]) {
      map[k] = static_cast<int>(j);
      taken[j] = true;
    }
  }
  int next = 0;
  for (int k = 0; k < dim; ++k) {
    if (map[k] >= 0) continue;
    while (taken[next]) ++next;
    map[k] = next;
    taken[next] = true;
  }
  return map;
}

std::vector<ResonanceHit> resonance_fields(const SpinSystem& sys, double f_wg_ghz, double b_min, double b_max,
                                           int scan_points, ResonanceOptions options) {
  if (!(f_wg_ghz > 0.0) || !std::isfinite(f_wg_ghz)) throw std::invalid_argument("f_wg must be positive");
  if (!(b_max > b_min) || !std::isfinite(b_min) || !std::isfinite(b_max)) {
    throw std::invalid_argument("invalid field range");
  }
  if (scan_points < 2) throw std::invalid_argument("scan_points must be at least 2");
  sys.validate();

  const HamiltonianTerms terms(sys.s, sys.i);
  const auto grid = linear_grid(b_min, b_max, scan_points);
  const auto levels = solve_grid(terms, sys, grid, true);
  const SpectrumSweep sw = assemble_sweep(grid, levels, true);

  struct Bracket {
    std::size_t point;
    int level_a;
    int level_b;
  };
  std::vector<Bracket> brackets;
  for (const auto& c : sw.curves) {
    for (std::size_t p = 0; p + 1 < grid.size(); ++p) {
      const double d0 = c.frequency_ghz[p] - f_wg_ghz;
      const double d1 = c.frequency_ghz[p + 1] - f_wg_ghz;
      const bool starts_on_root = p == 0 && d0 == 0.0;
      if (starts_on_root || d1 == 0.0 || (d0 < 0.0) != (d1 < 0.0)) {
        brackets.push_back({p, sw.level_tracks[c.lower][p], sw.level_tracks[c.upper][p]});
      }
    }
  }

  std::vector<ResonanceHit> candidates(brackets.size());
  std::vector<char> keep(brackets.size(), 0);
  const long count = static_cast<long>(brackets.size());
  ESRLAB_OMP_DYNAMIC_LOOP
  for (long q = 0; q < count; ++q) {
    const Bracket& br = brackets[q];
    double lo = grid[br.point];
    double hi = grid[br.point + 1];
    RealMatrix lo_vectors = levels[br.point].eig.vectors;
    int a = br.level_a, b = br.level_b;
    auto freq = [](const LevelSolution& lv, int x, int y) { return std::abs(lv.eig.energies[y] - lv.eig.energies[x]); };
    const double d_lo = freq(levels[br.point], a, b) - f_wg_ghz;

    LevelSolution at = levels[br.point];
    double field = lo, residual = d_lo;
    int fa = a, fb = b;
    if (d_lo != 0.0) {
      const double d_hi_sign_ref = d_lo;
      for (int iter = 0; iter < 200; ++iter) {
        field = 0.5 * (lo + hi);
        at = solve_levels(terms, sys, field);
        const auto map = continue_levels(lo_vectors, at.eig.vectors);
        fa = map[a];
        fb = map[b];
        residual = freq(at, fa, fb) - f_wg_ghz;
        if (hi - lo <= options.field_tolerance_tesla && std::abs(residual) <= options.frequency_tolerance_ghz) break;
        if (residual == 0.0) break;
        if ((residual < 0.0) == (d_hi_sign_ref < 0.0)) {
          lo = field;
          lo_vectors = at.eig.vectors;
          a = fa;
          b = fb;
        } else {
          hi = field;
        }
      }
    }
    if (std::abs(residual) > options.frequency_tolerance_ghz) continue;  // tracking jump, not a root

    const int lower = std::min(fa, fb), upper = std::max(fa, fb);
    const double threshold = forbidden_relative_threshold * max_pair_intensity(at);
    const bool allowed = transition_intensity(at.s_plus_eigenbasis, lower, upper) > threshold;
    if (!allowed && !options.include_forbidden) continue;
    candidates[q] = {field, lower, upper, residual};
    keep[q] = 1;
  }

  std::vector<ResonanceHit> hits;
  for (std::size_t q = 0; q < candidates.size(); ++q) {
    if (keep[q]) hits.push_back(candidates[q]);
  }
  std::stable_sort(hits.begin(), hits.end(), [](const ResonanceHit& x, const ResonanceHit& y) {
    if (x.field_tesla != y.field_tesla) return x.field_tesla < y.field_tesla;
    return std::pair(x.lower, x.upper) < std::pair(y.lower, y.upper);
  });
  return hits;
}

std::vector<PrincipalLine> principal_lines(const SpinSystem& sys, double field_tesla) {
  sys.validate();
  const HamiltonianTerms terms(sys.s, sys.i);
  const LevelSolution lv = solve_levels(terms, sys, field_tesla);
  const TransitionTable table = tabulate(lv, field_tesla, Populations::uniform());
  const auto labels = dominant_labels(lv.eig.vectors, sys.s, sys.i);

  std::vector<PrincipalLine> out;
  for (const auto& t : table.entries) {
    if (t.forbidden) continue;
    const LevelLabel& x = labels[t.lower];
    const LevelLabel& y = labels[t.upper];
    if (std::abs(x.twice_ms - y.twice_ms) == 2 && x.twice_mi == y.twice_mi) {
      out.push_back({t, std::min(x.twice_ms, y.twice_ms), x.twice_mi});
    }
  }
  return out;
}

std::map<int, std::vector<PrincipalLine>> group_by_electron_transition(const std::vector<PrincipalLine>& lines) {
  std::map<int, std::vector<PrincipalLine>> groups;
  for (const auto& l : lines) groups[l.twice_ms_lower].push_back(l);
  return groups;
}

void write_spectrum(std::ostream& out, const SpectrumSweep& sw) {
  out << "curve_id,m,n,B_tesla,f_GHz,intensity,allowed\n";
  for (std::size_t c = 0; c < sw.curves.size(); ++c) {
    const auto& curve = sw.curves[c];
    for (std::size_t p = 0; p < sw.field_grid.size(); ++p) {
      out << c << ',' << curve.lower << ',' << curve.upper << ',' << text::format_double(sw.field_grid[p]) << ','
          << text::format_double(curve.frequency_ghz[p]) << ',' << text::format_double(curve.intensity[p]) << ','
          << (curve.allowed[p] ? 1 : 0) << '\n';
    }
  }
}

SpectrumSweep read_spectrum(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || text::trim(line) != "curve_id,m,n,B_tesla,f_GHz,intensity,allowed") {
    throw DataError("spectrum file: missing or unexpected header");
  }
  SpectrumSweep sw;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cols = text::split(text::trim(line), ',');
    if (cols.size() != 7) throw DataError("spectrum file line " + std::to_string(line_no) + ": expected 7 columns");
    const auto id = static_cast<std::size_t>(text::parse_integer(cols[0]));
    if (id == sw.curves.size()) {
      SpectrumCurve c;
      c.lower = static_cast<int>(text::parse_integer(cols[1]));
      c.upper = static_cast<int>(text::parse_integer(cols[2]));
      sw.curves.push_back(std::move(c));
    } else if (id + 1 != sw.curves.size()) {
      throw DataError("spectrum file line " + std::to_string(line_no) + ": curve ids out of order");
    }
    auto& c = sw.curves.back();
    const double b = text::parse_double(cols[3]);
    if (sw.curves.size() == 1) sw.field_grid.push_back(b);
    c.frequency_ghz.push_back(text::parse_double(cols[4]));
    c.intensity.push_back(text::parse_double(cols[5]));
    c.allowed.push_back(text::parse_integer(cols[6]) != 0);
  }
  return sw;
}

}  // namespace esrlab
