#include "esrlab/fitting.hpp"

#include "esrlab/error.hpp"
#include "esrlab/parallel.hpp"
#include "esrlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace esrlab {

namespace {
constexpr double infinity = std::numeric_limits<double>::infinity();
}

std::string to_string(SnrClass c) {
  switch (c) {
    case SnrClass::high_broad: return "high_broad";
    case SnrClass::high_narrow: return "high_narrow";
    case SnrClass::low_narrow: return "low_narrow";
  }
  return "?";
}

std::optional<SnrClass> parse_snr_class(std::string_view text) {
  if (text == "high_broad") return SnrClass::high_broad;
  if (text == "high_narrow") return SnrClass::high_narrow;
  if (text == "low_narrow") return SnrClass::low_narrow;
  return std::nullopt;
}

void InteractionPoint::validate() const {
  if (!(field_tesla >= 0.0) || !std::isfinite(field_tesla)) throw std::invalid_argument("point field must be >= 0");
  if (!(frequency_ghz > 0.0) || !std::isfinite(frequency_ghz)) throw std::invalid_argument("point frequency must be > 0");
  if (!(sigma_f_ghz > 0.0) || !std::isfinite(sigma_f_ghz)) throw std::invalid_argument("sigma_f must be > 0");
}

std::string to_string(SpinParameter p) {
  switch (p) {
    case SpinParameter::g: return "g";
    case SpinParameter::d: return "d_ghz";
    case SpinParameter::e: return "e_ghz";
    case SpinParameter::a: return "a_ghz";
  }
  return "?";
}

std::optional<SpinParameter> parse_spin_parameter(std::string_view text) {
  if (text == "g") return SpinParameter::g;
  if (text == "d" || text == "d_ghz") return SpinParameter::d;
  if (text == "e" || text == "e_ghz") return SpinParameter::e;
  if (text == "a" || text == "a_ghz") return SpinParameter::a;
  return std::nullopt;
}

double get(const SpinSystem& sys, SpinParameter p) {
  switch (p) {
    case SpinParameter::g: return sys.g;
    case SpinParameter::d: return sys.d_ghz;
    case SpinParameter::e: return sys.e_ghz;
    case SpinParameter::a: return sys.a_ghz;
  }
  return 0.0;
}

void set(SpinSystem& sys, SpinParameter p, double value) {
  switch (p) {
    case SpinParameter::g: sys.g = value; break;
    case SpinParameter::d: sys.d_ghz = value; break;
    case SpinParameter::e: sys.e_ghz = value; break;
    case SpinParameter::a: sys.a_ghz = value; break;
  }
}

FreeParameter default_bounds(SpinParameter p) {
  switch (p) {
    case SpinParameter::g: return {p, 1.5, 2.5};
    case SpinParameter::d: return {p, 0.0, 10.0};
    case SpinParameter::e: return {p, 0.0, 10.0};
    case SpinParameter::a: return {p, 0.0, 5.0};
  }
  return {p, 0.0, 1.0};
}

void SpinFitProblem::validate() const {
  if (free.empty()) throw std::invalid_argument("fit needs at least one free parameter");
  for (std::size_t k = 0; k < free.size(); ++k) {
    const auto& fp = free[k];
    if (!std::isfinite(fp.lower) || !std::isfinite(fp.upper) || !(fp.lower < fp.upper)) {
      throw std::invalid_argument("bounds for " + to_string(fp.parameter) + " must be finite with lower < upper");
    }
    if (fp.parameter == SpinParameter::g && !(fp.lower > 0.0)) {
      throw std::invalid_argument("g lower bound must be positive");
    }
    if (fp.parameter == SpinParameter::a && base.i.is_zero()) {
      throw std::invalid_argument("hyperfine constant cannot be free when I = 0");
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (free[j].parameter == fp.parameter) throw std::invalid_argument("duplicate free parameter " + to_string(fp.parameter));
    }
  }
  for (const auto& p : points) p.validate();
  base.validate();
}

SpinSystem SpinFitProblem::with(const std::vector<double>& values) const {
  SpinSystem sys = base;
  for (std::size_t k = 0; k < free.size(); ++k) set(sys, free[k].parameter, values[k]);
  return sys;
}

namespace {

std::vector<double> selectable(const HamiltonianTerms& terms, const SpinSystem& sys, double field, LineSelection lines) {
  const LevelSolution lv = solve_levels(terms, sys, field);
  const TransitionTable table = tabulate(lv, field, Populations::uniform());
  std::vector<double> out;
  if (lines == LineSelection::allowed) {
    for (const auto& t : table.entries) {
      if (!t.forbidden) out.push_back(t.frequency_ghz);
    }
  } else {
    const auto labels = dominant_labels(lv.eig.vectors, sys.s, sys.i);
    for (const auto& t : table.entries) {
      if (t.forbidden) continue;
      const LevelLabel& x = labels[t.lower];
      const LevelLabel& y = labels[t.upper];
      if (std::abs(x.twice_ms - y.twice_ms) == 2 && x.twice_mi == y.twice_mi) out.push_back(t.frequency_ghz);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

double nearest_signed(const std::vector<double>& sorted, double f) {
  if (sorted.empty()) return infinity;
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), f);
  double best = infinity;
  if (it != sorted.end()) best = *it - f;
  if (it != sorted.begin()) {
    const double below = *std::prev(it) - f;
    if (std::abs(below) <= std::abs(best)) best = below;
  }
  return best;
}

}  // namespace

double point_residual(const SpinSystem& sys, const InteractionPoint& p, LineSelection lines) {
  sys.validate();
  p.validate();
  const HamiltonianTerms terms(sys.s, sys.i);
  return std::abs(nearest_signed(selectable(terms, sys, p.field_tesla, lines), p.frequency_ghz));
}

SpinObjective::SpinObjective(const SpinFitProblem& problem)
    : problem_(problem), terms_(problem.base.s, problem.base.i) {
  problem_.validate();
  std::vector<std::size_t> order(problem_.points.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return problem_.points[a].field_tesla < problem_.points[b].field_tesla;
  });
  for (const std::size_t k : order) {
    const double b = problem_.points[k].field_tesla;
    if (groups_.empty() || groups_.back().field != b) groups_.push_back({b, {}});
    groups_.back().points.push_back(k);
  }
}

std::vector<double> SpinObjective::selectable_frequencies(const SpinSystem& sys, double field) const {
  return selectable(terms_, sys, field, problem_.lines);
}

std::vector<double> SpinObjective::residuals(const SpinSystem& sys) const {
  std::vector<double> r(problem_.points.size(), infinity);
  for (const auto& group : groups_) {
    const auto lines = selectable_frequencies(sys, group.field);
    for (const std::size_t k : group.points) r[k] = nearest_signed(lines, problem_.points[k].frequency_ghz);
  }
  return r;
}

double SpinObjective::evaluate(const SpinSystem& sys) const {
  // summed in point order so the value does not depend on field grouping
  const auto r = residuals(sys);
  double total = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double z = r[k] / problem_.points[k].sigma_f_ghz;
    total += z * z;
  }
  return total;
}

double SpinObjective::evaluate_smoothed(const SpinSystem& sys, double tau_ghz) const {
  if (!(tau_ghz > 0.0)) return evaluate(sys);
  const double t2 = tau_ghz * tau_ghz;
  std::vector<double> per_point(problem_.points.size(), infinity);
  for (const auto& group : groups_) {
    const auto lines = selectable_frequencies(sys, group.field);
    if (lines.empty()) continue;
    for (const std::size_t k : group.points) {
      const double f = problem_.points[k].frequency_ghz;
      double nearest = infinity;
      for (const double l : lines) nearest = std::min(nearest, (l - f) * (l - f));
      double sum = 0.0;
      for (const double l : lines) sum += std::exp(-((l - f) * (l - f) - nearest) / t2);
      per_point[k] = nearest - t2 * std::log(sum);
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < per_point.size(); ++k) {
    const double s = problem_.points[k].sigma_f_ghz;
    total += per_point[k] / (s * s);
  }
  return total;
}

double SpinObjective::operator()(const std::vector<double>& free_values) const {
  return evaluate(problem_.with(free_values));
}

std::vector<std::vector<double>> halton_points(int count, int dim, std::uint64_t seed) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  if (dim < 1 || dim > 16) throw std::invalid_argument("Halton dimension must be in [1, 16]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> shift(dim);
  for (double& s : shift) s = unit(rng);

  std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
  for (int k = 0; k < count; ++k) {
    for (int d = 0; d < dim; ++d) {
      double f = 1.0, r = 0.0;
      for (long i = k + 1; i > 0; i /= primes[d]) {
        f /= primes[d];
        r += f * static_cast<double>(i % primes[d]);
      }
      double v = r + shift[d];
      pts[k][d] = v - std::floor(v);
    }
  }
  return pts;
}

namespace {

std::vector<double> to_physical(const SpinFitProblem& problem, const std::vector<double>& unit) {
  std::vector<double> x(unit.size());
  for (std::size_t k = 0; k < unit.size(); ++k) {
    const auto& fp = problem.free[k];
    x[k] = fp.lower + std::clamp(unit[k], 0.0, 1.0) * (fp.upper - fp.lower);
  }
  return x;
}

std::vector<std::optional<double>> estimate_uncertainties(const SpinObjective& objective,
                                                          const SpinFitProblem& problem,
                                                          const std::vector<double>& best) {
  const std::size_t n = problem.points.size(), k = best.size();
  std::vector<std::optional<double>> out(k);
  Eigen::MatrixXd jac(n, k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto& fp = problem.free[j];
    const double h = 1e-5 * (fp.upper - fp.lower);
    auto up = best, down = best;
    up[j] = std::min(best[j] + h, fp.upper);
    down[j] = std::max(best[j] - h, fp.lower);
    const auto ru = objective.residuals(problem.with(up));
    const auto rd = objective.residuals(problem.with(down));
    for (std::size_t i = 0; i < n; ++i) {
      const double v = (ru[i] - rd[i]) / ((up[j] - down[j]) * problem.points[i].sigma_f_ghz);
      if (!std::isfinite(v)) return out;
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  const Eigen::MatrixXd info = jac.transpose() * jac;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  if (!(top > 0.0) || es.eigenvalues().minCoeff() <= 1e-12 * top) return out;
  const Eigen::MatrixXd cov = es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
                              es.eigenvectors().transpose();
  for (std::size_t j = 0; j < k; ++j) out[j] = std::sqrt(cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)));
  return out;
}

SimplexResult anneal_and_polish(const SpinObjective& objective, const SpinFitProblem& problem,
                                const std::vector<double>& start, const MultiStartOptions& options) {
  std::vector<double> x = start;
  int evaluations = 0;
  const auto& sched = options.annealing;
  if (sched.initial_tau_ghz > 0.0) {
    if (!(sched.factor > 0.0 && sched.factor < 1.0) || !(sched.final_tau_ghz > 0.0)) {
      throw std::invalid_argument("annealing factor must be in (0, 1) and final tau positive");
    }
    for (double tau = sched.initial_tau_ghz; tau >= sched.final_tau_ghz; tau *= sched.factor) {
      auto smoothed = [&](const std::vector<double>& u) {
        return objective.evaluate_smoothed(problem.with(to_physical(problem, u)), tau);
      };
      const auto stage = minimize_bounded_simplex(smoothed, x, sched.stage);
      x = stage.x;
      evaluations += stage.evaluations;
    }
  }
  auto hard = [&](const std::vector<double>& u) { return objective(to_physical(problem, u)); };
  SimplexResult out = minimize_bounded_simplex(hard, x, options.simplex);
  out.evaluations += evaluations;
  return out;
}

SpinFitResult run_fit(const SpinFitProblem& problem, const MultiStartOptions& options, bool parallel) {
  if (options.starts < 1) throw std::invalid_argument("starts must be >= 1");
  if (problem.points.empty()) throw std::invalid_argument("fit needs at least one interaction point");
  const SpinObjective objective(problem);
  const int dim = static_cast<int>(problem.free.size());

  const auto starts = halton_points(options.starts, dim, options.seed);
  std::vector<double> start_values(options.starts);
  std::vector<SimplexResult> runs(options.starts);
  auto one_start = [&](int s) {
    start_values[s] = objective(to_physical(problem, starts[s]));
    runs[s] = anneal_and_polish(objective, problem, starts[s], options);
    // annealing may wander; never return worse than where the start began
    if (!(runs[s].value <= start_values[s])) {
      runs[s].x = starts[s];
      runs[s].value = start_values[s];
    }
  };
  if (parallel) {
    ESRLAB_OMP_DYNAMIC_LOOP
    for (int s = 0; s < options.starts; ++s) one_start(s);
  } else {
    for (int s = 0; s < options.starts; ++s) one_start(s);
  }

  SpinFitResult result;
  result.free_parameters.reserve(dim);
  for (const auto& fp : problem.free) result.free_parameters.push_back(fp.parameter);
  int best = 0;
  long evaluations = 0;
  for (int s = 0; s < options.starts; ++s) {
    result.start_objectives.push_back(start_values[s]);
    result.local_optima.push_back(runs[s].value);
    evaluations += runs[s].evaluations + 1;
    if (runs[s].value < runs[best].value) best = s;
  }
  if (!std::isfinite(runs[best].value)) {
    throw FitError("no allowed transition matches the interaction points from any start");
  }
  const auto best_x = to_physical(problem, runs[best].x);
  result.best = problem.with(best_x);
  result.objective = objective.evaluate(result.best);
  result.per_point_residuals = objective.residuals(result.best);
  result.uncertainties = estimate_uncertainties(objective, problem, best_x);
  result.best_start = best;
  result.evaluations = evaluations;
  return result;
}

}  // namespace

SpinFitResult fit_spin_parameters(const SpinFitProblem& problem, const MultiStartOptions& options) {
  return run_fit(problem, options, true);
}

SpinFitResult fit_spin_parameters_reference(const SpinFitProblem& problem, const MultiStartOptions& options) {
  return run_fit(problem, options, false);
}

DBoundResult d_upper_bound_scan(const SpinFitProblem& problem, const SpinFitResult& fit, const DBoundOptions& options) {
  const auto it = std::find_if(problem.free.begin(), problem.free.end(),
                               [](const FreeParameter& fp) { return fp.parameter == SpinParameter::d; });
  if (it == problem.free.end()) throw std::invalid_argument("D must be a free parameter for the bound scan");
  if (!(options.threshold_factor >= 1.0)) throw std::invalid_argument("threshold_factor must be >= 1");
  if (options.scan_points < 2) throw std::invalid_argument("scan_points must be >= 2");

  const SpinObjective objective(problem);
  auto at = [&](double d) {
    SpinSystem sys = fit.best;
    sys.d_ghz = d;
    return objective.evaluate(sys);
  };

  DBoundResult out;
  const double lo = std::max(0.0, it->lower), hi = it->upper;
  out.scan_d = linear_grid(lo, hi, options.scan_points);
  out.scan_objective.resize(out.scan_d.size());
  const long n = static_cast<long>(out.scan_d.size());
  ESRLAB_OMP_STATIC_LOOP
  for (long k = 0; k < n; ++k) out.scan_objective[k] = at(out.scan_d[k]);

  const double fit_value = at(fit.best.d_ghz);
  out.minimum_objective = std::min(fit_value, *std::min_element(out.scan_objective.begin(), out.scan_objective.end()));
  if (!std::isfinite(out.minimum_objective)) throw FitError("objective is infinite along the whole D scan");
  const double limit = options.threshold_factor * out.minimum_objective;
  auto acceptable = [&](double v) { return v <= limit; };

  long last = -1;
  for (long k = 0; k < n; ++k) {
    if (acceptable(out.scan_objective[k])) last = k;
  }
  double bound = (last >= 0) ? out.scan_d[last] : lo;
  if (fit.best.d_ghz > bound && acceptable(fit_value)) bound = fit.best.d_ghz;
  if (last == n - 1) {
    out.bound_ghz = hi;
    out.bounded = false;
    return out;
  }
  // bisect the crossing between the last acceptable D and the next scan point
  double a = bound;
  double b = out.scan_d[static_cast<std::size_t>(std::max(last + 1, 0L))];
  if (b <= a) {
    b = *std::upper_bound(out.scan_d.begin(), out.scan_d.end(), a);
  }
  for (int iter = 0; iter < 60 && b - a > 1e-9 * (hi - lo); ++iter) {
    const double mid = 0.5 * (a + b);
    if (acceptable(at(mid))) {
      a = mid;
    } else {
      b = mid;
    }
  }
  out.bound_ghz = a;
  out.bounded = true;
  return out;
}

DBoundResult d_upper_bound_scan(const SpinFitProblem& problem, const MultiStartOptions& fit_options,
                                const DBoundOptions& options) {
  return d_upper_bound_scan(problem, fit_spin_parameters(problem, fit_options), options);
}

}  // namespace esrlab
