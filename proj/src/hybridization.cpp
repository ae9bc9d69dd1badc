#include "esrlab/hybridization.hpp"

#include "esrlab/constants.hpp"
#include "esrlab/error.hpp"
#include "least_squares.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace esrlab {

NormalModes normal_modes(double omega1, double omega2, double delta12) {
  if (!(omega1 > 0.0) || !(omega2 > 0.0) || !std::isfinite(omega1) || !std::isfinite(omega2))
    throw std::invalid_argument("normal_modes: frequencies must be positive");
  if (!(delta12 >= 0.0) || !(delta12 < 1.0)) throw std::invalid_argument("normal_modes: delta12 must lie in [0, 1)");

  const double a = omega1 * omega1, b = omega2 * omega2;
  const double hi = std::max(a, b), lo = std::min(a, b);
  const double detune = hi - lo;
  const double c = 4.0 * delta12 * delta12 * a * b;
  // (sqrt(detune^2 + c) - detune) / 2 without cancellation.
  const double shift = c == 0.0 ? 0.0 : 0.5 * c / (std::sqrt(detune * detune + c) + detune);
  const double plus2 = hi + shift;
  // lo - shift is exact in the decoupled limit; the product form keeps
  // precision when the shift eats most of lo.
  const double minus2 = shift <= 0.5 * lo ? lo - shift
                                          : std::min(lo, a * b * ((1.0 - delta12) * (1.0 + delta12)) / plus2);
  return {std::sqrt(minus2), std::sqrt(plus2)};
}

double normal_mode_splitting(double omega1, double omega2, double delta12) {
  const auto [wm, wp] = normal_modes(omega1, omega2, delta12);
  const double detune = omega1 * omega1 - omega2 * omega2;
  const double root = std::sqrt(detune * detune + 4.0 * delta12 * delta12 * omega1 * omega1 * omega2 * omega2);
  return root / (wp + wm);
}

void TwoModeModel::validate() const {
  if (!(omega2 > 0.0) || !std::isfinite(omega2)) throw std::invalid_argument("omega2 must be > 0");
  if (!(delta12 >= 0.0) || !(delta12 < 1.0)) throw std::invalid_argument("delta12 must lie in [0, 1)");
  if (!(q1 > 0.0) || !(q2 > 0.0)) throw std::invalid_argument("quality factors must be > 0");
  if (!std::isfinite(slope) || !std::isfinite(b0) || !std::isfinite(omega_cross))
    throw std::invalid_argument("spin line parameters must be finite");
}

TwoModeModel TwoModeModel::crossing(double b0, double slope, double omega2, double delta12) {
  TwoModeModel m;
  m.b0 = b0;
  m.slope = slope;
  m.omega_cross = omega2;
  m.omega2 = omega2;
  m.delta12 = delta12;
  return m;
}

NormalModeQs normal_mode_qs(const TwoModeModel& model, double field_tesla) {
  model.validate();
  const double w1 = model.omega1(field_tesla), w2 = model.omega2;
  const auto [wm, wp] = normal_modes(w1, w2, model.delta12);
  const double w1s = w1 * w1, w2s = w2 * w2, wms = wm * wm, wps = wp * wp;
  const double det = wps - wms;
  if (!(det > 0.0)) throw std::invalid_argument("normal_mode_qs: degenerate normal modes make the Q system singular");
  const double x1 = w1 / model.q1, x2 = w2 / model.q2;
  // Explicit inverse of [[1, 1], [w-^2, w+^2]] applied to [[1, 1], [w2^2, w1^2]] x.
  const double y_plus = (x1 * (wps - w2s) + x2 * (wps - w1s)) / det;
  const double y_minus = (x1 * (w2s - wms) + x2 * (w1s - wms)) / det;
  return {wm / y_minus, wp / y_plus};
}

double coupling_strength_hz(const TwoModeModel& model) { return model.omega2 / constants::two_pi * model.delta12; }

std::string to_string(Branch b) { return b == Branch::upper ? "upper" : "lower"; }

std::optional<Branch> parse_branch(std::string_view text) {
  if (text == "upper") return Branch::upper;
  if (text == "lower") return Branch::lower;
  return std::nullopt;
}

void CrossingData::validate() const {
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (!(p.field_tesla >= 0.0) || !std::isfinite(p.field_tesla))
      throw DataError("crossing point " + std::to_string(k) + ": field must be >= 0");
    if (!(p.frequency_ghz > 0.0) || !std::isfinite(p.frequency_ghz))
      throw DataError("crossing point " + std::to_string(k) + ": frequency must be > 0");
    if (p.q && (!(*p.q > 0.0) || !std::isfinite(*p.q)))
      throw DataError("crossing point " + std::to_string(k) + ": Q must be > 0");
  }
  for (const auto& u : points) {
    if (u.branch != Branch::upper) continue;
    for (const auto& l : points)
      if (l.branch == Branch::lower && l.field_tesla == u.field_tesla && !(u.frequency_ghz > l.frequency_ghz))
        throw DataError("upper branch not above lower branch at B = " + std::to_string(u.field_tesla) + " T");
  }
}

namespace {

struct CrossingGuess {
  double b0, slope, f2, g;
};

CrossingGuess guess_crossing(const CrossingData& data) {
  double best_split = std::numeric_limits<double>::infinity();
  CrossingGuess out{};
  for (const auto& u : data.points) {
    if (u.branch != Branch::upper) continue;
    const CrossingPoint* nearest = nullptr;
    for (const auto& l : data.points)
      if (l.branch == Branch::lower &&
          (!nearest || std::abs(l.field_tesla - u.field_tesla) < std::abs(nearest->field_tesla - u.field_tesla)))
        nearest = &l;
    const double split = u.frequency_ghz - nearest->frequency_ghz;
    if (split > 0.0 && split < best_split) {
      best_split = split;
      out.b0 = 0.5 * (u.field_tesla + nearest->field_tesla);
      out.f2 = 0.5 * (u.frequency_ghz + nearest->frequency_ghz);
    }
  }
  if (!std::isfinite(best_split)) throw FitError("crossing: no upper/lower pair with positive splitting");
  out.g = best_split;

  double num = 0.0, den = 0.0;
  for (const auto& p : data.points) {
    const double df = p.frequency_ghz - out.f2, db = p.field_tesla - out.b0;
    if (std::abs(df) > 3.0 * best_split) {
      num += db * df;
      den += db * db;
    }
  }
  out.slope = den > 0.0 ? num / den : 0.0;
  return out;
}

double branch_frequency(const CrossingPoint& p, double b0, double slope, double f2, double g) {
  const double f1 = slope * (p.field_tesla - b0) + f2;
  if (!(f1 > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const auto m = normal_modes(f1, f2, g / f2);
  return p.branch == Branch::upper ? m.omega_plus : m.omega_minus;
}

}  // namespace

CrossingFit fit_avoided_crossing(const CrossingData& data, const CrossingFitOptions& options) {
  data.validate();
  const auto& pts = data.points;
  if (pts.size() < 4) throw DataError("crossing fit needs at least 4 points");
  const bool has_upper = std::any_of(pts.begin(), pts.end(), [](auto& p) { return p.branch == Branch::upper; });
  const bool has_lower = std::any_of(pts.begin(), pts.end(), [](auto& p) { return p.branch == Branch::lower; });
  if (!has_upper || !has_lower) throw DataError("crossing fit needs points on both branches");

  const CrossingGuess guess = guess_crossing(data);
  const std::optional<double> pinned = options.fixed_slope_ghz_per_tesla;
  const double slope0 = pinned ? *pinned : guess.slope;
  if (!(std::abs(slope0) > 0.0)) throw FitError("crossing fit underdetermined: spin line is flat");

  // Unknowns p = (b0, slope, f2, g) = offset + x * scale, scaled so every
  // column of the Jacobian is of the order of the splitting; slope dropped when pinned.
  const double width = guess.g / std::abs(slope0);
  const Eigen::Vector4d offset(guess.b0, 0.0, guess.f2, 0.0);
  const Eigen::Vector4d scale(width, std::abs(slope0), guess.g, guess.g);
  const int n = pinned ? 3 : 4;
  const int m = static_cast<int>(pts.size());

  auto unpack = [&](const Eigen::VectorXd& x) {
    Eigen::Vector4d p;
    if (pinned) p << x[0] * scale[0], *pinned, x[1] * scale[2], x[2] * scale[3];
    else p = x.cwiseProduct(scale);
    p += offset;
    return p;
  };
  const detail::ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const Eigen::Vector4d p = unpack(x);
    const bool ok = p[2] > 0.0 && p[3] >= 0.0 && p[3] < p[2];
    for (int k = 0; k < m; ++k)
      r[k] = ok ? branch_frequency(pts[k], p[0], p[1], p[2], p[3]) - pts[k].frequency_ghz : 1e3;
    for (int k = 0; k < m; ++k)
      if (!std::isfinite(r[k])) r[k] = 1e3;
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  detail::LeastSquaresResult best;
  bool have = false;
  for (int attempt = 0; attempt <= std::max(0, options.restarts); ++attempt) {
    Eigen::VectorXd x0(n);
    const double shift = attempt == 0 ? 0.0 : 2.0 * unit(rng);
    const double gfac = attempt == 0 ? 1.0 : std::exp(0.7 * unit(rng));
    if (pinned) x0 << shift, 0.0, gfac;
    else x0 << shift, slope0 / std::abs(slope0), 0.0, gfac;
    auto res = detail::levenberg_marquardt(fn, x0, m);
    if (!have || res.cost < best.cost) {
      best = std::move(res);
      have = true;
    }
  }

  const Eigen::Vector4d p = unpack(best.x);
  CrossingFit out;
  const double f2_hz = p[2] * 1e9;
  out.model = TwoModeModel::crossing(p[0], p[1] * constants::two_pi * 1e9, constants::two_pi * f2_hz, p[3] / p[2]);
  out.g_cs_hz = coupling_strength_hz(out.model);
  out.residuals_ghz.assign(best.residuals.data(), best.residuals.data() + m);
  out.rms_ghz = std::sqrt(best.cost / m);
  out.iterations = best.iterations;

  out.sigmas.assign(4, std::nullopt);
  const Eigen::VectorXd h = Eigen::VectorXd::Constant(n, 1e-6);
  if (const auto cov = detail::covariance(fn, best.x, m, h, best.cost)) {
    // Map scaled covariance to (b0, slope, f2, g) in T, GHz/T, GHz, GHz.
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(4, 4);
    const std::vector<int> idx = pinned ? std::vector<int>{0, 2, 3} : std::vector<int>{0, 1, 2, 3};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) full(idx[i], idx[j]) = (*cov)(i, j) * scale[idx[i]] * scale[idx[j]];
    out.sigmas[0] = std::sqrt(full(0, 0));
    if (!pinned) out.sigmas[1] = std::sqrt(full(1, 1)) * constants::two_pi * 1e9;
    out.sigmas[2] = std::sqrt(full(2, 2)) * constants::two_pi * 1e9;
    // delta12 = g / f2
    const Eigen::Vector4d grad(0.0, 0.0, -p[3] / (p[2] * p[2]), 1.0 / p[2]);
    out.sigmas[3] = std::sqrt(std::max(0.0, grad.dot(full * grad)));
    out.g_cs_sigma_hz = std::sqrt(full(3, 3)) * 1e9;
  }
  return out;
}

QProfileFit fit_q_profile(const CrossingData& data, const TwoModeModel& crossing_model, const QProfileOptions& options) {
  data.validate();
  std::vector<CrossingPoint> pts;
  for (const auto& p : data.points)
    if (p.q) pts.push_back(p);
  if (pts.size() < 3) throw DataError("Q fit needs at least 3 points with measured Q");
  if (std::all_of(pts.begin(), pts.end(), [&](auto& p) { return p.field_tesla == pts.front().field_tesla; }))
    throw DataError("Q fit needs measured Q at more than one field");
  TwoModeModel base = crossing_model;
  base.q1 = base.q2 = 1.0;
  base.validate();

  // Seed each bare Q from the points that sit closer to that bare mode.
  double log_spin = 0.0, log_wgm = 0.0;
  int n_spin = 0, n_wgm = 0;
  double q_min = std::numeric_limits<double>::infinity(), q_max = 0.0;
  for (const auto& p : pts) {
    const double w = constants::two_pi * 1e9 * p.frequency_ghz;
    const bool wgm_like = std::abs(w - base.omega2) < std::abs(w - base.omega1(p.field_tesla));
    (wgm_like ? log_wgm : log_spin) += std::log(*p.q);
    ++(wgm_like ? n_wgm : n_spin);
    q_min = std::min(q_min, *p.q);
    q_max = std::max(q_max, *p.q);
  }
  const Eigen::Vector2d guess(n_spin ? log_spin / n_spin : std::log(q_min), n_wgm ? log_wgm / n_wgm : std::log(q_max));

  const int m = static_cast<int>(pts.size());
  const detail::ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    if (!x.allFinite() || (x.array() < 0.0).any() || (x.array() > 35.0).any()) {
      r.setConstant(1e3);  // outside 1 <= Q <= e^35
      return;
    }
    TwoModeModel mdl = base;
    mdl.q1 = std::exp(x[0]);
    mdl.q2 = std::exp(x[1]);
    for (int k = 0; k < m; ++k) {
      const auto qs = normal_mode_qs(mdl, pts[k].field_tesla);
      const double pred = pts[k].branch == Branch::upper ? qs.q_plus : qs.q_minus;
      r[k] = std::isfinite(pred) ? (pred - *pts[k].q) / *pts[k].q : 1e3;
    }
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  detail::LeastSquaresResult best;
  bool have = false;
  for (int attempt = 0; attempt <= std::max(0, options.restarts); ++attempt) {
    Eigen::VectorXd x0 = guess;
    if (attempt > 0) {
      x0[0] += std::log(3.0) * unit(rng);
      x0[1] += std::log(3.0) * unit(rng);
    }
    auto res = detail::levenberg_marquardt(fn, x0, m);
    if (!have || res.cost < best.cost) {
      best = std::move(res);
      have = true;
    }
  }
  if (!best.x.allFinite()) throw FitError("Q fit diverged");

  QProfileFit out;
  out.q_spin = std::exp(best.x[0]);
  out.q_wgm = std::exp(best.x[1]);
  out.relative_residuals.assign(best.residuals.data(), best.residuals.data() + m);
  out.iterations = best.iterations;
  if (const auto cov = detail::covariance(fn, best.x, m, Eigen::Vector2d::Constant(1e-6), best.cost)) {
    out.q_spin_sigma = out.q_spin * std::sqrt((*cov)(0, 0));
    out.q_wgm_sigma = out.q_wgm * std::sqrt((*cov)(1, 1));
  }
  return out;
}

double lorentzian(double f_ghz, double f0_ghz, double q, double amplitude, double baseline) {
  const double u = 2.0 * q * (f_ghz / f0_ghz - 1.0);
  return baseline + amplitude / (1.0 + u * u);
}

LorentzianFit fit_lorentzian(const std::vector<TraceSample>& trace) {
  if (trace.size() < 5) throw DataError("Lorentzian fit needs at least 5 samples");
  for (const auto& s : trace)
    if (!std::isfinite(s.frequency_ghz) || !(s.frequency_ghz > 0.0) || !std::isfinite(s.magnitude))
      throw DataError("trace samples must have positive finite frequency and finite magnitude");
  for (std::size_t k = 1; k < trace.size(); ++k)
    if (!(trace[k].frequency_ghz > trace[k - 1].frequency_ghz))
      throw DataError("trace frequencies must be strictly increasing");

  const auto peak_it = std::max_element(trace.begin(), trace.end(),
                                        [](const auto& a, const auto& b) { return a.magnitude < b.magnitude; });
  const std::size_t peak = static_cast<std::size_t>(peak_it - trace.begin());
  if (peak == 0 || peak + 1 == trace.size() || !(peak_it->magnitude > trace.front().magnitude) ||
      !(peak_it->magnitude > trace.back().magnitude))
    throw DataError("trace has no interior maximum");

  const double floor = std::min_element(trace.begin(), trace.end(), [](const auto& a, const auto& b) {
                         return a.magnitude < b.magnitude;
                       })->magnitude;
  const double amp0 = peak_it->magnitude - floor;
  const double half = floor + 0.5 * amp0;
  auto half_point = [&](bool left) -> std::optional<double> {
    for (std::size_t k = peak; left ? k > 0 : k + 1 < trace.size();) {
      const std::size_t next = left ? k - 1 : k + 1;
      if (trace[next].magnitude <= half) {
        const double t = (trace[k].magnitude - half) / (trace[k].magnitude - trace[next].magnitude);
        return trace[k].frequency_ghz + t * (trace[next].frequency_ghz - trace[k].frequency_ghz);
      }
      k = next;
    }
    return std::nullopt;
  };
  const double f0g = peak_it->frequency_ghz;
  const auto lo = half_point(true), hi = half_point(false);
  double fwhm;
  if (lo && hi) fwhm = *hi - *lo;
  else if (lo) fwhm = 2.0 * (f0g - *lo);
  else if (hi) fwhm = 2.0 * (*hi - f0g);
  else fwhm = trace.back().frequency_ghz - trace.front().frequency_ghz;
  const double qg = f0g / fwhm;

  // x = (f0 offset in guessed half-widths, ln Q, amplitude / amp0, baseline offset / amp0)
  const double width = 0.5 * f0g / qg;
  const int m = static_cast<int>(trace.size());
  auto unpack = [&](const Eigen::VectorXd& x) {
    return Eigen::Vector4d(f0g + x[0] * width, std::exp(x[1]), x[2] * amp0, floor + x[3] * amp0);
  };
  const detail::ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const Eigen::Vector4d p = unpack(x);
    for (int k = 0; k < m; ++k)
      r[k] = (lorentzian(trace[k].frequency_ghz, p[0], p[1], p[2], p[3]) - trace[k].magnitude) / amp0;
  };
  Eigen::VectorXd x0(4);
  x0 << 0.0, std::log(qg), 1.0, 0.0;
  const auto res = detail::levenberg_marquardt(fn, x0, m);
  if (!res.x.allFinite()) throw FitError("Lorentzian fit diverged");

  const Eigen::Vector4d p = unpack(res.x);
  LorentzianFit out;
  out.f0_ghz = p[0];
  out.q = p[1];
  out.amplitude = p[2];
  out.baseline = p[3];
  out.rms = std::sqrt(res.cost / m) * amp0;
  out.iterations = res.iterations;
  return out;
}

}  // namespace esrlab
