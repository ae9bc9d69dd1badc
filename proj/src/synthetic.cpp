#include "esrlab/synthetic.hpp"

#include "esrlab/constants.hpp"
#include "esrlab/spectra.hpp"

#include <random>
#include <stdexcept>

namespace esrlab {

std::vector<InteractionPoint> points_on_principal_lines(const SpinSystem& sys, const std::vector<double>& fields,
                                                        const PointNoise& noise) {
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<InteractionPoint> out;
  for (double b : fields) {
    for (const auto& line : principal_lines(sys, b)) {
      const double f = line.transition.frequency_ghz + noise.noise_ghz * gauss(rng);
      out.push_back({b, f, noise.snr_class, noise.sigma_f_ghz});
    }
  }
  return out;
}

std::vector<InteractionPoint> points_on_curve(const SpinSystem& sys, const std::vector<double>& fields, int lower,
                                              int upper, const PointNoise& noise) {
  const SpectrumSweep sw = sweep_reference(sys, fields);
  const SpectrumCurve* curve = nullptr;
  for (const auto& c : sw.curves)
    if (c.lower == lower && c.upper == upper) curve = &c;
  if (!curve) throw std::invalid_argument("points_on_curve: no curve with these level indices");

  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<InteractionPoint> out;
  for (std::size_t p = 0; p < fields.size(); ++p) {
    const double f = curve->frequency_ghz[p] + noise.noise_ghz * gauss(rng);
    out.push_back({fields[p], f, noise.snr_class, noise.sigma_f_ghz});
  }
  return out;
}

CrossingData crossing_points(const TwoModeModel& model, const std::vector<double>& fields, const CrossingNoise& noise) {
  model.validate();
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double to_ghz = 1.0 / (constants::two_pi * 1e9);
  CrossingData data;
  for (double b : fields) {
    const auto modes = normal_modes(model.omega1(b), model.omega2, model.delta12);
    std::optional<NormalModeQs> qs;
    if (noise.with_q) qs = normal_mode_qs(model, b);
    const double fl = modes.omega_minus * to_ghz + noise.noise_ghz * gauss(rng);
    const double fu = modes.omega_plus * to_ghz + noise.noise_ghz * gauss(rng);
    std::optional<double> ql, qu;
    if (qs) {
      ql = qs->q_minus * (1.0 + noise.q_relative_noise * gauss(rng));
      qu = qs->q_plus * (1.0 + noise.q_relative_noise * gauss(rng));
    }
    data.points.push_back({b, fl, Branch::lower, ql});
    data.points.push_back({b, fu, Branch::upper, qu});
  }
  return data;
}

std::vector<TraceSample> lorentzian_trace(double f0_ghz, double q, double amplitude, double baseline, int n,
                                          double span_halfwidths, double noise, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("lorentzian_trace: need at least 2 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<TraceSample> out;
  for (int k = 0; k < n; ++k) {
    const double u = -span_halfwidths + 2.0 * span_halfwidths * k / (n - 1);
    const double f = f0_ghz * (1.0 + u / (2.0 * q));
    out.push_back({f, lorentzian(f, f0_ghz, q, amplitude, baseline) + noise * gauss(rng)});
  }
  return out;
}

}  // namespace esrlab
