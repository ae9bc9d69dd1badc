#pragma once

#include "esrlab/fitting.hpp"
#include "esrlab/hybridization.hpp"

#include <cstdint>
#include <vector>

namespace esrlab {

struct PointNoise {
  double sigma_f_ghz = default_sigma_f_ghz;  // recorded uncertainty
  double noise_ghz = 0.0;                    // standard deviation actually added
  std::uint64_t seed = 1;
  SnrClass snr_class = SnrClass::high_narrow;
};

/// One point on every principal line at each field.
std::vector<InteractionPoint> points_on_principal_lines(const SpinSystem& sys, const std::vector<double>& fields,
                                                        const PointNoise& noise = {});

/// Points along the tracked transition that starts as levels (lower, upper)
/// at the first field; fields must be strictly increasing.
std::vector<InteractionPoint> points_on_curve(const SpinSystem& sys, const std::vector<double>& fields, int lower,
                                              int upper, const PointNoise& noise = {});

struct CrossingNoise {
  double noise_ghz = 0.0;
  double q_relative_noise = 0.0;
  bool with_q = false;
  std::uint64_t seed = 1;
};

/// Both branches of the model at every field.
CrossingData crossing_points(const TwoModeModel& model, const std::vector<double>& fields,
                             const CrossingNoise& noise = {});

/// n samples over f0 (1 +- span_halfwidths / (2Q)).
std::vector<TraceSample> lorentzian_trace(double f0_ghz, double q, double amplitude, double baseline, int n,
                                          double span_halfwidths, double noise = 0.0, std::uint64_t seed = 1);

}  // namespace esrlab
