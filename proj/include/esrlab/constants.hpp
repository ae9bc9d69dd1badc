#pragma once

#include <numbers>

namespace esrlab::constants {

// Bohr magneton over Planck constant, GHz per tesla.
inline constexpr double bohr_ghz_per_tesla = 13.9962449;
// Planck over Boltzmann constant, kelvin per GHz.
inline constexpr double planck_over_boltzmann_k_per_ghz = 0.0479924;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace esrlab::constants
