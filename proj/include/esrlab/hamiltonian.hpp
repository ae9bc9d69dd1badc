#pragma once

#include "esrlab/spin_algebra.hpp"

#include <optional>
#include <string>
#include <vector>

namespace esrlab {

/// Single paramagnetic ion: electron spin S, nuclear spin I and the
/// orthorhombic Hamiltonian constants. D, E, A are frequencies in GHz.
struct SpinSystem {
  HalfInteger s;
  HalfInteger i;
  double g = 2.0;
  double d_ghz = 0.0;
  double e_ghz = 0.0;
  double a_ghz = 0.0;
  std::string label;

  int dimension() const { return s.multiplicity() * i.multiplicity(); }
  /// Throws std::invalid_argument on g <= 0 or non-finite constants.
  void validate() const;
};

/// Parameter-independent operator terms in the joint electron-major space.
/// All terms are real for a field along z, so they are stored as real matrices.
class HamiltonianTerms {
 public:
  HamiltonianTerms(HalfInteger s, HalfInteger i);

  HalfInteger electron_spin() const { return s_; }
  HalfInteger nuclear_spin() const { return i_; }
  int dimension() const { return static_cast<int>(zeeman_.rows()); }

  /// H/h in GHz; the hyperfine term is omitted entirely when I = 0.
  RealMatrix assemble(double g, double d_ghz, double e_ghz, double a_ghz, double field_tesla) const;
  RealMatrix assemble(const SpinSystem& sys, double field_tesla) const;

  const RealMatrix& zeeman() const { return zeeman_; }        // Sz (x) 1
  const RealMatrix& axial() const { return axial_; }          // (Sz^2 - S(S+1)/3) (x) 1
  const RealMatrix& rhombic() const { return rhombic_; }      // (Sx^2 - Sy^2) (x) 1
  const RealMatrix& hyperfine() const { return hyperfine_; }  // S.I
  const RealMatrix& s_plus() const { return s_plus_; }        // S+ (x) 1

 private:
  HalfInteger s_;
  HalfInteger i_;
  RealMatrix zeeman_;
  RealMatrix axial_;
  RealMatrix rhombic_;
  RealMatrix hyperfine_;
  RealMatrix s_plus_;
};

ComplexMatrix build_hamiltonian(const SpinSystem& sys, double field_tesla);

/// Level populations: Boltzmann at a temperature, or the uniform sentinel
/// where every population difference p_m - p_n is taken as 1.
class Populations {
 public:
  static Populations uniform() { return Populations{}; }
  static Populations at_temperature(double kelvin);

  bool is_uniform() const { return !kelvin_; }
  double kelvin() const { return kelvin_.value(); }

 private:
  std::optional<double> kelvin_;
};

std::vector<double> boltzmann_weights(const std::vector<double>& energies_ghz, double kelvin);

struct Transition {
  int lower = 0;  // ascending level index
  int upper = 0;
  double frequency_ghz = 0.0;
  double intensity = 0.0;  // |<n|Sx|m>|^2 + |<n|Sy|m>|^2
  double population_factor = 1.0;
  bool forbidden = false;
};

struct TransitionTable {
  double field_tesla = 0.0;
  RealVector energies;  // ascending, GHz
  std::vector<Transition> entries;

  std::vector<Transition> allowed() const;
};

/// Relative intensity below which a transition is flagged forbidden.
inline constexpr double forbidden_relative_threshold = 1e-8;

TransitionTable transition_table(const SpinSystem& sys, double field_tesla,
                                 Populations populations = Populations::uniform());
TransitionTable transition_table(const HamiltonianTerms& terms, const SpinSystem& sys, double field_tesla,
                                 Populations populations = Populations::uniform());

/// Eigenvectors plus transition bookkeeping, reused by sweeps and fits.
struct LevelSolution {
  RealEigenDecomposition eig;
  RealMatrix s_plus_eigenbasis;  // V^T S+ V
};

LevelSolution solve_levels(const HamiltonianTerms& terms, const SpinSystem& sys, double field_tesla);

/// Intensity between levels m and n from S+ in the eigenbasis.
inline double transition_intensity(const RealMatrix& s_plus_eigenbasis, int m, int n) {
  const double p = s_plus_eigenbasis(n, m);
  const double q = s_plus_eigenbasis(m, n);
  return 0.5 * (p * p + q * q);
}

TransitionTable tabulate(const LevelSolution& levels, double field_tesla, Populations populations);

/// High-field quantum-number label of an eigenstate: the basis state
/// |m_S, m_I> carrying the largest weight.
struct LevelLabel {
  int twice_ms = 0;
  int twice_mi = 0;
  double weight = 0.0;
};

std::vector<LevelLabel> dominant_labels(const RealMatrix& vectors, HalfInteger s, HalfInteger i);

}  // namespace esrlab
