#include "esrlab/hamiltonian.hpp"

#include "esrlab/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esrlab {

void SpinSystem::validate() const {
  if (!(g > 0.0) || !std::isfinite(g)) throw std::invalid_argument("g-factor must be positive and finite");
  if (!std::isfinite(d_ghz) || !std::isfinite(e_ghz) || !std::isfinite(a_ghz)) {
    throw std::invalid_argument("zero-field and hyperfine constants must be finite");
  }
  if (dimension() > 64) throw std::invalid_argument("joint spin space exceeds dimension 64");
}

namespace {

RealMatrix real_part_checked(const ComplexMatrix& m) {
  if (m.imag().cwiseAbs().maxCoeff() != 0.0) {
    throw std::logic_error("operator term acquired an imaginary part");
  }
  return m.real();
}

}  // namespace

HamiltonianTerms::HamiltonianTerms(HalfInteger s, HalfInteger i) : s_(s), i_(i) {
  const SpinMatrices es = spin_matrices(s);
  const SpinMatrices ns = spin_matrices(i);
  const int ds = s.multiplicity();
  const ComplexMatrix nuc_id = ComplexMatrix::Identity(i.multiplicity(), i.multiplicity());
  const ComplexMatrix el_id = ComplexMatrix::Identity(ds, ds);

  zeeman_ = real_part_checked(kron(es.z, nuc_id));
  axial_ = real_part_checked(kron(es.z * es.z - (s.casimir() / 3.0) * el_id, nuc_id));
  rhombic_ = real_part_checked(kron(es.x * es.x - es.y * es.y, nuc_id));
  if (i.is_zero()) {
    hyperfine_ = RealMatrix::Zero(zeeman_.rows(), zeeman_.cols());
  } else {
    hyperfine_ = real_part_checked(kron(es.x, ns.x) + kron(es.y, ns.y) + kron(es.z, ns.z));
  }
  s_plus_ = real_part_checked(kron(es.plus, nuc_id));
}

RealMatrix HamiltonianTerms::assemble(double g, double d_ghz, double e_ghz, double a_ghz,
                                      double field_tesla) const {
  RealMatrix h = (constants::bohr_ghz_per_tesla * g * field_tesla) * zeeman_;
  h.noalias() += d_ghz * axial_;
  h.noalias() += e_ghz * rhombic_;
  if (!i_.is_zero()) h.noalias() += a_ghz * hyperfine_;
  // symmetric sums of symmetric terms stay bit-symmetric; no re-symmetrizing
  return h;
}

RealMatrix HamiltonianTerms::assemble(const SpinSystem& sys, double field_tesla) const {
  return assemble(sys.g, sys.d_ghz, sys.e_ghz, sys.a_ghz, field_tesla);
}

ComplexMatrix build_hamiltonian(const SpinSystem& sys, double field_tesla) {
  sys.validate();
  if (!std::isfinite(field_tesla)) throw std::invalid_argument("field must be finite");
  const HamiltonianTerms terms(sys.s, sys.i);
  return terms.assemble(sys, field_tesla).cast<Complex>();
}

Populations Populations::at_temperature(double kelvin) {
  if (!(kelvin > 0.0)) throw std::invalid_argument("temperature must be positive");
  Populations p;
  p.kelvin_ = kelvin;
  return p;
}

std::vector<double> boltzmann_weights(const std::vector<double>& energies_ghz, double kelvin) {
  if (!(kelvin > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (energies_ghz.empty()) return {};
  const double beta = constants::planck_over_boltzmann_k_per_ghz / kelvin;  // per GHz
  const double ground = *std::min_element(energies_ghz.begin(), energies_ghz.end());
  std::vector<double> w(energies_ghz.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp(-beta * (energies_ghz[k] - ground));
    sum += w[k];
  }
  for (double& x : w) x /= sum;
  return w;
}

std::vector<Transition> TransitionTable::allowed() const {
  std::vector<Transition> out;
  for (const auto& t : entries) {
    if (!t.forbidden) out.push_back(t);
  }
  return out;
}

LevelSolution solve_levels(const HamiltonianTerms& terms, const SpinSystem& sys, double field_tesla) {
  LevelSolution out;
  out.eig = symmetric_eigendecomposition(terms.assemble(sys, field_tesla));
  out.s_plus_eigenbasis.noalias() = out.eig.vectors.transpose() * terms.s_plus() * out.eig.vectors;
  return out;
}

TransitionTable tabulate(const LevelSolution& levels, double field_tesla, Populations populations) {
  const int n = static_cast<int>(levels.eig.energies.size());
  TransitionTable table;
  table.field_tesla = field_tesla;
  table.energies = levels.eig.energies;
  table.entries.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);

  std::vector<double> weights;
  if (!populations.is_uniform()) {
    weights = boltzmann_weights(std::vector<double>(table.energies.begin(), table.energies.end()),
                                populations.kelvin());
  }

  double max_intensity = 0.0;
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) {
      Transition t;
      t.lower = m;
      t.upper = k;
      t.frequency_ghz = table.energies[k] - table.energies[m];
      t.intensity = transition_intensity(levels.s_plus_eigenbasis, m, k);
      t.population_factor = weights.empty() ? 1.0 : weights[m] - weights[k];
      max_intensity = std::max(max_intensity, t.intensity);
      table.entries.push_back(t);
    }
  }
  const double threshold = forbidden_relative_threshold * max_intensity;
  for (auto& t : table.entries) t.forbidden = t.intensity <= threshold;
  return table;
}

TransitionTable transition_table(const HamiltonianTerms& terms, const SpinSystem& sys, double field_tesla,
                                 Populations populations) {
  return tabulate(solve_levels(terms, sys, field_tesla), field_tesla, populations);
}

TransitionTable transition_table(const SpinSystem& sys, double field_tesla, Populations populations) {
  sys.validate();
  const HamiltonianTerms terms(sys.s, sys.i);
  return transition_table(terms, sys, field_tesla, populations);
}

std::vector<LevelLabel> dominant_labels(const RealMatrix& vectors, HalfInteger s, HalfInteger i) {
  const int di = i.multiplicity();
  std::vector<LevelLabel> labels(static_cast<std::size_t>(vectors.cols()));
  for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
    Eigen::Index row = 0;
    const double w = vectors.col(k).cwiseAbs2().maxCoeff(&row);
    const int ks = static_cast<int>(row) / di;
    const int ki = static_cast<int>(row) % di;
    labels[static_cast<std::size_t>(k)] = {s.twice() - 2 * ks, i.twice() - 2 * ki, w};
  }
  return labels;
}

}  // namespace esrlab
