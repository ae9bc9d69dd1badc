#include "esrlab/constants.hpp"
#include "esrlab/hamiltonian.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace esrlab;

namespace {

// H/h from matrix elements in the |m_S, m_I> product basis, written out
// without the operator/kron machinery.
RealMatrix oracle_hamiltonian(const SpinSystem& sys, double b) {
  const double s = sys.s.value(), i = sys.i.value();
  const int ds = sys.s.multiplicity(), di = sys.i.multiplicity();
  auto idx = [&](int ks, int ki) { return ks * di + ki; };
  auto ladder = [](double j, double m) { return std::sqrt(j * (j + 1) - m * (m + 1)); };  // <m+1|J+|m>
  RealMatrix h = RealMatrix::Zero(ds * di, ds * di);
  for (int ks = 0; ks < ds; ++ks) {
    const double ms = s - ks;
    for (int ki = 0; ki < di; ++ki) {
      const double mi = i - ki;
      const int r = idx(ks, ki);
      h(r, r) = constants::bohr_ghz_per_tesla * sys.g * b * ms + sys.d_ghz * (ms * ms - s * (s + 1) / 3.0);
      if (di > 1) h(r, r) += sys.a_ghz * ms * mi;
      // E (S+^2 + S-^2) / 2 couples m_S and m_S + 2
      if (ks >= 2) {
        const double v = 0.5 * sys.e_ghz * ladder(s, ms) * ladder(s, ms + 1);
        h(idx(ks - 2, ki), r) = h(r, idx(ks - 2, ki)) = v;
      }
      // A/2 (S+ I- + S- I+): |ms, mi> -> |ms + 1, mi - 1>
      if (di > 1 && ks >= 1 && ki + 1 < di) {
        const double v = 0.5 * sys.a_ghz * ladder(s, ms) * ladder(i, mi - 1);
        h(idx(ks - 1, ki + 1), r) = h(r, idx(ks - 1, ki + 1)) = v;
      }
    }
  }
  return h;
}

SpinSystem make(int twice_s, int twice_i, double g, double d, double e, double a) {
  SpinSystem sys;
  sys.s = HalfInteger::from_twice(twice_s);
  sys.i = HalfInteger::from_twice(twice_i);
  sys.g = g;
  sys.d_ghz = d;
  sys.e_ghz = e;
  sys.a_ghz = a;
  return sys;
}

const SpinSystem v2 = make(3, 7, 2.09, 3.1, 1.9, 2.7);

}  // namespace

TEST_CASE("Hamiltonian matches an independent matrix-element construction") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int twice_s = 1; twice_s <= 5; ++twice_s) {
    for (int twice_i = 0; twice_i <= 7; twice_i += 1) {
      if ((twice_s + 1) * (twice_i + 1) > 64) continue;
      CAPTURE(twice_s);
      CAPTURE(twice_i);
      const SpinSystem sys = make(twice_s, twice_i, 1.5 + std::abs(u(rng)) / 4, u(rng), u(rng), u(rng));
      const double b = u(rng);
      const ComplexMatrix h = build_hamiltonian(sys, b);
      const RealMatrix o = oracle_hamiltonian(sys, b);
      CHECK(h.imag().cwiseAbs().maxCoeff() == 0.0);
      CHECK((h.real() - o).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + o.norm()));
    }
  }
}

TEST_CASE("Hamiltonian dimension, trace, Hermiticity and linearity in field") {
  const ComplexMatrix h1 = build_hamiltonian(v2, 0.7);
  const ComplexMatrix h2 = build_hamiltonian(v2, -0.3);
  CHECK(h1.rows() == 32);
  CHECK(std::abs(h1.trace()) <= 1e-10 * h1.norm());
  CHECK(hermiticity_defect(h1) <= 1e-14 * h1.norm());
  const ComplexMatrix sz = kron(spin_matrices(v2.s).z, ComplexMatrix::Identity(8, 8));
  const ComplexMatrix diff = h1 - h2 - (constants::bohr_ghz_per_tesla * v2.g * 1.0) * sz;
  CHECK(diff.cwiseAbs().maxCoeff() <= 1e-12 * h1.norm());
}

TEST_CASE("I = 0 drops the hyperfine term regardless of A") {
  SpinSystem with_a = make(3, 0, 2.02, 0.4, 3.9, 5.0);
  SpinSystem without = with_a;
  without.a_ghz = 0.0;
  CHECK(build_hamiltonian(with_a, 0.3) == build_hamiltonian(without, 0.3));
  CHECK((build_hamiltonian(with_a, 0.3).real() - oracle_hamiltonian(without, 0.3)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("pure Zeeman spin one half") {
  const SpinSystem sys = make(1, 0, 2.0, 0, 0, 0);
  const auto table = transition_table(sys, 0.5);
  CHECK(table.energies(0) == doctest::Approx(-0.5 * 2 * 13.9962449 * 0.5).epsilon(1e-14));
  CHECK(table.energies(1) == doctest::Approx(0.5 * 2 * 13.9962449 * 0.5).epsilon(1e-14));
  REQUIRE(table.entries.size() == 1);
  CHECK(std::abs(table.entries[0].frequency_ghz - 13.9962449) <= 1e-9);
  CHECK(table.entries[0].intensity == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_FALSE(table.entries[0].forbidden);
}

TEST_CASE("spin one: the double-quantum pair is forbidden") {
  const auto table = transition_table(make(2, 0, 2.0, 0, 0, 0), 0.4);
  REQUIRE(table.entries.size() == 3);
  for (const auto& t : table.entries) {
    if (t.lower == 0 && t.upper == 2) {
      CHECK(t.intensity == 0.0);
      CHECK(t.forbidden);
    } else {
      CHECK_FALSE(t.forbidden);
    }
  }
}

TEST_CASE("zero-field spectra") {
  SUBCASE("hyperfine singlet-triplet splitting") {
    const auto table = transition_table(make(1, 1, 2.0, 0, 0, 2.7), 0.0);
    CHECK(table.energies(0) == doctest::Approx(-0.75 * 2.7).epsilon(1e-14));
    for (int k = 1; k < 4; ++k) CHECK(table.energies(k) == doctest::Approx(0.25 * 2.7).epsilon(1e-14));
    CHECK(table.energies(1) - table.energies(0) == doctest::Approx(2.7).epsilon(1e-14));
  }
  SUBCASE("axial splitting of S = 3/2 into two doublets") {
    const auto table = transition_table(make(3, 0, 2.0, 3.1, 0, 0), 0.0);
    CHECK(table.energies(0) == doctest::Approx(-3.1).epsilon(1e-14));
    CHECK(table.energies(1) == doctest::Approx(-3.1).epsilon(1e-14));
    CHECK(table.energies(2) == doctest::Approx(3.1).epsilon(1e-14));
    CHECK(table.energies(3) - table.energies(0) == doctest::Approx(6.2).epsilon(1e-14));
  }
}

TEST_CASE("transition table shape") {
  const auto table = transition_table(v2, 1.0);
  CHECK(table.entries.size() == 32u * 31u / 2u);
  double peak = 0.0;
  for (const auto& t : table.entries) {
    CHECK(t.upper > t.lower);
    CHECK(t.frequency_ghz >= 0.0);
    peak = std::max(peak, t.intensity);
  }
  for (const auto& t : table.entries) CHECK(t.forbidden == (t.intensity <= forbidden_relative_threshold * peak));
}

TEST_CASE("Zeeman-only selection rule gives 2S(2I+1) allowed pairs") {
  for (int twice_s = 1; twice_s <= 4; ++twice_s) {
    for (int twice_i = 0; twice_i <= 7; ++twice_i) {
      CAPTURE(twice_s);
      CAPTURE(twice_i);
      const SpinSystem sys = make(twice_s, twice_i, 2.0, 0, 0, 0);
      const HamiltonianTerms terms(sys.s, sys.i);
      const LevelSolution lv = solve_levels(terms, sys, 0.8);
      const auto table = tabulate(lv, 0.8, Populations::uniform());
      const auto labels = dominant_labels(lv.eig.vectors, sys.s, sys.i);
      int allowed = 0;
      for (const auto& t : table.entries) {
        const auto& x = labels[t.lower];
        const auto& y = labels[t.upper];
        const bool rule = std::abs(x.twice_ms - y.twice_ms) == 2 && x.twice_mi == y.twice_mi;
        CHECK(rule == !t.forbidden);
        allowed += t.forbidden ? 0 : 1;
      }
      CHECK(allowed == twice_s * (twice_i + 1));
    }
  }
}

TEST_CASE("Boltzmann weights") {
  SUBCASE("infinite-temperature limit") {
    const auto w = boltzmann_weights({-5.0, 0.0, 3.0, 40.0}, 1e9);
    for (double p : w) CHECK(std::abs(p - 0.25) <= 1e-9);
  }
  SUBCASE("10 mK with a 14 GHz gap") {
    const auto w = boltzmann_weights({0.0, 14.0}, 0.010);
    // h/kB = 6.62607015e-34 / 1.380649e-23 K s
    const double h_over_kb_k_per_ghz = 6.62607015e-34 / 1.380649e-23 * 1e9;
    const double expected = std::exp(-h_over_kb_k_per_ghz * 14.0 / 0.010);
    CHECK(w[1] / w[0] == doctest::Approx(expected).epsilon(1e-5));
    CHECK(std::log(w[1] / w[0]) == doctest::Approx(-67.19).epsilon(1e-3));
    CHECK(std::abs(w[0] + w[1] - 1.0) <= 1e-12);
  }
  SUBCASE("large energies do not overflow") {
    const auto w = boltzmann_weights({1e6, 1e6 + 1.0, 1e6 + 2.0}, 0.01);
    double sum = 0.0;
    for (double p : w) {
      CHECK(std::isfinite(p));
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(boltzmann_weights({0.0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Populations::at_temperature(-1.0), std::invalid_argument);
}

TEST_CASE("population factors follow the Boltzmann weights") {
  const auto table = transition_table(make(1, 0, 2.0, 0, 0, 0), 0.5, Populations::at_temperature(0.5));
  const auto w = boltzmann_weights({table.energies(0), table.energies(1)}, 0.5);
  CHECK(table.entries[0].population_factor == doctest::Approx(w[0] - w[1]).epsilon(1e-14));
  const auto uniform = transition_table(make(1, 0, 2.0, 0, 0, 0), 0.5);
  CHECK(uniform.entries[0].population_factor == 1.0);
}

TEST_CASE("system validation") {
  SpinSystem bad = v2;
  bad.g = 0.0;
  CHECK_THROWS_AS(build_hamiltonian(bad, 0.1), std::invalid_argument);
  bad = make(9, 9, 2.0, 0, 0, 0);  // 10 x 10 = 100 > 64
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(build_hamiltonian(v2, std::nan("")), std::invalid_argument);
}
