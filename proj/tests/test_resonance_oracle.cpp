#include "esrlab/hamiltonian.hpp"
#include "esrlab/spectra.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace esrlab;

namespace {

struct Root {
  double field;
  int lower;
  int upper;
};

// For B along z every term conserves the parity of m_S + m_I, so H splits
// into two blocks; eigenvalues of both are merged into ascending order.
struct ParitySplit {
  std::vector<std::vector<int>> blocks;

  explicit ParitySplit(const SpinSystem& sys) {
    blocks.resize(2);
    const int di = sys.i.multiplicity();
    for (int r = 0; r < sys.dimension(); ++r) {
      const int twice_m = (sys.s.twice() - 2 * (r / di)) + (sys.i.twice() - 2 * (r % di));
      blocks[((twice_m / 2) % 2 + 2) % 2].push_back(r);
    }
  }

  void energies(const RealMatrix& h, std::vector<double>& out) const {
    out.clear();
    for (const auto& idx : blocks) {
      const int n = static_cast<int>(idx.size());
      RealMatrix sub(n, n);
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) sub(a, b) = h(idx[a], idx[b]);
      Eigen::SelfAdjointEigenSolver<RealMatrix> es(sub, Eigen::EigenvaluesOnly);
      for (int a = 0; a < n; ++a) out.push_back(es.eigenvalues()(a));
    }
    std::sort(out.begin(), out.end());
  }
};

// Brute-force scan: every ascending level pair, sign changes of
// E_n - E_m - f on a uniform grid, roots placed by linear interpolation.
std::vector<Root> dense_scan(const SpinSystem& sys, double f, double b_min, double b_max, int points) {
  const HamiltonianTerms terms(sys.s, sys.i);
  const ParitySplit split(sys);
  const int dim = sys.dimension();
  std::vector<double> prev, cur;
  std::vector<Root> roots;
  for (int p = 0; p < points; ++p) {
    const double b = b_min + (b_max - b_min) * p / (points - 1);
    split.energies(terms.assemble(sys, b), cur);
    if (p > 0) {
      const double b_prev = b_min + (b_max - b_min) * (p - 1) / (points - 1);
      for (int m = 0; m < dim; ++m) {
        for (int n = m + 1; n < dim; ++n) {
          const double d0 = prev[n] - prev[m] - f;
          const double d1 = cur[n] - cur[m] - f;
          if ((d0 < 0.0) != (d1 < 0.0)) roots.push_back({b_prev + (b - b_prev) * d0 / (d0 - d1), m, n});
        }
      }
    }
    std::swap(prev, cur);
  }
  std::vector<Root> allowed;
  for (const auto& r : roots) {
    const auto table = transition_table(terms, sys, r.field);
    for (const auto& t : table.entries)
      if (t.lower == r.lower && t.upper == r.upper && !t.forbidden) allowed.push_back(r);
  }
  return allowed;
}

}  // namespace

TEST_CASE("resonance search agrees with a million-point brute-force scan") {
  SpinSystem v2;
  v2.s = HalfInteger::from_twice(3);
  v2.i = HalfInteger::from_twice(7);
  v2.g = 2.09;
  v2.d_ghz = 3.1;
  v2.e_ghz = 1.9;
  v2.a_ghz = 2.7;

  const double f = 14.0;
  const auto oracle = dense_scan(v2, f, 0.0, 1.0, 1'000'001);
  const auto hits = resonance_fields(v2, f, 0.0, 1.0, 2001);
  REQUIRE(!oracle.empty());
  CHECK(hits.size() == oracle.size());

  for (const auto& r : oracle) {
    CAPTURE(r.field);
    CAPTURE(r.lower);
    CAPTURE(r.upper);
    const auto match = std::find_if(hits.begin(), hits.end(), [&](const ResonanceHit& h) {
      return h.lower == r.lower && h.upper == r.upper && std::abs(h.field_tesla - r.field) <= 2e-6;
    });
    CHECK(match != hits.end());
  }
}
