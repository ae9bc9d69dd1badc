#include "esrlab/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace esrlab {

HalfInteger HalfInteger::from_twice(int twice_value) {
  if (twice_value < 0) {
    throw std::invalid_argument("spin quantum number must be non-negative");
  }
  HalfInteger j;
  j.twice_ = twice_value;
  return j;
}

HalfInteger HalfInteger::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      std::size_t used = 0;
      const int num = std::stoi(text.substr(0, slash), &used);
      if (used != slash || text.substr(slash + 1) != "2") {
        throw std::invalid_argument("denominator must be 2");
      }
      if (num % 2 == 0) throw std::invalid_argument("n/2 with even n should be written as an integer");
      return from_twice(num);
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    const double twice = 2.0 * v;
    if (std::abs(twice - std::round(twice)) > 1e-12) throw std::invalid_argument("not a half-integer");
    return from_twice(static_cast<int>(std::lround(twice)));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("invalid spin quantum number '" + text + "'");
  }
}

std::string HalfInteger::to_string() const {
  if (twice_ % 2 == 0) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

SpinMatrices spin_matrices(HalfInteger j) {
  const int dim = j.multiplicity();
  const double jj1 = j.casimir();
  SpinMatrices s;
  s.z = ComplexMatrix::Zero(dim, dim);
  s.plus = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    // index k carries m = j - k
    const double m = j.value() - k;
    s.z(k, k) = m;
    if (k > 0) {
      // <m+1| S+ |m> lives at row k-1, column k
      s.plus(k - 1, k) = std::sqrt(jj1 - m * (m + 1.0));
    }
  }
  s.minus = s.plus.adjoint();
  s.x = 0.5 * (s.plus + s.minus);
  s.y = Complex(0.0, -0.5) * (s.plus - s.minus);
  return s;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index ra = a.rows(), ca = a.cols(), rb = b.rows(), cb = b.cols();
  ComplexMatrix out(ra * rb, ca * cb);
  for (Eigen::Index i = 0; i < ra; ++i) {
    for (Eigen::Index j = 0; j < ca; ++j) {
      out.block(i * rb, j * cb, rb, cb) = a(i, j) * b;
    }
  }
  return out;
}

double hermiticity_defect(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("matrix is not square");
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

namespace {

// Connected components of the nonzero pattern, each sorted ascending and the
// list ordered by smallest member.
template <typename Matrix>
std::vector<std::vector<int>> pattern_components(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (h(i, j) != typename Matrix::Scalar(0) || h(j, i) != typename Matrix::Scalar(0)) {
        const int ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::vector<int>> groups;
  std::vector<int> slot(n, -1);
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[slot[r]].push_back(i);
  }
  return groups;
}

template <typename Matrix>
std::pair<RealVector, Matrix> blockwise_eigensolve(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  const auto groups = pattern_components(h);

  struct Pair {
    double energy;
    int group;
    int local;
  };
  std::vector<Pair> order;
  order.reserve(n);
  std::vector<RealVector> group_energies(groups.size());
  std::vector<Matrix> group_vectors(groups.size());

  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& idx = groups[g];
    const int m = static_cast<int>(idx.size());
    if (m == 1) {
      group_energies[g] = RealVector::Constant(1, std::real(h(idx[0], idx[0])));
      group_vectors[g] = Matrix::Identity(1, 1);
    } else {
      Matrix sub(m, m);
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) sub(a, b) = h(idx[a], idx[b]);
      }
      Eigen::SelfAdjointEigenSolver<Matrix> solver(sub, Eigen::ComputeEigenvectors);
      if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigensolver failed to converge");
      }
      group_energies[g] = solver.eigenvalues();
      group_vectors[g] = solver.eigenvectors();
    }
    for (int k = 0; k < m; ++k) order.push_back({group_energies[g][k], static_cast<int>(g), k});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Pair& a, const Pair& b) { return a.energy < b.energy; });

  RealVector energies(n);
  Matrix vectors = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const auto& p = order[k];
    energies[k] = p.energy;
    const auto& idx = groups[p.group];
    for (std::size_t a = 0; a < idx.size(); ++a) {
      vectors(idx[a], k) = group_vectors[p.group](static_cast<Eigen::Index>(a), p.local);
    }
  }
  return {std::move(energies), std::move(vectors)};
}

void check_hermitian(double defect, double frobenius) {
  if (defect > 1e-12 * frobenius) {
    throw std::invalid_argument("matrix is not Hermitian: max |h - h^H| = " + std::to_string(defect) +
                                ", ||h||_F = " + std::to_string(frobenius));
  }
}

}  // namespace

EigenDecomposition hermitian_eigendecomposition(const ComplexMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("matrix must be square and non-empty");
  check_hermitian(hermiticity_defect(h), h.norm());
  auto [energies, vectors] = blockwise_eigensolve(h);
  return {std::move(energies), std::move(vectors)};
}

RealEigenDecomposition symmetric_eigendecomposition(const RealMatrix& h) {
  if (h.rows() != h.cols() || h.rows() == 0) throw std::invalid_argument("matrix must be square and non-empty");
  check_hermitian((h - h.transpose()).cwiseAbs().maxCoeff(), h.norm());
  auto [energies, vectors] = blockwise_eigensolve(h);
  return {std::move(energies), std::move(vectors)};
}

}  // namespace esrlab
