#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>

namespace esrlab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Spin quantum number j stored as 2j so half-integers are exact.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;

  static HalfInteger from_twice(int twice_value);
  /// Parses "0", "1", "7/2", "3.5".
  static HalfInteger parse(const std::string& text);

  constexpr int twice() const noexcept { return twice_; }
  constexpr int multiplicity() const noexcept { return twice_ + 1; }
  constexpr double value() const noexcept { return 0.5 * twice_; }
  /// j(j+1)
  constexpr double casimir() const noexcept { return 0.25 * twice_ * (twice_ + 2); }
  constexpr bool is_zero() const noexcept { return twice_ == 0; }

  std::string to_string() const;

  friend constexpr bool operator==(HalfInteger, HalfInteger) = default;

 private:
  int twice_ = 0;
};

struct SpinMatrices {
  ComplexMatrix x;
  ComplexMatrix y;
  ComplexMatrix z;
  ComplexMatrix plus;   // S+
  ComplexMatrix minus;  // S-
};

// Basis |j, m> ordered m = j, j-1, ..., -j.
SpinMatrices spin_matrices(HalfInteger j);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct EigenDecomposition {
  RealVector energies;    // ascending
  ComplexMatrix vectors;  // column k pairs with energies[k]
};

/// Real-arithmetic counterpart used when the matrix has no imaginary part.
struct RealEigenDecomposition {
  RealVector energies;
  RealMatrix vectors;
};

/// Full spectrum of a Hermitian matrix.
///
/// The matrix is first split into the connected components of its nonzero
/// pattern and each block is diagonalized separately, so exactly decoupled
/// subspaces never mix numerically and diagonal input yields unit vectors.
/// Throws std::invalid_argument when max |h - h^H| exceeds 1e-12 ||h||_F.
EigenDecomposition hermitian_eigendecomposition(const ComplexMatrix& h);

/// Same contract for real symmetric input.
RealEigenDecomposition symmetric_eigendecomposition(const RealMatrix& h);

/// max |h(i,j) - conj(h(j,i))|
double hermiticity_defect(const ComplexMatrix& h);

}  // namespace esrlab
