#pragma once

#include <complex>
#include <span>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "bbp/fock_basis.hpp"

namespace bbp {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;

inline constexpr double kHermitianTolerance = 1e-12;

/// Operator on a truncated Fock space. Every operator the library builds is
/// sparse, so entries are stored sparse; dense() materializes on demand.
class OperatorMatrix {
 public:
  /// When `hermitian` is set the entries are checked against their adjoint
  /// (elementwise, kHermitianTolerance); a violation throws NumericError.
  OperatorMatrix(BasisPtr basis, SparseMatrix entries, bool hermitian);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const SparseMatrix& entries() const { return entries_; }
  bool hermitian() const { return hermitian_; }
  std::size_t dimension() const { return basis_->size(); }

  Eigen::MatrixXcd dense() const { return Eigen::MatrixXcd(entries_); }
  Complex element(std::size_t row, std::size_t col) const {
    return entries_.coeff(static_cast<int>(row), static_cast<int>(col));
  }

  OperatorMatrix adjoint() const;
  /// Result of an arithmetic combination is flagged Hermitian only if it verifies as such.
  OperatorMatrix with_hermitian_flag() const;

  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  friend OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);
  friend OperatorMatrix operator*(Complex scale, const OperatorMatrix& a);
  friend OperatorMatrix operator*(double scale, const OperatorMatrix& a);

 private:
  BasisPtr basis_;
  SparseMatrix entries_;
  bool hermitian_;
};

OperatorMatrix identity_matrix(const BasisPtr& basis);
OperatorMatrix annihilation_matrix(const BasisPtr& basis, int mode);
OperatorMatrix creation_matrix(const BasisPtr& basis, int mode);
OperatorMatrix number_matrix(const BasisPtr& basis, int mode);

/// Diagonal operator sum_{k in modes} weights[k] n_k. `weights` is indexed like
/// `modes`; every weight must be strictly positive.
OperatorMatrix weighted_energy_matrix(const BasisPtr& basis, std::span<const double> weights,
                                      std::span<const int> modes);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest |a_ij - b_ij| over rows and columns whose total photon number is at
/// most `max_total` (pass -1 for the whole basis).
double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b, int max_total = -1);

/// Largest |a_ij| over the same restriction.
double max_abs_entry(const OperatorMatrix& a, int max_total = -1);

}  // namespace bbp
