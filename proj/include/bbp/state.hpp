#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "bbp/operator.hpp"

namespace bbp {

inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kPositivityTolerance = 1e-10;

/// State vector over a truncated Fock basis. Not necessarily normalized: the
/// polarization identity works with sums of states.
class PureState {
 public:
  PureState(BasisPtr basis, Eigen::VectorXcd amplitudes);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  Complex amplitude(std::size_t index) const { return amplitudes_[static_cast<Eigen::Index>(index)]; }

  double norm() const { return amplitudes_.norm(); }
  PureState normalized() const;

  Complex inner(const PureState& other) const;  // <this|other>

  friend PureState operator+(const PureState& a, const PureState& b);
  friend PureState operator*(Complex scale, const PureState& a);

 private:
  BasisPtr basis_;
  Eigen::VectorXcd amplitudes_;
};

/// Density operator stored as a finite ensemble rho = sum_j w_j |v_j><v_j|
/// with w_j > 0, unit-norm v_j and sum_j w_j = 1. Hermiticity, unit trace and
/// positivity hold by construction; matrix() materializes the dense form.
class DensityOperator {
 public:
  static DensityOperator pure(const PureState& state);
  /// Weights are renormalized to sum to one; components need not be orthogonal.
  static DensityOperator mixture(BasisPtr basis, std::span<const double> weights,
                                 const Eigen::MatrixXcd& components);
  /// Validates the dense matrix against the invariants (Hermitian within 1e-12,
  /// trace 1 within 1e-10, smallest eigenvalue >= -1e-10).
  static DensityOperator from_matrix(BasisPtr basis, const Eigen::MatrixXcd& matrix);

  const FockBasis& basis() const { return *basis_; }
  const BasisPtr& basis_ptr() const { return basis_; }
  std::size_t rank() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  /// dimension x rank, one unit-norm component per column.
  const Eigen::MatrixXcd& components() const { return components_; }

  Eigen::MatrixXcd matrix() const;
  Complex element(std::size_t row, std::size_t col) const;

  /// Probability on basis states whose total photon number is >= min_total.
  double shell_mass(int min_total) const;
  /// Probability that at least one of `modes` is occupied.
  double occupied_mass(std::span<const int> modes) const;
  /// Per-basis-state probabilities (the diagonal).
  Eigen::VectorXd populations() const;

 private:
  DensityOperator(BasisPtr basis, std::vector<double> weights, Eigen::MatrixXcd components);

  BasisPtr basis_;
  std::vector<double> weights_;
  Eigen::MatrixXcd components_;
};

}  // namespace bbp
