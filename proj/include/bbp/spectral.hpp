#pragma once

#include <optional>

#include <Eigen/Dense>

#include "bbp/distribution.hpp"
#include "bbp/operator.hpp"
#include "bbp/state.hpp"

namespace bbp {

/// Expectations of Hermitian moments whose probability mass within `order`
/// shells of the cutoff exceeds this are flagged as truncation-contaminated.
inline constexpr double kContaminationThreshold = 1e-8;
/// Relative merge tolerance for numerically split lattice eigenvalues.
inline constexpr double kRelativeMergeTolerance = 1e-9;

struct Eigendecomposition {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // column i belongs to values[i]
};

/// Finds unit phases g with conj(g_i) A_ij g_j real for every stored entry.
/// Returns nullopt when the sparsity graph has a cycle with non-real phase.
std::optional<Eigen::VectorXcd> real_gauge(const OperatorMatrix& op);

/// Dense Hermitian eigendecomposition. When a diagonal phase gauge makes the
/// operator real the decomposition runs on the real symmetric matrix, which
/// is several times cheaper; eigenvectors are then g .* u with u real.
class HermitianSpectrum {
 public:
  explicit HermitianSpectrum(const OperatorMatrix& op);

  const BasisPtr& basis_ptr() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  bool real_gauge_used() const { return real_; }
  std::size_t dimension() const { return static_cast<std::size_t>(values_.size()); }

  Eigen::MatrixXcd vectors() const;
  /// p_i = sum_j w_j |v_i^dagger psi_j|^2 over the state's ensemble.
  Eigen::VectorXd probabilities(const DensityOperator& state) const;
  /// Same for one (possibly unnormalized) vector.
  Eigen::VectorXd probabilities(const Eigen::VectorXcd& vector) const;

 private:
  Eigen::VectorXd probabilities(const Eigen::MatrixXcd& columns, std::span<const double> weights) const;

  BasisPtr basis_;
  bool real_ = false;
  Eigen::VectorXd values_;
  Eigen::MatrixXd real_vectors_;
  Eigen::MatrixXcd complex_vectors_;
  Eigen::VectorXcd gauge_;
};

Eigendecomposition eigendecompose_hermitian(const OperatorMatrix& op);

/// Outcome distribution of measuring `op` on `state`. Default merge tolerance
/// is kRelativeMergeTolerance times the spectral range.
SpectralDistribution spectral_distribution(const OperatorMatrix& op, const DensityOperator& state,
                                           std::optional<double> merge_tolerance = std::nullopt);
SpectralDistribution spectral_distribution(const HermitianSpectrum& spectrum, const DensityOperator& state,
                                           std::optional<double> merge_tolerance = std::nullopt);
/// Unnormalized variant: probabilities sum to |vector|^2.
SpectralDistribution spectral_distribution(const HermitianSpectrum& spectrum, const PureState& vector,
                                           std::optional<double> merge_tolerance = std::nullopt);

Complex expectation(const OperatorMatrix& op, const DensityOperator& state);

struct MomentResult {
  double value = 0.0;
  bool contaminated = false;
  /// Probability within `order` shells of the cutoff.
  double edge_mass = 0.0;
};

/// tr(rho A^n) by repeated sparse application. Throws NumericError when the
/// imaginary part exceeds 1e-10 (relative to max(1, |value|)).
MomentResult operator_moment(const OperatorMatrix& op, const DensityOperator& state, int order);

}  // namespace bbp
