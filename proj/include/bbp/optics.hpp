#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bbp/operator.hpp"
#include "bbp/state.hpp"

namespace bbp {

/// Target quadrature -i sum_k (alpha_k a_k^dagger - alpha_k^* a_k), detector
/// weights omega_k and the LO scale delta = 1/R (0 for the ideal limit).
struct QuadratureSpec {
  std::vector<Complex> alpha;
  std::vector<double> weights;
  double delta = 0.0;

  int signal_mode_count() const { return static_cast<int>(alpha.size()); }
  /// s = sqrt(sum |alpha_k|^2).
  double scale() const;
  /// sum |alpha_k|^2 == 1/2 within 1e-12.
  bool is_normalized() const;
  /// Throws DomainError on empty or zero alpha, size mismatch, non-positive
  /// weights or negative delta.
  void validate() const;
  QuadratureSpec with_delta(double d) const;
};

/// beta_k = -i alpha_k / (omega_k delta).
std::vector<Complex> lo_amplitude(const QuadratureSpec& spec);

/// (gamma_c, gamma_d) = ((gamma_a + gamma_b)/sqrt2, (gamma_a - gamma_b)/sqrt2).
std::pair<std::vector<Complex>, std::vector<Complex>> beamsplit_coherent(std::span<const Complex> gamma_a,
                                                                         std::span<const Complex> gamma_b);

/// The signal-mode quadrature as an operator on `basis` (modes 0..N-1).
OperatorMatrix quadrature_operator(const BasisPtr& basis, std::span<const Complex> alpha);

struct TargetModeFrame {
  Eigen::VectorXcd w;           // w_k = i alpha_k^* / s
  Eigen::MatrixXcd completion;  // unitary, first row w
  double scale = 0.0;
};

/// Row 0 is w; the remaining rows come from Gram-Schmidt on the standard
/// basis with the largest-|w_k| vector dropped.
TargetModeFrame target_mode_frame(const QuadratureSpec& spec);

/// Two-mode rotation acting on rows (row - 1, row).
struct GivensRotation {
  int row;
  Eigen::Matrix2cd matrix;
};

/// T = Q_1^dagger ... Q_L^dagger D with D diagonal unitary.
struct GivensDecomposition {
  std::vector<GivensRotation> rotations;  // Q_1 .. Q_L
  Eigen::VectorXcd phases;                // diag(D)
};

GivensDecomposition givens_decompose(const Eigen::MatrixXcd& unitary);

/// Fock-space action of the mode map a_k^dagger -> sum_i G_ik a_i^dagger on
/// the modes `modes` (G is |modes| x |modes|, unitary). Photon number is
/// conserved, so the result is exact on the truncated space.
Eigen::VectorXcd apply_mode_unitary(const FockBasis& basis, const Eigen::VectorXcd& amplitudes,
                                    const Eigen::MatrixXcd& map, std::span<const int> modes);

/// Same for one pair of modes, lifted directly.
Eigen::VectorXcd apply_two_mode_map(const FockBasis& basis, const Eigen::VectorXcd& amplitudes,
                                    const Eigen::Matrix2cd& map, int p, int q);

/// Rotates the signal modes so that mode 0 carries b' = sum_k w_k a_k and
/// traces out everything else. The result lives on a single-mode basis with
/// the same cutoff. Throws DomainError if the LO modes are not in vacuum
/// (mass above 1e-10).
DensityOperator rotate_to_target_mode(const DensityOperator& state, const TargetModeFrame& frame);

/// tr_rest |psi><phi| in the target frame, i.e. X_mn with <phi|f(q)|psi> = tr(f(q') X).
Eigen::MatrixXcd reduced_cross_operator(const PureState& phi, const PureState& psi, const TargetModeFrame& frame);

/// Probability on LO modes being occupied, for bases that carry them.
double lo_occupied_mass(const DensityOperator& state);

inline constexpr double kLoVacuumTolerance = 1e-10;

}  // namespace bbp
