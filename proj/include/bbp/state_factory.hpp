#pragma once

#include <span>
#include <vector>

#include "bbp/operator.hpp"
#include "bbp/state.hpp"

namespace bbp {

/// Number of signal modes carried by a basis: the first half of its modes
/// (the second half are the matched LO modes), or 1 for a bare single-mode basis.
int signal_mode_count(const FockBasis& basis);

struct CoherentTerm {
  Complex coefficient;
  std::vector<Complex> amplitudes;  // one per signal mode
};

/// Signal-state description. All modes not addressed here (in particular
/// every LO mode) are prepared in vacuum.
struct StateSpec {
  enum class Kind { vacuum, fock, coherent, coherent_superposition, product };

  Kind kind = Kind::vacuum;
  std::vector<int> occupations;          // fock
  std::vector<Complex> amplitudes;       // coherent
  std::vector<CoherentTerm> terms;       // coherent_superposition
  std::vector<StateSpec> factors;        // product: one single-mode spec per signal mode

  static StateSpec vacuum();
  static StateSpec fock(std::vector<int> occupations);
  static StateSpec coherent(std::vector<Complex> amplitudes);
  static StateSpec superposition(std::vector<CoherentTerm> terms);
  static StateSpec product(std::vector<StateSpec> factors);

  /// Number of signal modes the spec addresses explicitly (0 for vacuum).
  int width() const;
  /// Throws DomainError on an inconsistent spec (all-zero superposition,
  /// negative occupations, product factors that are not single-mode, ...).
  void validate() const;
};

inline constexpr double kCoherentTailWarning = 1e-8;
inline constexpr double kCoherentTailLimit = 1e-3;

struct TruncatedState {
  PureState state;        // normalized on the truncated basis
  double discarded_mass;  // probability the untruncated state has above the cutoff
};

/// Closed-form Fock expansion of the product coherent state with one
/// amplitude per basis mode, truncated and renormalized. The vacuum
/// coefficient is positive real. Warns above `warn_bound` discarded mass;
/// throws TruncationError above kCoherentTailLimit.
TruncatedState coherent_amplitudes_to_state(const BasisPtr& basis, std::span<const Complex> amplitudes,
                                            double warn_bound = kCoherentTailWarning);

/// <beta|alpha> for multimode coherent states.
Complex coherent_overlap(std::span<const Complex> beta, std::span<const Complex> alpha);

/// D_beta = exp(beta a^dagger - beta^* a) on `mode`, exponentiated on the
/// truncated space. The generator never changes the other modes, so it is
/// block-diagonal over chains of fixed spectator occupations and each chain
/// is exponentiated separately (Pade scaling-and-squaring).
OperatorMatrix displacement_matrix(const BasisPtr& basis, int mode, Complex beta);

TruncatedState build_pure_state(const BasisPtr& basis, const StateSpec& spec);
DensityOperator build_state(const BasisPtr& basis, const StateSpec& spec);

/// Coefficients <n|phi> for n = 0..cutoff of a single-mode spec, untruncated
/// normalization (the infinite-dimensional state has unit norm).
Eigen::VectorXcd single_mode_amplitudes(const StateSpec& spec, int cutoff);

}  // namespace bbp
