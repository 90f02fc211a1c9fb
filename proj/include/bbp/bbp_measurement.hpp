#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bbp/distribution.hpp"
#include "bbp/optics.hpp"
#include "bbp/spectral.hpp"
#include "bbp/state_factory.hpp"

namespace bbp {

/// q_delta = q + delta C on a joint basis with 2N modes: signal modes 0..N-1,
/// LO mode N+k paired with signal mode k.
struct BBPOperator {
  QuadratureSpec spec;
  OperatorMatrix matrix;
  OperatorMatrix quadrature;  // q
  OperatorMatrix coupling;    // C = sum omega_k (a_k^dagger b_k + b_k^dagger a_k)
};

OperatorMatrix coupling_operator(const BasisPtr& basis, std::span<const double> weights);

BBPOperator build_q_delta(const BasisPtr& basis, const QuadratureSpec& spec);

/// Standard pulsed homodyne delta * sum_k (c_k^dagger c_k - d_k^dagger d_k) with
/// c_k = (a_k + b_k + beta_k)/sqrt2, d_k = (a_k - b_k - beta_k)/sqrt2 and
/// beta = lo_amplitude(spec), assembled from the c and d operators.
OperatorMatrix homodyne_operator(const BasisPtr& basis, const QuadratureSpec& spec);

/// Spectral distribution of q_delta in `state`. Rejects states whose LO modes
/// carry more than kLoVacuumTolerance probability.
MeasurementDistribution bbp_distribution(const DensityOperator& state, const BBPOperator& op,
                                         std::optional<double> merge_tolerance = std::nullopt);
MeasurementDistribution bbp_distribution(const DensityOperator& state, const HermitianSpectrum& spectrum,
                                         std::optional<double> merge_tolerance = std::nullopt);

/// Schroedinger-picture pipeline on `basis`: prepares the signal with vacuum
/// LO, displaces each LO mode by beta_k, applies the balanced beamsplitter
/// and reads off delta * sum omega_k (n_c - n_d) from the Fock populations.
/// Throws TruncationError when |beta_k|^2 > N_max/4 for some k.
MeasurementDistribution explicit_lo_distribution(const StateSpec& signal, const QuadratureSpec& spec,
                                                 const BasisPtr& basis);

inline constexpr double kSkellamTailTolerance = 1e-10;

/// Outcome law for a product coherent signal: independent Poisson counts
/// behind the beamsplitter, convolved over modes. The per-mode enumeration
/// stops once the Poisson tail is below tail_tol / (2N).
MeasurementDistribution skellam_oracle_distribution(std::span<const Complex> gamma, const QuadratureSpec& spec,
                                                    double tail_tol = kSkellamTailTolerance);

/// Exact lattice law of one signal mode behind the beamsplitter: outgoing
/// amplitudes in the (n_c, n_d) Fock basis, summed along n_c - n_d. The
/// outgoing cutoff grows until the lost mass is below 1e-11 of the norm.
/// Vectors are single-mode amplitudes <n|psi>, n = 0..len-1, and need not
/// be normalized.
MeasurementDistribution single_mode_lattice_distribution(std::span<const Eigen::VectorXcd> components,
                                                         std::span<const double> weights, Complex alpha,
                                                         double omega, double delta);

/// Lattice law of q_delta for a state on a one-signal-mode joint basis.
MeasurementDistribution lattice_distribution(const DensityOperator& state, const QuadratureSpec& spec);
/// Unnormalized variant: probabilities sum to |psi|^2.
MeasurementDistribution lattice_distribution(const PureState& psi, const QuadratureSpec& spec);
/// Product signal states, one single-mode amplitude vector per signal mode.
MeasurementDistribution product_lattice_distribution(std::span<const Eigen::VectorXcd> factors,
                                                     const QuadratureSpec& spec);

/// <n|D(mu)|j> for n = 0..rows-1, j = 0..cols-1, from the associated
/// Laguerre closed form.
Eigen::MatrixXcd displaced_number_amplitudes(Complex mu, int rows, int cols);

}  // namespace bbp
