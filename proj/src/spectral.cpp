#include "bbp/spectral.hpp"

#include <cmath>
#include <string>

#include "bbp/error.hpp"
#include "bbp/kernels.hpp"

namespace bbp {

namespace {

SpectralDistribution assemble(const HermitianSpectrum& spectrum, const Eigen::VectorXd& probabilities,
                              std::optional<double> merge_tolerance) {
  const Eigen::VectorXd& values = spectrum.values();
  const double range = values.size() > 0 ? values[values.size() - 1] - values[0] : 0.0;
  const double tolerance = merge_tolerance.value_or(kRelativeMergeTolerance * range);
  if (tolerance < 0.0) throw DomainError("spectral_distribution: merge tolerance must be >= 0");
  std::vector<SpectralPoint> points(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i) points[static_cast<std::size_t>(i)] = {values[i], probabilities[i]};
  return merge_support(std::move(points), tolerance);
}

double top_shell_mass(const Eigen::VectorXd& populations, const FockBasis& basis) {
  const int first = std::max(basis.total_cutoff() - 1, 0);
  double mass = 0.0;
  for (std::size_t i = basis.shell_begin(first); i < basis.size(); ++i) mass += populations[static_cast<Eigen::Index>(i)];
  return mass;
}

}  // namespace

SpectralDistribution spectral_distribution(const HermitianSpectrum& spectrum, const DensityOperator& state,
                                           std::optional<double> merge_tolerance) {
  require_same_basis(*spectrum.basis_ptr(), state.basis(), "spectral_distribution");
  SpectralDistribution out = assemble(spectrum, spectrum.probabilities(state), merge_tolerance);
  out.truncation_tail = top_shell_mass(state.populations(), state.basis());
  return out;
}

SpectralDistribution spectral_distribution(const HermitianSpectrum& spectrum, const PureState& vector,
                                           std::optional<double> merge_tolerance) {
  require_same_basis(*spectrum.basis_ptr(), vector.basis(), "spectral_distribution");
  SpectralDistribution out = assemble(spectrum, spectrum.probabilities(vector.amplitudes()), merge_tolerance);
  out.truncation_tail = top_shell_mass(vector.amplitudes().cwiseAbs2(), vector.basis());
  return out;
}

SpectralDistribution spectral_distribution(const OperatorMatrix& op, const DensityOperator& state,
                                           std::optional<double> merge_tolerance) {
  require_same_basis(op.basis(), state.basis(), "spectral_distribution");
  return spectral_distribution(HermitianSpectrum(op), state, merge_tolerance);
}

Complex expectation(const OperatorMatrix& op, const DensityOperator& state) {
  require_same_basis(op.basis(), state.basis(), "expectation");
  const auto view = kernels::csr_view(op.entries());
  Eigen::VectorXcd image(static_cast<Eigen::Index>(op.dimension()));
  Complex sum = 0.0;
  for (std::size_t j = 0; j < state.rank(); ++j) {
    const Eigen::VectorXcd psi = state.components().col(static_cast<Eigen::Index>(j));
    kernels::parallel::csr_matvec(view, psi.data(), image.data());
    sum += state.weights()[j] * psi.dot(image);
  }
  return sum;
}

MomentResult operator_moment(const OperatorMatrix& op, const DensityOperator& state, int order) {
  require_same_basis(op.basis(), state.basis(), "operator_moment");
  if (!op.hermitian()) throw DomainError("operator_moment: operator must be Hermitian");
  if (order < 0) throw DomainError("operator_moment: order must be >= 0");
  const auto view = kernels::csr_view(op.entries());
  const auto n = static_cast<Eigen::Index>(op.dimension());
  const int left_power = order / 2;
  const int right_power = order - left_power;
  Complex sum = 0.0;
  Eigen::VectorXcd scratch(n);
  for (std::size_t j = 0; j < state.rank(); ++j) {
    Eigen::VectorXcd current = state.components().col(static_cast<Eigen::Index>(j));
    Eigen::VectorXcd left;
    for (int p = 0; p < right_power; ++p) {
      if (p == left_power) left = current;
      kernels::parallel::csr_matvec(view, current.data(), scratch.data());
      current.swap(scratch);
    }
    if (left_power == right_power) left = current;
    // <A^l psi | A^r psi> with l + r = order.
    sum += state.weights()[j] * left.dot(current);
  }
  MomentResult result;
  result.value = sum.real();
  if (std::abs(sum.imag()) > 1e-10 * std::max(1.0, std::abs(sum.real()))) {
    throw NumericError("operator_moment: imaginary part " + std::to_string(sum.imag()) + " of a Hermitian moment");
  }
  const int cutoff = state.basis().total_cutoff();
  result.edge_mass = order == 0 ? 0.0 : state.shell_mass(cutoff - order + 1);
  result.contaminated = result.edge_mass > kContaminationThreshold;
  return result;
}

}  // namespace bbp
