#include <cmath>
#include <queue>
#include <string>

#include <lapacke.h>

#include "bbp/error.hpp"
#include "bbp/kernels.hpp"
#include "bbp/spectral.hpp"

namespace bbp {

namespace {

constexpr double kGaugeTolerance = 1e-12;

void solve_real(Eigen::MatrixXd& matrix, Eigen::VectorXd& values) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  values.resize(n);
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, matrix.data(), n, values.data());
  if (info != 0) throw NumericError("eigendecompose_hermitian: dsyevd failed with info " + std::to_string(info));
}

void solve_complex(Eigen::MatrixXcd& matrix, Eigen::VectorXd& values) {
  const auto n = static_cast<lapack_int>(matrix.rows());
  values.resize(n);
  const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n,
                                         reinterpret_cast<lapack_complex_double*>(matrix.data()), n, values.data());
  if (info != 0) throw NumericError("eigendecompose_hermitian: zheevd failed with info " + std::to_string(info));
}

}  // namespace

std::optional<Eigen::VectorXcd> real_gauge(const OperatorMatrix& op) {
  const SparseMatrix& a = op.entries();
  const auto n = a.rows();
  // Hermitian input: the row pattern equals the column pattern, so walking rows covers every edge.
  Eigen::VectorXcd gauge = Eigen::VectorXcd::Zero(n);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  double scale = 0.0;
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  }
  std::queue<int> frontier;
  for (Eigen::Index root = 0; root < n; ++root) {
    if (seen[static_cast<std::size_t>(root)]) continue;
    seen[static_cast<std::size_t>(root)] = 1;
    gauge[root] = 1.0;
    frontier.push(static_cast<int>(root));
    while (!frontier.empty()) {
      const int i = frontier.front();
      frontier.pop();
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        if (seen[static_cast<std::size_t>(j)] || std::abs(it.value()) == 0.0) continue;
        seen[static_cast<std::size_t>(j)] = 1;
        gauge[j] = gauge[i] * std::conj(it.value()) / std::abs(it.value());
        frontier.push(j);
      }
    }
  }
  for (int i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      const Complex rotated = std::conj(gauge[i]) * it.value() * gauge[it.col()];
      if (std::abs(rotated.imag()) > kGaugeTolerance * std::max(scale, 1.0)) return std::nullopt;
    }
  }
  return gauge;
}

HermitianSpectrum::HermitianSpectrum(const OperatorMatrix& op) : basis_(op.basis_ptr()) {
  if (!op.hermitian()) throw NumericError("eigendecompose_hermitian: operator is not flagged Hermitian");
  const SparseMatrix& a = op.entries();
  const auto n = a.rows();
  if (auto gauge = real_gauge(op)) {
    real_ = true;
    gauge_ = std::move(*gauge);
    real_vectors_ = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < a.outerSize(); ++i) {
      for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
        real_vectors_(i, it.col()) = (std::conj(gauge_[i]) * it.value() * gauge_[it.col()]).real();
      }
    }
    solve_real(real_vectors_, values_);
  } else {
    complex_vectors_ = Eigen::MatrixXcd(a);
    solve_complex(complex_vectors_, values_);
  }
}

Eigen::MatrixXcd HermitianSpectrum::vectors() const {
  if (!real_) return complex_vectors_;
  return gauge_.asDiagonal() * real_vectors_.cast<Complex>();
}

Eigen::VectorXd HermitianSpectrum::probabilities(const Eigen::MatrixXcd& columns, std::span<const double> weights) const {
  const auto n = static_cast<std::size_t>(values_.size());
  if (static_cast<std::size_t>(columns.rows()) != n) throw BasisMismatch("HermitianSpectrum: state size mismatch");
  Eigen::VectorXd out(values_.size());
  if (real_) {
    const Eigen::MatrixXcd rotated = gauge_.conjugate().asDiagonal() * columns;
    kernels::parallel::projection_probabilities(real_vectors_.data(), n, n, rotated.data(),
                                                static_cast<std::size_t>(rotated.cols()), weights.data(), out.data());
  } else {
    const Eigen::MatrixXcd conjugated = columns.conjugate();
    kernels::parallel::projection_probabilities(complex_vectors_.data(), n, n, conjugated.data(),
                                                static_cast<std::size_t>(conjugated.cols()), weights.data(),
                                                out.data());
  }
  return out;
}

Eigen::VectorXd HermitianSpectrum::probabilities(const DensityOperator& state) const {
  require_same_basis(*basis_, state.basis(), "HermitianSpectrum::probabilities");
  return probabilities(state.components(), state.weights());
}

Eigen::VectorXd HermitianSpectrum::probabilities(const Eigen::VectorXcd& vector) const {
  const double one = 1.0;
  return probabilities(Eigen::MatrixXcd(vector), std::span<const double>(&one, 1));
}

Eigendecomposition eigendecompose_hermitian(const OperatorMatrix& op) {
  HermitianSpectrum spectrum(op);
  return Eigendecomposition{spectrum.values(), spectrum.vectors()};
}

}  // namespace bbp
