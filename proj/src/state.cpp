#include "bbp/state.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "bbp/error.hpp"

namespace bbp {

PureState::PureState(BasisPtr basis, Eigen::VectorXcd amplitudes)
    : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
  if (!basis_) throw DomainError("PureState: null basis");
  if (amplitudes_.size() != static_cast<Eigen::Index>(basis_->size())) {
    throw BasisMismatch("PureState: " + std::to_string(amplitudes_.size()) + " amplitudes for a basis of " +
                        std::to_string(basis_->size()));
  }
}

PureState PureState::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw DomainError("PureState::normalized: zero vector");
  return PureState(basis_, amplitudes_ / n);
}

Complex PureState::inner(const PureState& other) const {
  require_same_basis(*basis_, other.basis(), "PureState::inner");
  return amplitudes_.dot(other.amplitudes_);
}

PureState operator+(const PureState& a, const PureState& b) {
  require_same_basis(a.basis(), b.basis(), "PureState::operator+");
  return PureState(a.basis_, a.amplitudes_ + b.amplitudes_);
}

PureState operator*(Complex scale, const PureState& a) { return PureState(a.basis_, scale * a.amplitudes_); }

DensityOperator::DensityOperator(BasisPtr basis, std::vector<double> weights, Eigen::MatrixXcd components)
    : basis_(std::move(basis)), weights_(std::move(weights)), components_(std::move(components)) {}

DensityOperator DensityOperator::pure(const PureState& state) {
  const PureState unit = state.normalized();
  return DensityOperator(state.basis_ptr(), {1.0}, Eigen::MatrixXcd(unit.amplitudes()));
}

DensityOperator DensityOperator::mixture(BasisPtr basis, std::span<const double> weights,
                                         const Eigen::MatrixXcd& components) {
  if (!basis) throw DomainError("DensityOperator::mixture: null basis");
  if (components.rows() != static_cast<Eigen::Index>(basis->size()) ||
      components.cols() != static_cast<Eigen::Index>(weights.size())) {
    throw BasisMismatch("DensityOperator::mixture: component matrix does not match basis/weights");
  }
  std::vector<double> kept_weights;
  std::vector<Eigen::Index> kept_columns;
  double total = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] < 0.0) throw DomainError("DensityOperator::mixture: negative weight");
    const double n = components.col(static_cast<Eigen::Index>(j)).norm();
    if (weights[j] == 0.0 || n == 0.0) continue;
    kept_weights.push_back(weights[j]);
    kept_columns.push_back(static_cast<Eigen::Index>(j));
    total += weights[j];
  }
  if (!(total > 0.0)) throw DomainError("DensityOperator::mixture: no component with positive weight");
  Eigen::MatrixXcd kept(components.rows(), static_cast<Eigen::Index>(kept_columns.size()));
  for (std::size_t j = 0; j < kept_columns.size(); ++j) {
    const auto col = components.col(kept_columns[j]);
    kept.col(static_cast<Eigen::Index>(j)) = col / col.norm();
    kept_weights[j] /= total;
  }
  return DensityOperator(std::move(basis), std::move(kept_weights), std::move(kept));
}

DensityOperator DensityOperator::from_matrix(BasisPtr basis, const Eigen::MatrixXcd& matrix) {
  if (!basis) throw DomainError("DensityOperator::from_matrix: null basis");
  const auto n = static_cast<Eigen::Index>(basis->size());
  if (matrix.rows() != n || matrix.cols() != n) throw BasisMismatch("DensityOperator::from_matrix: wrong shape");
  const double defect = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  if (defect > kHermitianTolerance) {
    throw NumericError("DensityOperator::from_matrix: not Hermitian (defect " + std::to_string(defect) + ")");
  }
  const double trace = matrix.trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw NumericError("DensityOperator::from_matrix: trace " + std::to_string(trace) + " differs from 1");
  }
  const Eigen::MatrixXcd symmetric = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(symmetric);
  if (solver.info() != Eigen::Success) throw NumericError("DensityOperator::from_matrix: eigensolver failed");
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (values.minCoeff() < -kPositivityTolerance) {
    throw NumericError("DensityOperator::from_matrix: eigenvalue " + std::to_string(values.minCoeff()) +
                       " is negative");
  }
  std::vector<double> weights;
  std::vector<Eigen::Index> columns;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values[i] > 1e-15) {
      weights.push_back(values[i]);
      columns.push_back(i);
    }
  }
  Eigen::MatrixXcd components(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    components.col(static_cast<Eigen::Index>(j)) = solver.eigenvectors().col(columns[j]);
  }
  return mixture(std::move(basis), weights, components);
}

Eigen::MatrixXcd DensityOperator::matrix() const {
  Eigen::MatrixXcd scaled = components_;
  for (Eigen::Index j = 0; j < scaled.cols(); ++j) scaled.col(j) *= weights_[static_cast<std::size_t>(j)];
  return scaled * components_.adjoint();
}

Complex DensityOperator::element(std::size_t row, std::size_t col) const {
  Complex sum = 0.0;
  for (std::size_t j = 0; j < weights_.size(); ++j) {
    sum += weights_[j] * components_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j)) *
           std::conj(components_(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(j)));
  }
  return sum;
}

Eigen::VectorXd DensityOperator::populations() const {
  Eigen::VectorXd pops = Eigen::VectorXd::Zero(components_.rows());
  for (Eigen::Index j = 0; j < components_.cols(); ++j) {
    pops += weights_[static_cast<std::size_t>(j)] * components_.col(j).cwiseAbs2();
  }
  return pops;
}

double DensityOperator::shell_mass(int min_total) const {
  const Eigen::VectorXd pops = populations();
  const int begin_total = std::max(min_total, 0);
  if (begin_total > basis_->total_cutoff()) return 0.0;
  double mass = 0.0;
  for (std::size_t i = basis_->shell_begin(begin_total); i < basis_->size(); ++i) mass += pops[static_cast<Eigen::Index>(i)];
  return mass;
}

double DensityOperator::occupied_mass(std::span<const int> modes) const {
  const Eigen::VectorXd pops = populations();
  double mass = 0.0;
  for (std::size_t i = 0; i < basis_->size(); ++i) {
    for (int mode : modes) {
      if (basis_->occupation(i, mode) > 0) {
        mass += pops[static_cast<Eigen::Index>(i)];
        break;
      }
    }
  }
  return mass;
}

}  // namespace bbp
