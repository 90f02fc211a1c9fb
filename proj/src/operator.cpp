#include "bbp/operator.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "bbp/error.hpp"

namespace bbp {

namespace {

using Triplet = Eigen::Triplet<Complex, int>;

double hermitian_defect(const SparseMatrix& m) {
  const SparseMatrix diff = m - SparseMatrix(m.adjoint());
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

void check_mode(const FockBasis& basis, int mode, const char* where) {
  if (mode < 0 || mode >= basis.mode_count()) {
    throw DomainError(std::string(where) + ": mode " + std::to_string(mode) + " out of range [0, " +
                      std::to_string(basis.mode_count()) + ")");
  }
}

OperatorMatrix diagonal_operator(const BasisPtr& basis, const std::vector<double>& diag) {
  SparseMatrix m(static_cast<int>(basis->size()), static_cast<int>(basis->size()));
  m.reserve(Eigen::VectorXi::Constant(static_cast<int>(basis->size()), 1));
  for (std::size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] != 0.0) m.insert(static_cast<int>(i), static_cast<int>(i)) = diag[i];
  }
  m.makeCompressed();
  return OperatorMatrix(basis, std::move(m), true);
}

}  // namespace

OperatorMatrix::OperatorMatrix(BasisPtr basis, SparseMatrix entries, bool hermitian)
    : basis_(std::move(basis)), entries_(std::move(entries)), hermitian_(hermitian) {
  if (!basis_) throw DomainError("OperatorMatrix: null basis");
  const auto n = static_cast<Eigen::Index>(basis_->size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw BasisMismatch("OperatorMatrix: entries are " + std::to_string(entries_.rows()) + "x" +
                        std::to_string(entries_.cols()) + " but basis has " + std::to_string(n) + " states");
  }
  entries_.makeCompressed();
  if (hermitian_) {
    const double defect = hermitian_defect(entries_);
    if (defect > kHermitianTolerance) {
      throw NumericError("OperatorMatrix: flagged Hermitian but |A - A^dagger| reaches " + std::to_string(defect));
    }
  }
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return OperatorMatrix(basis_, SparseMatrix(entries_.adjoint()), hermitian_);
}

OperatorMatrix OperatorMatrix::with_hermitian_flag() const {
  return OperatorMatrix(basis_, entries_, true);
}

Eigen::VectorXcd OperatorMatrix::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != static_cast<Eigen::Index>(dimension())) throw BasisMismatch("OperatorMatrix::apply: size mismatch");
  return entries_ * v;
}

OperatorMatrix operator+(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a.basis(), b.basis(), "operator+");
  return OperatorMatrix(a.basis_, a.entries_ + b.entries_, false);
}

OperatorMatrix operator-(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a.basis(), b.basis(), "operator-");
  return OperatorMatrix(a.basis_, a.entries_ - b.entries_, false);
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_basis(a.basis(), b.basis(), "operator*");
  return OperatorMatrix(a.basis_, SparseMatrix(a.entries_ * b.entries_), false);
}

OperatorMatrix operator*(Complex scale, const OperatorMatrix& a) {
  return OperatorMatrix(a.basis_, scale * a.entries_, false);
}

OperatorMatrix operator*(double scale, const OperatorMatrix& a) {
  return OperatorMatrix(a.basis_, SparseMatrix(Complex(scale) * a.entries_), a.hermitian_);
}

OperatorMatrix identity_matrix(const BasisPtr& basis) {
  return diagonal_operator(basis, std::vector<double>(basis->size(), 1.0));
}

OperatorMatrix annihilation_matrix(const BasisPtr& basis, int mode) {
  check_mode(*basis, mode, "annihilation_matrix");
  const std::size_t n = basis->size();
  std::vector<Triplet> triplets;
  triplets.reserve(n);
  std::vector<int> lowered(static_cast<std::size_t>(basis->mode_count()));
  for (std::size_t col = 0; col < n; ++col) {
    const int count = basis->occupation(col, mode);
    if (count == 0) continue;
    const auto occ = basis->occupation(col);
    lowered.assign(occ.begin(), occ.end());
    lowered[static_cast<std::size_t>(mode)] -= 1;
    const std::size_t row = basis->index_of(lowered);
    triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), std::sqrt(static_cast<double>(count)));
  }
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return OperatorMatrix(basis, std::move(m), false);
}

OperatorMatrix creation_matrix(const BasisPtr& basis, int mode) {
  return annihilation_matrix(basis, mode).adjoint();
}

OperatorMatrix number_matrix(const BasisPtr& basis, int mode) {
  check_mode(*basis, mode, "number_matrix");
  std::vector<double> diag(basis->size());
  for (std::size_t i = 0; i < diag.size(); ++i) diag[i] = basis->occupation(i, mode);
  return diagonal_operator(basis, diag);
}

OperatorMatrix weighted_energy_matrix(const BasisPtr& basis, std::span<const double> weights,
                                      std::span<const int> modes) {
  if (weights.size() != modes.size()) {
    throw DomainError("weighted_energy_matrix: " + std::to_string(weights.size()) + " weights for " +
                      std::to_string(modes.size()) + " modes");
  }
  for (std::size_t k = 0; k < modes.size(); ++k) {
    check_mode(*basis, modes[k], "weighted_energy_matrix");
    if (!(weights[k] > 0.0)) throw DomainError("weighted_energy_matrix: weights must be strictly positive");
  }
  std::vector<double> diag(basis->size(), 0.0);
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double energy = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) energy += weights[k] * basis->occupation(i, modes[k]);
    diag[i] = energy;
  }
  return diagonal_operator(basis, diag);
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) { return a * b - b * a; }

double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b, int max_total) {
  require_same_basis(a.basis(), b.basis(), "max_abs_difference");
  const SparseMatrix diff = a.entries() - b.entries();
  const FockBasis& basis = a.basis();
  double worst = 0.0;
  for (int row = 0; row < diff.outerSize(); ++row) {
    if (max_total >= 0 && basis.total_photons(static_cast<std::size_t>(row)) > max_total) continue;
    for (SparseMatrix::InnerIterator it(diff, row); it; ++it) {
      if (max_total >= 0 && basis.total_photons(static_cast<std::size_t>(it.col())) > max_total) continue;
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

double max_abs_entry(const OperatorMatrix& a, int max_total) {
  const FockBasis& basis = a.basis();
  double worst = 0.0;
  for (int row = 0; row < a.entries().outerSize(); ++row) {
    if (max_total >= 0 && basis.total_photons(static_cast<std::size_t>(row)) > max_total) continue;
    for (SparseMatrix::InnerIterator it(a.entries(), row); it; ++it) {
      if (max_total >= 0 && basis.total_photons(static_cast<std::size_t>(it.col())) > max_total) continue;
      worst = std::max(worst, std::abs(it.value()));
    }
  }
  return worst;
}

}  // namespace bbp
