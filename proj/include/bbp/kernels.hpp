#pragma once

// Inner loops that dominate runtime. Each kernel has a serial reference
// implementation and an OpenMP version with identical per-element
// arithmetic order, so both produce bit-identical results for any thread
// count. Tests compare them; bench/ times them.

#include <complex>
#include <cstddef>

#include "bbp/operator.hpp"

namespace bbp::kernels {

/// Borrowed view of a compressed row-major sparse matrix.
struct CsrView {
  int rows;
  const int* outer;
  const int* inner;
  const Complex* values;
};

CsrView csr_view(const SparseMatrix& matrix);

/// Column-major dense matrices: `vectors` is n x count, `states` is n x rank.
/// out[i] = sum_j weights[j] * |vectors(:, i)^T states(:, j)|^2
/// (a plain transpose: callers pre-conjugate complex eigenvectors if needed).
///
/// difference_mass: for an amplitude table A (rows x cols, column-major),
/// out[(r - c) + (cols - 1)] += weight * |A(r, c)|^2; `out` has rows + cols - 1 slots.

namespace serial {
void csr_matvec(const CsrView& a, const Complex* x, Complex* y);
void projection_probabilities(const double* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out);
void projection_probabilities(const Complex* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out);
void difference_mass(const Complex* amplitudes, std::size_t rows, std::size_t cols, double weight, double* out);
}  // namespace serial

namespace parallel {
void csr_matvec(const CsrView& a, const Complex* x, Complex* y);
void projection_probabilities(const double* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out);
void projection_probabilities(const Complex* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out);
void difference_mass(const Complex* amplitudes, std::size_t rows, std::size_t cols, double weight, double* out);
}  // namespace parallel

}  // namespace bbp::kernels
