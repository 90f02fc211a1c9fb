#include <omp.h>

#include "bbp/kernels.hpp"

namespace bbp::kernels::parallel {

void csr_matvec(const CsrView& a, const Complex* x, Complex* y) {
#pragma omp parallel for schedule(static)
  for (int row = 0; row < a.rows; ++row) {
    Complex sum = 0.0;
    for (int k = a.outer[row]; k < a.outer[row + 1]; ++k) sum += a.values[k] * x[a.inner[k]];
    y[row] = sum;
  }
}

void projection_probabilities(const double* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out) {
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < total; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const double* v = vectors + i * n;
    double p = 0.0;
    for (std::size_t j = 0; j < rank; ++j) {
      const Complex* s = states + j * n;
      double re = 0.0;
      double im = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        re += v[k] * s[k].real();
        im += v[k] * s[k].imag();
      }
      p += weights[j] * (re * re + im * im);
    }
    out[i] = p;
  }
}

void projection_probabilities(const Complex* vectors, std::size_t n, std::size_t count, const Complex* states,
                              std::size_t rank, const double* weights, double* out) {
  const auto total = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < total; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const Complex* v = vectors + i * n;
    double p = 0.0;
    for (std::size_t j = 0; j < rank; ++j) {
      const Complex* s = states + j * n;
      Complex dot = 0.0;
      for (std::size_t k = 0; k < n; ++k) dot += v[k] * s[k];
      p += weights[j] * std::norm(dot);
    }
    out[i] = p;
  }
}

void difference_mass(const Complex* amplitudes, std::size_t rows, std::size_t cols, double weight, double* out) {
  const auto slots = static_cast<std::ptrdiff_t>(rows + cols - 1);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t slot = 0; slot < slots; ++slot) {
    const std::ptrdiff_t m = slot - static_cast<std::ptrdiff_t>(cols - 1);
    const std::size_t c_begin = m < 0 ? static_cast<std::size_t>(-m) : 0;
    double sum = 0.0;
    for (std::size_t c = c_begin; c < cols; ++c) {
      const std::size_t r = static_cast<std::size_t>(static_cast<std::ptrdiff_t>(c) + m);
      if (r >= rows) break;
      sum += std::norm(amplitudes[c * rows + r]);
    }
    out[slot] += weight * sum;
  }
}

}  // namespace bbp::kernels::parallel
