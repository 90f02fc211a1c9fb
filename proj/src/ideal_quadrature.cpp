#include "bbp/ideal_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bbp/error.hpp"
#include "bbp/spectral.hpp"

namespace bbp {

namespace {

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

void require_increasing(const std::vector<double>& grid) {
  if (grid.size() < 2) throw DomainError("ideal_pdf: grid needs at least two points");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("ideal_pdf: grid is not strictly increasing at index " + std::to_string(i));
  }
}

}  // namespace

Eigen::VectorXd hermite_psi_all(int nmax, double x) {
  if (nmax < 0) throw DomainError("hermite_psi: order must be >= 0");
  Eigen::VectorXd psi(nmax + 1);
  psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (nmax >= 1) psi[1] = std::sqrt(2.0) * x * psi[0];
  for (int n = 1; n < nmax; ++n) {
    psi[n + 1] = std::sqrt(2.0 / (n + 1)) * x * psi[n] - std::sqrt(static_cast<double>(n) / (n + 1)) * psi[n - 1];
  }
  return psi;
}

double hermite_psi(int n, double x) { return hermite_psi_all(n, x)[n]; }

double QuadraturePdf::mass() const { return trapezoid(grid, values); }

std::pair<double, double> reduced_quadrature_stats(const Eigen::MatrixXcd& reduced, double scale) {
  const auto d = reduced.rows();
  // X = s (b + b^dagger) in the Fock basis.
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index n = 0; n + 1 < d; ++n) {
    x(n, n + 1) = x(n + 1, n) = scale * std::sqrt(static_cast<double>(n + 1));
  }
  const Eigen::MatrixXcd xc = x.cast<Complex>();
  const double mean = (reduced * xc).trace().real();
  const double second = (reduced * xc * xc).trace().real();
  return {mean, std::sqrt(std::max(second - mean * mean, 0.0))};
}

std::vector<double> default_grid(const Eigen::MatrixXcd& reduced, double scale, int points, double half_width) {
  if (points < 2) throw DomainError("default_grid: need at least two points");
  const auto [mean, sd] = reduced_quadrature_stats(reduced, scale);
  const double width = half_width * std::max(sd, 1e-3);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = mean - width + 2.0 * width * i / (points - 1);
  return grid;
}

double pdf_value(const Eigen::MatrixXcd& reduced, double scale, double y) {
  const double r = scale * std::sqrt(2.0);
  const Eigen::VectorXd psi = hermite_psi_all(static_cast<int>(reduced.rows()) - 1, y / r);
  const Eigen::VectorXcd pc = psi.cast<Complex>();
  return pc.dot(reduced * pc).real() / r;
}

std::vector<Complex> cross_pdf_values(const Eigen::MatrixXcd& cross, double scale, const std::vector<double>& grid) {
  const double r = scale * std::sqrt(2.0);
  std::vector<Complex> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Eigen::VectorXcd psi = hermite_psi_all(static_cast<int>(cross.rows()) - 1, grid[i] / r).cast<Complex>();
    out[i] = (psi.transpose() * cross * psi)(0, 0) / r;
  }
  return out;
}

QuadraturePdf pdf_from_reduced(const Eigen::MatrixXcd& reduced, double scale, std::vector<double> grid) {
  require_increasing(grid);
  if (!(scale > 0.0)) throw DomainError("ideal_pdf: quadrature scale must be > 0");
  QuadraturePdf pdf;
  pdf.scale = scale;
  pdf.reduced = reduced;
  pdf.values.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) pdf.values[i] = pdf_value(reduced, scale, grid[i]);
  pdf.grid = std::move(grid);
  return pdf;
}

QuadraturePdf ideal_pdf(const DensityOperator& state, const QuadratureSpec& spec,
                        std::optional<std::vector<double>> grid) {
  const TargetModeFrame frame = target_mode_frame(spec);
  const Eigen::MatrixXcd reduced = rotate_to_target_mode(state, frame).matrix();
  std::vector<double> points = grid ? std::move(*grid) : default_grid(reduced, frame.scale);
  return pdf_from_reduced(reduced, frame.scale, std::move(points));
}

std::vector<double> ideal_cdf(const QuadraturePdf& pdf) {
  std::vector<double> cdf(pdf.grid.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = 1; i < pdf.grid.size(); ++i) {
    running += 0.5 * (pdf.grid[i] - pdf.grid[i - 1]) * (pdf.values[i] + pdf.values[i - 1]);
    cdf[i] = std::clamp(std::max(running, cdf[i - 1]), 0.0, 1.0);
  }
  return cdf;
}

double interpolate_cdf(const std::vector<double>& grid, const std::vector<double>& cdf, double y) {
  if (y <= grid.front()) return y < grid.front() ? 0.0 : cdf.front();
  if (y >= grid.back()) return y > grid.back() ? 1.0 : cdf.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), y);
  const auto i = static_cast<std::size_t>(it - grid.begin());
  const double t = (y - grid[i - 1]) / (grid[i] - grid[i - 1]);
  return cdf[i - 1] + t * (cdf[i] - cdf[i - 1]);
}

bool IdealMoment::agree() const {
  return std::abs(operator_value - integrated) <= kMomentAgreementTolerance * std::max(1.0, std::abs(operator_value));
}

IdealMoment ideal_moment(const DensityOperator& state, const QuadratureSpec& spec, int n, const QuadraturePdf& pdf,
                         int budget) {
  if (n < 0 || n > budget) {
    throw DomainError("ideal_moment: order " + std::to_string(n) + " outside the budget 0.." + std::to_string(budget));
  }
  const OperatorMatrix q = quadrature_operator(state.basis_ptr(), spec.alpha);
  const MomentResult m = operator_moment(q, state, n);
  IdealMoment out;
  out.operator_value = m.value;
  out.contaminated = m.contaminated;
  out.edge_mass = m.edge_mass;
  std::vector<double> integrand(pdf.grid.size());
  for (std::size_t i = 0; i < pdf.grid.size(); ++i) integrand[i] = std::pow(pdf.grid[i], n) * pdf.values[i];
  out.integrated = trapezoid(pdf.grid, integrand);
  return out;
}

}  // namespace bbp
