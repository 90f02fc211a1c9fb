#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "bbp/optics.hpp"
#include "bbp/state.hpp"

namespace bbp {

/// Normalized Hermite function pi^{-1/4} (2^n n!)^{-1/2} H_n(x) e^{-x^2/2}.
double hermite_psi(int n, double x);
/// psi_0(x) .. psi_nmax(x) from the upward recurrence.
Eigen::VectorXd hermite_psi_all(int nmax, double x);

inline constexpr int kDefaultGridPoints = 2001;
inline constexpr double kDefaultGridHalfWidth = 8.0;  // in standard deviations

/// Outcome density of the ideal quadrature on a grid. `reduced` is the
/// target-mode density matrix; the outcome is y = s sqrt2 x with x the
/// Hermite variable.
struct QuadraturePdf {
  double scale = 0.0;
  Eigen::MatrixXcd reduced;
  std::vector<double> grid;
  std::vector<double> values;

  /// Trapezoid integral of the density over the grid.
  double mass() const;
};

/// Mean and standard deviation of s(b + b^dagger) in a reduced state.
std::pair<double, double> reduced_quadrature_stats(const Eigen::MatrixXcd& reduced, double scale);

/// Equally spaced grid over mean +- half_width * stddev.
std::vector<double> default_grid(const Eigen::MatrixXcd& reduced, double scale, int points = kDefaultGridPoints,
                                 double half_width = kDefaultGridHalfWidth);

double pdf_value(const Eigen::MatrixXcd& reduced, double scale, double y);
/// Complex density of a cross operator tr_rest |psi><phi| (not Hermitian).
std::vector<Complex> cross_pdf_values(const Eigen::MatrixXcd& cross, double scale, const std::vector<double>& grid);

QuadraturePdf pdf_from_reduced(const Eigen::MatrixXcd& reduced, double scale, std::vector<double> grid);

/// Throws DomainError when the grid is not strictly increasing or the LO
/// modes are not in vacuum.
QuadraturePdf ideal_pdf(const DensityOperator& state, const QuadratureSpec& spec,
                        std::optional<std::vector<double>> grid = std::nullopt);

/// Cumulative trapezoid, clamped to [0, 1] and made monotone.
std::vector<double> ideal_cdf(const QuadraturePdf& pdf);
/// Linear interpolation of a grid CDF (0 left of the grid, 1 right of it).
double interpolate_cdf(const std::vector<double>& grid, const std::vector<double>& cdf, double y);

inline constexpr int kDefaultMomentBudget = 6;
inline constexpr double kMomentAgreementTolerance = 1e-7;

struct IdealMoment {
  double operator_value = 0.0;  // tr(rho q^n) on the unreduced state
  double integrated = 0.0;      // integral of y^n p(y)
  bool contaminated = false;
  double edge_mass = 0.0;
  bool agree() const;
};

/// Throws DomainError for n outside 0..budget.
IdealMoment ideal_moment(const DensityOperator& state, const QuadratureSpec& spec, int n, const QuadraturePdf& pdf,
                         int budget = kDefaultMomentBudget);

}  // namespace bbp
