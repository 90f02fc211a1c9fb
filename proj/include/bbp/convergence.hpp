#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbp/bbp_measurement.hpp"
#include "bbp/ideal_quadrature.hpp"

namespace bbp {

/// How outcome distributions of q_delta are obtained.
///  spectral: eigendecomposition of the truncated q_delta (displaced frame).
///  lattice:  exact outgoing-frame lattice law (one signal mode).
///  automatic: lattice for one signal mode, spectral otherwise.
enum class OutcomePath { automatic, spectral, lattice };

OutcomePath resolve_path(OutcomePath path, const QuadratureSpec& spec);
const char* path_name(OutcomePath path);

/// Outcome distribution of q_delta for `state` along the resolved path.
MeasurementDistribution outcome_distribution(const DensityOperator& state, const QuadratureSpec& spec,
                                             OutcomePath path = OutcomePath::automatic);

struct MomentRecord {
  int order = 0;
  double distribution = 0.0;  // from the outcome distribution
  double operator_value = 0.0;  // tr(rho q_delta^n)
  double ideal = 0.0;         // tr(rho q^n)
  double residual = 0.0;      // operator_value - ideal
  bool contaminated = false;
};

struct DeltaRecord {
  double delta = 0.0;
  std::vector<MomentRecord> moments;  // orders 1..K
  double mean = 0.0;                  // of the outcome distribution
  double variance = 0.0;
  double ideal_mean = 0.0;
  double ideal_variance = 0.0;
  double predicted_bias = 0.0;  // delta^2 sum omega_k^2 <n_k>
  double truncation_tail = 0.0;
  std::optional<double> kolmogorov_distance;
  std::vector<double> panel_gaps;
};

/// Consumes one distribution per delta so callers can reuse it (CSV output).
using DistributionSink = std::function<void(double delta, const MeasurementDistribution&)>;

/// Per delta: spectral (or lattice) distribution, moments up to `max_order`
/// two ways, residuals against the ideal moments. Deltas must be strictly
/// decreasing; max_order at most 6.
std::vector<DeltaRecord> moment_sweep(const DensityOperator& state, const QuadratureSpec& spec,
                                      const std::vector<double>& deltas, int max_order,
                                      OutcomePath path = OutcomePath::spectral, const DistributionSink& sink = {});

inline constexpr double kResidualFloor = 1e-12;

struct ScalingFit {
  /// Every residual sits at the numeric floor: the identity holds exactly
  /// and no exponent is fitted.
  bool exact = false;
  double exponent = 0.0;
};

/// Least-squares slope of log|r| against log delta. Throws DomainError with
/// fewer than three points or when only some residuals are at the floor.
ScalingFit fit_scaling_exponent(const std::vector<double>& deltas, const std::vector<double>& residuals);

struct TestFunction {
  std::string name;
  std::function<double(double)> f;
};

/// cos(0.5x), cos(x), cos(2x), 1/(1+x^2), exp(-x^2).
const std::vector<TestFunction>& default_panel();

inline constexpr double kIdealMassDeficit = 1e-8;

struct WeakMetrics {
  double kolmogorov_distance = 0.0;
  std::vector<double> gaps;
  double ideal_mass = 0.0;
  bool widened = false;
};

/// Kolmogorov distance at the jump points of `dist` against the interpolated
/// ideal CDF, and |sum f p - integral f p| per panel function. The ideal grid
/// is widened once when it misses more than 1e-8 of the mass; NumericError
/// if it still does.
WeakMetrics weak_convergence_metrics(const MeasurementDistribution& dist, const QuadraturePdf& pdf,
                                     const std::vector<TestFunction>& panel = default_panel());

struct PolarizationRecord {
  double delta = 0.0;
  Complex measured;  // <phi|f(q_delta)|psi> from four diagonal expectations
  Complex ideal;     // <phi|f(q)|psi> from the target-frame cross density
  double gap = 0.0;
};

std::vector<PolarizationRecord> polarization_bilinear_check(const PureState& phi, const PureState& psi,
                                                            const std::function<double(double)>& f,
                                                            const QuadratureSpec& spec,
                                                            const std::vector<double>& deltas,
                                                            OutcomePath path = OutcomePath::automatic);

struct ConvergenceReport {
  QuadratureSpec spec;
  std::string outcome_path;
  std::vector<DeltaRecord> records;
  std::map<int, ScalingFit> exponents;  // per moment order >= 3
  std::map<std::string, bool> flags;
};

struct AnalysisOptions {
  int max_order = 4;
  bool weak_metrics = true;
  OutcomePath path = OutcomePath::automatic;
  std::optional<std::vector<double>> grid;
};

/// Full sweep: moments and bias identities on the spectral path, weak metrics
/// on the resolved outcome path, exponent fits and criterion flags.
/// `ideal` receives the ideal pdf that was used.
ConvergenceReport analyze_convergence(const DensityOperator& state, const QuadratureSpec& spec,
                                      const std::vector<double>& deltas, const AnalysisOptions& options,
                                      const DistributionSink& sink = {}, QuadraturePdf* ideal = nullptr);

}  // namespace bbp
