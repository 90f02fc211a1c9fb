#include "bbp/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bbp/error.hpp"
#include "bbp/spectral.hpp"
#include "bbp/state_factory.hpp"

namespace bbp {

namespace {

constexpr double kFirstMomentTolerance = 1e-9;
constexpr double kSecondMomentRelative = 1e-8;
constexpr double kSecondMomentAbsolute = 1e-12;
constexpr double kMonotoneSlack = 1e-9;

void require_deltas(const std::vector<double>& deltas) {
  if (deltas.empty()) throw DomainError("delta list is empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw DomainError("deltas must be strictly positive");
    if (i > 0 && !(deltas[i] < deltas[i - 1])) throw DomainError("deltas must be strictly decreasing");
  }
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

Complex trapezoid(const std::vector<double>& x, const std::vector<Complex>& y) {
  Complex s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

QuadraturePdf widened(const QuadraturePdf& pdf) {
  const double lo = pdf.grid.front();
  const double hi = pdf.grid.back();
  const double centre = 0.5 * (lo + hi);
  const double half = hi - lo;
  const std::size_t points = 2 * (pdf.grid.size() - 1) + 1;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) grid[i] = centre - half + 2.0 * half * static_cast<double>(i) / (points - 1);
  return pdf_from_reduced(pdf.reduced, pdf.scale, std::move(grid));
}

}  // namespace

OutcomePath resolve_path(OutcomePath path, const QuadratureSpec& spec) {
  if (path != OutcomePath::automatic) return path;
  return spec.signal_mode_count() == 1 ? OutcomePath::lattice : OutcomePath::spectral;
}

const char* path_name(OutcomePath path) {
  switch (path) {
    case OutcomePath::automatic:
      return "automatic";
    case OutcomePath::spectral:
      return "spectral";
    case OutcomePath::lattice:
      return "lattice";
  }
  return "?";
}

MeasurementDistribution outcome_distribution(const DensityOperator& state, const QuadratureSpec& spec,
                                             OutcomePath path) {
  if (resolve_path(path, spec) == OutcomePath::lattice) return lattice_distribution(state, spec);
  return bbp_distribution(state, build_q_delta(state.basis_ptr(), spec));
}

std::vector<DeltaRecord> moment_sweep(const DensityOperator& state, const QuadratureSpec& spec,
                                      const std::vector<double>& deltas, int max_order, OutcomePath path,
                                      const DistributionSink& sink) {
  spec.validate();
  require_deltas(deltas);
  if (max_order < 2 || max_order > kDefaultMomentBudget) {
    throw DomainError("moment_sweep: max order must be in 2.." + std::to_string(kDefaultMomentBudget));
  }
  const BasisPtr& basis = state.basis_ptr();
  const OperatorMatrix q = quadrature_operator(basis, spec.alpha);
  std::vector<MomentResult> ideal;
  for (int n = 0; n <= max_order; ++n) ideal.push_back(operator_moment(q, state, n));
  double weighted_photons = 0.0;
  for (int k = 0; k < spec.signal_mode_count(); ++k) {
    const double w = spec.weights[static_cast<std::size_t>(k)];
    weighted_photons += w * w * expectation(number_matrix(basis, k), state).real();
  }
  const OutcomePath resolved = resolve_path(path, spec);

  std::vector<DeltaRecord> records;
  for (double delta : deltas) {
    const QuadratureSpec sd = spec.with_delta(delta);
    const BBPOperator op = build_q_delta(basis, sd);
    const MeasurementDistribution dist =
        resolved == OutcomePath::lattice ? lattice_distribution(state, sd) : bbp_distribution(state, op);
    if (sink) sink(delta, dist);
    DeltaRecord rec;
    rec.delta = delta;
    rec.mean = dist.mean();
    rec.variance = dist.variance();
    rec.ideal_mean = ideal[1].value;
    rec.ideal_variance = ideal[2].value - ideal[1].value * ideal[1].value;
    rec.predicted_bias = delta * delta * weighted_photons;
    rec.truncation_tail = dist.truncation_tail;
    for (int n = 1; n <= max_order; ++n) {
      const MomentResult m = operator_moment(op.matrix, state, n);
      MomentRecord mr;
      mr.order = n;
      mr.distribution = dist.moment(n);
      mr.operator_value = m.value;
      mr.ideal = ideal[static_cast<std::size_t>(n)].value;
      mr.residual = mr.operator_value - mr.ideal;
      mr.contaminated = m.contaminated || ideal[static_cast<std::size_t>(n)].contaminated;
      if (mr.contaminated) {
        std::ostringstream msg;
        msg << "moment order " << n << " at delta " << delta << " is truncation-contaminated (edge mass "
            << m.edge_mass << "); excluded from fits";
        log_warning(msg.str());
      }
      rec.moments.push_back(mr);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

ScalingFit fit_scaling_exponent(const std::vector<double>& deltas, const std::vector<double>& residuals) {
  if (deltas.size() != residuals.size()) throw DomainError("fit_scaling_exponent: size mismatch");
  if (deltas.size() < 3) throw DomainError("fit_scaling_exponent: need at least three points");
  std::size_t at_floor = 0;
  for (double r : residuals) {
    if (std::abs(r) <= kResidualFloor) ++at_floor;
  }
  if (at_floor == residuals.size()) return ScalingFit{true, 0.0};
  if (at_floor > 0) throw DomainError("fit_scaling_exponent: some residuals are at the numeric floor, others are not");
  const auto n = static_cast<double>(deltas.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw DomainError("fit_scaling_exponent: deltas must be positive");
    const double x = std::log(deltas[i]);
    const double y = std::log(std::abs(residuals[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw DomainError("fit_scaling_exponent: deltas must not all be equal");
  return ScalingFit{false, (n * sxy - sx * sy) / denom};
}

const std::vector<TestFunction>& default_panel() {
  static const std::vector<TestFunction> panel{
      {"cos(0.5x)", [](double x) { return std::cos(0.5 * x); }},
      {"cos(x)", [](double x) { return std::cos(x); }},
      {"cos(2x)", [](double x) { return std::cos(2.0 * x); }},
      {"1/(1+x^2)", [](double x) { return 1.0 / (1.0 + x * x); }},
      {"exp(-x^2)", [](double x) { return std::exp(-x * x); }},
  };
  return panel;
}

WeakMetrics weak_convergence_metrics(const MeasurementDistribution& dist, const QuadraturePdf& pdf,
                                     const std::vector<TestFunction>& panel) {
  WeakMetrics out;
  QuadraturePdf grid_pdf = pdf;
  out.ideal_mass = grid_pdf.mass();
  if (std::abs(1.0 - out.ideal_mass) > kIdealMassDeficit) {
    grid_pdf = widened(grid_pdf);
    out.ideal_mass = grid_pdf.mass();
    out.widened = true;
    if (std::abs(1.0 - out.ideal_mass) > kIdealMassDeficit) {
      std::ostringstream msg;
      msg << "weak_convergence_metrics: ideal grid holds mass " << out.ideal_mass << " even after widening";
      throw NumericError(msg.str());
    }
  }
  const std::vector<double> cdf = ideal_cdf(grid_pdf);
  double running = 0.0;
  for (const auto& p : dist.points) {
    const double ideal = interpolate_cdf(grid_pdf.grid, cdf, p.value);
    const double left = std::abs(running - ideal);
    running += p.probability;
    out.kolmogorov_distance = std::max({out.kolmogorov_distance, left, std::abs(running - ideal)});
  }
  std::vector<double> integrand(grid_pdf.grid.size());
  for (const auto& tf : panel) {
    for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] = tf.f(grid_pdf.grid[i]) * grid_pdf.values[i];
    out.gaps.push_back(std::abs(dist.expectation(tf.f) - trapezoid(grid_pdf.grid, integrand)));
  }
  return out;
}

std::vector<PolarizationRecord> polarization_bilinear_check(const PureState& phi, const PureState& psi,
                                                            const std::function<double(double)>& f,
                                                            const QuadratureSpec& spec,
                                                            const std::vector<double>& deltas, OutcomePath path) {
  spec.validate();
  require_deltas(deltas);
  require_same_basis(phi.basis(), psi.basis(), "polarization_bilinear_check");
  const TargetModeFrame frame = target_mode_frame(spec);

  // Ideal side: one grid that covers both states.
  const Eigen::MatrixXcd rp = reduced_cross_operator(phi, phi, frame) / std::pow(phi.norm(), 2);
  const Eigen::MatrixXcd rs = reduced_cross_operator(psi, psi, frame) / std::pow(psi.norm(), 2);
  const std::vector<double> grid = default_grid(0.5 * (rp + rs), frame.scale);
  const std::vector<Complex> cross = cross_pdf_values(reduced_cross_operator(phi, psi, frame), frame.scale, grid);
  std::vector<Complex> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) integrand[i] = f(grid[i]) * cross[i];
  const Complex ideal = trapezoid(grid, integrand);

  std::vector<PureState> rho;
  Complex phase = 1.0;
  for (int j = 0; j < 4; ++j) {
    rho.push_back(phi + phase * psi);
    phase *= Complex(0.0, 1.0);
  }
  const OutcomePath resolved = resolve_path(path, spec);
  std::vector<PolarizationRecord> out;
  for (double delta : deltas) {
    const QuadratureSpec sd = spec.with_delta(delta);
    std::optional<HermitianSpectrum> spectrum;
    if (resolved == OutcomePath::spectral) spectrum.emplace(build_q_delta(phi.basis_ptr(), sd).matrix);
    Complex sum = 0.0;
    Complex weight = 1.0;
    for (int j = 0; j < 4; ++j) {
      const MeasurementDistribution d = resolved == OutcomePath::lattice
                                            ? lattice_distribution(rho[static_cast<std::size_t>(j)], sd)
                                            : spectral_distribution(*spectrum, rho[static_cast<std::size_t>(j)]);
      sum += weight * d.expectation(f);
      weight *= Complex(0.0, -1.0);
    }
    PolarizationRecord rec;
    rec.delta = delta;
    rec.measured = 0.25 * sum;
    rec.ideal = ideal;
    rec.gap = std::abs(rec.measured - ideal);
    out.push_back(rec);
  }
  return out;
}

ConvergenceReport analyze_convergence(const DensityOperator& state, const QuadratureSpec& spec,
                                      const std::vector<double>& deltas, const AnalysisOptions& options,
                                      const DistributionSink& sink, QuadraturePdf* ideal) {
  ConvergenceReport report;
  report.spec = spec;
  const OutcomePath resolved = resolve_path(options.path, spec);
  report.outcome_path = path_name(resolved);

  std::vector<MeasurementDistribution> spectral;
  auto keep = [&](double, const MeasurementDistribution& d) {
    if (resolved == OutcomePath::spectral) spectral.push_back(d);
  };
  report.records = moment_sweep(state, spec, deltas, options.max_order, OutcomePath::spectral, keep);

  bool first = true, second = true;
  for (const auto& rec : report.records) {
    first = first && std::abs(rec.mean - rec.ideal_mean) <= kFirstMomentTolerance;
    const double excess = rec.variance - rec.ideal_variance;
    if (rec.predicted_bias == 0.0) {
      second = second && std::abs(excess) <= kSecondMomentAbsolute;
    } else {
      second = second && std::abs(excess - rec.predicted_bias) <= kSecondMomentRelative * std::abs(rec.predicted_bias);
    }
  }
  report.flags["first_moment_identity"] = first;
  report.flags["second_moment_bias"] = second;

  if (report.records.size() >= 3) {
    for (int n = 3; n <= options.max_order; ++n) {
      std::vector<double> ds, rs;
      for (const auto& rec : report.records) {
        const MomentRecord& m = rec.moments[static_cast<std::size_t>(n - 1)];
        if (m.contaminated) continue;
        ds.push_back(rec.delta);
        rs.push_back(m.residual);
      }
      if (ds.size() < 3) continue;
      const ScalingFit fit = fit_scaling_exponent(ds, rs);
      report.exponents[n] = fit;
      report.flags["scaling_order_" + std::to_string(n)] = fit.exact || (fit.exponent >= 1.8 && fit.exponent <= 2.2);
    }
  }

  if (options.weak_metrics) {
    QuadraturePdf pdf = ideal_pdf(state, spec, options.grid);
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      DeltaRecord& rec = report.records[i];
      const QuadratureSpec sd = spec.with_delta(rec.delta);
      const MeasurementDistribution dist =
          resolved == OutcomePath::spectral ? spectral[i] : lattice_distribution(state, sd);
      if (sink) sink(rec.delta, dist);
      const WeakMetrics m = weak_convergence_metrics(dist, pdf);
      if (m.widened) pdf = widened(pdf);
      rec.kolmogorov_distance = m.kolmogorov_distance;
      rec.panel_gaps = m.gaps;
      if (resolved == OutcomePath::lattice) rec.truncation_tail = std::max(rec.truncation_tail, dist.truncation_tail);
    }
    bool monotone = true;
    bool ratio = true;
    for (std::size_t i = 1; i < report.records.size(); ++i) {
      monotone = monotone && *report.records[i].kolmogorov_distance <=
                                 *report.records[i - 1].kolmogorov_distance + kMonotoneSlack;
    }
    if (report.records.size() >= 2) {
      const auto& a = report.records.front().panel_gaps;
      const auto& b = report.records.back().panel_gaps;
      for (std::size_t k = 0; k < a.size(); ++k) ratio = ratio && b[k] <= a[k] / 5.0;
    }
    report.flags["kolmogorov_nonincreasing"] = monotone;
    report.flags["panel_gap_ratio"] = ratio;
    if (ideal) *ideal = pdf;
  } else if (sink) {
    for (std::size_t i = 0; i < report.records.size(); ++i) {
      const double delta = report.records[i].delta;
      if (resolved == OutcomePath::spectral) {
        sink(delta, spectral[i]);
      } else {
        sink(delta, lattice_distribution(state, spec.with_delta(delta)));
      }
    }
  }
  return report;
}

}  // namespace bbp
