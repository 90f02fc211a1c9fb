#include <cmath>
#include <vector>

#include "doctest.h"

#include "bbp/convergence.hpp"
#include "bbp/error.hpp"

using namespace bbp;

namespace {

const QuadratureSpec kSpec{{Complex(0.0, 1.0 / std::sqrt(2.0))}, {1.3}, 0.2};
const std::vector<double> kSweep{0.2, 0.1, 0.05, 0.025};

StateSpec cat(double g) { return StateSpec::superposition({{1.0, {g}}, {1.0, {-g}}}); }

}  // namespace

TEST_CASE("scaling exponent fit") {
  const std::vector<double> d{0.2, 0.1, 0.05, 0.025};
  std::vector<double> r2, r3;
  for (double x : d) {
    r2.push_back(0.7 * x * x);
    r3.push_back(-1.9 * x * x * x);
  }
  CHECK(std::abs(fit_scaling_exponent(d, r2).exponent - 2.0) < 1e-6);
  CHECK(std::abs(fit_scaling_exponent(d, r3).exponent - 3.0) < 1e-6);
  CHECK(fit_scaling_exponent(d, {0.0, 1e-14, -1e-13, 0.0}).exact);
  CHECK_THROWS_AS(fit_scaling_exponent(d, {1e-3, 1e-4, 0.0, 1e-5}), DomainError);
  CHECK_THROWS_AS(fit_scaling_exponent({0.2, 0.1}, {1.0, 0.5}), DomainError);
}

TEST_CASE("moment sweep identities") {
  auto basis = build_basis(2, 30);
  auto rho = build_state(basis, StateSpec::coherent({2.0}));
  auto records = moment_sweep(rho, kSpec, kSweep, 4);
  REQUIRE(records.size() == 4);
  std::vector<double> r2;
  for (const auto& rec : records) {
    CHECK(std::abs(rec.moments[0].residual) < 1e-9);
    CHECK(std::abs(rec.moments[1].residual - rec.predicted_bias) < 1e-8 * rec.predicted_bias);
    CHECK(std::abs(rec.moments[1].distribution - rec.moments[1].operator_value) < 1e-8);
    CHECK(rec.predicted_bias == doctest::Approx(rec.delta * rec.delta * 1.69 * 4.0).epsilon(1e-9));
    r2.push_back(rec.moments[1].residual);
  }
  CHECK(std::abs(fit_scaling_exponent(kSweep, r2).exponent - 2.0) < 0.01);
  CHECK(std::abs(records[2].predicted_bias - 0.0169) < 1e-12);

  CHECK_THROWS_AS(moment_sweep(rho, kSpec, {0.1, 0.2}, 2), DomainError);
  CHECK_THROWS_AS(moment_sweep(rho, kSpec, {0.1, 0.1}, 2), DomainError);
  CHECK_THROWS_AS(moment_sweep(rho, kSpec, kSweep, 7), DomainError);
}

TEST_CASE("third-moment residual against the normal-ordering closed form") {
  // r_3 = delta^2 omega^2 <n q + q n + a^dagger q a>; for a coherent state this is
  // delta^2 omega^2 (3|gamma|^2 + 1) <q>.
  auto basis = build_basis(2, 30);
  const Complex gamma = 1.0;
  auto rho = build_state(basis, StateSpec::coherent({gamma}));
  auto records = moment_sweep(rho, kSpec, {0.2, 0.1, 0.05}, 3);
  const double q_mean = std::sqrt(2.0) * gamma.real();
  const double coeff = 1.69 * (3.0 * std::norm(gamma) + 1.0) * q_mean;
  std::vector<double> ratios;
  for (const auto& rec : records) {
    const double ratio = rec.moments[2].residual / (rec.delta * rec.delta);
    CHECK(std::abs(ratio - coeff) < 1e-8 * coeff);
    ratios.push_back(ratio);
  }
  for (double r : ratios) CHECK(std::abs(r / ratios.front() - 1.0) < 0.05);

  // Same coefficient by operator algebra on a state without a closed form.
  auto cat_rho = build_state(basis, cat(1.2));
  const QuadratureSpec p_spec{{Complex(0.4, 0.3)}, {0.8}, 0.2};
  auto q = quadrature_operator(basis, p_spec.alpha);
  auto a = annihilation_matrix(basis, 0);
  auto n = number_matrix(basis, 0);
  const OperatorMatrix sym = n * q + q * n + a.adjoint() * q * a;
  const double oracle = 0.64 * expectation(sym, cat_rho).real();
  for (const auto& rec : moment_sweep(cat_rho, p_spec, {0.2, 0.1, 0.05}, 3)) {
    CHECK(std::abs(rec.moments[2].residual / (rec.delta * rec.delta) - oracle) < 1e-7 * std::max(1.0, std::abs(oracle)));
  }
}

TEST_CASE("panel") {
  const auto& panel = default_panel();
  REQUIRE(panel.size() == 5);
  CHECK(panel[0].name == "cos(0.5x)");
  CHECK(panel[3].f(2.0) == doctest::Approx(0.2));
  CHECK(panel[4].f(1.0) == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("weak convergence metrics") {
  auto basis = build_basis(2, 30);
  auto rho = build_state(basis, StateSpec::coherent({1.0}));
  auto pdf = ideal_pdf(rho, kSpec);
  std::vector<double> prev;
  for (double delta : {0.2, 0.1}) {
    auto dist = outcome_distribution(rho, kSpec.with_delta(delta));
    auto m = weak_convergence_metrics(dist, pdf);
    CHECK(m.kolmogorov_distance >= 0.0);
    CHECK(m.kolmogorov_distance <= 1.0);
    for (double g : m.gaps) CHECK(g <= 2.0);
    for (std::size_t k = 0; k < prev.size(); ++k) CHECK(m.gaps[k] < prev[k]);
    prev = m.gaps;
  }

  // A distribution sitting on the grid is within one step of the ideal CDF.
  MeasurementDistribution fine;
  const auto cdf = ideal_cdf(pdf);
  double step = 0.0;
  for (std::size_t i = 1; i < pdf.grid.size(); ++i) {
    fine.points.push_back({pdf.grid[i], cdf[i] - cdf[i - 1]});
    step = std::max(step, cdf[i] - cdf[i - 1]);
  }
  CHECK(weak_convergence_metrics(fine, pdf).kolmogorov_distance <= step + 1e-12);
}

TEST_CASE("polarization check") {
  auto basis = build_basis(2, 30);
  auto phi = build_pure_state(basis, StateSpec::coherent({1.0})).state;
  auto psi = build_pure_state(basis, StateSpec::coherent({-1.0})).state;
  auto one = polarization_bilinear_check(phi, psi, [](double) { return 1.0; }, kSpec, kSweep);
  for (const auto& r : one) CHECK(std::abs(r.measured - std::exp(-2.0)) < 1e-9);

  auto cos_gap = polarization_bilinear_check(phi, psi, [](double x) { return std::cos(x); }, kSpec, kSweep);
  for (std::size_t i = 1; i < cos_gap.size(); ++i) CHECK(cos_gap[i].gap < cos_gap[i - 1].gap);

  // phi = psi reduces to the diagonal expectation.
  auto diag = polarization_bilinear_check(phi, phi, [](double x) { return std::cos(x); }, kSpec, {0.1});
  auto rho = DensityOperator::pure(phi);
  auto dist = outcome_distribution(rho, kSpec.with_delta(0.1));
  CHECK(std::abs(diag[0].measured - dist.expectation([](double x) { return std::cos(x); })) < 1e-12);
  CHECK(std::abs(diag[0].measured.imag()) < 1e-12);
}

TEST_CASE("full analysis flags on a coherent state") {
  auto basis = build_basis(2, 30);
  auto rho = build_state(basis, StateSpec::coherent({1.0}));
  std::vector<double> seen;
  QuadraturePdf pdf;
  auto report = analyze_convergence(rho, kSpec, kSweep, AnalysisOptions{}, [&](double d, const MeasurementDistribution&) { seen.push_back(d); }, &pdf);
  CHECK(seen == kSweep);
  CHECK(report.outcome_path == "lattice");
  CHECK(pdf.grid.size() == static_cast<std::size_t>(kDefaultGridPoints));
  for (const auto& [name, ok] : report.flags) {
    INFO(name);
    CHECK(ok);
  }
  CHECK(report.exponents.at(3).exponent == doctest::Approx(2.0).epsilon(0.01));
  for (const auto& rec : report.records) CHECK(rec.kolmogorov_distance.has_value());
}

TEST_CASE("path resolution") {
  CHECK(resolve_path(OutcomePath::automatic, kSpec) == OutcomePath::lattice);
  const QuadratureSpec two{{0.5, 0.5}, {1.0, 1.0}, 0.1};
  CHECK(resolve_path(OutcomePath::automatic, two) == OutcomePath::spectral);
  CHECK(std::string(path_name(OutcomePath::spectral)) == "spectral");
}
