#include <cmath>
#include <vector>

#include "doctest.h"

#include "bbp/bbp_measurement.hpp"
#include "bbp/error.hpp"

using namespace bbp;

namespace {

const double r2 = std::sqrt(2.0);
const Complex kAlpha(0.0, 1.0 / std::sqrt(2.0));

double variance_of(const MeasurementDistribution& d) { return d.variance(); }

// Poisson-difference pmf through the modified Bessel function.
double skellam_pmf(int k, double mu1, double mu2) {
  return std::exp(-(mu1 + mu2)) * std::pow(mu1 / mu2, k / 2.0) * std::cyl_bessel_i(std::abs(k), 2.0 * std::sqrt(mu1 * mu2));
}

double probability_at(const MeasurementDistribution& d, double x, double tol = 1e-7) {
  double p = 0.0;
  for (const auto& pt : d.points) {
    if (std::abs(pt.value - x) <= tol) p += pt.probability;
  }
  return p;
}

}  // namespace

TEST_CASE("q_delta structure") {
  auto basis = build_basis(4, 5);
  const QuadratureSpec spec{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.3};
  auto op = build_q_delta(basis, spec);
  CHECK(op.matrix.hermitian());
  CHECK(max_abs_difference(op.matrix, op.quadrature + spec.delta * op.coupling) < 1e-15);
  auto q0 = build_q_delta(basis, spec.with_delta(0.0));
  CHECK(max_abs_difference(q0.matrix, op.quadrature) == 0.0);

  const Eigen::MatrixXcd c = op.coupling.dense();
  for (std::size_t r = 0; r < basis->size(); ++r) {
    for (std::size_t s = 0; s < basis->size(); ++s) {
      if (basis->total_photons(r) != basis->total_photons(s)) {
        CHECK(c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) == Complex(0.0));
      }
    }
  }

  auto single = build_basis(2, 4);
  const double w[1] = {1.7};
  auto cpl = coupling_operator(single, w);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(single->size()));
  v[static_cast<Eigen::Index>(single->index_of(std::vector<int>{1, 0}))] = 1.0;
  const Eigen::VectorXcd out = cpl.apply(v);
  CHECK(std::abs(out[static_cast<Eigen::Index>(single->index_of(std::vector<int>{0, 1}))] - 1.7) < 1e-15);
  CHECK(std::abs(out.norm() - 1.7) < 1e-15);

  CHECK_THROWS_AS(build_q_delta(basis, spec.with_delta(-0.1)), DomainError);
  CHECK_THROWS_AS(build_q_delta(build_basis(3, 3), spec), BasisMismatch);
}

TEST_CASE("vacuum second moment is one half for every delta") {
  auto basis = build_basis(2, 20);
  auto vac = build_state(basis, StateSpec::vacuum());
  for (double delta : {0.0, 0.05, 0.3, 1.0}) {
    auto op = build_q_delta(basis, QuadratureSpec{{kAlpha}, {1.0}, delta});
    CHECK(std::abs(operator_moment(op.matrix, vac, 2).value - 0.5) < 1e-12);
  }
}

TEST_CASE("bbp distribution moments") {
  auto basis = build_basis(2, 30);
  const Complex gamma(0.8, -0.4);
  auto rho = build_state(basis, StateSpec::coherent({gamma}));
  for (double delta : {0.2, 0.05}) {
    const QuadratureSpec spec{{kAlpha}, {1.3}, delta};
    auto d = bbp_distribution(rho, build_q_delta(basis, spec));
    CHECK(std::abs(d.total_probability() - 1.0) < 1e-10);
    CHECK(std::abs(d.mean() - r2 * gamma.real()) < 1e-9);
    const double ideal_var = 0.5;
    const double excess = variance_of(d) - ideal_var;
    CHECK(std::abs(excess - delta * delta * 1.69 * std::norm(gamma)) <= 1e-8 * delta * delta * 1.69 * std::norm(gamma));
  }
  auto vac = bbp_distribution(build_state(basis, StateSpec::vacuum()), build_q_delta(basis, QuadratureSpec{{kAlpha}, {1.0}, 0.1}));
  CHECK(std::abs(vac.mean()) < 1e-12);
}

TEST_CASE("bbp distribution rejects occupied LO modes") {
  auto basis = build_basis(2, 6);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  v[static_cast<Eigen::Index>(basis->index_of(std::vector<int>{0, 1}))] = 1.0;
  auto op = build_q_delta(basis, QuadratureSpec{{kAlpha}, {1.0}, 0.1});
  CHECK_THROWS_AS(bbp_distribution(DensityOperator::pure(PureState(basis, v)), op), DomainError);
}

TEST_CASE("explicit LO pipeline") {
  auto basis = build_basis(2, 25);
  const QuadratureSpec spec{{kAlpha}, {1.0}, 1.0};
  auto vac = explicit_lo_distribution(StateSpec::vacuum(), spec, basis);
  CHECK(std::abs(vac.total_probability() - 1.0) < 1e-9);
  for (const auto& pt : vac.points) {
    CHECK(std::abs(pt.value - std::round(pt.value)) < 1e-9);
    CHECK(std::abs(probability_at(vac, -pt.value) - pt.probability) < 1e-10);
  }

  const QuadratureSpec two{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 1.0};
  auto b4 = build_basis(4, 10);
  auto d = explicit_lo_distribution(StateSpec::coherent({0.3, 0.0}), two, b4);
  for (const auto& pt : d.points) CHECK(std::abs(pt.value - std::round(pt.value)) < 1e-9);

  CHECK_THROWS_AS(explicit_lo_distribution(StateSpec::vacuum(), spec.with_delta(0.1), basis), TruncationError);
}

TEST_CASE("explicit LO and displaced frame agree at delta = 1") {
  auto basis = build_basis(2, 25);
  const QuadratureSpec spec{{kAlpha}, {1.0}, 1.0};
  const StateSpec signal = StateSpec::coherent({0.5});
  auto a = bbp_distribution(build_state(basis, signal), build_q_delta(basis, spec));
  auto b = explicit_lo_distribution(signal, spec, basis);
  CHECK(total_variation(a, b, 1e-6) <= 1e-6);
}

TEST_CASE("skellam oracle") {
  const QuadratureSpec spec{{kAlpha}, {1.0}, 0.5};
  const Complex vac[1] = {0.0};
  auto d = skellam_oracle_distribution(vac, spec);
  const double mu = std::norm(lo_amplitude(spec)[0]) / 2.0;
  CHECK(std::abs(probability_at(d, 0.0) - std::exp(-2.0 * mu) * std::cyl_bessel_i(0, 2.0 * mu)) < 1e-12);
  for (int k = -6; k <= 6; ++k) CHECK(std::abs(probability_at(d, 0.5 * k) - skellam_pmf(k, mu, mu)) < 1e-12);
  CHECK(std::abs(d.total_probability() - 1.0) < 1e-10);

  const Complex g[1] = {Complex(0.7, 0.2)};
  const QuadratureSpec s2{{kAlpha}, {1.3}, 0.2};
  auto c = skellam_oracle_distribution(g, s2);
  CHECK(std::abs(c.mean() - r2 * g[0].real()) < 1e-9);
  CHECK(std::abs(c.variance() - 0.5 - 0.04 * 1.69 * std::norm(g[0])) < 1e-8);

  // Coherent signal: closed-form Poisson means behind the beamsplitter.
  const auto beta = lo_amplitude(s2);
  const double mc = std::norm(g[0] + beta[0]) / 2.0, md = std::norm(g[0] - beta[0]) / 2.0;
  for (int k = -3; k <= 3; ++k) CHECK(std::abs(probability_at(c, 0.26 * k) - skellam_pmf(k, mc, md)) < 1e-12);

  const QuadratureSpec two{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.3};
  const Complex g2[2] = {0.7, Complex(0.0, 0.3)};
  auto m = skellam_oracle_distribution(g2, two);
  CHECK(std::abs(m.total_probability() - 1.0) < 1e-10);
  double q_mean = 0.0;
  for (int k = 0; k < 2; ++k) q_mean += 2.0 * std::imag(two.alpha[static_cast<std::size_t>(k)] * std::conj(g2[k]));
  CHECK(std::abs(m.mean() - q_mean) < 1e-9);
}

TEST_CASE("three paths agree on coherent states") {
  auto basis = build_basis(2, 25);
  const QuadratureSpec spec{{kAlpha}, {1.0}, 1.0};
  const Complex g[1] = {0.5};
  const StateSpec signal = StateSpec::coherent({0.5});
  auto rho = build_state(basis, signal);
  auto sk = skellam_oracle_distribution(g, spec);
  CHECK(total_variation(bbp_distribution(rho, build_q_delta(basis, spec)), sk, 1e-6) <= 1e-6);
  CHECK(total_variation(explicit_lo_distribution(signal, spec, basis), sk, 1e-6) <= 1e-6);
  CHECK(total_variation(lattice_distribution(rho, spec), sk, 1e-6) <= 1e-6);
  CHECK(total_variation(lattice_distribution(rho, spec.with_delta(0.05)), skellam_oracle_distribution(g, spec.with_delta(0.05)), 1e-8) <= 1e-6);
}

TEST_CASE("displaced number amplitudes match the matrix exponential") {
  for (Complex mu : {Complex(0.3, 0.4), Complex(-2.0, 1.0), std::polar(6.0, 0.7)}) {
    const int rows = 120, cols = 12;
    auto basis = build_basis(1, rows + 60);
    const Eigen::MatrixXcd d = displacement_matrix(basis, 0, mu).dense();
    const Eigen::MatrixXcd g = displaced_number_amplitudes(mu, rows, cols);
    CHECK((d.topLeftCorner(rows, cols) - g).cwiseAbs().maxCoeff() < 1e-11);
  }
}

TEST_CASE("lattice law reproduces the Fock-state moments") {
  auto basis = build_basis(2, 30);
  for (const auto& s : {StateSpec::fock({1}), StateSpec::superposition({{1.0, {2.0}}, {1.0, {-2.0}}})}) {
    auto rho = build_state(basis, s);
    for (double delta : {0.2, 0.025}) {
      const QuadratureSpec spec{{kAlpha}, {1.3}, delta};
      auto lat = lattice_distribution(rho, spec);
      auto op = build_q_delta(basis, spec);
      CHECK(std::abs(lat.total_probability() - 1.0) < 1e-10);
      CHECK(std::abs(lat.mean() - operator_moment(op.quadrature, rho, 1).value) < 1e-9);
      CHECK(std::abs(lat.moment(2) - operator_moment(op.matrix, rho, 2).value) < 1e-8);
    }
  }
}

TEST_CASE("unit weights reproduce standard homodyne") {
  for (int modes : {1, 2}) {
    auto basis = build_basis(2 * modes, modes == 1 ? 12 : 6);
    const QuadratureSpec spec{modes == 1 ? std::vector<Complex>{kAlpha} : std::vector<Complex>{0.5, Complex(0.0, 0.5)},
                              std::vector<double>(static_cast<std::size_t>(modes), 1.0), 0.2};
    auto h = homodyne_operator(basis, spec);
    auto q = build_q_delta(basis, spec);
    CHECK(max_abs_difference(h, q.matrix) < 1e-12);
  }
}
