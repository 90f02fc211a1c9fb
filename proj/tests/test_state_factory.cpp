#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"

#include "bbp/error.hpp"
#include "bbp/spectral.hpp"
#include "bbp/state_factory.hpp"

using namespace bbp;

namespace {

std::vector<std::string> captured;
void capture(const std::string& m) { captured.push_back(m); }

// Single-mode coherent coefficient from the Fock expansion, no truncation.
Complex coherent_coeff(Complex g, int n) {
  return std::exp(-0.5 * std::norm(g)) * std::pow(g, n) / std::sqrt(std::tgamma(n + 1.0));
}

Eigen::VectorXcd fock_vector(const BasisPtr& basis, std::vector<int> occ) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  v[static_cast<Eigen::Index>(basis->index_of(occ))] = 1.0;
  return v;
}

// Largest entry of A - B on rows and columns with at most `max_total` photons.
double low_shell_defect(const BasisPtr& basis, const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, int max_total) {
  double worst = 0.0;
  for (std::size_t r = 0; r < basis->size(); ++r) {
    if (basis->total_photons(r) > max_total) continue;
    for (std::size_t c = 0; c < basis->size(); ++c) {
      if (basis->total_photons(c) > max_total) continue;
      const auto i = static_cast<Eigen::Index>(r), j = static_cast<Eigen::Index>(c);
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("coherent state construction") {
  auto basis = build_basis(1, 30);
  const Complex zero[1] = {0.0};
  auto vac = coherent_amplitudes_to_state(basis, zero);
  CHECK(vac.state.amplitude(0) == Complex(1.0));
  CHECK(vac.state.amplitudes().tail(30).norm() == 0.0);

  const Complex one[1] = {1.0};
  auto c1 = coherent_amplitudes_to_state(basis, one);
  CHECK(std::abs(c1.state.amplitude(0) - 0.6065306597126334) < 1e-12);
  CHECK(c1.discarded_mass < 1e-20);

  const Complex g[1] = {Complex(1.2, -0.7)};
  auto cg = coherent_amplitudes_to_state(basis, g);
  for (int n = 0; n <= 30; ++n) CHECK(std::abs(cg.state.amplitude(static_cast<std::size_t>(n)) - coherent_coeff(g[0], n)) < 1e-12);

  const Complex bad[2] = {1.0, 1.0};
  CHECK_THROWS_AS(coherent_amplitudes_to_state(basis, bad), DomainError);

  auto small = build_basis(1, 10);
  const Complex big[1] = {6.0};
  CHECK_THROWS_AS(coherent_amplitudes_to_state(small, big), TruncationError);
  captured.clear();
  auto prev = set_warning_sink(capture);
  const Complex mid[1] = {1.5};
  coherent_amplitudes_to_state(small, mid);
  set_warning_sink(prev);
  CHECK(captured.size() == 1);
}

TEST_CASE("coherent overlap formula") {
  const Complex beta[1] = {Complex(0.0, 1.0)};
  const Complex alpha[1] = {1.0};
  const Complex o = coherent_overlap(beta, alpha);
  CHECK(std::abs(o - std::exp(Complex(-1.0, -1.0))) < 1e-15);
  CHECK(std::abs(o) == doctest::Approx(std::exp(-1.0)));

  auto basis = build_basis(1, 30);
  const std::vector<Complex> gammas{0.0, 1.0, Complex(0.0, 2.0), Complex(-1.3, 0.9), Complex(1.4, 1.4)};
  for (Complex a : gammas) {
    for (Complex b : gammas) {
      if (std::abs(a) > 2.0 || std::abs(b) > 2.0) continue;
      auto sa = coherent_amplitudes_to_state(basis, std::span<const Complex>(&a, 1)).state;
      auto sb = coherent_amplitudes_to_state(basis, std::span<const Complex>(&b, 1)).state;
      CHECK(std::abs(sb.inner(sa) - coherent_overlap(std::span<const Complex>(&b, 1), std::span<const Complex>(&a, 1))) < 1e-8);
    }
  }
}

TEST_CASE("displacement matrix") {
  auto basis = build_basis(1, 30);
  const Complex beta(0.0, 1.0);
  auto d = displacement_matrix(basis, 0, beta);
  const Eigen::MatrixXcd dm = d.dense();

  auto coh = coherent_amplitudes_to_state(basis, std::span<const Complex>(&beta, 1)).state;
  const Eigen::VectorXcd out = dm.col(0);
  CHECK(std::abs(out[0] - std::exp(-0.5)) < 1e-12);
  CHECK((out - coh.amplitudes()).norm() < 1e-8);

  // D_beta |alpha> = exp(i Im(alpha^* beta)) |alpha + beta>
  const Complex alpha = 1.0, sum = alpha + beta;
  auto a = coherent_amplitudes_to_state(basis, std::span<const Complex>(&alpha, 1)).state;
  auto s = coherent_amplitudes_to_state(basis, std::span<const Complex>(&sum, 1)).state;
  const Eigen::VectorXcd moved = dm * a.amplitudes();
  CHECK((moved - std::exp(Complex(0.0, 1.0)) * s.amplitudes()).norm() < 1e-8);

  // D_{-beta} = D_beta^dagger and unitarity on low shells.
  const Eigen::MatrixXcd dminus = displacement_matrix(basis, 0, -beta).dense();
  CHECK(low_shell_defect(basis, dminus, dm.adjoint(), 30) < 1e-12);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(31, 31);
  CHECK(low_shell_defect(basis, dm.adjoint() * dm, id, 10) < 1e-8);

  // D_{-b} a D_b = a + b away from the cutoff. The truncated generator's edge
  // defect leaks downward; at N_max = 30 it stays below 1e-8 up to shell 18.
  const Complex b = 0.5;
  const Eigen::MatrixXcd db = displacement_matrix(basis, 0, b).dense();
  const Eigen::MatrixXcd dmb = displacement_matrix(basis, 0, -b).dense();
  const Eigen::MatrixXcd lhs = dmb * annihilation_matrix(basis, 0).dense() * db;
  const Eigen::MatrixXcd rhs = annihilation_matrix(basis, 0).dense() + b * id;
  CHECK(low_shell_defect(basis, lhs, rhs, 18) < 1e-8);
}

TEST_CASE("displacement composition phase") {
  auto basis = build_basis(1, 40);
  const Complex a(0.6, 0.2), b(-0.3, 0.8);
  const Eigen::MatrixXcd prod = displacement_matrix(basis, 0, -a - b).dense() * displacement_matrix(basis, 0, b).dense() *
                                displacement_matrix(basis, 0, a).dense();
  const Complex phase = std::exp(Complex(0.0, std::imag(std::conj(a) * b)));
  CHECK(low_shell_defect(basis, prod, phase * Eigen::MatrixXcd::Identity(41, 41), 8) < 1e-8);
}

TEST_CASE("displacement acts on one mode of a multimode basis") {
  auto basis = build_basis(2, 20);
  const Complex beta(0.4, -0.3);
  const Eigen::VectorXcd v = displacement_matrix(basis, 1, beta).apply(fock_vector(basis, {0, 0}));
  const Complex amps[2] = {0.0, beta};
  CHECK((v - coherent_amplitudes_to_state(basis, amps).state.amplitudes()).norm() < 1e-10);
}

TEST_CASE("build_state examples") {
  auto basis = build_basis(2, 30);
  auto f = build_state(basis, StateSpec::fock({2}));
  const Eigen::MatrixXcd m = f.matrix();
  const auto i = static_cast<Eigen::Index>(basis->index_of(std::vector<int>{2, 0}));
  CHECK(m(i, i) == Complex(1.0));
  CHECK(m.cwiseAbs().sum() == doctest::Approx(1.0));

  // Even cat via the overlap-matrix normalization 2(1 + e^-8).
  auto cat = build_pure_state(basis, StateSpec::superposition({{1.0, {2.0}}, {1.0, {-2.0}}})).state;
  const double norm = std::sqrt(2.0 * (1.0 + std::exp(-8.0)));
  for (int n = 0; n <= 12; ++n) {
    const Complex expect = (coherent_coeff(2.0, n) + coherent_coeff(-2.0, n)) / norm;
    CHECK(std::abs(cat.amplitude(basis->index_of(std::vector<int>{n, 0})) - expect) < 1e-10);
  }
  CHECK(std::abs(cat.norm() - 1.0) < 1e-10);

  auto two = build_basis(4, 16);
  auto prod = build_state(two, StateSpec::coherent({1.0, Complex(0.0, 1.0)}));
  const double n_total = expectation(number_matrix(two, 0), prod).real() + expectation(number_matrix(two, 1), prod).real();
  CHECK(n_total == doctest::Approx(2.0).epsilon(1e-6));

  auto product = build_state(two, StateSpec::product({StateSpec::coherent({1.0}), StateSpec::fock({1})}));
  CHECK(expectation(number_matrix(two, 1), product).real() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(product.occupied_mass(std::vector<int>{2, 3}) == 0.0);
}

TEST_CASE("build_state rejects photons in LO modes and bad specs") {
  auto basis = build_basis(2, 10);
  CHECK_THROWS_AS(build_state(basis, StateSpec::fock({0, 1})), DomainError);
  CHECK_THROWS_AS(build_state(basis, StateSpec::coherent({0.0, 1.0})), DomainError);
  CHECK_THROWS_AS(build_state(basis, StateSpec::superposition({{0.0, {1.0}}})), DomainError);
  CHECK_THROWS_AS(build_state(basis, StateSpec::fock({-1})), DomainError);
  CHECK_THROWS_AS(build_state(basis, StateSpec::fock({11})), TruncationError);
  CHECK_THROWS_AS(build_state(build_basis(3, 4), StateSpec::vacuum()), DomainError);
}

TEST_CASE("constructed states are normalized density operators") {
  auto basis = build_basis(4, 8);
  const std::vector<StateSpec> specs{StateSpec::vacuum(), StateSpec::fock({1, 2}),
                                     StateSpec::coherent({0.5, Complex(0.0, -0.4)}),
                                     StateSpec::superposition({{1.0, {0.6, 0.0}}, {Complex(0.0, 1.0), {0.0, 0.6}}})};
  for (const auto& s : specs) {
    auto rho = build_state(basis, s).matrix();
    CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
    CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(rho).eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("signal mode count") {
  CHECK(signal_mode_count(*build_basis(1, 3)) == 1);
  CHECK(signal_mode_count(*build_basis(4, 3)) == 2);
  CHECK_THROWS_AS(signal_mode_count(*build_basis(3, 3)), DomainError);
}
