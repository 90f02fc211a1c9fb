#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "bbp/error.hpp"
#include "bbp/optics.hpp"
#include "bbp/spectral.hpp"
#include "bbp/state_factory.hpp"

using namespace bbp;

namespace {

const double r2 = std::sqrt(2.0);

Eigen::MatrixXcd random_unitary(int n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

Eigen::MatrixXcd embed(const GivensRotation& r, int n) {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(n, n);
  m.block(r.row - 1, r.row - 1, 2, 2) = r.matrix;
  return m;
}

}  // namespace

TEST_CASE("LO amplitude") {
  auto b1 = lo_amplitude(QuadratureSpec{{Complex(0.0, 1.0 / r2)}, {1.0}, 0.1});
  CHECK(std::abs(b1[0] - Complex(7.0710678118654755, 0.0)) < 1e-12);
  auto b2 = lo_amplitude(QuadratureSpec{{0.5, 0.5}, {1.0, 2.0}, 0.5});
  CHECK(std::abs(b2[0] - Complex(0.0, -1.0)) < 1e-15);
  CHECK(std::abs(b2[1] - Complex(0.0, -0.5)) < 1e-15);
  auto b3 = lo_amplitude(QuadratureSpec{{0.5, 0.5}, {1.0, 2.0}, 0.25});
  for (int k = 0; k < 2; ++k) CHECK(std::abs(b3[static_cast<std::size_t>(k)] - 2.0 * b2[static_cast<std::size_t>(k)]) < 1e-15);
  CHECK_THROWS_AS(lo_amplitude(QuadratureSpec{{0.5}, {1.0}, 0.0}), DomainError);
}

TEST_CASE("quadrature spec") {
  const QuadratureSpec s{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.1};
  CHECK(s.is_normalized());
  CHECK(s.scale() == doctest::Approx(1.0 / r2));
  CHECK_FALSE((QuadratureSpec{{1.0}, {1.0}, 0.1}).is_normalized());
  CHECK_THROWS_AS((QuadratureSpec{{0.0}, {1.0}, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS((QuadratureSpec{{1.0}, {-1.0}, 0.1}).validate(), DomainError);
  CHECK_THROWS_AS((QuadratureSpec{{1.0}, {1.0}, -0.1}).validate(), DomainError);
  CHECK_THROWS_AS((QuadratureSpec{{1.0, 1.0}, {1.0}, 0.1}).validate(), DomainError);
}

TEST_CASE("beamsplit coherent") {
  const Complex one[1] = {1.0};
  auto [c, d] = beamsplit_coherent(one, one);
  CHECK(std::abs(c[0] - r2) < 1e-15);
  CHECK(std::abs(d[0]) < 1e-15);

  const Complex zero[1] = {0.0};
  const Complex lo[1] = {Complex(3.0, -2.0)};
  auto [c2, d2] = beamsplit_coherent(zero, lo);
  CHECK(std::abs(c2[0] - lo[0] / r2) < 1e-15);
  CHECK(std::abs(d2[0] + lo[0] / r2) < 1e-15);

  const Complex a[2] = {Complex(0.3, 1.1), -2.0};
  const Complex b[2] = {Complex(-0.7, 0.2), Complex(0.0, 4.0)};
  auto [c3, d3] = beamsplit_coherent(a, b);
  double in = 0.0, out = 0.0;
  for (int k = 0; k < 2; ++k) {
    in += std::norm(a[k]) + std::norm(b[k]);
    out += std::norm(c3[static_cast<std::size_t>(k)]) + std::norm(d3[static_cast<std::size_t>(k)]);
  }
  CHECK(in == doctest::Approx(out));
  auto [a2, b2] = beamsplit_coherent(c3, d3);
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(a2[static_cast<std::size_t>(k)] - a[k]) < 1e-14);
    CHECK(std::abs(b2[static_cast<std::size_t>(k)] - b[k]) < 1e-14);
  }
  const Complex short_b[1] = {1.0};
  CHECK_THROWS_AS(beamsplit_coherent(a, short_b), DomainError);
}

TEST_CASE("target mode frame") {
  auto f1 = target_mode_frame(QuadratureSpec{{Complex(0.0, 1.0 / r2)}, {1.0}, 0.1});
  CHECK(std::abs(f1.w[0] - 1.0) < 1e-15);
  CHECK(std::abs(f1.completion(0, 0) - 1.0) < 1e-15);

  auto f2 = target_mode_frame(QuadratureSpec{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.1});
  CHECK(std::abs(f2.w[0] - Complex(0.0, 1.0 / r2)) < 1e-15);
  CHECK(std::abs(f2.w[1] - Complex(1.0 / r2, 0.0)) < 1e-15);
  const Eigen::MatrixXcd u2 = f2.completion;
  CHECK((u2 * u2.adjoint() - Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  // Independent Gram-Schmidt oracle: the completion rows span the orthogonal complement of w.
  const QuadratureSpec s3{{Complex(0.2, -0.5), 0.9, Complex(0.0, 0.3), Complex(-0.4, 0.4)}, {1, 1, 1, 1}, 0.1};
  auto f3 = target_mode_frame(s3);
  CHECK(f3.w.norm() == doctest::Approx(1.0));
  const Eigen::MatrixXcd u = f3.completion;
  CHECK((u * u.adjoint() - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((u.row(0).transpose() - f3.w).norm() < 1e-15);
  for (int k = 0; k < 4; ++k) {
    const Complex expect = Complex(0.0, 1.0) * std::conj(s3.alpha[static_cast<std::size_t>(k)]) / s3.scale();
    CHECK(std::abs(f3.w[k] - expect) < 1e-15);
  }

  CHECK_THROWS_AS(target_mode_frame(QuadratureSpec{{0.0, 0.0}, {1, 1}, 0.1}), DomainError);
}

TEST_CASE("quadrature equals the scaled x quadrature of the target mode") {
  auto basis = build_basis(4, 5);
  const QuadratureSpec spec{{Complex(0.3, 0.1), Complex(-0.2, 0.6)}, {1.0, 2.0}, 0.1};
  const auto frame = target_mode_frame(spec);
  auto q = quadrature_operator(basis, spec.alpha);
  OperatorMatrix b = frame.w[0] * annihilation_matrix(basis, 0) + frame.w[1] * annihilation_matrix(basis, 1);
  auto x = frame.scale * (b + b.adjoint());
  CHECK(max_abs_difference(q, x, 4) < 1e-10);
  CHECK(q.hermitian());
}

TEST_CASE("givens decomposition reconstructs the unitary") {
  for (int n : {2, 3, 5}) {
    const Eigen::MatrixXcd t = random_unitary(n, static_cast<unsigned>(n));
    const auto dec = givens_decompose(t);
    Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Identity(n, n);
    for (const auto& r : dec.rotations) rebuilt = rebuilt * embed(r, n).adjoint();
    rebuilt = rebuilt * dec.phases.asDiagonal();
    CHECK((rebuilt - t).cwiseAbs().maxCoeff() < 1e-12);
    for (const auto& r : dec.rotations) {
      CHECK((r.matrix * r.matrix.adjoint() - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("two-mode beamsplitter on two photons") {
  auto basis = build_basis(2, 3);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  v[static_cast<Eigen::Index>(basis->index_of(std::vector<int>{1, 1}))] = 1.0;
  Eigen::Matrix2cd bs;
  bs << 1.0 / r2, 1.0 / r2, 1.0 / r2, -1.0 / r2;
  const Eigen::VectorXcd out = apply_two_mode_map(*basis, v, bs, 0, 1);
  CHECK(std::abs(out[static_cast<Eigen::Index>(basis->index_of(std::vector<int>{2, 0}))] - 1.0 / r2) < 1e-15);
  CHECK(std::abs(out[static_cast<Eigen::Index>(basis->index_of(std::vector<int>{0, 2}))] + 1.0 / r2) < 1e-15);
  CHECK(std::abs(out[static_cast<Eigen::Index>(basis->index_of(std::vector<int>{1, 1}))]) < 1e-15);
  CHECK(out.norm() == doctest::Approx(1.0));
}

TEST_CASE("mode unitaries map product coherent states exactly") {
  auto basis = build_basis(3, 6);
  const Eigen::MatrixXcd g = random_unitary(3, 42);
  const std::vector<Complex> gamma{Complex(0.4, -0.2), 0.3, Complex(0.0, 0.5)};
  std::vector<Complex> moved(3, 0.0);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) moved[static_cast<std::size_t>(i)] += g(i, k) * gamma[static_cast<std::size_t>(k)];
  }
  const int modes[3] = {0, 1, 2};
  const auto in = coherent_amplitudes_to_state(basis, gamma).state;
  const auto expect = coherent_amplitudes_to_state(basis, moved).state;
  const Eigen::VectorXcd out = apply_mode_unitary(*basis, in.amplitudes(), g, modes);
  CHECK((out - expect.amplitudes()).norm() < 1e-12);
}

TEST_CASE("rotate to target mode") {
  auto basis = build_basis(4, 12);
  const QuadratureSpec spec{{0.5, Complex(0.0, 0.5)}, {1.0, 2.0}, 0.1};
  const auto frame = target_mode_frame(spec);
  const std::vector<Complex> gamma{0.7, Complex(0.0, 0.3)};
  auto reduced = rotate_to_target_mode(build_state(basis, StateSpec::coherent(gamma)), frame);
  const Complex target = frame.w[0] * gamma[0] + frame.w[1] * gamma[1];
  auto single = build_basis(1, 12);
  auto coh = coherent_amplitudes_to_state(single, std::span<const Complex>(&target, 1)).state;
  const Eigen::VectorXcd v = coh.amplitudes();
  CHECK((v.adjoint() * reduced.matrix() * v)(0, 0).real() >= 1.0 - 1e-8);

  auto one = build_basis(2, 8);
  const QuadratureSpec s1{{Complex(0.0, 1.0 / r2)}, {1.0}, 0.1};
  auto fock = build_state(one, StateSpec::fock({3}));
  auto r1 = rotate_to_target_mode(fock, target_mode_frame(s1));
  CHECK(std::abs(r1.matrix()(3, 3) - 1.0) < 1e-14);

  // One photon in the second mode, w = (1/sqrt2, 1/sqrt2).
  auto two = build_basis(4, 4);
  const QuadratureSpec half{{Complex(0.0, 0.5), Complex(0.0, 0.5)}, {1.0, 1.0}, 0.1};
  auto rh = rotate_to_target_mode(build_state(two, StateSpec::fock({0, 1})), target_mode_frame(half)).matrix();
  CHECK(std::abs(rh(0, 0) - 0.5) < 1e-14);
  CHECK(std::abs(rh(1, 1) - 0.5) < 1e-14);
  CHECK(std::abs(rh(0, 1)) < 1e-14);

  Eigen::VectorXcd lo = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(two->size()));
  lo[static_cast<Eigen::Index>(two->index_of(std::vector<int>{0, 0, 1, 0}))] = 1.0;
  auto bad = DensityOperator::pure(PureState(two, lo));
  CHECK(lo_occupied_mass(bad) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rotate_to_target_mode(bad, target_mode_frame(half)), DomainError);
}

TEST_CASE("rotation preserves photon number and quadrature moments") {
  auto basis = build_basis(4, 14);
  const QuadratureSpec spec{{Complex(0.3, 0.1), Complex(-0.2, 0.6)}, {1.0, 2.0}, 0.1};
  const auto frame = target_mode_frame(spec);
  const auto rho = build_state(basis, StateSpec::product({StateSpec::coherent({Complex(0.5, 0.2)}), StateSpec::fock({1})}));
  auto reduced = rotate_to_target_mode(rho, frame);
  auto single = reduced.basis_ptr();
  OperatorMatrix b = frame.w[0] * annihilation_matrix(basis, 0) + frame.w[1] * annihilation_matrix(basis, 1);
  const double target_before = expectation(b.adjoint() * b, rho).real();
  CHECK(std::abs(target_before - expectation(number_matrix(single, 0), reduced).real()) < 1e-12);

  const int modes[2] = {0, 1};
  const Eigen::VectorXcd v = rho.components().col(0);
  const Eigen::VectorXcd rotated = apply_mode_unitary(*basis, v, frame.completion, modes);
  std::vector<double> weights{1.0};
  auto after = DensityOperator::mixture(basis, weights, rotated);
  const double n_before = expectation(number_matrix(basis, 0), rho).real() + expectation(number_matrix(basis, 1), rho).real();
  const double n_after = expectation(number_matrix(basis, 0), after).real() + expectation(number_matrix(basis, 1), after).real();
  CHECK(std::abs(n_before - n_after) < 1e-12);

  auto q = quadrature_operator(basis, spec.alpha);
  auto a = annihilation_matrix(single, 0);
  auto x = (frame.scale * (a + a.adjoint())).with_hermitian_flag();
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(operator_moment(q, rho, n).value - operator_moment(x, reduced, n).value) < 1e-8);
}
