#include "bbp/optics.hpp"

#include <cmath>
#include <string>

#include "bbp/error.hpp"
#include "bbp/state_factory.hpp"

namespace bbp {

namespace {

using Triplet = Eigen::Triplet<Complex, int>;

constexpr double kUnitaryTolerance = 1e-12;

// Column k of sector n is the image of |n_p = k, n_q = n - k>, expressed over
// the same sector (index = n_p).
std::vector<Eigen::MatrixXcd> two_mode_sectors(const Eigen::Matrix2cd& g, int cutoff) {
  std::vector<Eigen::MatrixXcd> sectors;
  sectors.reserve(static_cast<std::size_t>(cutoff) + 1);
  sectors.push_back(Eigen::MatrixXcd::Ones(1, 1));
  for (int n = 1; n <= cutoff; ++n) {
    const Eigen::MatrixXcd& prev = sectors.back();
    Eigen::MatrixXcd cur = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    // Applies (x raise_p + y raise_q) to a sector n-1 vector.
    auto raise = [n](const Eigen::VectorXcd& v, Complex x, Complex y) {
      Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n + 1);
      for (int k = 0; k < n; ++k) {
        out[k + 1] += x * std::sqrt(static_cast<double>(k + 1)) * v[k];
        out[k] += y * std::sqrt(static_cast<double>(n - k)) * v[k];
      }
      return out;
    };
    for (int k = 0; k <= n; ++k) {
      if (k > 0) {
        cur.col(k) = raise(prev.col(k - 1), g(0, 0), g(1, 0)) / std::sqrt(static_cast<double>(k));
      } else {
        cur.col(0) = raise(prev.col(0), g(0, 1), g(1, 1)) / std::sqrt(static_cast<double>(n));
      }
    }
    sectors.push_back(std::move(cur));
  }
  return sectors;
}

void check_unitary(const Eigen::MatrixXcd& u, const char* where) {
  if (u.rows() != u.cols()) throw DomainError(std::string(where) + ": map must be square");
  const double err = (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw DomainError(std::string(where) + ": map is not unitary (error " + std::to_string(err) + ")");
}

std::vector<int> lo_modes(const FockBasis& basis) {
  std::vector<int> modes;
  if (basis.mode_count() == 1) return modes;
  for (int k = signal_mode_count(basis); k < basis.mode_count(); ++k) modes.push_back(k);
  return modes;
}

std::vector<int> signal_modes(int count) {
  std::vector<int> modes(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) modes[static_cast<std::size_t>(k)] = k;
  return modes;
}

Eigen::VectorXcd rotate_signal(const FockBasis& basis, const Eigen::VectorXcd& v, const TargetModeFrame& frame) {
  const int n = static_cast<int>(frame.w.size());
  if (n != signal_mode_count(basis)) {
    throw BasisMismatch("target frame has " + std::to_string(n) + " modes but the basis carries " +
                        std::to_string(signal_mode_count(basis)) + " signal modes");
  }
  const auto modes = signal_modes(n);
  return apply_mode_unitary(basis, v, frame.completion, modes);
}

// Indices of basis states sharing every occupation except mode 0, ordered by n_0.
template <typename Visit>
void for_each_mode0_chain(const FockBasis& basis, Visit visit) {
  std::vector<int> occ(static_cast<std::size_t>(basis.mode_count()));
  std::vector<std::size_t> chain;
  for (std::size_t start = 0; start < basis.size(); ++start) {
    if (basis.occupation(start, 0) != 0) continue;
    const auto base = basis.occupation(start);
    occ.assign(base.begin(), base.end());
    chain.clear();
    for (int m = 0; m <= basis.total_cutoff() - basis.total_photons(start); ++m) {
      occ[0] = m;
      chain.push_back(basis.index_of(occ));
    }
    visit(chain);
  }
}

}  // namespace

double QuadratureSpec::scale() const {
  double s = 0.0;
  for (const auto& a : alpha) s += std::norm(a);
  return std::sqrt(s);
}

bool QuadratureSpec::is_normalized() const {
  double s = 0.0;
  for (const auto& a : alpha) s += std::norm(a);
  return std::abs(s - 0.5) <= 1e-12;
}

void QuadratureSpec::validate() const {
  if (alpha.empty()) throw DomainError("quadrature: alpha is empty");
  if (weights.size() != alpha.size()) {
    throw DomainError("quadrature: " + std::to_string(alpha.size()) + " alpha entries but " +
                      std::to_string(weights.size()) + " weights");
  }
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("quadrature: weights must be strictly positive");
  }
  if (!(scale() > 0.0)) throw DomainError("quadrature: alpha must not be all zero");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("quadrature: delta must be >= 0");
}

QuadratureSpec QuadratureSpec::with_delta(double d) const {
  QuadratureSpec out = *this;
  out.delta = d;
  return out;
}

std::vector<Complex> lo_amplitude(const QuadratureSpec& spec) {
  spec.validate();
  if (!(spec.delta > 0.0)) throw DomainError("lo_amplitude: delta must be > 0 (the ideal limit has no LO)");
  std::vector<Complex> beta(spec.alpha.size());
  for (std::size_t k = 0; k < beta.size(); ++k) {
    beta[k] = Complex(0.0, -1.0) * spec.alpha[k] / (spec.weights[k] * spec.delta);
  }
  return beta;
}

std::pair<std::vector<Complex>, std::vector<Complex>> beamsplit_coherent(std::span<const Complex> gamma_a,
                                                                         std::span<const Complex> gamma_b) {
  if (gamma_a.size() != gamma_b.size()) {
    throw DomainError("beamsplit_coherent: inputs have lengths " + std::to_string(gamma_a.size()) + " and " +
                      std::to_string(gamma_b.size()));
  }
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<Complex> c(gamma_a.size()), d(gamma_a.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    c[k] = (gamma_a[k] + gamma_b[k]) * r;
    d[k] = (gamma_a[k] - gamma_b[k]) * r;
  }
  return {std::move(c), std::move(d)};
}

OperatorMatrix quadrature_operator(const BasisPtr& basis, std::span<const Complex> alpha) {
  if (static_cast<int>(alpha.size()) > basis->mode_count()) {
    throw BasisMismatch("quadrature_operator: more alpha entries than basis modes");
  }
  std::vector<Triplet> triplets;
  std::vector<int> occ(static_cast<std::size_t>(basis->mode_count()));
  for (std::size_t i = 0; i < basis->size(); ++i) {
    if (basis->total_photons(i) >= basis->total_cutoff()) continue;
    const auto o = basis->occupation(i);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (alpha[k] == Complex(0.0)) continue;
      occ.assign(o.begin(), o.end());
      occ[k] += 1;
      const auto j = static_cast<int>(basis->index_of(occ));
      const double s = std::sqrt(static_cast<double>(occ[k]));
      triplets.emplace_back(j, static_cast<int>(i), Complex(0.0, -1.0) * alpha[k] * s);
      triplets.emplace_back(static_cast<int>(i), j, Complex(0.0, 1.0) * std::conj(alpha[k]) * s);
    }
  }
  const auto n = static_cast<int>(basis->size());
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return OperatorMatrix(basis, std::move(m), true);
}

TargetModeFrame target_mode_frame(const QuadratureSpec& spec) {
  if (spec.alpha.empty()) throw DomainError("target_mode_frame: alpha is empty");
  const double s = spec.scale();
  if (!(s > 0.0)) throw DomainError("target_mode_frame: alpha must not be all zero");
  const auto n = static_cast<Eigen::Index>(spec.alpha.size());
  TargetModeFrame frame;
  frame.scale = s;
  frame.w.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    frame.w[k] = Complex(0.0, 1.0) * std::conj(spec.alpha[static_cast<std::size_t>(k)]) / s;
  }
  frame.w /= frame.w.norm();

  Eigen::Index pivot = 0;
  for (Eigen::Index k = 1; k < n; ++k) {
    if (std::abs(frame.w[k]) > std::abs(frame.w[pivot])) pivot = k;
  }
  // Rows are orthonormal under <u, v> = sum conj(u_k) v_k.
  std::vector<Eigen::VectorXcd> rows{frame.w};
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k == pivot) continue;
    Eigen::VectorXcd v = Eigen::VectorXcd::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& u : rows) v -= u.dot(v) * u;
    }
    v /= v.norm();
    rows.push_back(std::move(v));
  }
  frame.completion.resize(n, n);
  for (Eigen::Index r = 0; r < n; ++r) frame.completion.row(r) = rows[static_cast<std::size_t>(r)].transpose();
  const double err = (frame.completion * frame.completion.adjoint() - Eigen::MatrixXcd::Identity(n, n))
                         .cwiseAbs()
                         .maxCoeff();
  if (err > kUnitaryTolerance) throw NumericError("target_mode_frame: completion is not unitary to 1e-12");
  return frame;
}

GivensDecomposition givens_decompose(const Eigen::MatrixXcd& unitary) {
  check_unitary(unitary, "givens_decompose");
  const auto n = unitary.rows();
  Eigen::MatrixXcd m = unitary;
  GivensDecomposition out;
  for (Eigen::Index c = 0; c + 1 < n; ++c) {
    for (Eigen::Index r = n - 1; r > c; --r) {
      const Complex x = m(r - 1, c);
      const Complex y = m(r, c);
      if (y == Complex(0.0)) continue;
      const double rho = std::hypot(std::abs(x), std::abs(y));
      Eigen::Matrix2cd q;
      q << std::conj(x), std::conj(y), -y, x;
      q /= rho;
      const Eigen::MatrixXcd rows = m.middleRows(r - 1, 2);
      m.middleRows(r - 1, 2) = q * rows;
      m(r, c) = 0.0;
      out.rotations.push_back({static_cast<int>(r), q});
    }
  }
  out.phases = m.diagonal();
  return out;
}

Eigen::VectorXcd apply_two_mode_map(const FockBasis& basis, const Eigen::VectorXcd& amplitudes,
                                    const Eigen::Matrix2cd& map, int p, int q) {
  if (p == q || p < 0 || q < 0 || p >= basis.mode_count() || q >= basis.mode_count()) {
    throw DomainError("apply_two_mode_map: invalid mode pair");
  }
  if (amplitudes.size() != static_cast<Eigen::Index>(basis.size())) {
    throw BasisMismatch("apply_two_mode_map: vector size does not match the basis");
  }
  const auto sectors = two_mode_sectors(map, basis.total_cutoff());
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(amplitudes.size());
  std::vector<int> occ(static_cast<std::size_t>(basis.mode_count()));
  std::vector<std::size_t> index;
  for (std::size_t start = 0; start < basis.size(); ++start) {
    if (basis.occupation(start, p) != 0 || basis.occupation(start, q) != 0) continue;
    const auto base = basis.occupation(start);
    occ.assign(base.begin(), base.end());
    const int room = basis.total_cutoff() - basis.total_photons(start);
    for (int n = 0; n <= room; ++n) {
      index.resize(static_cast<std::size_t>(n) + 1);
      for (int k = 0; k <= n; ++k) {
        occ[static_cast<std::size_t>(p)] = k;
        occ[static_cast<std::size_t>(q)] = n - k;
        index[static_cast<std::size_t>(k)] = basis.index_of(occ);
      }
      const Eigen::MatrixXcd& block = sectors[static_cast<std::size_t>(n)];
      for (int k = 0; k <= n; ++k) {
        const Complex a = amplitudes[static_cast<Eigen::Index>(index[static_cast<std::size_t>(k)])];
        if (a == Complex(0.0)) continue;
        for (int r = 0; r <= n; ++r) {
          out[static_cast<Eigen::Index>(index[static_cast<std::size_t>(r)])] += block(r, k) * a;
        }
      }
    }
  }
  return out;
}

Eigen::VectorXcd apply_mode_unitary(const FockBasis& basis, const Eigen::VectorXcd& amplitudes,
                                    const Eigen::MatrixXcd& map, std::span<const int> modes) {
  if (map.rows() != static_cast<Eigen::Index>(modes.size())) {
    throw DomainError("apply_mode_unitary: map size does not match the mode list");
  }
  if (amplitudes.size() != static_cast<Eigen::Index>(basis.size())) {
    throw BasisMismatch("apply_mode_unitary: vector size does not match the basis");
  }
  const GivensDecomposition dec = givens_decompose(map);
  Eigen::VectorXcd v = amplitudes;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Complex phase = 1.0;
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const int n = basis.occupation(i, modes[k]);
      if (n > 0) phase *= std::pow(dec.phases[static_cast<Eigen::Index>(k)], n);
    }
    v[static_cast<Eigen::Index>(i)] *= phase;
  }
  for (auto it = dec.rotations.rbegin(); it != dec.rotations.rend(); ++it) {
    const auto r = static_cast<std::size_t>(it->row);
    v = apply_two_mode_map(basis, v, it->matrix.adjoint(), modes[r - 1], modes[r]);
  }
  return v;
}

double lo_occupied_mass(const DensityOperator& state) {
  const auto modes = lo_modes(state.basis());
  if (modes.empty()) return 0.0;
  return state.occupied_mass(modes);
}

DensityOperator rotate_to_target_mode(const DensityOperator& state, const TargetModeFrame& frame) {
  const FockBasis& basis = state.basis();
  const double lo_mass = lo_occupied_mass(state);
  if (lo_mass > kLoVacuumTolerance) {
    throw DomainError("rotate_to_target_mode: LO modes carry probability " + std::to_string(lo_mass) +
                      " (must be vacuum)");
  }
  const int cutoff = basis.total_cutoff();
  Eigen::MatrixXcd reduced = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for (std::size_t j = 0; j < state.rank(); ++j) {
    const Eigen::VectorXcd v = rotate_signal(basis, state.components().col(static_cast<Eigen::Index>(j)), frame);
    const double w = state.weights()[j];
    for_each_mode0_chain(basis, [&](const std::vector<std::size_t>& chain) {
      for (std::size_t m = 0; m < chain.size(); ++m) {
        const Complex vm = v[static_cast<Eigen::Index>(chain[m])];
        if (vm == Complex(0.0)) continue;
        for (std::size_t n = 0; n < chain.size(); ++n) {
          reduced(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) +=
              w * vm * std::conj(v[static_cast<Eigen::Index>(chain[n])]);
        }
      }
    });
  }
  reduced = 0.5 * (reduced + reduced.adjoint()).eval();
  reduced /= reduced.trace().real();
  return DensityOperator::from_matrix(build_basis(1, cutoff), reduced);
}

Eigen::MatrixXcd reduced_cross_operator(const PureState& phi, const PureState& psi, const TargetModeFrame& frame) {
  require_same_basis(phi.basis(), psi.basis(), "reduced_cross_operator");
  const FockBasis& basis = psi.basis();
  const auto lo = lo_modes(basis);
  for (const PureState* s : {&phi, &psi}) {
    double mass = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
      for (int mode : lo) {
        if (basis.occupation(i, mode) > 0) {
          mass += std::norm(s->amplitude(i));
          break;
        }
      }
    }
    if (mass > kLoVacuumTolerance * std::max(1.0, s->norm() * s->norm())) {
      throw DomainError("reduced_cross_operator: LO modes are not in vacuum");
    }
  }
  const Eigen::VectorXcd a = rotate_signal(basis, psi.amplitudes(), frame);
  const Eigen::VectorXcd b = rotate_signal(basis, phi.amplitudes(), frame);
  const int cutoff = basis.total_cutoff();
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(cutoff + 1, cutoff + 1);
  for_each_mode0_chain(basis, [&](const std::vector<std::size_t>& chain) {
    for (std::size_t m = 0; m < chain.size(); ++m) {
      for (std::size_t n = 0; n < chain.size(); ++n) {
        x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) +=
            a[static_cast<Eigen::Index>(chain[m])] * std::conj(b[static_cast<Eigen::Index>(chain[n])]);
      }
    }
  });
  return x;
}

}  // namespace bbp
