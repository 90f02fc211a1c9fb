#include "bbp/bbp_measurement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "bbp/error.hpp"
#include "bbp/kernels.hpp"

namespace bbp {

namespace {

using Triplet = Eigen::Triplet<Complex, int>;

constexpr double kLatticeMassTolerance = 1e-11;

void require_joint_basis(const FockBasis& basis, int signal, const char* where) {
  if (basis.mode_count() != 2 * signal) {
    throw BasisMismatch(std::string(where) + ": basis has " + std::to_string(basis.mode_count()) +
                        " modes, expected " + std::to_string(2 * signal) + " (signal + LO)");
  }
}

void require_lo_vacuum(const DensityOperator& state, const char* where) {
  const double mass = lo_occupied_mass(state);
  if (mass > kLoVacuumTolerance) {
    std::ostringstream msg;
    msg << where << ": LO modes carry probability " << mass << " before displacement (must be vacuum)";
    throw DomainError(msg.str());
  }
}

double top_shell_mass(const FockBasis& basis, const Eigen::VectorXd& populations) {
  const int first = std::max(basis.total_cutoff() - 1, 0);
  double mass = 0.0;
  for (std::size_t i = basis.shell_begin(first); i < basis.size(); ++i) mass += populations[static_cast<Eigen::Index>(i)];
  return mass;
}

// Signal amplitudes <n, 0_LO|psi> of a one-signal-mode joint (or bare) basis.
Eigen::VectorXcd signal_amplitudes(const FockBasis& basis, const Eigen::VectorXcd& v) {
  const int cutoff = basis.total_cutoff();
  Eigen::VectorXcd out(cutoff + 1);
  std::vector<int> occ(static_cast<std::size_t>(basis.mode_count()), 0);
  for (int n = 0; n <= cutoff; ++n) {
    occ[0] = n;
    out[n] = v[static_cast<Eigen::Index>(basis.index_of(occ))];
  }
  return out;
}

void require_single_signal(const QuadratureSpec& spec, const FockBasis& basis, const char* where) {
  spec.validate();
  if (spec.signal_mode_count() != 1) throw DomainError(std::string(where) + ": needs exactly one signal mode");
  if (basis.mode_count() != 1 && basis.mode_count() != 2) {
    throw BasisMismatch(std::string(where) + ": expected a one-signal-mode basis");
  }
}

double lattice_tolerance(const QuadratureSpec& spec) {
  return 1e-10 * spec.delta * *std::min_element(spec.weights.begin(), spec.weights.end());
}

// Poisson pmf on 0..n until the upper tail drops below `tail`.
std::vector<double> poisson_until_tail(double mean, double tail) {
  if (mean == 0.0) return {1.0};
  std::vector<double> pmf;
  double cumulative = 0.0;
  for (int n = 0;; ++n) {
    const double p = std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
    pmf.push_back(p);
    cumulative += p;
    if (n > mean && 1.0 - cumulative < tail) break;
  }
  return pmf;
}

}  // namespace

OperatorMatrix coupling_operator(const BasisPtr& basis, std::span<const double> weights) {
  const int n = static_cast<int>(weights.size());
  require_joint_basis(*basis, n, "coupling_operator");
  std::vector<Triplet> triplets;
  std::vector<int> occ(static_cast<std::size_t>(basis->mode_count()));
  for (std::size_t i = 0; i < basis->size(); ++i) {
    const auto o = basis->occupation(i);
    for (int k = 0; k < n; ++k) {
      const int nb = o[static_cast<std::size_t>(n + k)];
      if (nb == 0) continue;
      occ.assign(o.begin(), o.end());
      occ[static_cast<std::size_t>(n + k)] -= 1;
      occ[static_cast<std::size_t>(k)] += 1;
      const auto j = static_cast<int>(basis->index_of(occ));
      const double value = weights[static_cast<std::size_t>(k)] * std::sqrt(static_cast<double>(nb)) *
                           std::sqrt(static_cast<double>(occ[static_cast<std::size_t>(k)]));
      triplets.emplace_back(j, static_cast<int>(i), value);
      triplets.emplace_back(static_cast<int>(i), j, value);
    }
  }
  const auto dim = static_cast<int>(basis->size());
  SparseMatrix m(dim, dim);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return OperatorMatrix(basis, std::move(m), true);
}

BBPOperator build_q_delta(const BasisPtr& basis, const QuadratureSpec& spec) {
  spec.validate();
  require_joint_basis(*basis, spec.signal_mode_count(), "build_q_delta");
  OperatorMatrix q = quadrature_operator(basis, spec.alpha);
  OperatorMatrix c = coupling_operator(basis, spec.weights);
  SparseMatrix combined = q.entries() + spec.delta * c.entries();
  OperatorMatrix matrix(basis, std::move(combined), true);
  return BBPOperator{spec, std::move(matrix), std::move(q), std::move(c)};
}

OperatorMatrix homodyne_operator(const BasisPtr& basis, const QuadratureSpec& spec) {
  spec.validate();
  const int n = spec.signal_mode_count();
  require_joint_basis(*basis, n, "homodyne_operator");
  const auto beta = lo_amplitude(spec);
  const OperatorMatrix id = identity_matrix(basis);
  const double r = 1.0 / std::sqrt(2.0);
  SparseMatrix sum(static_cast<int>(basis->size()), static_cast<int>(basis->size()));
  for (int k = 0; k < n; ++k) {
    const OperatorMatrix a = annihilation_matrix(basis, k);
    const OperatorMatrix b = annihilation_matrix(basis, n + k);
    const OperatorMatrix shift = beta[static_cast<std::size_t>(k)] * id;
    const OperatorMatrix c = r * (a + b + shift);
    const OperatorMatrix d = r * (a - b - shift);
    const OperatorMatrix diff = c.adjoint() * c - d.adjoint() * d;
    sum += spec.weights[static_cast<std::size_t>(k)] * diff.entries();
  }
  return OperatorMatrix(basis, spec.delta * sum, false);
}

MeasurementDistribution bbp_distribution(const DensityOperator& state, const BBPOperator& op,
                                         std::optional<double> merge_tolerance) {
  require_same_basis(op.matrix.basis(), state.basis(), "bbp_distribution");
  require_lo_vacuum(state, "bbp_distribution");
  return spectral_distribution(op.matrix, state, merge_tolerance);
}

MeasurementDistribution bbp_distribution(const DensityOperator& state, const HermitianSpectrum& spectrum,
                                         std::optional<double> merge_tolerance) {
  require_lo_vacuum(state, "bbp_distribution");
  return spectral_distribution(spectrum, state, merge_tolerance);
}

MeasurementDistribution explicit_lo_distribution(const StateSpec& signal, const QuadratureSpec& spec,
                                                 const BasisPtr& basis) {
  spec.validate();
  const int n = spec.signal_mode_count();
  require_joint_basis(*basis, n, "explicit_lo_distribution");
  const auto beta = lo_amplitude(spec);
  const double budget = basis->total_cutoff() / 4.0;
  for (const auto& b : beta) {
    if (std::norm(b) > budget) {
      std::ostringstream msg;
      msg << "explicit_lo_distribution: |beta|^2 = " << std::norm(b) << " exceeds cutoff/4 = " << budget
          << "; use a larger cutoff or a larger delta";
      throw TruncationError(msg.str());
    }
  }
  const DensityOperator state = build_state(basis, signal);
  std::vector<OperatorMatrix> displacements;
  for (int k = 0; k < n; ++k) displacements.push_back(displacement_matrix(basis, n + k, beta[static_cast<std::size_t>(k)]));
  Eigen::Matrix2cd splitter;
  splitter << 1.0, 1.0, 1.0, -1.0;
  splitter /= std::sqrt(2.0);

  Eigen::VectorXd displaced_pops = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  Eigen::VectorXd out_pops = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis->size()));
  for (std::size_t j = 0; j < state.rank(); ++j) {
    Eigen::VectorXcd v = state.components().col(static_cast<Eigen::Index>(j));
    for (int k = 0; k < n; ++k) v = displacements[static_cast<std::size_t>(k)].apply(v);
    displaced_pops += state.weights()[j] * v.cwiseAbs2();
    for (int k = 0; k < n; ++k) v = apply_two_mode_map(*basis, v, splitter, k, n + k);
    out_pops += state.weights()[j] * v.cwiseAbs2();
  }

  std::vector<SpectralPoint> points;
  points.reserve(basis->size());
  for (std::size_t i = 0; i < basis->size(); ++i) {
    double value = 0.0;
    for (int k = 0; k < n; ++k) {
      value += spec.weights[static_cast<std::size_t>(k)] *
               (basis->occupation(i, k) - basis->occupation(i, n + k));
    }
    points.push_back({spec.delta * value, out_pops[static_cast<Eigen::Index>(i)]});
  }
  MeasurementDistribution out = merge_support(std::move(points), lattice_tolerance(spec));
  out.truncation_tail = top_shell_mass(*basis, displaced_pops);
  return out;
}

MeasurementDistribution skellam_oracle_distribution(std::span<const Complex> gamma, const QuadratureSpec& spec,
                                                    double tail_tol) {
  spec.validate();
  if (!(spec.delta > 0.0)) throw DomainError("skellam_oracle_distribution: delta must be > 0");
  if (!(tail_tol > 0.0)) throw DomainError("skellam_oracle_distribution: tail tolerance must be > 0");
  const int n = spec.signal_mode_count();
  if (static_cast<int>(gamma.size()) != n) {
    throw DomainError("skellam_oracle_distribution: need one coherent amplitude per signal mode");
  }
  const auto beta = lo_amplitude(spec);
  const auto [gc, gd] = beamsplit_coherent(gamma, beta);
  const double mode_tail = tail_tol / (2.0 * n);
  MeasurementDistribution total;
  total.points.push_back({0.0, 1.0});
  for (int k = 0; k < n; ++k) {
    const auto pc = poisson_until_tail(std::norm(gc[static_cast<std::size_t>(k)]), mode_tail);
    const auto pd = poisson_until_tail(std::norm(gd[static_cast<std::size_t>(k)]), mode_tail);
    const auto nc = static_cast<int>(pc.size());
    const auto nd = static_cast<int>(pd.size());
    std::vector<double> diff(static_cast<std::size_t>(nc + nd - 1), 0.0);
    for (int i = 0; i < nc; ++i) {
      for (int j = 0; j < nd; ++j) diff[static_cast<std::size_t>(i - j + nd - 1)] += pc[static_cast<std::size_t>(i)] * pd[static_cast<std::size_t>(j)];
    }
    MeasurementDistribution mode;
    const double step = spec.delta * spec.weights[static_cast<std::size_t>(k)];
    for (std::size_t m = 0; m < diff.size(); ++m) {
      mode.points.push_back({step * (static_cast<double>(m) - (nd - 1)), diff[m]});
    }
    total = convolve(total, mode, lattice_tolerance(spec));
  }
  return total;
}

Eigen::MatrixXcd displaced_number_amplitudes(Complex mu, int rows, int cols) {
  Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(rows, cols);
  const double x = std::norm(mu);
  if (x == 0.0) {
    for (int i = 0; i < std::min(rows, cols); ++i) g(i, i) = 1.0;
    return g;
  }
  for (int n = 0; n < rows; ++n) {
    for (int j = 0; j < cols; ++j) {
      // <n|D|j> = sqrt(lo!/hi!) z^(hi-lo) e^(-x/2) L_lo^(hi-lo)(x), z = mu or -mu^*.
      const Complex z = n >= j ? mu : -std::conj(mu);
      const int lo = std::min(n, j);
      const int a = std::abs(n - j);
      double l0 = 1.0;
      double l1 = 1.0 + a - x;
      double lag = lo == 0 ? l0 : l1;
      for (int k = 1; k < lo; ++k) {
        const double l2 = ((2 * k + 1 + a - x) * l1 - (k + a) * l0) / (k + 1);
        l0 = l1;
        l1 = l2;
        lag = l2;
      }
      if (lag == 0.0) continue;
      const double log_mag = 0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + a + 1.0)) - 0.5 * x +
                             a * std::log(std::abs(z)) + std::log(std::abs(lag));
      g(n, j) = std::polar(std::exp(log_mag), a * std::arg(z)) * (lag < 0.0 ? -1.0 : 1.0);
    }
  }
  return g;
}

MeasurementDistribution single_mode_lattice_distribution(std::span<const Eigen::VectorXcd> components,
                                                         std::span<const double> weights, Complex alpha,
                                                         double omega, double delta) {
  if (components.size() != weights.size()) throw DomainError("lattice distribution: one weight per component");
  if (!(delta > 0.0) || !(omega > 0.0)) throw DomainError("lattice distribution: delta and omega must be > 0");
  const Complex beta = Complex(0.0, -1.0) * alpha / (omega * delta);
  const Complex mu = beta / std::sqrt(2.0);
  std::map<long, double> mass;
  for (std::size_t c = 0; c < components.size(); ++c) {
    const Eigen::VectorXcd& psi = components[c];
    const auto len = static_cast<int>(psi.size());
    const double norm2 = psi.squaredNorm();
    if (norm2 == 0.0 || weights[c] == 0.0) continue;
    // Beamsplitter image of psi (x) |0>: amplitudes on |j, l> with j + l < len.
    Eigen::MatrixXcd phi = Eigen::MatrixXcd::Zero(len, len);
    for (int j = 0; j < len; ++j) {
      for (int l = 0; j + l < len; ++l) {
        const int t = j + l;
        const double log_binom = std::lgamma(t + 1.0) - std::lgamma(j + 1.0) - std::lgamma(l + 1.0);
        phi(j, l) = psi[t] * std::exp(0.5 * (log_binom - t * std::log(2.0)));
      }
    }
    const double reach = std::abs(mu) + std::sqrt(static_cast<double>(len));
    int rows = static_cast<int>(std::ceil(reach * reach + 10.0 * reach + 10.0));
    Eigen::MatrixXcd amp;
    for (int attempt = 0;; ++attempt) {
      const Eigen::MatrixXcd gp = displaced_number_amplitudes(mu, rows, len);
      const Eigen::MatrixXcd gm = displaced_number_amplitudes(-mu, rows, len);
      amp = gp * phi * gm.transpose();
      const double lost = norm2 - amp.squaredNorm();
      if (std::abs(lost) <= kLatticeMassTolerance * norm2) break;
      if (attempt >= 6) {
        std::ostringstream msg;
        msg << "lattice distribution: outgoing cutoff " << rows << " still loses mass " << lost;
        throw NumericError(msg.str());
      }
      rows = rows * 3 / 2;
    }
    std::vector<double> diff(static_cast<std::size_t>(2 * rows - 1), 0.0);
    kernels::parallel::difference_mass(amp.data(), static_cast<std::size_t>(rows), static_cast<std::size_t>(rows),
                                       weights[c], diff.data());
    for (std::size_t m = 0; m < diff.size(); ++m) {
      if (diff[m] != 0.0) mass[static_cast<long>(m) - (rows - 1)] += diff[m];
    }
  }
  MeasurementDistribution out;
  const double step = delta * omega;
  for (const auto& [m, p] : mass) out.points.push_back({step * static_cast<double>(m), p});
  return out;
}

MeasurementDistribution lattice_distribution(const DensityOperator& state, const QuadratureSpec& spec) {
  require_single_signal(spec, state.basis(), "lattice_distribution");
  require_lo_vacuum(state, "lattice_distribution");
  std::vector<Eigen::VectorXcd> components;
  for (std::size_t j = 0; j < state.rank(); ++j) {
    components.push_back(signal_amplitudes(state.basis(), state.components().col(static_cast<Eigen::Index>(j))));
  }
  MeasurementDistribution out =
      single_mode_lattice_distribution(components, state.weights(), spec.alpha[0], spec.weights[0], spec.delta);
  out.truncation_tail = top_shell_mass(state.basis(), state.populations());
  return out;
}

MeasurementDistribution lattice_distribution(const PureState& psi, const QuadratureSpec& spec) {
  require_single_signal(spec, psi.basis(), "lattice_distribution");
  const Eigen::VectorXcd signal = signal_amplitudes(psi.basis(), psi.amplitudes());
  const double norm2 = psi.amplitudes().squaredNorm();
  if (norm2 - signal.squaredNorm() > kLoVacuumTolerance * std::max(1.0, norm2)) {
    throw DomainError("lattice_distribution: LO modes are not in vacuum");
  }
  const double one = 1.0;
  MeasurementDistribution out = single_mode_lattice_distribution(std::span<const Eigen::VectorXcd>(&signal, 1),
                                                                 std::span<const double>(&one, 1), spec.alpha[0],
                                                                 spec.weights[0], spec.delta);
  out.truncation_tail = top_shell_mass(psi.basis(), psi.amplitudes().cwiseAbs2());
  return out;
}

MeasurementDistribution product_lattice_distribution(std::span<const Eigen::VectorXcd> factors,
                                                     const QuadratureSpec& spec) {
  spec.validate();
  if (static_cast<int>(factors.size()) != spec.signal_mode_count()) {
    throw DomainError("product_lattice_distribution: need one factor per signal mode");
  }
  MeasurementDistribution total;
  total.points.push_back({0.0, 1.0});
  const double one = 1.0;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const auto mode = single_mode_lattice_distribution(factors.subspan(k, 1), std::span<const double>(&one, 1),
                                                       spec.alpha[k], spec.weights[k], spec.delta);
    total = convolve(total, mode, lattice_tolerance(spec));
  }
  return total;
}

}  // namespace bbp
