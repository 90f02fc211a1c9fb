#include "bbp/state_factory.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "bbp/error.hpp"

namespace bbp {

namespace {

using Triplet = Eigen::Triplet<Complex, int>;

// <n|gamma> for a product coherent state, untruncated normalization.
Complex coherent_coefficient(std::span<const int> occupation, std::span<const Complex> gamma, double log_norm) {
  double log_magnitude = log_norm;
  double phase = 0.0;
  for (std::size_t k = 0; k < occupation.size(); ++k) {
    const int n = occupation[k];
    if (n == 0) continue;
    const Complex g = k < gamma.size() ? gamma[k] : Complex(0.0);
    if (g == Complex(0.0)) return 0.0;
    log_magnitude += n * std::log(std::abs(g)) - 0.5 * std::lgamma(n + 1.0);
    phase += n * std::arg(g);
  }
  return std::polar(std::exp(log_magnitude), phase);
}

double squared_norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s;
}

void check_discarded(double discarded, const char* where) {
  if (discarded > kCoherentTailLimit) {
    std::ostringstream msg;
    msg << where << ": cutoff discards probability " << discarded << " (limit " << kCoherentTailLimit << ")";
    throw TruncationError(msg.str());
  }
}

void warn_discarded(double discarded, double bound, const char* where) {
  if (discarded > bound) {
    std::ostringstream msg;
    msg << where << ": cutoff discards probability " << discarded;
    log_warning(msg.str());
  }
}

// Pads signal-mode amplitudes (or occupations) to the full basis width,
// rejecting anything that would populate LO modes.
template <typename T>
std::vector<T> pad_to_basis(const std::vector<T>& values, const FockBasis& basis, const char* what) {
  const int signal = signal_mode_count(basis);
  const auto modes = static_cast<std::size_t>(basis.mode_count());
  if (values.size() > modes) {
    throw DomainError(std::string("build_state: ") + what + " has " + std::to_string(values.size()) +
                      " entries but the basis has " + std::to_string(modes) + " modes");
  }
  for (std::size_t k = static_cast<std::size_t>(signal); k < values.size(); ++k) {
    if (values[k] != T{}) {
      throw DomainError(std::string("build_state: ") + what +
                        " populates an LO mode; LO displacement is applied only by the measurement");
    }
  }
  std::vector<T> padded(values);
  padded.resize(modes, T{});
  return padded;
}

}  // namespace

int signal_mode_count(const FockBasis& basis) {
  if (basis.mode_count() == 1) return 1;
  if (basis.mode_count() % 2 != 0) {
    throw DomainError("signal_mode_count: a signal+LO basis needs an even number of modes, got " +
                      std::to_string(basis.mode_count()));
  }
  return basis.mode_count() / 2;
}

StateSpec StateSpec::vacuum() { return StateSpec{}; }

StateSpec StateSpec::fock(std::vector<int> occupations) {
  StateSpec s;
  s.kind = Kind::fock;
  s.occupations = std::move(occupations);
  return s;
}

StateSpec StateSpec::coherent(std::vector<Complex> amplitudes) {
  StateSpec s;
  s.kind = Kind::coherent;
  s.amplitudes = std::move(amplitudes);
  return s;
}

StateSpec StateSpec::superposition(std::vector<CoherentTerm> terms) {
  StateSpec s;
  s.kind = Kind::coherent_superposition;
  s.terms = std::move(terms);
  return s;
}

StateSpec StateSpec::product(std::vector<StateSpec> factors) {
  StateSpec s;
  s.kind = Kind::product;
  s.factors = std::move(factors);
  return s;
}

int StateSpec::width() const {
  switch (kind) {
    case Kind::vacuum:
      return 0;
    case Kind::fock:
      return static_cast<int>(occupations.size());
    case Kind::coherent:
      return static_cast<int>(amplitudes.size());
    case Kind::coherent_superposition: {
      std::size_t w = 0;
      for (const auto& t : terms) w = std::max(w, t.amplitudes.size());
      return static_cast<int>(w);
    }
    case Kind::product:
      return static_cast<int>(factors.size());
  }
  return 0;
}

void StateSpec::validate() const {
  switch (kind) {
    case Kind::vacuum:
      return;
    case Kind::fock:
      if (occupations.empty()) throw DomainError("fock state needs at least one occupation number");
      for (int n : occupations) {
        if (n < 0) throw DomainError("fock occupations must be >= 0");
      }
      return;
    case Kind::coherent:
      if (amplitudes.empty()) throw DomainError("coherent state needs at least one amplitude");
      return;
    case Kind::coherent_superposition: {
      if (terms.empty()) throw DomainError("coherent superposition needs at least one term");
      bool any = false;
      for (const auto& t : terms) {
        if (t.amplitudes.empty()) throw DomainError("coherent superposition term without amplitudes");
        any = any || t.coefficient != Complex(0.0);
      }
      if (!any) throw DomainError("coherent superposition coefficients are all zero");
      return;
    }
    case Kind::product:
      if (factors.empty()) throw DomainError("product state needs at least one factor");
      for (const auto& f : factors) {
        if (f.kind == Kind::product) throw DomainError("product factors must be single-mode, not products");
        if (f.width() > 1) throw DomainError("product factors must be single-mode specs");
        f.validate();
      }
      return;
  }
}

Complex coherent_overlap(std::span<const Complex> beta, std::span<const Complex> alpha) {
  const std::size_t n = std::max(beta.size(), alpha.size());
  Complex exponent = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Complex b = k < beta.size() ? beta[k] : Complex(0.0);
    const Complex a = k < alpha.size() ? alpha[k] : Complex(0.0);
    exponent += -0.5 * (std::norm(b) + std::norm(a) - 2.0 * a * std::conj(b));
  }
  return std::exp(exponent);
}

TruncatedState coherent_amplitudes_to_state(const BasisPtr& basis, std::span<const Complex> amplitudes,
                                            double warn_bound) {
  if (amplitudes.size() != static_cast<std::size_t>(basis->mode_count())) {
    throw DomainError("coherent_amplitudes_to_state: need one amplitude per basis mode (" +
                      std::to_string(basis->mode_count()) + "), got " + std::to_string(amplitudes.size()));
  }
  const double log_norm = -0.5 * squared_norm(amplitudes);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(basis->size()));
  for (std::size_t i = 0; i < basis->size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = coherent_coefficient(basis->occupation(i), amplitudes, log_norm);
  }
  const double discarded = std::max(0.0, 1.0 - v.squaredNorm());
  check_discarded(discarded, "coherent_amplitudes_to_state");
  warn_discarded(discarded, warn_bound, "coherent_amplitudes_to_state");
  return TruncatedState{PureState(basis, v / v.norm()), discarded};
}

OperatorMatrix displacement_matrix(const BasisPtr& basis, int mode, Complex beta) {
  if (mode < 0 || mode >= basis->mode_count()) throw DomainError("displacement_matrix: mode out of range");
  if (std::norm(beta) > basis->total_cutoff() / 4.0) {
    std::ostringstream msg;
    msg << "displacement_matrix: |beta|^2 = " << std::norm(beta) << " exceeds cutoff/4 = "
        << basis->total_cutoff() / 4.0 << "; truncation error will be visible";
    log_warning(msg.str());
  }
  const std::size_t n = basis->size();
  // Exponentials depend only on the chain length, so cache them.
  std::map<int, Eigen::MatrixXcd> by_length;
  std::vector<Triplet> triplets;
  std::vector<std::size_t> chain;
  std::vector<int> occ(static_cast<std::size_t>(basis->mode_count()));
  for (std::size_t start = 0; start < n; ++start) {
    if (basis->occupation(start, mode) != 0) continue;
    const auto base = basis->occupation(start);
    occ.assign(base.begin(), base.end());
    chain.clear();
    for (int k = 0;; ++k) {
      occ[static_cast<std::size_t>(mode)] = k;
      const std::size_t idx = basis->find(occ);
      if (idx == n) break;
      chain.push_back(idx);
    }
    const int length = static_cast<int>(chain.size());
    auto it = by_length.find(length);
    if (it == by_length.end()) {
      Eigen::MatrixXcd generator = Eigen::MatrixXcd::Zero(length, length);
      for (int k = 0; k + 1 < length; ++k) {
        const double s = std::sqrt(static_cast<double>(k + 1));
        generator(k + 1, k) = beta * s;
        generator(k, k + 1) = -std::conj(beta) * s;
      }
      it = by_length.emplace(length, generator.exp()).first;
    }
    const Eigen::MatrixXcd& block = it->second;
    for (int r = 0; r < length; ++r) {
      for (int c = 0; c < length; ++c) {
        if (block(r, c) != Complex(0.0)) {
          triplets.emplace_back(static_cast<int>(chain[static_cast<std::size_t>(r)]),
                                static_cast<int>(chain[static_cast<std::size_t>(c)]), block(r, c));
        }
      }
    }
  }
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  return OperatorMatrix(basis, std::move(m), false);
}

Eigen::VectorXcd single_mode_amplitudes(const StateSpec& spec, int cutoff) {
  spec.validate();
  if (spec.width() > 1 || spec.kind == StateSpec::Kind::product) {
    throw DomainError("single_mode_amplitudes: spec addresses more than one mode");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(cutoff + 1);
  auto coherent_column = [cutoff](Complex g) {
    Eigen::VectorXcd c(cutoff + 1);
    const double log_norm = -0.5 * std::norm(g);
    for (int n = 0; n <= cutoff; ++n) {
      const int occ[1] = {n};
      const Complex gamma[1] = {g};
      c[n] = coherent_coefficient(occ, gamma, log_norm);
    }
    return c;
  };
  switch (spec.kind) {
    case StateSpec::Kind::vacuum:
      v[0] = 1.0;
      break;
    case StateSpec::Kind::fock:
      if (spec.occupations[0] <= cutoff) v[spec.occupations[0]] = 1.0;
      break;
    case StateSpec::Kind::coherent:
      v = coherent_column(spec.amplitudes[0]);
      break;
    case StateSpec::Kind::coherent_superposition: {
      double norm2 = 0.0;
      for (const auto& ti : spec.terms) {
        for (const auto& tj : spec.terms) {
          norm2 += (std::conj(ti.coefficient) * tj.coefficient * coherent_overlap(ti.amplitudes, tj.amplitudes)).real();
        }
      }
      if (!(norm2 > 1e-300)) throw DomainError("coherent superposition has zero norm");
      for (const auto& t : spec.terms) v += t.coefficient * coherent_column(t.amplitudes[0]);
      v /= std::sqrt(norm2);
      break;
    }
    case StateSpec::Kind::product:
      break;
  }
  return v;
}

TruncatedState build_pure_state(const BasisPtr& basis, const StateSpec& spec) {
  spec.validate();
  const int signal = signal_mode_count(*basis);
  const std::size_t n = basis->size();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
  double full_norm2 = 1.0;

  switch (spec.kind) {
    case StateSpec::Kind::vacuum:
      v[0] = 1.0;
      break;
    case StateSpec::Kind::fock: {
      const auto occ = pad_to_basis(spec.occupations, *basis, "fock occupations");
      const std::size_t idx = basis->find(occ);
      if (idx == n) throw TruncationError("build_state: Fock state exceeds the photon cutoff");
      v[static_cast<Eigen::Index>(idx)] = 1.0;
      break;
    }
    case StateSpec::Kind::coherent: {
      const auto amps = pad_to_basis(spec.amplitudes, *basis, "coherent amplitudes");
      return coherent_amplitudes_to_state(basis, amps);
    }
    case StateSpec::Kind::coherent_superposition: {
      full_norm2 = 0.0;
      std::vector<std::vector<Complex>> padded;
      for (const auto& t : spec.terms) padded.push_back(pad_to_basis(t.amplitudes, *basis, "superposition amplitudes"));
      for (std::size_t i = 0; i < padded.size(); ++i) {
        for (std::size_t j = 0; j < padded.size(); ++j) {
          full_norm2 += (std::conj(spec.terms[i].coefficient) * spec.terms[j].coefficient *
                         coherent_overlap(padded[i], padded[j]))
                            .real();
        }
      }
      if (!(full_norm2 > 1e-300)) throw DomainError("build_state: coherent superposition has zero norm");
      for (std::size_t t = 0; t < padded.size(); ++t) {
        const double log_norm = -0.5 * squared_norm(padded[t]);
        for (std::size_t i = 0; i < n; ++i) {
          v[static_cast<Eigen::Index>(i)] +=
              spec.terms[t].coefficient * coherent_coefficient(basis->occupation(i), padded[t], log_norm);
        }
      }
      break;
    }
    case StateSpec::Kind::product: {
      if (static_cast<int>(spec.factors.size()) > signal) {
        throw DomainError("build_state: product has " + std::to_string(spec.factors.size()) + " factors but only " +
                          std::to_string(signal) + " signal modes");
      }
      std::vector<Eigen::VectorXcd> tables;
      for (const auto& f : spec.factors) tables.push_back(single_mode_amplitudes(f, basis->total_cutoff()));
      for (std::size_t i = 0; i < n; ++i) {
        const auto occ = basis->occupation(i);
        Complex amp = 1.0;
        for (int k = 0; k < basis->mode_count() && amp != Complex(0.0); ++k) {
          const int nk = occ[static_cast<std::size_t>(k)];
          if (static_cast<std::size_t>(k) < tables.size()) {
            amp *= tables[static_cast<std::size_t>(k)][nk];
          } else if (nk != 0) {
            amp = 0.0;
          }
        }
        v[static_cast<Eigen::Index>(i)] = amp;
      }
      break;
    }
  }

  const double discarded = std::max(0.0, 1.0 - v.squaredNorm() / full_norm2);
  check_discarded(discarded, "build_state");
  warn_discarded(discarded, kCoherentTailWarning, "build_state");
  return TruncatedState{PureState(basis, v / v.norm()), discarded};
}

DensityOperator build_state(const BasisPtr& basis, const StateSpec& spec) {
  return DensityOperator::pure(build_pure_state(basis, spec).state);
}

}  // namespace bbp
