#pragma once

#include <stdexcept>
#include <string>

namespace bbp {

/// Invalid arguments, malformed configurations, violated preconditions.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Basis would exceed the configured state-count limit.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operators or states defined over different Fock bases.
class BasisMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Eigensolver failure, non-Hermitian input, imaginary parts where none may exist.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The photon-number cutoff cannot hold the requested state or operator.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics go through here; the CLI routes them to stderr.
void log_warning(const std::string& message);

using WarningSink = void (*)(const std::string&);
/// Replaces the sink; returns the previous one. Passing nullptr silences warnings.
WarningSink set_warning_sink(WarningSink sink);

}  // namespace bbp
