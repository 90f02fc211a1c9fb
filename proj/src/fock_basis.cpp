#include "bbp/fock_basis.hpp"

#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>
#include <string>

#include "bbp/error.hpp"

namespace bbp {

namespace {

WarningSink g_warning_sink = [](const std::string& message) { std::clog << "warning: " << message << '\n'; };

std::size_t saturating_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  // Multiplicative formula; each partial product is itself a binomial so it stays integral.
  unsigned __int128 value = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    value = value * (n - k + i) / i;
    if (value > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(value);
}

void enumerate_shell(int modes, int total, std::vector<int>& prefix, std::vector<int>& out) {
  if (modes == 1) {
    prefix.push_back(total);
    out.insert(out.end(), prefix.begin(), prefix.end());
    prefix.pop_back();
    return;
  }
  for (int first = 0; first <= total; ++first) {
    prefix.push_back(first);
    enumerate_shell(modes - 1, total - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

void log_warning(const std::string& message) {
  if (g_warning_sink) g_warning_sink(message);
}

WarningSink set_warning_sink(WarningSink sink) {
  auto previous = g_warning_sink;
  g_warning_sink = sink;
  return previous;
}

std::size_t fock_dimension(int mode_count, int total_cutoff) {
  return saturating_binomial(static_cast<std::size_t>(total_cutoff + mode_count),
                             static_cast<std::size_t>(mode_count));
}

std::size_t FockBasis::default_capacity() {
  if (const char* env = std::getenv("BBP_MAX_DIM")) {
    char* end = nullptr;
    const unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0) return static_cast<std::size_t>(parsed);
    log_warning(std::string("ignoring malformed BBP_MAX_DIM='") + env + "'");
  }
  return kDefaultCapacity;
}

FockBasis::FockBasis(int mode_count, int total_cutoff, std::size_t capacity)
    : mode_count_(mode_count), total_cutoff_(total_cutoff) {
  if (mode_count < 1) throw DomainError("build_basis: mode_count must be >= 1");
  if (total_cutoff < 0) throw DomainError("build_basis: total_cutoff must be >= 0");
  size_ = fock_dimension(mode_count, total_cutoff);
  if (size_ > capacity) {
    throw CapacityError("build_basis: " + std::to_string(mode_count) + " modes with cutoff " +
                        std::to_string(total_cutoff) + " need " + std::to_string(size_) +
                        " states; capacity is " + std::to_string(capacity));
  }

  compositions_.assign(static_cast<std::size_t>(mode_count) + 1,
                       std::vector<std::size_t>(static_cast<std::size_t>(total_cutoff) + 1, 0));
  compositions_[0][0] = 1;
  for (int m = 1; m <= mode_count; ++m) {
    for (int n = 0; n <= total_cutoff; ++n) {
      compositions_[m][n] = saturating_binomial(static_cast<std::size_t>(n + m - 1),
                                                static_cast<std::size_t>(m - 1));
    }
  }

  occupations_.reserve(size_ * static_cast<std::size_t>(mode_count));
  shell_offsets_.push_back(0);
  std::vector<int> prefix;
  for (int n = 0; n <= total_cutoff; ++n) {
    enumerate_shell(mode_count, n, prefix, occupations_);
    shell_offsets_.push_back(occupations_.size() / static_cast<std::size_t>(mode_count));
  }
  totals_.resize(size_);
  for (int n = 0; n <= total_cutoff; ++n) {
    for (std::size_t i = shell_begin(n); i < shell_end(n); ++i) totals_[i] = n;
  }
}

std::size_t FockBasis::rank_within_shell(std::span<const int> occupation, int total) const {
  std::size_t rank = 0;
  int remaining = total;
  for (int i = 0; i + 1 < mode_count_; ++i) {
    const int tail_modes = mode_count_ - i - 1;
    for (int x = 0; x < occupation[static_cast<std::size_t>(i)]; ++x) {
      rank += compositions_[static_cast<std::size_t>(tail_modes)][static_cast<std::size_t>(remaining - x)];
    }
    remaining -= occupation[static_cast<std::size_t>(i)];
  }
  return rank;
}

std::size_t FockBasis::find(std::span<const int> occupation) const {
  if (occupation.size() != static_cast<std::size_t>(mode_count_)) return size_;
  int total = 0;
  for (int n : occupation) {
    if (n < 0) return size_;
    total += n;
  }
  if (total > total_cutoff_) return size_;
  return shell_begin(total) + rank_within_shell(occupation, total);
}

std::size_t FockBasis::index_of(std::span<const int> occupation) const {
  const std::size_t index = find(occupation);
  if (index == size_) throw DomainError("FockBasis::index_of: occupation vector not in basis");
  return index;
}

BasisPtr build_basis(int mode_count, int total_cutoff, std::size_t capacity) {
  return std::make_shared<const FockBasis>(mode_count, total_cutoff, capacity);
}

void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where) {
  if (!(a == b)) {
    throw BasisMismatch(std::string(where) + ": basis mismatch (" + std::to_string(a.mode_count()) + " modes/cutoff " +
                        std::to_string(a.total_cutoff()) + " vs " + std::to_string(b.mode_count()) +
                        " modes/cutoff " + std::to_string(b.total_cutoff()) + ")");
  }
}

}  // namespace bbp
