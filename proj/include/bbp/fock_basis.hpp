#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace bbp {

/// Multimode occupation vectors with total photon number at most `total_cutoff`.
///
/// States are ordered by total photon number, then lexicographically on the
/// occupation vector, so the vacuum sits at index 0. Ranking is computed
/// combinatorially; no hash lookup is involved.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultCapacity = 200000;

  FockBasis(int mode_count, int total_cutoff, std::size_t capacity = default_capacity());

  int mode_count() const { return mode_count_; }
  int total_cutoff() const { return total_cutoff_; }
  std::size_t size() const { return size_; }

  /// Occupation vector of state `index`.
  std::span<const int> occupation(std::size_t index) const {
    return {occupations_.data() + index * static_cast<std::size_t>(mode_count_),
            static_cast<std::size_t>(mode_count_)};
  }
  int occupation(std::size_t index, int mode) const {
    return occupations_[index * static_cast<std::size_t>(mode_count_) + static_cast<std::size_t>(mode)];
  }
  int total_photons(std::size_t index) const { return totals_[index]; }

  /// Index of an occupation vector; throws DomainError when it is not in the basis.
  std::size_t index_of(std::span<const int> occupation) const;
  /// Same as index_of but returns size() instead of throwing.
  std::size_t find(std::span<const int> occupation) const;

  /// First index of the shell with `total` photons.
  std::size_t shell_begin(int total) const { return shell_offsets_[static_cast<std::size_t>(total)]; }
  std::size_t shell_end(int total) const { return shell_offsets_[static_cast<std::size_t>(total) + 1]; }

  bool operator==(const FockBasis& other) const {
    return mode_count_ == other.mode_count_ && total_cutoff_ == other.total_cutoff_;
  }

  /// Basis capacity, overridable through the BBP_MAX_DIM environment variable.
  static std::size_t default_capacity();

 private:
  std::size_t rank_within_shell(std::span<const int> occupation, int total) const;

  int mode_count_;
  int total_cutoff_;
  std::size_t size_;
  std::vector<int> occupations_;
  std::vector<int> totals_;
  std::vector<std::size_t> shell_offsets_;
  // compositions_[m][n]: number of occupation vectors over m modes summing to n.
  std::vector<std::vector<std::size_t>> compositions_;
};

using BasisPtr = std::shared_ptr<const FockBasis>;

/// Number of states with at most `total_cutoff` photons over `mode_count` modes,
/// i.e. binomial(total_cutoff + mode_count, mode_count). Saturates at SIZE_MAX.
std::size_t fock_dimension(int mode_count, int total_cutoff);

BasisPtr build_basis(int mode_count, int total_cutoff,
                     std::size_t capacity = FockBasis::default_capacity());

/// Throws BasisMismatch unless both bases describe the same space.
void require_same_basis(const FockBasis& a, const FockBasis& b, const char* where);

}  // namespace bbp
