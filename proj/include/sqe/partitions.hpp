#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace sqe {

/// A set partition of the subsystem indices {0, ..., N-1} into parties.
///
/// Always held in canonical form: every block is sorted ascending and blocks
/// are ordered by their smallest element. Indices are zero-based internally;
/// labels use the one-based notation "1,3:2,4" (blocks separated by ':',
/// members by ',').
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<std::vector<int>> blocks, int subsystem_count);

  /// Parses a one-based label. When `subsystem_count` is negative the count
  /// is taken from the largest index in the label.
  static Partition parse(std::string_view label, int subsystem_count = -1);
  static Partition singletons(int subsystem_count);
  static Partition whole(int subsystem_count);

  const std::vector<std::vector<int>>& blocks() const noexcept { return blocks_; }
  const std::vector<int>& block(int party) const { return blocks_.at(party); }
  int party_count() const noexcept { return static_cast<int>(blocks_.size()); }
  int subsystem_count() const noexcept { return subsystem_count_; }
  int party_of(int subsystem) const;

  /// Subsystems listed block by block; the permutation that groups parties.
  std::vector<int> party_order() const;

  std::string label() const;

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition& a, const Partition& b) {
    if (auto c = a.subsystem_count_ <=> b.subsystem_count_; c != 0) return c;
    return a.blocks_ <=> b.blocks_;
  }

 private:
  std::vector<std::vector<int>> blocks_;
  int subsystem_count_ = 0;
};

inline constexpr int kMaxEnumeratedSubsystems = 12;

/// All Bell(N) partitions of N subsystems, generated from restricted-growth
/// strings. Throws a limit error outside 1 <= N <= 12.
std::vector<Partition> enumerate_partitions(int subsystem_count);

/// True iff every block of `fine` lies inside some block of `coarse`.
bool is_refinement(const Partition& fine, const Partition& coarse);

std::string canonical_label(const Partition& p);

/// Every 2-block partition that `p` refines.
std::vector<Partition> two_block_coarsenings(const Partition& p);

}  // namespace sqe
