#include "sqe/partitions.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "sqe/error.hpp"

namespace sqe {

Partition::Partition(std::vector<std::vector<int>> blocks, int subsystem_count)
    : blocks_(std::move(blocks)), subsystem_count_(subsystem_count) {
  require(subsystem_count_ >= 1, ErrorKind::kInvalidArgument,
          "partition needs at least one subsystem");
  std::vector<bool> seen(subsystem_count_, false);
  int covered = 0;
  for (auto& b : blocks_) {
    require(!b.empty(), ErrorKind::kInvalidArgument, "partition blocks must be nonempty");
    std::sort(b.begin(), b.end());
    for (int i : b) {
      require(i >= 0 && i < subsystem_count_, ErrorKind::kInvalidIndex,
              "subsystem index " + std::to_string(i + 1) + " out of range");
      require(!seen[i], ErrorKind::kInvalidArgument,
              "subsystem " + std::to_string(i + 1) + " appears in two blocks");
      seen[i] = true;
      ++covered;
    }
  }
  require(covered == subsystem_count_, ErrorKind::kInvalidArgument,
          "partition blocks do not cover every subsystem");
  std::sort(blocks_.begin(), blocks_.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

Partition Partition::parse(std::string_view label, int subsystem_count) {
  std::vector<std::vector<int>> blocks(1);
  int max_index = 0;
  std::size_t pos = 0;
  while (pos <= label.size()) {
    std::size_t end = label.find_first_of(",:", pos);
    if (end == std::string_view::npos) end = label.size();
    std::string_view token = label.substr(pos, end - pos);
    while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
    while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
    int value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    require(ec == std::errc() && ptr == token.data() + token.size() && value >= 1,
            ErrorKind::kInvalidArgument,
            "malformed partition label '" + std::string(label) + "'");
    blocks.back().push_back(value - 1);
    max_index = std::max(max_index, value);
    if (end == label.size()) break;
    if (label[end] == ':') blocks.emplace_back();
    pos = end + 1;
  }
  if (subsystem_count < 0) subsystem_count = max_index;
  return Partition(std::move(blocks), subsystem_count);
}

Partition Partition::singletons(int subsystem_count) {
  std::vector<std::vector<int>> blocks;
  for (int i = 0; i < subsystem_count; ++i) blocks.push_back({i});
  return Partition(std::move(blocks), subsystem_count);
}

Partition Partition::whole(int subsystem_count) {
  std::vector<int> all(subsystem_count);
  for (int i = 0; i < subsystem_count; ++i) all[i] = i;
  return Partition({all}, subsystem_count);
}

int Partition::party_of(int subsystem) const {
  for (int q = 0; q < party_count(); ++q) {
    if (std::binary_search(blocks_[q].begin(), blocks_[q].end(), subsystem)) return q;
  }
  fail(ErrorKind::kInvalidIndex, "subsystem not covered by partition");
}

std::vector<int> Partition::party_order() const {
  std::vector<int> order;
  order.reserve(subsystem_count_);
  for (const auto& b : blocks_) order.insert(order.end(), b.begin(), b.end());
  return order;
}

std::string Partition::label() const {
  std::string out;
  for (std::size_t q = 0; q < blocks_.size(); ++q) {
    if (q > 0) out += ':';
    for (std::size_t k = 0; k < blocks_[q].size(); ++k) {
      if (k > 0) out += ',';
      out += std::to_string(blocks_[q][k] + 1);
    }
  }
  return out;
}

std::vector<Partition> enumerate_partitions(int subsystem_count) {
  require(subsystem_count >= 1 && subsystem_count <= kMaxEnumeratedSubsystems,
          ErrorKind::kLimit, "partition enumeration supports 1..12 subsystems");
  const int n = subsystem_count;
  // a[i] is the block of element i; m[i] = max(a[0..i]).
  std::vector<int> a(n, 0), m(n, 0);
  std::vector<Partition> out;
  while (true) {
    int blocks = m[n - 1] + 1;
    std::vector<std::vector<int>> b(blocks);
    for (int i = 0; i < n; ++i) b[a[i]].push_back(i);
    out.emplace_back(std::move(b), n);

    int i = n - 1;
    while (i > 0 && a[i] == m[i - 1] + 1) --i;
    if (i == 0) break;
    ++a[i];
    m[i] = std::max(m[i - 1], a[i]);
    for (int j = i + 1; j < n; ++j) {
      a[j] = 0;
      m[j] = m[i];
    }
  }
  return out;
}

bool is_refinement(const Partition& fine, const Partition& coarse) {
  require(fine.subsystem_count() == coarse.subsystem_count(), ErrorKind::kInvalidArgument,
          "partitions are over different subsystem counts");
  for (const auto& block : fine.blocks()) {
    const int q = coarse.party_of(block.front());
    const auto& target = coarse.block(q);
    for (int i : block) {
      if (!std::binary_search(target.begin(), target.end(), i)) return false;
    }
  }
  return true;
}

std::string canonical_label(const Partition& p) { return p.label(); }

std::vector<Partition> two_block_coarsenings(const Partition& p) {
  const int n = p.party_count();
  std::vector<Partition> out;
  if (n < 2) return out;
  // Subsets of parties containing party 0, excluding the full set.
  for (unsigned mask = 0; mask < (1u << (n - 1)) - 1; ++mask) {
    std::vector<int> left, right;
    for (int q = 0; q < n; ++q) {
      bool in_left = q == 0 || ((mask >> (q - 1)) & 1u);
      auto& dst = in_left ? left : right;
      dst.insert(dst.end(), p.block(q).begin(), p.block(q).end());
    }
    out.emplace_back(std::vector<std::vector<int>>{left, right}, p.subsystem_count());
  }
  return out;
}

}  // namespace sqe
