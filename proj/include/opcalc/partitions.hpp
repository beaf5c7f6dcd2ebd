#pragma once

// Set partitions of {0..n-1} in canonical form (blocks sorted by minimum,
// elements sorted within blocks), enumeration in lexicographic order of
// restricted-growth strings, the refinement order, and permutation actions
// together with the induced block/within-block data.

#include "opcalc/perm.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace opcalc {

class SetPartition {
  int n_ = 0;
  std::vector<std::vector<int>> blocks_;

  void canonicalize() {
    for (auto& b : blocks_) std::sort(b.begin(), b.end());
    std::sort(blocks_.begin(), blocks_.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
  }

public:
  SetPartition() = default;

  SetPartition(int n, std::vector<std::vector<int>> blocks) : n_(n), blocks_(std::move(blocks)) {
    std::vector<bool> seen(n, false);
    for (const auto& b : blocks_) {
      if (b.empty()) throw std::invalid_argument("empty block in set partition");
      for (int x : b) {
        if (x < 0 || x >= n || seen[x]) throw std::invalid_argument("bad set partition");
        seen[x] = true;
      }
    }
    for (bool s : seen)
      if (!s) throw std::invalid_argument("set partition misses an element");
    canonicalize();
  }

  static SetPartition discrete(int n) {
    std::vector<std::vector<int>> b;
    for (int i = 0; i < n; ++i) b.push_back({i});
    return SetPartition(n, std::move(b));
  }

  static SetPartition indiscrete(int n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return SetPartition(n, {all});
  }

  static SetPartition from_rg(const std::vector<int>& rg) {
    int n = static_cast<int>(rg.size());
    int k = 0;
    for (int v : rg) k = std::max(k, v + 1);
    std::vector<std::vector<int>> blocks(k);
    for (int i = 0; i < n; ++i) blocks.at(rg[i]).push_back(i);
    return SetPartition(n, std::move(blocks));
  }

  int n() const { return n_; }
  int num_blocks() const { return static_cast<int>(blocks_.size()); }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  const std::vector<int>& block(int b) const { return blocks_.at(b); }

  int block_index_of(int x) const {
    for (int b = 0; b < num_blocks(); ++b)
      for (int y : blocks_[b])
        if (y == x) return b;
    throw std::out_of_range("element not in partition ground set");
  }

  // restricted-growth string: rg[i] = canonical index of the block holding i
  std::vector<int> rg_string() const {
    std::vector<int> rg(n_, -1);
    for (int b = 0; b < num_blocks(); ++b)
      for (int x : blocks_[b]) rg[x] = b;
    return rg;
  }

  bool operator==(const SetPartition& o) const { return n_ == o.n_ && blocks_ == o.blocks_; }
  bool operator!=(const SetPartition& o) const { return !(*this == o); }
  bool operator<(const SetPartition& o) const { return rg_string() < o.rg_string(); }

  bool refines(const SetPartition& coarser) const {
    if (coarser.n_ != n_) return false;
    auto rg = coarser.rg_string();
    for (const auto& b : blocks_)
      for (std::size_t i = 1; i < b.size(); ++i)
        if (rg[b[i]] != rg[b[0]]) return false;
    return true;
  }

  bool strictly_refines(const SetPartition& coarser) const {
    return refines(coarser) && *this != coarser;
  }

  // renders "0|13|2" (multi-digit elements separated by dots: "0|10.2|...")
  std::string str() const {
    std::string out;
    for (int b = 0; b < num_blocks(); ++b) {
      if (b) out += "|";
      for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
        if (i && n_ > 10) out += ".";
        out += std::to_string(blocks_[b][i]);
      }
    }
    return out;
  }
};

// All partitions of {0..n-1} in lexicographic order of restricted-growth
// strings; n = 0 yields the single empty partition.
inline std::vector<SetPartition> all_partitions(int n) {
  std::vector<SetPartition> out;
  if (n == 0) {
    out.push_back(SetPartition(0, {}));
    return out;
  }
  std::vector<int> rg(n, 0);
  std::vector<int> bound(n, 0); // bound[i] = 1 + max(rg[0..i-1]); rg[i] <= bound[i]
  for (int j = 1; j < n; ++j) bound[j] = 1;
  while (true) {
    out.push_back(SetPartition::from_rg(rg));
    // next RG string in lex order: bump the rightmost position below its bound
    int i = n - 1;
    while (i > 0 && rg[i] == bound[i]) --i;
    if (i == 0) break;
    ++rg[i];
    for (int j = i + 1; j < n; ++j) rg[j] = 0;
    for (int j = i + 1; j < n; ++j) bound[j] = std::max(bound[j - 1], rg[j - 1] + 1);
  }
  return out;
}

// Partitions strictly refined by mu (all lambda with lambda strictly finer).
inline std::vector<SetPartition> strict_refinements(const SetPartition& mu) {
  std::vector<SetPartition> out;
  for (const auto& lam : all_partitions(mu.n()))
    if (lam.strictly_refines(mu)) out.push_back(lam);
  return out;
}

// For finer ⪯ coarser: per block of the coarser partition, the canonical
// indices of the finer blocks it contains, in order of their minima.
inline std::vector<std::vector<int>> block_nesting(const SetPartition& coarser,
                                                   const SetPartition& finer) {
  if (!finer.refines(coarser)) throw std::invalid_argument("block_nesting wants finer ⪯ coarser");
  std::vector<std::vector<int>> out(coarser.num_blocks());
  auto rg = coarser.rg_string();
  for (int fb = 0; fb < finer.num_blocks(); ++fb)
    out[rg[finer.block(fb).front()]].push_back(fb);
  return out; // finer blocks listed by min element, so each list is sorted
}

// Data of a permutation acting on a partition: the image partition, where
// each source block index lands (block_perm: source index -> target index),
// and for every source block the induced permutation of its element
// positions.  Positions are ranks within the sorted block, so
// within[j](s) = rank of sigma(block(j)[s]) inside the image block.
struct PartitionAction {
  SetPartition image;
  std::vector<int> block_dest;
  std::vector<Permutation> within;
};

inline PartitionAction induced_action(const SetPartition& lam, const Permutation& sigma) {
  if (sigma.n() != lam.n()) throw std::invalid_argument("permutation size mismatch");
  std::vector<std::vector<int>> image_blocks;
  image_blocks.reserve(lam.num_blocks());
  for (const auto& b : lam.blocks()) {
    std::vector<int> ib;
    ib.reserve(b.size());
    for (int x : b) ib.push_back(sigma(x));
    image_blocks.push_back(std::move(ib));
  }
  SetPartition image(lam.n(), image_blocks); // canonicalizes a copy
  PartitionAction act{image, std::vector<int>(lam.num_blocks()), {}};
  for (int j = 0; j < lam.num_blocks(); ++j) {
    // destination block = block of image containing sigma(min of source block)
    int dest = image.block_index_of(sigma(lam.block(j).front()));
    act.block_dest[j] = dest;
    const auto& target = image.block(dest);
    std::vector<int> pos(lam.block(j).size());
    for (std::size_t s = 0; s < pos.size(); ++s) {
      int y = sigma(lam.block(j)[s]);
      pos[s] = static_cast<int>(std::lower_bound(target.begin(), target.end(), y) - target.begin());
    }
    act.within.emplace_back(Permutation(pos));
  }
  return act;
}

} // namespace opcalc
