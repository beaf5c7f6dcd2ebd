#pragma once

// Permutations of {0..n-1} with reduced words in adjacent transpositions,
// plus Koszul signs for reordering graded tensor factors.

#include <numeric>
#include <stdexcept>
#include <vector>

namespace opcalc {

class Permutation {
  std::vector<int> img_; // img_[i] = image of i

public:
  Permutation() = default;
  explicit Permutation(std::vector<int> img) : img_(std::move(img)) {
    std::vector<bool> seen(img_.size(), false);
    for (int v : img_) {
      if (v < 0 || v >= static_cast<int>(img_.size()) || seen[v])
        throw std::invalid_argument("not a permutation");
      seen[v] = true;
    }
  }

  static Permutation identity(int n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return Permutation(std::move(v));
  }

  static Permutation adjacent(int n, int i) {
    // the transposition (i, i+1), 0-based
    auto p = identity(n);
    std::swap(p.img_[i], p.img_[i + 1]);
    return p;
  }

  int n() const { return static_cast<int>(img_.size()); }
  int operator()(int i) const { return img_.at(i); }
  const std::vector<int>& images() const { return img_; }

  // (p*q)(x) = p(q(x))
  friend Permutation operator*(const Permutation& p, const Permutation& q) {
    std::vector<int> v(p.n());
    for (int i = 0; i < p.n(); ++i) v[i] = p(q(i));
    return Permutation(std::move(v));
  }

  Permutation inverse() const {
    std::vector<int> v(n());
    for (int i = 0; i < n(); ++i) v[img_[i]] = i;
    return Permutation(std::move(v));
  }

  bool is_identity() const {
    for (int i = 0; i < n(); ++i)
      if (img_[i] != i) return false;
    return true;
  }

  bool operator==(const Permutation& o) const { return img_ == o.img_; }

  int inversions() const {
    int c = 0;
    for (int i = 0; i < n(); ++i)
      for (int j = i + 1; j < n(); ++j)
        if (img_[i] > img_[j]) ++c;
    return c;
  }

  int sign() const { return inversions() % 2 == 0 ? 1 : -1; }

  // Word [i1, i2, ...] with *this = s_{i1} * s_{i2} * ... (adjacent
  // transpositions, composition as above).
  std::vector<int> reduced_word() const {
    std::vector<int> arr = img_;
    std::vector<int> swaps;
    bool changed = true;
    while (changed) {
      changed = false;
      for (int i = 0; i + 1 < n(); ++i) {
        if (arr[i] > arr[i + 1]) {
          std::swap(arr[i], arr[i + 1]);
          swaps.push_back(i);
          changed = true;
        }
      }
    }
    return {swaps.rbegin(), swaps.rend()};
  }
};

// Sign for reordering graded factors: the target sequence is
// src[perm[0]], src[perm[1]], ...; degs are the degrees of the source items.
inline int koszul_reorder_sign(const std::vector<int>& degs, const std::vector<int>& perm) {
  int parity = 0;
  for (std::size_t a = 0; a < perm.size(); ++a)
    for (std::size_t b = a + 1; b < perm.size(); ++b)
      if (perm[a] > perm[b]) parity += degs.at(perm[a]) * degs.at(perm[b]);
  return parity % 2 == 0 ? 1 : -1;
}

} // namespace opcalc
