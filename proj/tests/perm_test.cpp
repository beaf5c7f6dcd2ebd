#include "opcalc/perm.hpp"

#include <catch_amalgamated.hpp>

using namespace opcalc;

TEST_CASE("composition applies right factor first", "[perm]") {
  Permutation p({1, 0, 2}); // swaps 0,1
  Permutation q({0, 2, 1}); // swaps 1,2
  Permutation pq = p * q;
  // (p*q)(x) = p(q(x))
  CHECK(pq(0) == 1);
  CHECK(pq(1) == 2);
  CHECK(pq(2) == 0);
  CHECK((q * p) == Permutation({2, 0, 1}));
  CHECK((pq * pq.inverse()).is_identity());
  CHECK((pq.inverse() * pq).is_identity());
}

TEST_CASE("signs count inversions", "[perm]") {
  CHECK(Permutation::identity(5).sign() == 1);
  CHECK(Permutation::adjacent(4, 2).sign() == -1);
  CHECK(Permutation({2, 1, 0}).inversions() == 3);
  CHECK(Permutation({2, 1, 0}).sign() == -1);
  CHECK(Permutation({1, 2, 3, 0}).sign() == -1); // 3 inversions
  for (int i = 0; i + 1 < 4; ++i) {
    auto s = Permutation::adjacent(4, i);
    CHECK((s * s).is_identity());
  }
}

TEST_CASE("reduced words rebuild the permutation", "[perm]") {
  auto rebuild = [](int n, const std::vector<int>& word) {
    Permutation acc = Permutation::identity(n);
    for (int i : word) acc = acc * Permutation::adjacent(n, i);
    return acc;
  };
  std::vector<Permutation> cases = {
      Permutation::identity(4),
      Permutation({3, 2, 1, 0}),
      Permutation({1, 2, 3, 0}),
      Permutation({2, 0, 3, 1}),
      Permutation({4, 2, 0, 3, 1}),
  };
  for (const auto& p : cases) {
    auto word = p.reduced_word();
    CHECK(static_cast<int>(word.size()) == p.inversions()); // reduced means minimal length
    CHECK(rebuild(p.n(), word) == p);
  }
}

TEST_CASE("braid and commutation relations hold for adjacent generators", "[perm]") {
  int n = 5;
  for (int i = 0; i + 1 < n; ++i) {
    auto si = Permutation::adjacent(n, i);
    for (int j = 0; j + 1 < n; ++j) {
      auto sj = Permutation::adjacent(n, j);
      if (std::abs(i - j) >= 2) CHECK(si * sj == sj * si);
      if (std::abs(i - j) == 1) CHECK(si * sj * si == sj * si * sj);
    }
  }
}

TEST_CASE("koszul reorder signs weigh degrees", "[perm]") {
  // moving an odd past an odd flips the sign
  CHECK(koszul_reorder_sign({1, 1}, {1, 0}) == -1);
  // odd past even is free
  CHECK(koszul_reorder_sign({1, 0}, {1, 0}) == 1);
  CHECK(koszul_reorder_sign({0, 1}, {1, 0}) == 1);
  // even past even is free
  CHECK(koszul_reorder_sign({2, 4}, {1, 0}) == 1);
  // identity reorder never signs
  CHECK(koszul_reorder_sign({3, 5, 7}, {0, 1, 2}) == 1);
  // full reversal of three odds: three odd-odd transpositions
  CHECK(koszul_reorder_sign({1, 1, 1}, {2, 1, 0}) == -1);
  // degree 2 elements never contribute
  CHECK(koszul_reorder_sign({2, 1, 1}, {2, 1, 0}) == -1);
}
