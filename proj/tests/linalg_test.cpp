#include "opcalc/linalg.hpp"

#include <catch_amalgamated.hpp>

using namespace opcalc;

namespace {

SparseMatrix from_dense(Field f, const std::vector<std::vector<long long>>& a) {
  int rows = static_cast<int>(a.size());
  int cols = rows ? static_cast<int>(a[0].size()) : 0;
  SparseMatrix m(f, rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (a[r][c] != 0) m.set(r, c, Scalar::integer(f, a[r][c]));
  return m;
}

} // namespace

TEST_CASE("rank over Q and F_p", "[linalg]") {
  Field q = Field::rationals();
  // rows 2 and 3 are dependent on row 1 over Q
  auto m = from_dense(q, {{1, 2, 3}, {2, 4, 6}, {-1, -2, -3}});
  CHECK(m.rank() == 1);

  auto id3 = SparseMatrix::identity(q, 3);
  CHECK(id3.rank() == 3);

  // this matrix drops rank mod 2 but not over Q
  auto n_q = from_dense(q, {{1, 1}, {1, -1}});
  CHECK(n_q.rank() == 2);
  auto n_f2 = from_dense(Field::prime(2), {{1, 1}, {1, -1}});
  CHECK(n_f2.rank() == 1);
}

TEST_CASE("kernel columns really annihilate", "[linalg]") {
  Field q = Field::rationals();
  auto m = from_dense(q, {{1, 2, 3, 0}, {0, 1, 1, 1}});
  SparseMatrix k = m.kernel();
  CHECK(k.cols() == 2); // 4 columns, rank 2
  CHECK((m * k).is_zero());
  CHECK(k.rank() == k.cols());
}

TEST_CASE("solve finds exact solutions and detects inconsistency", "[linalg]") {
  Field q = Field::rationals();
  auto a = from_dense(q, {{2, 1}, {1, 3}});
  auto b = from_dense(q, {{5}, {10}});
  SparseMatrix x = a.solve(b);
  CHECK(a * x == b);
  CHECK(x.get(0, 0).str() == "1/1");
  CHECK(x.get(1, 0).str() == "3/1");

  auto sing = from_dense(q, {{1, 1}, {2, 2}});
  auto bad = from_dense(q, {{1}, {3}});
  CHECK_THROWS_AS(sing.solve(bad), LinAlgError);
  // consistent under-determined systems still solve
  auto ok = from_dense(q, {{2}, {4}});
  CHECK(sing * sing.solve(ok) == ok);
}

TEST_CASE("matrix algebra basics", "[linalg]") {
  Field q = Field::rationals();
  auto a = from_dense(q, {{1, 2}, {3, 4}});
  auto b = from_dense(q, {{0, 1}, {1, 0}});
  CHECK(a * b == from_dense(q, {{2, 1}, {4, 3}}));
  CHECK(a + b - b == a);
  CHECK(a.scaled(Scalar::integer(q, 2)) == a + a);
  CHECK(a.transpose().transpose() == a);
  CHECK(a.transpose() == from_dense(q, {{1, 3}, {2, 4}}));

  SparseVec v = {{0, Scalar::one(q)}, {1, Scalar::integer(q, 10)}};
  SparseVec av = a.apply(v);
  REQUIRE(av.size() == 2);
  CHECK(av[0].second == Scalar::integer(q, 21));
  CHECK(av[1].second == Scalar::integer(q, 43));
  CHECK(a.column_vec(1) == SparseVec{{0, Scalar::integer(q, 2)}, {1, Scalar::integer(q, 4)}});
}

TEST_CASE("echelonize yields canonical reduced form", "[linalg]") {
  Field q = Field::rationals();
  auto m = from_dense(q, {{0, 2, 4}, {1, 1, 1}, {1, 3, 5}});
  auto pivots = m.echelonize(true);
  REQUIRE(pivots.size() == 2);
  CHECK(pivots[0] == std::pair<int, int>{0, 0});
  CHECK(pivots[1] == std::pair<int, int>{1, 1});
  // unit pivots, eliminated above and below
  CHECK(m.get(0, 0).is_one());
  CHECK(m.get(1, 1).is_one());
  CHECK(m.get(0, 1).is_zero());
  CHECK(m.get(1, 0).is_zero());
  // echelonizing twice changes nothing
  auto again = m;
  again.echelonize(true);
  CHECK(again == m);
}

TEST_CASE("subspace reduce, membership and growth", "[linalg]") {
  Field q = Field::rationals();
  Subspace v(q, 4);
  CHECK(v.dim() == 0);
  SparseVec e01 = {{0, Scalar::one(q)}, {1, Scalar::one(q)}};
  SparseVec e12 = {{1, Scalar::one(q)}, {2, Scalar::one(q)}};
  CHECK(v.insert(e01));
  CHECK(v.insert(e12));
  CHECK_FALSE(v.insert(sparse_axpy(e01, -Scalar::one(q), e12))); // e0 - e2 dependent
  CHECK(v.dim() == 2);
  CHECK(v.contains(SparseVec{{0, Scalar::one(q)}, {2, -Scalar::one(q)}}));
  CHECK_FALSE(v.contains(SparseVec{{3, Scalar::one(q)}}));
  // reductions have no support on pivot columns
  auto pivots = v.pivot_columns();
  SparseVec red = v.reduce(SparseVec{{0, Scalar::integer(q, 5)}, {3, Scalar::one(q)}});
  for (const auto& [i, val] : red) {
    (void)val;
    for (int p : pivots) CHECK(i != p);
  }
  // inserting matrix columns reaches full span
  v.insert_columns(SparseMatrix::identity(q, 4));
  CHECK(v.dim() == 4);
}
