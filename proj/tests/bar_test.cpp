#include <catch_amalgamated.hpp>

#include <opcalc/bar.hpp>

using namespace opcalc;

namespace {

const Field Q = Field::rationals();

std::map<int, int> level_dims(const Bar& b, int n) {
  std::map<int, int> out;
  for (const auto& ci : b.chains(n)) out[ci.k()] += ci.ix.total();
  return out;
}

long long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// exact comparison of the totalized unnormalized object with the direct
// normalized construction, through the identity of surviving basis ids
void check_totalization_matches(const Bar& b, int n) {
  auto S = bar_simplicial_object(b.right_input(), b.left_input(), n);
  REQUIRE_NOTHROW(S.validate()); // machine-checks all simplicial identities
  auto tot = totalize(S);
  const ChainComplex& direct = *b.at(n).complex;
  REQUIRE(tot.complex->size() == direct.size());
  SparseMatrix perm(Q, direct.size(), direct.size());
  for (int i = 0; i < tot.complex->size(); ++i) {
    int j = direct.index_of(tot.origin[i].second);
    REQUIRE(tot.complex->deg(i) == direct.deg(j));
    REQUIRE(tot.origin[i].first == b.level_of(n, j));
    perm.set(j, i, Scalar::one(Q));
  }
  REQUIRE(perm * tot.complex->d() == direct.d() * perm);
}

// an operad with labels in two degrees and a nonzero differential: free on a
// single binary generator complex x <- y (y in degree 1)
OperadPtr two_cell_operad(int N) {
  std::vector<BasisElt> basis = {{"x", 0}, {"y", 1}};
  SparseMatrix d(Q, 2, 2);
  d.set(0, 1, Scalar::one(Q));
  SymSeq gens(Q, N);
  gens.set(2, EquivariantComplex::trivial(2, make_cc(ChainComplex(Q, basis, d))));
  return free_operad(gens).operad;
}

} // namespace

TEST_CASE("reduced two-sided bar of the commutative operad: sizes and homology", "[bar]") {
  auto com = com_operad(Q, 5);
  Bar b(unit_module(com, OperadModule::Side::right), unit_module(com, OperadModule::Side::left));
  REQUIRE_NOTHROW(b.validate());

  std::map<int, std::map<int, int>> expected = {
      {1, {{0, 1}}},
      {2, {{1, 1}}},
      {3, {{1, 1}, {2, 3}}},
      {4, {{1, 1}, {2, 13}, {3, 18}}},
      {5, {{1, 1}, {2, 50}, {3, 205}, {4, 180}}},
  };
  for (int n = 1; n <= 5; ++n) REQUIRE(level_dims(b, n) == expected[n]);

  for (int n = 1; n <= 5; ++n) {
    auto h = homology_dims(*b.at(n).complex);
    REQUIRE(h.size() == 1);
    REQUIRE(h[n - 1] == factorial(n - 1));
  }
}

TEST_CASE("bar resolutions of the unit are acyclic in higher arities", "[bar]") {
  auto com = com_operad(Q, 4);
  auto right = operad_as_module(com, OperadModule::Side::right);
  auto left = operad_as_module(com, OperadModule::Side::left);
  auto unit_r = unit_module(com, OperadModule::Side::right);
  auto unit_l = unit_module(com, OperadModule::Side::left);

  for (const Bar& b : {Bar(right, unit_l), Bar(unit_r, left)}) {
    REQUIRE_NOTHROW(b.validate());
    auto h1 = homology_dims(*b.at(1).complex);
    REQUIRE(h1.size() == 1);
    REQUIRE(h1[0] == 1);
    for (int n = 2; n <= 4; ++n) REQUIRE(homology_dims(*b.at(n).complex).empty());
  }
}

TEST_CASE("level zero of the bar is the composition product of the ends", "[bar]") {
  auto com = com_operad(Q, 4);
  Bar b(operad_as_module(com, OperadModule::Side::right),
        operad_as_module(com, OperadModule::Side::left));
  REQUIRE_NOTHROW(b.validate());
  auto cc = compose(com->seq(), com->seq());
  for (int n = 1; n <= 4; ++n) {
    auto dims = level_dims(b, n);
    REQUIRE(dims[0] == cc.at(n).dim());
  }
  REQUIRE(level_dims(b, 4)[0] == 15); // partitions of a four-element set
}

TEST_CASE("totalizing the unnormalized bar object reproduces the direct complex", "[bar]") {
  auto com = com_operad(Q, 4);
  Bar reduced(unit_module(com, OperadModule::Side::right),
              unit_module(com, OperadModule::Side::left));
  for (int n = 1; n <= 4; ++n) check_totalization_matches(reduced, n);

  Bar full(operad_as_module(com, OperadModule::Side::right),
           operad_as_module(com, OperadModule::Side::left));
  for (int n = 1; n <= 3; ++n) check_totalization_matches(full, n);
}

TEST_CASE("bar over an operad with mixed label degrees and differential", "[bar]") {
  auto p = two_cell_operad(3);
  Bar b(unit_module(p, OperadModule::Side::right), unit_module(p, OperadModule::Side::left));
  REQUIRE_NOTHROW(b.validate());
  // the generator complex is acyclic, so the whole bar is acyclic above arity 1
  auto h1 = homology_dims(*b.at(1).complex);
  REQUIRE(h1.size() == 1);
  REQUIRE(h1[0] == 1);
  REQUIRE(homology_dims(*b.at(2).complex).empty());
  REQUIRE(homology_dims(*b.at(3).complex).empty());
  for (int n = 1; n <= 3; ++n) check_totalization_matches(b, n);

  Bar full(operad_as_module(p, OperadModule::Side::right),
           operad_as_module(p, OperadModule::Side::left));
  REQUIRE_NOTHROW(full.validate());
  for (int n = 1; n <= 3; ++n) check_totalization_matches(full, n);
}

TEST_CASE("bar input sides are checked", "[bar]") {
  auto com = com_operad(Q, 2);
  auto right = unit_module(com, OperadModule::Side::right);
  auto left = unit_module(com, OperadModule::Side::left);
  REQUIRE_THROWS_AS(Bar(left, left), CheckFailed);
  REQUIRE_THROWS_AS(Bar(right, right), CheckFailed);
  auto com2 = com_operad(Q, 2);
  REQUIRE_THROWS_AS(Bar(right, unit_module(com2, OperadModule::Side::left)), CheckFailed);
}
