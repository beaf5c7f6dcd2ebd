#include <catch_amalgamated.hpp>

#include <opcalc/simplicial.hpp>

using namespace opcalc;

namespace {

const Field Q = Field::rationals();

// chains on the 1-simplex: level k is free on the monotone maps [k] -> [1],
// encoded by the number c of zeros (0 <= c <= k+1), all in degree 0
CCPtr interval_level(int k) {
  std::vector<BasisElt> basis;
  for (int c = 0; c <= k + 1; ++c) basis.push_back({"z" + std::to_string(c), 0});
  return make_cc(ChainComplex::free_on(Q, basis));
}

SimplicialChainObject interval_object(int top) {
  SimplicialChainObject S;
  for (int k = 0; k <= top; ++k) S.level.push_back(interval_level(k));
  S.face.resize(top + 1);
  S.degen.resize(top + 1);
  for (int k = 1; k <= top; ++k)
    for (int i = 0; i <= k; ++i) {
      SparseMatrix m(Q, k + 1, k + 2);
      for (int c = 0; c <= k + 1; ++c) m.set(i < c ? c - 1 : c, c, Scalar::one(Q));
      S.face[k].push_back(ChainMap(S.level[k], S.level[k - 1], 0, std::move(m)));
    }
  for (int k = 0; k < top; ++k)
    for (int j = 0; j <= k; ++j) {
      SparseMatrix m(Q, k + 3, k + 2);
      for (int c = 0; c <= k + 1; ++c) m.set(j < c ? c + 1 : c, c, Scalar::one(Q));
      S.degen[k].push_back(ChainMap(S.level[k], S.level[k + 1], 0, std::move(m)));
    }
  return S;
}

SimplicialChainObject constant_object(const CCPtr& c, int top) {
  SimplicialChainObject S;
  for (int k = 0; k <= top; ++k) S.level.push_back(c);
  S.face.resize(top + 1);
  S.degen.resize(top + 1);
  for (int k = 1; k <= top; ++k)
    for (int i = 0; i <= k; ++i) S.face[k].push_back(ChainMap::identity(c));
  for (int k = 0; k < top; ++k)
    for (int j = 0; j <= k; ++j) S.degen[k].push_back(ChainMap::identity(c));
  return S;
}

CosimplicialChainObject constant_coobject(const CCPtr& c, int top) {
  CosimplicialChainObject S;
  for (int k = 0; k <= top; ++k) S.level.push_back(c);
  S.coface.resize(top + 1);
  S.codegen.resize(top + 1);
  for (int k = 0; k < top; ++k)
    for (int i = 0; i <= k + 1; ++i) S.coface[k].push_back(ChainMap::identity(c));
  for (int k = 1; k <= top; ++k)
    for (int j = 0; j < k; ++j) S.codegen[k].push_back(ChainMap::identity(c));
  return S;
}

// a two-term complex e -> b with H_0 = 1-dim, H_1 = 0
CCPtr segment_complex() {
  std::vector<BasisElt> basis = {{"b0", 0}, {"b1", 0}, {"e", 1}};
  SparseMatrix d(Q, 3, 3);
  d.set(0, 2, Scalar::one(Q));
  d.set(1, 2, -Scalar::one(Q));
  return make_cc(ChainComplex(Q, basis, d));
}

} // namespace

TEST_CASE("interval object passes validation and totalizes to the point homology") {
  auto S = interval_object(3);
  REQUIRE_NOTHROW(S.validate());
  auto tot = totalize(S);
  // normalized dims: 2 vertices, 1 edge, nothing above
  std::map<int, int> dims = tot.complex->dims_by_degree();
  REQUIRE(dims[0] == 2);
  REQUIRE(dims[1] == 1);
  REQUIRE(dims.size() == 2);
  REQUIRE_NOTHROW(tot.complex->validate());
  auto h = homology_dims(*tot.complex);
  REQUIRE(h[0] == 1);
  REQUIRE(h.count(1) == 0);
  // every total basis id records the level it came from
  for (const auto& [k, id] : tot.origin) REQUIRE(S.level[k]->index_of(id) >= 0);
}

TEST_CASE("constant simplicial object is entirely degenerate above level zero") {
  auto c = segment_complex();
  auto S = constant_object(c, 2);
  REQUIRE_NOTHROW(S.validate());
  auto tot = totalize(S);
  REQUIRE(tot.complex->size() == c->size());
  auto h = homology_dims(*tot.complex);
  REQUIRE(h[0] == 1);
  REQUIRE(h.count(1) == 0);
}

TEST_CASE("simplicial identity violations are reported with their location") {
  auto c = segment_complex();
  auto S = constant_object(c, 2);
  S.degen[0][0] = ChainMap::zero(c, c); // d_i s_j = id now fails
  REQUIRE_THROWS_WITH(S.validate(), Catch::Matchers::ContainsSubstring("d_i s_j = id"));

  auto S2 = constant_object(c, 2);
  S2.face[1].pop_back(); // wrong face count
  REQUIRE_THROWS_AS(S2.validate(), CheckFailed);
}

TEST_CASE("constant cosimplicial object cototalizes to level zero") {
  auto c = segment_complex();
  auto S = constant_coobject(c, 2);
  REQUIRE_NOTHROW(S.validate());
  auto tot = cototalize(S);
  REQUIRE(tot.complex->size() == c->size());
  for (const auto& [k, id] : tot.origin) REQUIRE(k == 0);
  auto h = homology_dims(*tot.complex);
  REQUIRE(h[0] == 1);
}

TEST_CASE("cototalize refuses a truncation whose top level is not conormalized away") {
  // levels: point at 0, two generators at 1; both cofaces hit the first
  // generator, the codegeneracy kills the second, which therefore survives
  // conormalization at the top level
  auto c0 = make_cc(ChainComplex::free_on(Q, {{"x", 0}}));
  auto c1 = make_cc(ChainComplex::free_on(Q, {{"u", 0}, {"v", 0}}));
  CosimplicialChainObject S;
  S.level = {c0, c1};
  S.coface.resize(2);
  S.codegen.resize(2);
  SparseMatrix cf(Q, 2, 1);
  cf.set(0, 0, Scalar::one(Q));
  S.coface[0].push_back(ChainMap(c0, c1, 0, cf));
  S.coface[0].push_back(ChainMap(c0, c1, 0, cf));
  SparseMatrix cs(Q, 1, 2);
  cs.set(0, 0, Scalar::one(Q));
  S.codegen[1].push_back(ChainMap(c1, c0, 0, cs));
  REQUIRE_NOTHROW(S.validate());
  REQUIRE_THROWS_WITH(cototalize(S), Catch::Matchers::ContainsSubstring("dishonest"));
}

TEST_CASE("cosimplicial validation enforces table shapes") {
  auto c0 = make_cc(ChainComplex::free_on(Q, {{"x", 0}}));
  auto c1 = make_cc(ChainComplex::free_on(Q, {{"u", 0}, {"v", 0}}));
  CosimplicialChainObject bad;
  bad.level = {c0, c1};
  bad.coface.resize(2);
  bad.codegen.resize(2); // missing the two cofaces and one codegeneracy
  REQUIRE_THROWS_AS(bad.validate(), CheckFailed);
}
