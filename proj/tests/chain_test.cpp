#include "opcalc/chain.hpp"

#include <catch_amalgamated.hpp>

using namespace opcalc;

namespace {

const Field Q = Field::rationals();

// interval: x,y in degree 0, e in degree 1, de = y - x
CCPtr interval() {
  std::vector<BasisElt> basis = {{"x", 0}, {"y", 0}, {"e", 1}};
  SparseMatrix d(Q, 3, 3);
  d.set(0, 2, Scalar::integer(Q, -1));
  d.set(1, 2, Scalar::one(Q));
  return make_cc(ChainComplex(Q, basis, d));
}

// circle: v in degree 0, e in degree 1, de = 0
CCPtr circle() {
  std::vector<BasisElt> basis = {{"v", 0}, {"e", 1}};
  SparseMatrix d(Q, 2, 2);
  return make_cc(ChainComplex(Q, basis, d));
}

} // namespace

TEST_CASE("complex construction validates the differential", "[chain]") {
  // degree mismatch: d raising degree
  std::vector<BasisElt> basis = {{"a", 0}, {"b", 1}};
  SparseMatrix up(Q, 2, 2);
  up.set(1, 0, Scalar::one(Q)); // b appears in d(a): degree +1, invalid
  CHECK_THROWS_AS(ChainComplex(Q, basis, up), CheckFailed);

  // d^2 != 0
  std::vector<BasisElt> basis3 = {{"a", 0}, {"b", 1}, {"c", 2}};
  SparseMatrix d(Q, 3, 3);
  d.set(0, 1, Scalar::one(Q));
  d.set(1, 2, Scalar::one(Q));
  CHECK_THROWS_AS(ChainComplex(Q, basis3, d), CheckFailed);

  // duplicate ids rejected
  std::vector<BasisElt> dup = {{"a", 0}, {"a", 0}};
  CHECK_THROWS_AS(ChainComplex(Q, dup, SparseMatrix(Q, 2, 2)), CheckFailed);

  CHECK_NOTHROW(interval()->validate());
  CHECK(interval()->dims_by_degree() == std::map<int, int>{{0, 2}, {1, 1}});
}

TEST_CASE("homology of basic complexes", "[chain]") {
  CHECK(homology_dims(*interval()) == std::map<int, int>{{0, 1}});
  CHECK(homology_dims(*circle()) == std::map<int, int>{{0, 1}, {1, 1}});
  CHECK_FALSE(is_acyclic(*interval()));

  // acyclic two-term complex
  std::vector<BasisElt> basis = {{"a", 0}, {"b", 1}};
  SparseMatrix d(Q, 2, 2);
  d.set(0, 1, Scalar::one(Q));
  CHECK(is_acyclic(ChainComplex(Q, basis, d)));
}

TEST_CASE("chain map validation distinguishes maps from non-maps", "[chain]") {
  auto i = interval();
  auto c = circle();
  // collapse interval onto circle vertex: x,y -> v, e -> 0 is a chain map
  SparseMatrix m(Q, 2, 3);
  m.set(0, 0, Scalar::one(Q));
  m.set(0, 1, Scalar::one(Q));
  ChainMap collapse(i, c, 0, m);
  CHECK(collapse.is_chain_map());

  // dropping y -> v breaks the chain condition: f(de) = -v but d(f e) = 0
  SparseMatrix bad = m;
  bad.set(0, 1, Scalar::zero(Q));
  CHECK_FALSE(ChainMap(i, c, 0, bad).is_chain_map());

  CHECK(ChainMap::identity(i).is_chain_map());
  CHECK(ChainMap::zero(i, c).is_chain_map());
  CHECK(compose(collapse, ChainMap::identity(i)).m == collapse.m);
}

TEST_CASE("tensor products carry Koszul signs", "[chain]") {
  auto i = interval();
  auto t = tensor(i, i);
  CHECK(t->size() == 9);
  CHECK_NOTHROW(t->validate());
  CHECK(t->dims_by_degree() == std::map<int, int>{{0, 4}, {1, 4}, {2, 1}});
  // d(e&e) = (y-x)&e - e&(y-x); the second term enters with a minus sign
  int ee = t->index_of("(e&e)");
  CHECK(t->d().get(t->index_of("(y&e)"), ee) == Scalar::one(Q));
  CHECK(t->d().get(t->index_of("(x&e)"), ee) == Scalar::integer(Q, -1));
  CHECK(t->d().get(t->index_of("(e&y)"), ee) == Scalar::integer(Q, -1));
  CHECK(t->d().get(t->index_of("(e&x)"), ee) == Scalar::one(Q));
  // Kuenneth: contractible x contractible
  CHECK(homology_dims(*t) == std::map<int, int>{{0, 1}});

  auto c2 = tensor(circle(), circle());
  CHECK(homology_dims(*c2) == std::map<int, int>{{0, 1}, {1, 2}, {2, 1}});

  // empty tensor is the unit
  auto unit = tensor_many(Q, {});
  CHECK(unit->size() == 1);
  CHECK(unit->deg(0) == 0);
}

TEST_CASE("tensor of chain maps", "[chain]") {
  auto i = interval();
  auto c = circle();
  SparseMatrix m(Q, 2, 3);
  m.set(0, 0, Scalar::one(Q));
  m.set(0, 1, Scalar::one(Q));
  ChainMap collapse(i, c, 0, m);
  auto src = tensor(i, i);
  auto tgt = tensor(c, c);
  ChainMap cc = tensor_map_many({collapse, collapse}, src, tgt);
  CHECK(cc.is_chain_map());
  CHECK(cc.m.get(tgt->index_of("(v&v)"), src->index_of("(x&y)")) == Scalar::one(Q));
  CHECK(cc.m.get(tgt->index_of("(v&v)"), src->index_of("(e&e)")).is_zero());

  ChainMap ii = tensor_map_many({ChainMap::identity(i), ChainMap::identity(i)}, src, src);
  CHECK(ii.m == SparseMatrix::identity(Q, 9));
}

TEST_CASE("duals reverse degrees and square to the identity up to sign", "[chain]") {
  auto i = interval();
  auto di = dual_complex(i);
  CHECK_NOTHROW(di->validate());
  CHECK(di->dims_by_degree() == std::map<int, int>{{-1, 1}, {0, 2}});
  // homology of the dual of a contractible complex is one point
  CHECK(homology_dims(*di) == std::map<int, int>{{0, 1}});

  // d(x*) reads off coefficients of x in d(e): d(e) = y - x so d(x*) = -(-1)^1 e* ... sign check
  int xs = di->index_of("x*");
  int es = di->index_of("e*");
  // dual differential entry at (e*, x*) = (-1)^{deg e} * d[x, e] = (-1)^1 * (-1) = 1
  CHECK(di->d().get(es, xs) == Scalar::one(Q));
  CHECK(di->d().get(es, di->index_of("y*")) == Scalar::integer(Q, -1));

  auto ddi = dual_complex(di);
  ChainMap dd = double_dual_iso(i, ddi);
  CHECK(dd.is_chain_map());
  CHECK(dd.m.rank() == i->size());

  // dual of a chain map is a chain map the other way
  auto c = circle();
  SparseMatrix m(Q, 2, 3);
  m.set(0, 0, Scalar::one(Q));
  m.set(0, 1, Scalar::one(Q));
  ChainMap collapse(i, c, 0, m);
  ChainMap dcollapse = dual_map(collapse, dual_complex(c), di);
  CHECK(dcollapse.is_chain_map());
}

TEST_CASE("cones detect quasi-isomorphisms", "[chain]") {
  auto i = interval();
  auto c = circle();
  CHECK(is_quasi_iso(ChainMap::identity(i)));
  CHECK_FALSE(is_quasi_iso(ChainMap::zero(i, i)));
  // collapse interval -> point is a quasi-iso
  auto pt = point_complex(Q, "p", 0);
  SparseMatrix m(Q, 1, 3);
  m.set(0, 0, Scalar::one(Q));
  m.set(0, 1, Scalar::one(Q));
  CHECK(is_quasi_iso(ChainMap(i, pt, 0, m)));
  // the same collapse from the circle is not (H_1 survives)
  SparseMatrix mc(Q, 1, 2);
  mc.set(0, 0, Scalar::one(Q));
  CHECK_FALSE(is_quasi_iso(ChainMap(c, pt, 0, mc)));

  auto cone = mapping_cone(ChainMap::identity(c));
  CHECK_NOTHROW(cone->validate());
  CHECK(is_acyclic(*cone));
}

TEST_CASE("direct sums add homology", "[chain]") {
  auto s = direct_sum(circle(), interval());
  CHECK_NOTHROW(s->validate());
  CHECK(homology_dims(*s) == std::map<int, int>{{0, 2}, {1, 1}});
}

TEST_CASE("degree homology gives representatives and traces", "[chain]") {
  auto c2 = tensor(circle(), circle()); // torus-like: H_1 rank 2
  DegreeHomology h1(*c2, 1);
  CHECK(h1.dim() == 2);
  // identity endomorphism has trace = dim
  auto id = SparseMatrix::identity(Q, c2->size());
  CHECK(h1.trace_on_homology(id) == Scalar::integer(Q, 2));
  // the swap e&v <-> v&e, v&v -> v&v, e&e -> -e&e is a chain endomorphism
  SparseMatrix swap(Q, c2->size(), c2->size());
  swap.set(c2->index_of("(v&v)"), c2->index_of("(v&v)"), Scalar::one(Q));
  swap.set(c2->index_of("(v&e)"), c2->index_of("(e&v)"), Scalar::one(Q));
  swap.set(c2->index_of("(e&v)"), c2->index_of("(v&e)"), Scalar::one(Q));
  swap.set(c2->index_of("(e&e)"), c2->index_of("(e&e)"), Scalar::integer(Q, -1));
  CHECK(ChainMap(c2, c2, 0, swap).is_chain_map());
  CHECK(h1.trace_on_homology(swap).is_zero());
  DegreeHomology h2(*c2, 2);
  CHECK(h2.trace_on_homology(swap) == Scalar::integer(Q, -1));

  // express: the class of (v&e) + boundary coordinates
  auto i2 = tensor(interval(), interval());
  DegreeHomology h0(*i2, 0);
  CHECK(h0.dim() == 1);
  SparseVec xy = {{i2->index_of("(x&y)"), Scalar::one(Q)}};
  SparseVec yx = {{i2->index_of("(y&x)"), Scalar::one(Q)}};
  // homologous cycles express identically
  CHECK(h0.express(xy) == h0.express(yx));
}

TEST_CASE("hom complexes have chain maps as degree-zero cycles", "[chain]") {
  auto i = interval();
  auto c = circle();
  auto h = hom_complex(i, c);
  CHECK_NOTHROW(h->validate());
  CHECK(h->size() == i->size() * c->size());

  // flatten the collapse map into hom coordinates and check it is a cycle
  SparseVec vec;
  Scalar one = Scalar::one(Q);
  vec.emplace_back(h->index_of("h(v|x)"), one);
  vec.emplace_back(h->index_of("h(v|y)"), one);
  std::sort(vec.begin(), vec.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  CHECK(h->d().apply(vec).empty());

  // the degree-one element x -> e is not a cycle: its boundary is -h(e|e)
  SparseVec notcycle = {{h->index_of("h(e|x)"), one}};
  SparseVec boundary = h->d().apply(notcycle);
  REQUIRE(boundary.size() == 1);
  CHECK(boundary[0].first == h->index_of("h(e|e)"));
  CHECK(boundary[0].second == Scalar::integer(Q, -1));

  // H_0 of Hom(interval, circle) = chain-homotopy classes = H^0 = 1 here
  auto hd = homology_dims(*h);
  CHECK(hd[0] == 1);
}

TEST_CASE("quotients and subcomplexes", "[chain]") {
  auto i = interval();
  // kill the subcomplex spanned by x: quotient is y, e with de = y
  Subspace v(Q, i->size());
  v.insert(SparseVec{{i->index_of("x"), Scalar::one(Q)}});
  auto [q, proj] = quotient_by_subspace(i, v);
  CHECK(q->size() == 2);
  CHECK(proj.is_chain_map());
  CHECK(is_acyclic(*q));

  // a non-closed subspace is rejected: span(e) has d(e) != 0 outside
  Subspace w(Q, i->size());
  w.insert(SparseVec{{i->index_of("e"), Scalar::one(Q)}});
  CHECK_THROWS_AS(quotient_by_subspace(i, w), CheckFailed);

  // subcomplex: span(y - x) with zero differential
  auto [s, incl] = subcomplex_from_vectors(
      i, {SparseVec{{i->index_of("x"), Scalar::one(Q)}, {i->index_of("y"), Scalar::integer(Q, -1)}}},
      "s");
  CHECK(s->size() == 1);
  CHECK(incl.is_chain_map());
  CHECK(s->d().is_zero());

  // subcomplex containing e must contain d(e) too
  CHECK_THROWS_AS(subcomplex_from_vectors(i, {SparseVec{{i->index_of("e"), Scalar::one(Q)}}}, "s"),
                  CheckFailed);

  // full interval as a subcomplex of itself via all generators
  auto [s2, incl2] = subcomplex_from_vectors(
      i,
      {SparseVec{{0, Scalar::one(Q)}}, SparseVec{{1, Scalar::one(Q)}}, SparseVec{{2, Scalar::one(Q)}}},
      "t");
  CHECK(s2->size() == 3);
  CHECK(incl2.is_chain_map());
  CHECK(is_quasi_iso(incl2));
}
