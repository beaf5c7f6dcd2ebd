#include "opcalc/operad.hpp"

#include <catch_amalgamated.hpp>

using namespace opcalc;

namespace {
const Field Q = Field::rationals();
}

TEST_CASE("shapes enumerate compositions", "[operad]") {
  auto shapes = all_shapes(3);
  // totals 1..3: compositions 1 + 2 + 4 = 7
  CHECK(shapes.size() == 7);
  CHECK(shapes[0].key() == "1;1");
  Shape s{2, {3, 1}};
  CHECK(s.key() == "2;3,1");
  CHECK(s.total() == 4);
  CHECK(Shape::of_partition(SetPartition(4, {{0, 2, 3}, {1}})).key() == "2;3,1");
}

TEST_CASE("partition alignment permutation", "[operad]") {
  SetPartition nu(4, {{0, 2}, {1, 3}});
  Permutation a = partition_alignment(nu);
  // contiguous (0,1 | 2,3) onto ({0,2} | {1,3})
  CHECK(a(0) == 0);
  CHECK(a(1) == 2);
  CHECK(a(2) == 1);
  CHECK(a(3) == 3);
  CHECK(partition_alignment(SetPartition::discrete(3)).is_identity());
  CHECK(partition_alignment(SetPartition::indiscrete(3)).is_identity());
}

TEST_CASE("commutative operad satisfies all laws", "[operad]") {
  auto com = com_operad(Q, 4);
  CHECK_NOTHROW(validate_operad(*com));
  for (int n = 1; n <= 4; ++n) {
    CHECK(com->at(n).dim() == 1);
    CHECK(com->at(n).complex->deg(0) == 0);
  }
  // gamma on any partition of weight n is the canonical identification
  CHECK(com->gamma_at(SetPartition(3, {{0, 2}, {1}})).get(0, 0).is_one());
}

TEST_CASE("commutative operad modules", "[operad]") {
  auto com = com_operad(Q, 3);
  CHECK_NOTHROW(validate_module(operad_as_module(com, OperadModule::Side::right)));
  CHECK_NOTHROW(validate_module(operad_as_module(com, OperadModule::Side::left)));
  CHECK_NOTHROW(validate_module(unit_module(com, OperadModule::Side::right)));
  CHECK_NOTHROW(validate_module(unit_module(com, OperadModule::Side::left)));
}

TEST_CASE("free operad on one binary generator counts binary trees", "[operad]") {
  SymSeq gens(Q, 4);
  gens.set(2, EquivariantComplex::trivial(2, point_complex(Q, "b", 0)));
  auto fo = free_operad(gens);
  CHECK(fo.operad->at(1).dim() == 1);
  CHECK(fo.operad->at(2).dim() == 1);
  CHECK(fo.operad->at(3).dim() == 3);
  CHECK(fo.operad->at(4).dim() == 15);
  CHECK_NOTHROW(fo.operad->seq().validate());
  CHECK_NOTHROW(validate_operad(*fo.operad));
}

TEST_CASE("free operad on generators in every arity counts all trees", "[operad]") {
  SymSeq gens(Q, 4);
  for (int n = 2; n <= 4; ++n)
    gens.set(n, EquivariantComplex::trivial(n, point_complex(Q, "g" + std::to_string(n), 0)));
  auto fo = free_operad(gens);
  CHECK(fo.operad->at(2).dim() == 1);
  CHECK(fo.operad->at(3).dim() == 4);
  CHECK(fo.operad->at(4).dim() == 26);
  CHECK_NOTHROW(validate_operad(*fo.operad));
}

TEST_CASE("free operad with graded generators has consistent signs", "[operad]") {
  // one binary generator in degree 1 with the sign action
  SymSeq gens(Q, 4);
  CCPtr c = point_complex(Q, "b", 1);
  SparseMatrix act(Q, 1, 1);
  act.set(0, 0, Scalar::integer(Q, -1));
  gens.set(2, EquivariantComplex(2, c, {act}));
  auto fo = free_operad(gens);
  CHECK(fo.operad->at(3).dim() == 3);
  // trees with two degree-1 vertices live in degree 2
  CHECK(fo.operad->at(3).complex->dims_by_degree() == std::map<int, int>{{2, 3}});
  CHECK_NOTHROW(fo.operad->seq().validate());
  CHECK_NOTHROW(validate_operad(*fo.operad));
}

TEST_CASE("free operad functoriality", "[operad]") {
  // two generator lines in arity 2 mapping onto one
  SymSeq g2(Q, 3);
  CCPtr two = make_cc(ChainComplex::free_on(Q, {{"x", 0}, {"y", 0}}));
  g2.set(2, EquivariantComplex::trivial(2, two));
  SymSeq g1(Q, 3);
  g1.set(2, EquivariantComplex::trivial(2, point_complex(Q, "b", 0)));

  auto fsrc = free_operad(g2);
  auto ftgt = free_operad(g1);

  SymSeqMap gm = SymSeqMap::zero(g2, g1);
  SparseMatrix mm(Q, 1, 2);
  mm.set(0, 0, Scalar::one(Q));
  mm.set(0, 1, Scalar::one(Q));
  gm.at_[1] = ChainMap(g2.at(2).complex, g1.at(2).complex, 0, mm);
  gm.validate(g2, g1);

  auto fmap = free_operad_map(fsrc, ftgt, gm);
  fmap.validate(fsrc.operad->seq(), ftgt.operad->seq());
  // in arity 3: each of the 3 target trees receives 4 source trees
  CHECK(fsrc.operad->at(3).dim() == 12);
  CHECK(ftgt.operad->at(3).dim() == 3);
  for (int r = 0; r < 3; ++r) {
    Scalar total = Scalar::zero(Q);
    for (const auto& [c2, v] : fmap.at(3).m.row(r)) {
      (void)c2;
      total += v;
    }
    CHECK(total == Scalar::integer(Q, 4));
  }

  // compatibility with composition: the map intertwines the structure maps
  auto src_pp = compose_full(fsrc.operad->seq(), fsrc.operad->seq());
  auto tgt_pp = compose_full(ftgt.operad->seq(), ftgt.operad->seq());
  auto g_src = operad_gamma_map(*fsrc.operad, src_pp);
  auto g_tgt = operad_gamma_map(*ftgt.operad, tgt_pp);
  auto fmap_fmap = compose_map(fmap, fmap, src_pp, tgt_pp);
  for (int n = 1; n <= 3; ++n)
    CHECK(compose(fmap.at(n), g_src.at(n)).m == compose(g_tgt.at(n), fmap_fmap.at(n)).m);
}

TEST_CASE("grafting relabels and signs correctly", "[operad]") {
  SymSeq gens(Q, 4);
  CCPtr c = point_complex(Q, "b", 1);
  SparseMatrix act(Q, 1, 1);
  act.set(0, 0, Scalar::one(Q)); // trivial action, degree 1
  gens.set(2, EquivariantComplex(2, c, {act}));
  auto fo = free_operad(gens);

  // gamma(b; b, 1): graft a 2-leaf tree onto leaf 0 of the 2-leaf tree
  Shape sh{2, {2, 1}};
  const auto& m = fo.operad->structure(sh);
  // source column: (top tree b(0,1); sub b(0,1), leaf) -> tree (b:(b:0,1),2)
  int col = 0; // all factors are one-dimensional
  int target = fo.tree_index(3, "(b:(b:0,1),2)");
  CHECK(m.get(target, col) == Scalar::one(Q));

  // gamma(b; 1, b) produces (b:0,(b:1,2)) with no sign: the inner label
  // passes nothing of odd degree
  Shape sh2{2, {1, 2}};
  const auto& m2 = fo.operad->structure(sh2);
  int t2 = fo.tree_index(3, "(b:0,(b:1,2))");
  CHECK(m2.get(t2, 0) == Scalar::one(Q));
}
