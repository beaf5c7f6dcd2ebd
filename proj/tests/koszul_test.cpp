#include <catch_amalgamated.hpp>

#include <opcalc/koszul.hpp>

#include <map>

using namespace opcalc;

namespace {

const Field Q = Field::rationals();

long long factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

// free on a single binary generator complex x <- y (y in degree 1): labels in
// two degrees with a nonzero differential, to exercise every Koszul sign
OperadPtr two_cell_operad(int N) {
  std::vector<BasisElt> basis = {{"x", 0}, {"y", 1}};
  SparseMatrix d(Q, 2, 2);
  d.set(0, 1, Scalar::one(Q));
  SymSeq gens(Q, N);
  gens.set(2, EquivariantComplex::trivial(2, make_cc(ChainComplex(Q, basis, d))));
  return free_operad(gens).operad;
}

bool is_identity(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  for (int c = 0; c < m.cols(); ++c) {
    auto col = m.column_vec(c);
    if (col.size() != 1 || col[0].first != c) return false;
    if (!(col[0].second == Scalar::one(m.field()))) return false;
  }
  return true;
}

void check_retract_laws(const EquivariantComplex& e) {
  HomologyRetract rt = homology_retract(e);
  const SparseMatrix& d = e.complex->d();
  int hd = rt.h.dim();
  REQUIRE(is_identity(rt.retr * rt.incl));
  REQUIRE(d * rt.incl == SparseMatrix(Q, e.dim(), hd));
  REQUIRE(rt.retr * d == SparseMatrix(Q, hd, e.dim()));
  // incl and retr commute with every transposition
  for (std::size_t i = 0; i < e.gen.size(); ++i) {
    REQUIRE(e.gen[i] * rt.incl == rt.incl * rt.h.gen[i]);
    REQUIRE(rt.h.gen[i] * rt.retr == rt.retr * e.gen[i]);
  }
  REQUIRE_NOTHROW(rt.h.validate());
  // the retract has exactly the homology of the complex, degree by degree
  std::map<int, int> got;
  for (int j = 0; j < hd; ++j) ++got[rt.h.complex->deg(j)];
  REQUIRE(got == homology_dims(*e.complex));
}

} // namespace

TEST_CASE("cutting at the extreme partitions changes nothing", "[koszul]") {
  auto com = com_operad(Q, 4);
  Bar b = operad_bar(com);
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> all(n);
    for (int t = 0; t < n; ++t) all[t] = t;
    // the one-block partition leaves everything in the single lower part
    REQUIRE(is_identity(cut_at(b, b, b, SetPartition(n, {all}))));
    // the discrete partition leaves everything in the upper part
    std::vector<std::vector<int>> singl;
    for (int t = 0; t < n; ++t) singl.push_back({t});
    REQUIRE(is_identity(cut_at(b, b, b, SetPartition(n, singl))));
  }
}

TEST_CASE("homology retracts split equivariantly", "[koszul]") {
  Bar cb = operad_bar(com_operad(Q, 4));
  for (int n = 1; n <= 4; ++n) check_retract_laws(cb.at(n));

  // with internal differentials and mixed label degrees
  Bar tb = operad_bar(two_cell_operad(3));
  for (int n = 1; n <= 3; ++n) check_retract_laws(tb.at(n));
}

TEST_CASE("the dual of the bar is an operad", "[koszul]") {
  auto kd = koszul_dual_operad(com_operad(Q, 4));
  REQUIRE_NOTHROW(validate_operad(*kd.dual));

  // with internal differentials and mixed label degrees
  auto tk = koszul_dual_operad(two_cell_operad(3));
  REQUIRE_NOTHROW(validate_operad(*tk.dual));
}

TEST_CASE("dual of the bar over the commutative operad", "[koszul]") {
  // arity by arity, the dual of the bar (no composition maps needed here)
  SymSeq K = levelwise_dual(operad_bar(com_operad(Q, 5)).seq());

  // graded size agrees with the chain counts of the partition lattice
  REQUIRE(K.at(1).dim() == 1);
  REQUIRE(K.at(2).dim() == 1);
  REQUIRE(K.at(3).dim() == 4);
  REQUIRE(K.at(4).dim() == 32);
  REQUIRE(K.at(5).dim() == 436);

  auto eu = euler_per_arity(K);
  REQUIRE(eu == std::vector<long long>({0, 1, -1, 2, -6, 24}));

  // homology is (n-1)! concentrated in degree -(n-1)
  for (int n = 1; n <= 5; ++n) {
    auto h = homology_dims(*K.at(n).complex);
    REQUIRE(h.size() == 1);
    REQUIRE(h[-(n - 1)] == factorial(n - 1));
  }
}

TEST_CASE("the double dual recovers the operad in homology", "[koszul]") {
  auto kd = koszul_dual_operad(com_operad(Q, 4));
  auto kk = koszul_dual_operad(kd.dual);
  REQUIRE_NOTHROW(validate_operad(*kk.dual));
  for (int n = 1; n <= 4; ++n) {
    auto h = homology_dims(*kk.dual->at(n).complex);
    REQUIRE(h.size() == 1);
    REQUIRE(h[0] == 1);
    // the one-dimensional homology carries the trivial action
    HomologyRetract rt = homology_retract(kk.dual->seq().at(n));
    for (const auto& g : rt.h.gen) REQUIRE(is_identity(g));
  }
}

TEST_CASE("duals of one-sided modules are modules over the dual", "[koszul]") {
  auto com4 = com_operad(Q, 4);
  auto kd4 = koszul_dual_operad(com4);
  {
    // right side at arity 4: the cuts here permute equal-size blocks
    auto km = koszul_dual_module(kd4, operad_as_module(com4, OperadModule::Side::right));
    REQUIRE_NOTHROW(validate_module(km.dual));
    // the one-sided bar over the operad itself is acyclic away from arity 1
    for (int n = 1; n <= 4; ++n) {
      auto h = homology_dims(*km.dual.at(n).complex);
      if (n == 1) {
        REQUIRE(h.size() == 1);
        REQUIRE(h[0] == 1);
      } else {
        REQUIRE(h.empty());
      }
    }
  }

  auto com = com_operad(Q, 3);
  auto kd = koszul_dual_operad(com);
  {
    auto km = koszul_dual_module(kd, operad_as_module(com, OperadModule::Side::left));
    REQUIRE_NOTHROW(validate_module(km.dual));
    for (int n = 2; n <= 3; ++n) REQUIRE(homology_dims(*km.dual.at(n).complex).empty());
  }

  // with internal differentials and mixed label degrees
  auto tc = two_cell_operad(3);
  auto tk = koszul_dual_operad(tc);
  for (auto side : {OperadModule::Side::right, OperadModule::Side::left}) {
    auto km = koszul_dual_module(tk, operad_as_module(tc, side));
    REQUIRE_NOTHROW(validate_module(km.dual));
    for (int n = 2; n <= 3; ++n) REQUIRE(homology_dims(*km.dual.at(n).complex).empty());
  }
}
