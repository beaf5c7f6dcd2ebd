#include <cstdio>

#include "opcalc/koszul.hpp"

using namespace opcalc;

static void run(const char* name, const KoszulOperad& kp, const OperadModule& r,
                const OperadModule& l) {
  try {
    GammaMap gm = gamma_map(kp, r, l);
    bool q = gm.is_quasi_iso_all();
    std::printf("%s: chain+equivariant OK, qiso=%d\n", name, q ? 1 : 0);
    for (int n = 1; n <= gm.source.arity_max(); ++n) {
      std::printf("  n=%d src:", n);
      for (auto [d, k] : homology_dims(*gm.source.at(n).complex)) std::printf(" %d:%d", d, k);
      std::printf("  tgt:");
      for (auto [d, k] : homology_dims(*gm.target.at(n).complex)) std::printf(" %d:%d", d, k);
      std::printf("\n");
    }
  } catch (const std::exception& e) {
    std::printf("%s: FAIL %s\n", name, e.what());
  }
}

int main() {
  Field Q = Field::rationals();
  {
    OperadPtr p = com_operad(Q, 3);
    KoszulOperad kp = koszul_dual_operad(p);
    run("com(1,P,1) N=3", kp, unit_module(p, OperadModule::Side::right),
        unit_module(p, OperadModule::Side::left));
    run("com(P,P,P) N=3", kp, operad_as_module(p, OperadModule::Side::right),
        operad_as_module(p, OperadModule::Side::left));
  }
  {
    OperadPtr p = com_operad(Q, 4);
    KoszulOperad kp = koszul_dual_operad(p);
    run("com(1,P,1) N=4", kp, unit_module(p, OperadModule::Side::right),
        unit_module(p, OperadModule::Side::left));
  }
  {
    // free on a single binary generator complex x <- y (y in degree 1)
    std::vector<BasisElt> basis = {{"x", 0}, {"y", 1}};
    SparseMatrix d(Q, 2, 2);
    d.set(0, 1, Scalar::one(Q));
    SymSeq gens(Q, 3);
    gens.set(2, EquivariantComplex::trivial(2, make_cc(ChainComplex(Q, basis, d))));
    OperadPtr fr = free_operad(gens).operad;
    KoszulOperad kp = koszul_dual_operad(fr);
    run("two-cell(1,P,1) N=3", kp, unit_module(fr, OperadModule::Side::right),
        unit_module(fr, OperadModule::Side::left));
  }
  return 0;
}
