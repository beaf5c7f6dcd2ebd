#pragma once

// Koszul duality at the chain level: the linear dual of the bar B(1, P, 1)
// carries an operad structure whose composition maps are the duals of the
// cut maps, and dually for one-sided modules.  Everything is finite
// dimensional arity by arity, so duality is exact and the cooperad laws of
// the cuts are equivalent to the operad laws of the dual, which are machine
// checked by the usual validators.
//
// The combinatorial cut (cut_at) distributes the simplicial coordinates by
// front/back faces in canonical block order.  That rule is a chain map and
// strictly coassociative, but it is not equivariant on the nose: swapping two
// equal-size blocks turns an accepted coordinate distribution into a rejected
// one (the smallest failure is arity 4, cutting at a pair of 2-blocks), and
// the fully symmetrized rule loses coassociativity instead (smallest failure
// arity 5).  No rule supported on single chains does both.  The structure
// maps used here therefore conjugate the combinatorial cut onto homology
// representatives through an equivariant splitting: with incl: H -> C and
// retr: C -> H chain maps satisfying retr*incl = id, d*incl = 0, retr*d = 0,
// all chosen commuting with the symmetric group actions, the composite
//
//   lawful_cut = (incl (x) .. (x) incl) o [(retr (x) ..) o cut o incl] o retr
//
// is a chain map, and every cooperad law holds exactly: in any two-step
// composite the interior retr*incl collapses to the identity, so the laws
// reduce to their homology-level counterparts, where the strict laws of the
// combinatorial cut survive (corrections of the form d*h or h*d die against
// retr*d = 0 and d*incl = 0) and where the cut's failure of equivariance,
// being a boundary, vanishes.  Cuts at the two extreme partitions stay the
// exact unit isomorphisms, so counit and unit laws hold on the nose as well.

#include <opcalc/bar.hpp>

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

namespace detail {

// sign of the pairing (A_0 (x) .. (x) A_r)* ~ A_0* (x) .. (x) A_r* on a basis
// tuple: dual-basis functionals crossing the arguments they do not consume
inline int pairing_sign(const std::vector<int>& degs) {
  int s = 0;
  for (std::size_t i = 0; i < degs.size(); ++i)
    for (std::size_t j = i + 1; j < degs.size(); ++j) s += degs[i] * degs[j];
  return (s % 2 == 0) ? 1 : -1;
}

// the partition of {0..n-1} into consecutive blocks of the given sizes
inline SetPartition consecutive_partition(const std::vector<int>& sizes) {
  std::vector<std::vector<int>> blocks;
  int at = 0;
  for (int sz : sizes) {
    std::vector<int> blk;
    for (int t = 0; t < sz; ++t) blk.push_back(at++);
    blocks.push_back(std::move(blk));
  }
  return SetPartition(at, std::move(blocks));
}

// transpose of a cut matrix with the pairing signs: rows of the cut are
// indexed by [head(k), inner(n_1), .., inner(n_k)] and become columns of a
// composition-shaped map into the dual of the cut's source
inline SparseMatrix dual_of_cut(const SparseMatrix& cut, const Shape& s, const SymSeq& head,
                                const SymSeq& inner, int src_dim) {
  std::vector<int> dims = {head.at(s.k).dim()};
  for (int nj : s.ns) dims.push_back(inner.at(nj).dim());
  TensorIndexer tix{dims};
  SparseMatrix gm(head.field(), src_dim, tix.total());
  for (int col = 0; col < src_dim; ++col)
    for (const auto& [row, v] : cut.column_vec(col)) {
      auto tup = tix.unflatten(row);
      std::vector<int> degs = {head.at(s.k).complex->deg(tup[0])};
      for (std::size_t i = 0; i < s.ns.size(); ++i)
        degs.push_back(inner.at(s.ns[i]).complex->deg(tup[1 + i]));
      gm.add_to(col, row, v * Scalar::integer(head.field(), pairing_sign(degs)));
    }
  return gm;
}

// a basis of the column space (echelonizing the transpose keeps the columns
// homogeneous for degree-homogeneous inputs)
inline SparseMatrix column_space_basis(const SparseMatrix& m) {
  SparseMatrix t = m.transpose();
  auto pivots = t.echelonize(false);
  std::vector<int> keep;
  keep.reserve(pivots.size());
  for (auto [r, c] : pivots) {
    (void)c;
    keep.push_back(r);
  }
  return t.select_rows(keep).transpose();
}

// some projection of the ambient space onto the span of the given
// (independent) columns; made equivariant afterwards by group averaging
inline SparseMatrix projection_onto(const SparseMatrix& cols) {
  Field f = cols.field();
  int n = cols.rows();
  int s = cols.cols();
  if (s == 0) return SparseMatrix(f, n, n);
  SparseMatrix t = cols.transpose();
  auto pivots = t.echelonize(false);
  if (static_cast<int>(pivots.size()) != s)
    throw CheckFailed("projection target basis is not independent");
  SparseMatrix sel(f, s, n);
  std::vector<int> pc;
  pc.reserve(s);
  for (auto [r, c] : pivots) {
    (void)r;
    pc.push_back(c);
  }
  for (int i = 0; i < s; ++i) sel.set(i, pc[i], Scalar::one(f));
  SparseMatrix coords = cols.select_rows(pc); // s x s, invertible
  return cols * coords.solve(sel);
}

} // namespace detail

// Reynolds operator: average an endomorphism over the symmetric group acting
// through the generator matrices, by the coset recursion along the chain of
// point stabilizers.  Requires the group order to be invertible in the field.
inline SparseMatrix group_average(const EquivariantComplex& e, SparseMatrix a) {
  Field f = e.field();
  for (int k = 2; k <= e.arity; ++k) {
    if (Scalar::integer(f, k).is_zero())
      throw CheckFailed("field characteristic divides the symmetric group order");
    // coset representatives c_{k-1} = id, c_j = s_j * c_{j+1} move the last
    // point of {0..k-1} to position j
    SparseMatrix x = a;
    SparseMatrix sum = a;
    for (int j = k - 2; j >= 0; --j) {
      x = e.gen[j] * x * e.gen[j];
      sum = sum + x;
    }
    a = sum.scaled(Scalar::integer(f, k).inverse());
  }
  return a;
}

// An equivariant splitting of a complex onto its homology: incl includes a
// complex with zero differential, retr projects back, and
//   retr * incl = id,   d * incl = 0,   retr * d = 0,
// with incl and retr commuting with the symmetric group action.
struct HomologyRetract {
  EquivariantComplex h; // zero differential, the induced action
  SparseMatrix incl;    // h -> complex
  SparseMatrix retr;    // complex -> h
};

inline HomologyRetract homology_retract(const EquivariantComplex& e) {
  Field f = e.field();
  int n = e.dim();
  const SparseMatrix& d = e.complex->d();
  // equivariant projections onto the cycles and onto the boundaries
  SparseMatrix p = group_average(e, detail::projection_onto(d.kernel()));
  SparseMatrix q = group_average(e, detail::projection_onto(detail::column_space_basis(d)));
  // kills boundaries and everything outside the cycles, fixes a complement
  // of the boundaries inside the cycles
  SparseMatrix pi = (SparseMatrix::identity(f, n) - q) * p;
  SparseMatrix incl = detail::column_space_basis(pi);
  SparseMatrix retr = incl.solve(pi);
  std::vector<BasisElt> bas;
  for (int j = 0; j < incl.cols(); ++j) {
    SparseVec col = incl.column_vec(j);
    int deg = e.complex->deg(col.front().first);
    for (const auto& [r, v] : col) {
      (void)v;
      if (e.complex->deg(r) != deg) throw CheckFailed("homology representative not homogeneous");
    }
    bas.push_back({"h" + std::to_string(j), deg});
  }
  int hd = static_cast<int>(bas.size());
  CCPtr hc = make_cc(ChainComplex(f, std::move(bas), SparseMatrix(f, hd, hd), false));
  std::vector<SparseMatrix> gens;
  for (const auto& g : e.gen) gens.push_back(retr * g * incl);
  return HomologyRetract{EquivariantComplex(e.arity, std::move(hc), std::move(gens)),
                         std::move(incl), std::move(retr)};
}

// per-arity retracts of a symmetric sequence, indexed by arity - 1
inline std::vector<HomologyRetract> seq_retracts(const SymSeq& s) {
  std::vector<HomologyRetract> out;
  out.reserve(s.arity_max());
  for (int n = 1; n <= s.arity_max(); ++n) out.push_back(homology_retract(s.at(n)));
  return out;
}

// Kronecker product of degree-zero maps; rows and columns are flattened
// row-major with the first factor slowest, matching TensorIndexer
inline SparseMatrix tensor_of_maps(Field f, const std::vector<const SparseMatrix*>& fac) {
  std::vector<int> rdims, cdims;
  for (const auto* m : fac) {
    rdims.push_back(m->rows());
    cdims.push_back(m->cols());
  }
  TensorIndexer rix{rdims}, cix{cdims};
  SparseMatrix out(f, rix.total(), cix.total());
  for (int c = 0; c < cix.total(); ++c) {
    auto tup = cix.unflatten(c);
    std::vector<std::pair<std::vector<int>, Scalar>> terms = {{{}, Scalar::one(f)}};
    for (std::size_t i = 0; i < fac.size(); ++i) {
      std::vector<std::pair<std::vector<int>, Scalar>> next;
      for (const auto& [r, v] : fac[i]->column_vec(tup[i]))
        for (const auto& [pref, cv] : terms) {
          auto p2 = pref;
          p2.push_back(r);
          next.push_back({std::move(p2), cv * v});
        }
      terms = std::move(next);
      if (terms.empty()) break;
    }
    for (const auto& [rt, v] : terms) out.add_to(rix.flatten(rt), c, v);
  }
  return out;
}

// The lawful cocomposition at a partition: the combinatorial cut conjugated
// onto homology representatives (see the header comment).  An extreme
// partition keeps the exact raw cut precisely when that cut is the unit
// isomorphism: the one-block partition when the bar is unit-ended on top
// (every chain then starts at the one-block partition), the discrete
// partition when it is unit-ended at the bottom.  Those are the cuts the
// unit and counit laws constrain to be exact; everything else is structure
// and goes through the retracts.
inline SparseMatrix lawful_cut(const Bar& b, const Bar& upper, const Bar& lower,
                               const SetPartition& lam,
                               const std::vector<HomologyRetract>& rt_src,
                               const std::vector<HomologyRetract>& rt_up,
                               const std::vector<HomologyRetract>& rt_lo) {
  int n = lam.n();
  int k = lam.num_blocks();
  SparseMatrix raw = cut_at(b, upper, lower, lam);
  if (k == 1 && bar_detail::is_unit_input(b.right_input())) return raw;
  if (k == n && bar_detail::is_unit_input(b.left_input())) return raw;
  Field f = b.seq().field();
  const HomologyRetract& sn = rt_src.at(n - 1);
  std::vector<const SparseMatrix*> rfac = {&rt_up.at(k - 1).retr};
  std::vector<const SparseMatrix*> ifac = {&rt_up.at(k - 1).incl};
  for (const auto& blk : lam.blocks()) {
    int m = static_cast<int>(blk.size());
    rfac.push_back(&rt_lo.at(m - 1).retr);
    ifac.push_back(&rt_lo.at(m - 1).incl);
  }
  SparseMatrix mid = tensor_of_maps(f, rfac) * (raw * sn.incl);
  return tensor_of_maps(f, ifac) * (mid * sn.retr);
}

// K(P) = D(B(1, P, 1)): the dual of the bar with the duals of the lawful
// cuts as composition maps, kept together with the bar it came from and the
// equivariant retracts of the bar (reused for the duals of modules).
struct KoszulOperad {
  OperadPtr dual;
  Bar bar;
  std::vector<HomologyRetract> retract;
};

inline KoszulOperad koszul_dual_operad(const OperadPtr& p) {
  Bar b = operad_bar(p);
  std::vector<HomologyRetract> rt = seq_retracts(b.seq());
  SymSeq dseq = levelwise_dual(b.seq());
  std::map<std::string, SparseMatrix> g;
  for (const auto& s : all_shapes(p->arity_max())) {
    SparseMatrix cut = lawful_cut(b, b, b, detail::consecutive_partition(s.ns), rt, rt, rt);
    g[s.key()] = detail::dual_of_cut(cut, s, b.seq(), b.seq(), b.at(s.total()).dim());
  }
  return KoszulOperad{std::make_shared<const Operad>(std::move(dseq), std::move(g)), std::move(b),
                      std::move(rt)};
}

// K-dual of a one-sided module: the dual of B(M, P, 1) (right) or B(1, P, M)
// (left) with the duals of the lawful coaction cuts as the action maps, a
// module over K(P) of the same sidedness.  The bar and its retracts are
// returned alongside.
struct KoszulModule {
  OperadModule dual;
  Bar bar;
  std::vector<HomologyRetract> retract;
};

inline KoszulModule koszul_dual_module(const KoszulOperad& kp, const OperadModule& m) {
  const OperadPtr& p = kp.bar.over();
  if (m.over() != p) throw CheckFailed("module is over a different operad");
  bool right = m.side() == OperadModule::Side::right;
  Bar bm = right ? Bar(m, kp.bar.left_input()) : Bar(kp.bar.right_input(), m);
  std::vector<HomologyRetract> rtm = seq_retracts(bm.seq());
  const Bar& upper = right ? bm : kp.bar;
  const Bar& lower = right ? kp.bar : bm;
  const SymSeq& head = right ? bm.seq() : kp.bar.seq();
  const SymSeq& inner = right ? kp.bar.seq() : bm.seq();
  const auto& rt_up = right ? rtm : kp.retract;
  const auto& rt_lo = right ? kp.retract : rtm;
  SymSeq dseq = levelwise_dual(bm.seq());
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(p->arity_max())) {
    SparseMatrix cut =
        lawful_cut(bm, upper, lower, detail::consecutive_partition(s.ns), rtm, rt_up, rt_lo);
    act[s.key()] = detail::dual_of_cut(cut, s, head, inner, bm.at(s.total()).dim());
  }
  return KoszulModule{OperadModule(m.side(), kp.dual, std::move(dseq), std::move(act)),
                      std::move(bm), std::move(rtm)};
}

// ---------------------------------------------------------------------------
// the comparison map from the bar over the dual to the dual of the bar

// The comparison map from the bar over the Koszul dual (of the dual modules)
// to the dual of the two-sided bar, with the bars it connects.  A simplicial
// level-m element of the source carries m suspensions on top of its dual
// labels, while every functional on the two-sided bar has the degree of a
// plain dual label tuple, so degree reasons confine the map to level 0: a
// level-0 element (a single partition decorated with dual labels) pairs with
// the lawful cut of the two-sided bar at that partition, and all higher
// levels map to zero.  Being a chain map is then exactly the compatibility
// of neighbouring cuts (the face images of every level-1 element must
// cancel), which holds by the two-step laws of the lawful cuts and is
// machine-checked on construction; the construction aborts otherwise.
struct GammaMap {
  Bar source;     // bar over the dual operad, of the two dual modules
  Bar target_bar; // B(R, P, L)
  SymSeq target;  // levelwise dual of target_bar
  SymSeqMap map;  // source.seq() -> target

  bool is_quasi_iso_all() const { return map.is_quasi_iso_all(); }
};

inline GammaMap gamma_map(const KoszulOperad& kp, const OperadModule& r, const OperadModule& l) {
  const OperadPtr& p = kp.bar.over();
  if (r.over() != p || l.over() != p)
    throw CheckFailed("comparison map inputs must be modules over the bar's operad");
  if (r.side() != OperadModule::Side::right || l.side() != OperadModule::Side::left)
    throw CheckFailed("comparison map wants a right module and a left module");
  Field f = p->field();
  int N = p->arity_max();

  KoszulModule kr = koszul_dual_module(kp, r);
  KoszulModule kl = koszul_dual_module(kp, l);
  Bar source(kr.dual, kl.dual);
  Bar tb(r, l);
  std::vector<HomologyRetract> rtt = seq_retracts(tb.seq());
  SymSeq dt = levelwise_dual(tb.seq());

  SymSeqMap gm;
  for (int n = 1; n <= N; ++n) {
    SparseMatrix g(f, tb.at(n).dim(), source.at(n).dim());
    for (const auto& ci : source.chains(n)) {
      if (ci.k() != 0) continue; // suspended levels pair to zero
      const SetPartition& mu = ci.lam[0];
      SparseMatrix cut = lawful_cut(tb, kr.bar, kl.bar, mu, rtt, kr.retract, kl.retract);
      // tensor factors: the head quotient piece, then the per-block pieces in
      // canonical block order -- the same layout as the source chain's labels
      std::vector<CCPtr> fac = {kr.bar.at(mu.num_blocks()).complex};
      for (const auto& blk : mu.blocks()) fac.push_back(kl.bar.at(static_cast<int>(blk.size())).complex);
      int fc = static_cast<int>(fac.size());
      for (int a = 0; a < fc; ++a)
        if (fac[a]->size() != ci.ix.sizes[a])
          throw CheckFailed("cut factors disagree with the source chain");
      for (int x = 0; x < cut.cols(); ++x)
        for (const auto& [row, v] : cut.column_vec(x)) {
          auto tup = ci.ix.unflatten(row);
          std::vector<int> degs(fc);
          for (int a = 0; a < fc; ++a) degs[a] = fac[a]->deg(tup[a]);
          g.add_to(x, ci.offset + row, v * Scalar::integer(f, detail::pairing_sign(degs)));
        }
    }
    gm.at_.push_back(ChainMap(source.at(n).complex, dt.at(n).complex, 0, std::move(g)));
  }
  gm.validate(source.seq(), dt); // aborts the assembly on any sign regression
  return GammaMap{std::move(source), std::move(tb), std::move(dt), std::move(gm)};
}

} // namespace opcalc
