#pragma once

// Symmetric sequences of bounded chain complexes, truncated at a mandatory
// maximal arity N.  Each arity carries a symmetric-group action stored on the
// adjacent transpositions s_0..s_{n-2}; arbitrary permutations act through
// reduced words.  The composition product
//   (A o B)(n) = sum over set partitions lambda of {0..n-1} of
//                A(#lambda) (x) tensor over blocks b of B(|b|)
// is realized with canonical bases (partitions in restricted-growth lex
// order, labels row-major with the A-label slowest) and block-permutation
// actions with Koszul signs.

#include "opcalc/chain.hpp"
#include "opcalc/partitions.hpp"

#include <map>
#include <string>
#include <vector>

namespace opcalc {

// A chain complex with a symmetric-group action of the given arity, the
// action given by matrices for the adjacent transpositions.
struct EquivariantComplex {
  int arity = 0;
  CCPtr complex;
  std::vector<SparseMatrix> gen; // gen[i] = action of s_i, 0 <= i <= arity-2

  EquivariantComplex() = default;
  EquivariantComplex(int n, CCPtr c, std::vector<SparseMatrix> g)
      : arity(n), complex(std::move(c)), gen(std::move(g)) {
    if (static_cast<int>(gen.size()) != std::max(0, arity - 1))
      throw CheckFailed("wrong number of generator actions for arity");
  }

  // trivial action (every generator acts as the identity)
  static EquivariantComplex trivial(int n, CCPtr c) {
    std::vector<SparseMatrix> g(std::max(0, n - 1), SparseMatrix::identity(c->field(), c->size()));
    return EquivariantComplex(n, std::move(c), std::move(g));
  }

  const Field& field() const { return complex->field(); }
  int dim() const { return complex->size(); }

  SparseMatrix action_of(const Permutation& sigma) const {
    if (sigma.n() != arity) throw CheckFailed("permutation arity mismatch");
    SparseMatrix out = SparseMatrix::identity(field(), dim());
    for (int i : sigma.reduced_word()) out = out * gen.at(i);
    return out;
  }

  // generator matrices are chain maps satisfying the symmetric group
  // presentation: involutions, braid and commutation relations
  void validate() const {
    complex->validate();
    auto id = SparseMatrix::identity(field(), dim());
    for (const auto& g : gen) {
      ChainMap(complex, complex, 0, g).validate();
      if (!(g * g == id)) throw CheckFailed("generator action is not an involution");
    }
    for (std::size_t i = 0; i < gen.size(); ++i)
      for (std::size_t j = i + 1; j < gen.size(); ++j) {
        if (j == i + 1) {
          if (!(gen[i] * gen[j] * gen[i] == gen[j] * gen[i] * gen[j]))
            throw CheckFailed("braid relation fails");
        } else if (!(gen[i] * gen[j] == gen[j] * gen[i])) {
          throw CheckFailed("commutation relation fails");
        }
      }
  }
};

class SymSeq {
  Field f_;
  int N_ = 0;
  std::vector<EquivariantComplex> comp_; // comp_[n], n = 1..N; comp_[0] unused

public:
  SymSeq(Field f, int arity_max) : f_(f), N_(arity_max), comp_(arity_max + 1) {
    if (arity_max < 1) throw CheckFailed("arity_max must be >= 1");
    for (int n = 0; n <= N_; ++n) {
      comp_[n] = EquivariantComplex::trivial(n, make_cc(ChainComplex(f_)));
    }
  }

  const Field& field() const { return f_; }
  int arity_max() const { return N_; }

  const EquivariantComplex& at(int n) const {
    if (n < 1 || n > N_) throw CheckFailed("arity out of range");
    return comp_[n];
  }

  void set(int n, EquivariantComplex e) {
    if (n < 1 || n > N_) throw CheckFailed("arity out of range");
    if (e.arity != n) throw CheckFailed("component arity mismatch");
    if (e.field() != f_) throw FieldMismatch();
    comp_[n] = std::move(e);
  }

  void set(int n, CCPtr c, std::vector<SparseMatrix> gens) {
    set(n, EquivariantComplex(n, std::move(c), std::move(gens)));
  }

  void validate() const {
    for (int n = 1; n <= N_; ++n) comp_[n].validate();
  }

  std::map<int, std::map<int, int>> dims() const {
    std::map<int, std::map<int, int>> out;
    for (int n = 1; n <= N_; ++n)
      if (at(n).dim() > 0) out[n] = at(n).complex->dims_by_degree();
    return out;
  }
};

// unit symmetric sequence: one generator in arity 1, degree 0
inline SymSeq unit_seq(Field f, int N) {
  SymSeq u(f, N);
  u.set(1, EquivariantComplex::trivial(1, point_complex(f, "u", 0)));
  return u;
}

inline SymSeq truncate(const SymSeq& a, int N) {
  if (N > a.arity_max()) throw CheckFailed("cannot truncate upwards");
  SymSeq out(a.field(), N);
  for (int n = 1; n <= N; ++n) out.set(n, a.at(n));
  return out;
}

// arity-wise linear dual; the action of s_i dualizes to the transpose
inline SymSeq levelwise_dual(const SymSeq& a) {
  SymSeq out(a.field(), a.arity_max());
  for (int n = 1; n <= a.arity_max(); ++n) {
    const auto& e = a.at(n);
    std::vector<SparseMatrix> gens;
    for (const auto& g : e.gen) gens.push_back(g.transpose());
    out.set(n, EquivariantComplex(n, dual_complex(e.complex), std::move(gens)));
  }
  return out;
}

// per-arity Euler characteristic of the underlying graded vector space
inline std::vector<long long> euler_per_arity(const SymSeq& a) {
  std::vector<long long> out(a.arity_max() + 1, 0);
  for (int n = 1; n <= a.arity_max(); ++n)
    for (const auto& b : a.at(n).complex->basis()) out[n] += (b.deg % 2 == 0) ? 1 : -1;
  return out;
}

// arity-wise chain maps between symmetric sequences of the same truncation
struct SymSeqMap {
  std::vector<ChainMap> at_; // index n-1 for arity n

  const ChainMap& at(int n) const { return at_.at(n - 1); }
  int arity_max() const { return static_cast<int>(at_.size()); }

  static SymSeqMap zero(const SymSeq& a, const SymSeq& b) {
    SymSeqMap m;
    for (int n = 1; n <= a.arity_max(); ++n)
      m.at_.push_back(ChainMap::zero(a.at(n).complex, b.at(n).complex));
    return m;
  }

  static SymSeqMap identity(const SymSeq& a) {
    SymSeqMap m;
    for (int n = 1; n <= a.arity_max(); ++n) m.at_.push_back(ChainMap::identity(a.at(n).complex));
    return m;
  }

  // chain maps in every arity, commuting with the generator actions
  void validate(const SymSeq& a, const SymSeq& b) const {
    if (arity_max() != a.arity_max() || a.arity_max() != b.arity_max())
      throw CheckFailed("symseq map truncation mismatch");
    for (int n = 1; n <= a.arity_max(); ++n) {
      at(n).validate();
      for (int i = 0; i + 1 < n; ++i)
        if (!(b.at(n).gen[i] * at(n).m == at(n).m * a.at(n).gen[i]))
          throw CheckFailed("symseq map is not equivariant");
    }
  }

  bool is_quasi_iso_all() const {
    for (const auto& f : at_)
      if (!is_quasi_iso(f)) return false;
    return true;
  }
};

inline SymSeqMap compose_maps(const SymSeqMap& g, const SymSeqMap& f) {
  SymSeqMap out;
  for (int n = 1; n <= f.arity_max(); ++n) out.at_.push_back(compose(g.at(n), f.at(n)));
  return out;
}

// ---------------------------------------------------------------------------
// the composition product

// Index bookkeeping for one arity of A o B: which partitions contribute, the
// row-major label indexer per partition, and global offsets.
struct ComposeComponent {
  std::vector<SetPartition> parts;
  std::vector<TensorIndexer> ix;
  std::vector<int> offset;
  std::map<std::vector<int>, int> lambda_pos; // rg string -> position in parts
  int total = 0;

  int position_of(const SetPartition& lam) const {
    auto it = lambda_pos.find(lam.rg_string());
    return it == lambda_pos.end() ? -1 : it->second;
  }

  // global index of (lambda; a; b_1..b_k) given local factor indices
  int index(int pos, const std::vector<int>& tuple) const {
    return offset[pos] + ix[pos].flatten(tuple);
  }

  std::pair<int, std::vector<int>> locate(int global) const {
    int pos = static_cast<int>(std::upper_bound(offset.begin(), offset.end(), global) - offset.begin()) - 1;
    return {pos, ix[pos].unflatten(global - offset[pos])};
  }
};

struct ComposeResult {
  SymSeq seq;
  std::vector<ComposeComponent> comp; // index n-1 for arity n

  const ComposeComponent& at(int n) const { return comp.at(n - 1); }
};

inline std::string compose_id(const SetPartition& lam, const std::string& a_id,
                              const std::vector<std::string>& b_ids) {
  std::string out = "{" + lam.str() + ";" + a_id + ";";
  for (std::size_t i = 0; i < b_ids.size(); ++i) {
    if (i) out += ",";
    out += b_ids[i];
  }
  return out + "}";
}

inline ComposeResult compose_full(const SymSeq& a, const SymSeq& b) {
  if (a.field() != b.field()) throw FieldMismatch();
  if (a.arity_max() != b.arity_max()) throw CheckFailed("compose requires equal truncation");
  Field f = a.field();
  int N = a.arity_max();
  ComposeResult res{SymSeq(f, N), {}};
  for (int n = 1; n <= N; ++n) {
    ComposeComponent cc;
    std::vector<BasisElt> basis;
    for (const auto& lam : all_partitions(n)) {
      int k = lam.num_blocks();
      std::vector<const EquivariantComplex*> factors = {&a.at(k)};
      for (const auto& blk : lam.blocks()) factors.push_back(&b.at(static_cast<int>(blk.size())));
      bool empty = false;
      TensorIndexer ix;
      for (const auto* fac : factors) {
        ix.sizes.push_back(fac->dim());
        if (fac->dim() == 0) empty = true;
      }
      if (empty) continue;
      cc.lambda_pos[lam.rg_string()] = static_cast<int>(cc.parts.size());
      cc.parts.push_back(lam);
      cc.offset.push_back(cc.total);
      cc.ix.push_back(ix);
      int cnt = ix.total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = ix.unflatten(t);
        std::vector<std::string> b_ids;
        int deg = factors[0]->complex->deg(tuple[0]);
        for (int j = 1; j <= k; ++j) {
          b_ids.push_back(factors[j]->complex->elt(tuple[j]).id);
          deg += factors[j]->complex->deg(tuple[j]);
        }
        basis.push_back({compose_id(lam, factors[0]->complex->elt(tuple[0]).id, b_ids), deg});
      }
      cc.total += cnt;
    }

    // differential: Leibniz over (a, b_1, .., b_k)
    SparseMatrix d(f, cc.total, cc.total);
    for (std::size_t p = 0; p < cc.parts.size(); ++p) {
      const auto& lam = cc.parts[p];
      int k = lam.num_blocks();
      std::vector<const EquivariantComplex*> factors = {&a.at(k)};
      for (const auto& blk : lam.blocks()) factors.push_back(&b.at(static_cast<int>(blk.size())));
      int cnt = cc.ix[p].total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = cc.ix[p].unflatten(t);
        int col = cc.offset[p] + t;
        int sign_deg = 0;
        for (std::size_t fi = 0; fi < factors.size(); ++fi) {
          Scalar sgn = Scalar::sign(f, sign_deg);
          for (const auto& [r, v] : factors[fi]->complex->d().column_vec(tuple[fi])) {
            auto t2 = tuple;
            t2[fi] = r;
            d.add_to(cc.index(static_cast<int>(p), t2), col, sgn * v);
          }
          sign_deg += factors[fi]->complex->deg(tuple[fi]);
        }
      }
    }
    CCPtr complex = make_cc(ChainComplex(f, std::move(basis), std::move(d), false));

    // generator actions
    std::vector<SparseMatrix> gens;
    for (int gi = 0; gi + 1 < n; ++gi) {
      Permutation s = Permutation::adjacent(n, gi);
      SparseMatrix m(f, cc.total, cc.total);
      for (std::size_t p = 0; p < cc.parts.size(); ++p) {
        const auto& lam = cc.parts[p];
        int k = lam.num_blocks();
        auto act = induced_action(lam, s);
        int tp = cc.position_of(act.image);
        if (tp < 0) throw CheckFailed("image partition missing from compose basis");
        // A label moves by the block permutation, B labels by within-block ones
        SparseMatrix a_act = a.at(k).action_of(Permutation(act.block_dest));
        std::vector<SparseMatrix> b_act;
        for (int j = 0; j < k; ++j) {
          int sz = static_cast<int>(lam.block(j).size());
          b_act.push_back(b.at(sz).action_of(act.within[j]));
        }
        // source factor j goes to target slot act.block_dest[j]
        std::vector<int> from(k); // target slot -> source factor
        for (int j = 0; j < k; ++j) from[act.block_dest[j]] = j;
        int cnt = cc.ix[p].total();
        for (int t = 0; t < cnt; ++t) {
          auto tuple = cc.ix[p].unflatten(t);
          int col = cc.offset[p] + t;
          std::vector<int> degs(k);
          for (int j = 0; j < k; ++j)
            degs[j] = b.at(static_cast<int>(lam.block(j).size())).complex->deg(tuple[j + 1]);
          int sgn = koszul_reorder_sign(degs, from);
          // expand the product of per-factor images
          std::vector<std::pair<std::vector<int>, Scalar>> terms;
          for (const auto& [r, v] : a_act.column_vec(tuple[0]))
            terms.push_back({{r}, v});
          for (int j = 0; j < k; ++j) {
            std::vector<std::pair<std::vector<int>, Scalar>> next;
            for (const auto& [r, v] : b_act[j].column_vec(tuple[j + 1]))
              for (const auto& [pref, cval] : terms) {
                auto p2 = pref;
                p2.push_back(r);
                next.push_back({std::move(p2), cval * v});
              }
            terms = std::move(next);
            if (terms.empty()) break;
          }
          for (const auto& [tup, cval] : terms) {
            // tup = (a', b'_1..b'_k) indexed by source factors; rearrange to target slots
            std::vector<int> ttuple(k + 1);
            ttuple[0] = tup[0];
            for (int j = 0; j < k; ++j) ttuple[act.block_dest[j] + 1] = tup[j + 1];
            m.add_to(cc.index(tp, ttuple), col, cval * Scalar::integer(f, sgn));
          }
        }
      }
      gens.push_back(std::move(m));
    }
    res.seq.set(n, EquivariantComplex(n, complex, std::move(gens)));
    res.comp.push_back(std::move(cc));
  }
  return res;
}

inline SymSeq compose(const SymSeq& a, const SymSeq& b) { return compose_full(a, b).seq; }

// functoriality of the composition product in both slots (degree-0 maps):
// the induced map src = A o B -> tgt = A' o B' from fa: A -> A', fb: B -> B'
inline SymSeqMap compose_map(const SymSeqMap& fa, const SymSeqMap& fb,
                             const ComposeResult& src, const ComposeResult& tgt) {
  Field f = src.seq.field();
  SymSeqMap out;
  for (int n = 1; n <= src.seq.arity_max(); ++n) {
    const auto& sc = src.at(n);
    const auto& tc = tgt.at(n);
    SparseMatrix m(f, tgt.seq.at(n).dim(), src.seq.at(n).dim());
    for (std::size_t p = 0; p < sc.parts.size(); ++p) {
      const auto& lam = sc.parts[p];
      int k = lam.num_blocks();
      int tp = tc.position_of(lam);
      if (tp < 0) continue;
      std::vector<const SparseMatrix*> fm = {&fa.at(k).m};
      for (const auto& blk : lam.blocks()) fm.push_back(&fb.at(static_cast<int>(blk.size())).m);
      int cnt = sc.ix[p].total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = sc.ix[p].unflatten(t);
        int col = sc.offset[p] + t;
        std::vector<std::pair<std::vector<int>, Scalar>> terms = {{{}, Scalar::one(f)}};
        for (std::size_t fi = 0; fi < fm.size(); ++fi) {
          std::vector<std::pair<std::vector<int>, Scalar>> next;
          for (const auto& [r, v] : fm[fi]->column_vec(tuple[fi]))
            for (const auto& [pref, cval] : terms) {
              auto p2 = pref;
              p2.push_back(r);
              next.push_back({std::move(p2), cval * v});
            }
          terms = std::move(next);
          if (terms.empty()) break;
        }
        for (const auto& [tup, cval] : terms) m.add_to(tc.index(tp, tup), col, cval);
      }
    }
    out.at_.push_back(ChainMap(src.seq.at(n).complex, tgt.seq.at(n).complex, 0, std::move(m)));
  }
  return out;
}

// A o 1 -> A: only the discrete partition contributes, all B labels units
inline SymSeqMap right_unit_iso(const SymSeq& a, const ComposeResult& a_unit) {
  Field f = a.field();
  SymSeqMap out;
  for (int n = 1; n <= a.arity_max(); ++n) {
    const auto& cc = a_unit.at(n);
    SparseMatrix m(f, a.at(n).dim(), a_unit.seq.at(n).dim());
    int p = cc.position_of(SetPartition::discrete(n));
    if (p >= 0) {
      int cnt = cc.ix[p].total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = cc.ix[p].unflatten(t);
        m.set(tuple[0], cc.offset[p] + t, Scalar::one(f));
      }
    }
    out.at_.push_back(ChainMap(a_unit.seq.at(n).complex, a.at(n).complex, 0, std::move(m)));
  }
  return out;
}

// 1 o A -> A: only the indiscrete partition contributes
inline SymSeqMap left_unit_iso(const SymSeq& a, const ComposeResult& unit_a) {
  Field f = a.field();
  SymSeqMap out;
  for (int n = 1; n <= a.arity_max(); ++n) {
    const auto& cc = unit_a.at(n);
    SparseMatrix m(f, a.at(n).dim(), unit_a.seq.at(n).dim());
    int p = cc.position_of(SetPartition::indiscrete(n));
    if (p >= 0) {
      int cnt = cc.ix[p].total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = cc.ix[p].unflatten(t);
        m.set(tuple[1], cc.offset[p] + t, Scalar::one(f));
      }
    }
    out.at_.push_back(ChainMap(unit_a.seq.at(n).complex, a.at(n).complex, 0, std::move(m)));
  }
  return out;
}

// the associativity isomorphism (A o B) o C -> A o (B o C); pure relabeling
// with Koszul signs from interleaving the B and C labels
inline SymSeqMap assoc_iso(const SymSeq& a, const SymSeq& b, const SymSeq& c,
                           const ComposeResult& ab, const ComposeResult& ab_c,
                           const ComposeResult& bc, const ComposeResult& a_bc) {
  Field f = a.field();
  int N = a.arity_max();
  SymSeqMap out;
  for (int n = 1; n <= N; ++n) {
    const auto& outer = ab_c.at(n); // partitions mu with (AoB)(#mu) labels
    SparseMatrix m(f, a_bc.seq.at(n).dim(), ab_c.seq.at(n).dim());
    for (std::size_t mp = 0; mp < outer.parts.size(); ++mp) {
      const auto& mu = outer.parts[mp];
      int mm = mu.num_blocks();
      const auto& inner = ab.at(mm); // partitions nu of the mu-blocks
      int cnt = outer.ix[mp].total();
      for (int t = 0; t < cnt; ++t) {
        auto tuple = outer.ix[mp].unflatten(t); // ((AoB)(mm) index, c_1..c_mm)
        int col = outer.offset[mp] + t;
        auto [np, atuple] = inner.locate(tuple[0]); // (nu; a, b_1..b_k)
        const auto& nu = inner.parts[np];
        int k = nu.num_blocks();
        // lambda: one block per nu-block, union of the mu-blocks in it
        std::vector<std::vector<int>> lam_blocks(k);
        for (int j = 0; j < k; ++j)
          for (int mb : nu.block(j))
            for (int x : mu.block(mb)) lam_blocks[j].push_back(x);
        SetPartition lam(n, lam_blocks);
        // nu-block order equals lambda-block order (both sorted by minima)
        // target: (lambda; a; (kappa_j; b_j, restricted c's)_j)
        const auto& tc = a_bc.at(n);
        int tp = tc.position_of(lam);
        if (tp < 0) throw CheckFailed("assoc image partition missing");
        std::vector<int> ttuple = {atuple[0]};
        // Koszul: source order (b_1..b_k, c_1..c_mm), target order
        // (b_1, c's of nu-block 1, b_2, c's of nu-block 2, ...)
        std::vector<int> degs;
        std::vector<int> reorder; // target position -> source position
        for (int j = 0; j < k; ++j) {
          int sz = static_cast<int>(nu.block(j).size());
          degs.push_back(b.at(sz).complex->deg(atuple[j + 1]));
        }
        for (int mb = 0; mb < mm; ++mb) {
          int sz = static_cast<int>(mu.block(mb).size());
          degs.push_back(c.at(sz).complex->deg(tuple[mb + 1]));
        }
        for (int j = 0; j < k; ++j) {
          reorder.push_back(j);
          for (int mb : nu.block(j)) reorder.push_back(k + mb);
        }
        int sgn = koszul_reorder_sign(degs, reorder);
        // build the (B o C)(|lambda_j|) index for each lambda block
        for (int j = 0; j < k; ++j) {
          // kappa_j: partition of lambda.block(j) induced by the mu-blocks
          std::vector<int> renum(n, -1);
          const auto& lblk = lam.block(j);
          for (std::size_t s = 0; s < lblk.size(); ++s) renum[lblk[s]] = static_cast<int>(s);
          std::vector<std::vector<int>> kb;
          for (int mb : nu.block(j)) {
            std::vector<int> blkk;
            for (int x : mu.block(mb)) blkk.push_back(renum[x]);
            kb.push_back(std::move(blkk));
          }
          SetPartition kappa(static_cast<int>(lblk.size()), kb);
          const auto& bcc = bc.at(static_cast<int>(lblk.size()));
          int kp = bcc.position_of(kappa);
          if (kp < 0) throw CheckFailed("assoc inner partition missing");
          std::vector<int> ktuple = {atuple[j + 1]};
          for (int mb : nu.block(j)) ktuple.push_back(tuple[mb + 1]);
          ttuple.push_back(bcc.index(kp, ktuple));
        }
        m.add_to(tc.index(tp, ttuple), col, Scalar::integer(f, sgn));
      }
    }
    out.at_.push_back(ChainMap(ab_c.seq.at(n).complex, a_bc.seq.at(n).complex, 0, std::move(m)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// equivariant mapping complexes

// One arity of an equivariant mapping complex: the full hom complex, the
// inclusion of the invariant subcomplex (columns = invariant basis vectors),
// and where this arity's block starts in the assembled total complex.
struct InvariantHom {
  CCPtr hom;
  SparseMatrix incl;
  int offset = 0;

  int dim() const { return incl.cols(); }

  // express a vector of the hom complex known to be invariant in the
  // invariant basis (throws if it is not in the span)
  SparseVec coords(const SparseVec& v) const {
    SparseMatrix rhs(incl.field(), incl.rows(), 1);
    for (const auto& [r, val] : v) rhs.set(r, 0, val);
    SparseMatrix x = incl.solve(rhs);
    SparseVec out;
    for (int r = 0; r < x.rows(); ++r) {
      Scalar val = x.get(r, 0);
      if (!val.is_zero()) out.emplace_back(r, val);
    }
    return out;
  }
};

struct MapSigma {
  CCPtr complex;
  std::vector<InvariantHom> arity; // index r-1
};

// matrix of conjugation F -> gn . F . gm on Hom(M, N) bases E_{y,x},
// where gm must already be the inverse of the group element's action on M
inline SparseMatrix hom_conjugation(const SparseMatrix& gn, const SparseMatrix& gm) {
  Field f = gn.field();
  int nc = gm.rows();
  int hn = gn.rows() * nc;
  SparseMatrix conj(f, hn, hn);
  for (int y = 0; y < gn.rows(); ++y)
    for (int x = 0; x < nc; ++x)
      for (const auto& [yp, vy] : gn.column_vec(y))
        for (const auto& [xp, vx] : gm.row(x)) // gm[x, x'] runs over row x
          conj.add_to(yp * nc + xp, y * nc + x, vy * vx);
  return conj;
}

// The complex of symmetric-sequence maps M -> N: in each arity the
// Sigma_r-invariants of Hom(M(r), N(r)) under conjugation
// F -> rho_N(s_i) F rho_M(s_i)^{-1}, assembled over all arities.
inline MapSigma map_sigma_full(const SymSeq& m, const SymSeq& n) {
  if (m.field() != n.field()) throw FieldMismatch();
  if (m.arity_max() != n.arity_max()) throw CheckFailed("map_sigma truncation mismatch");
  Field f = m.field();
  MapSigma out;
  int total = 0;
  for (int r = 1; r <= m.arity_max(); ++r) {
    CCPtr h = hom_complex(m.at(r).complex, n.at(r).complex);
    int hn = h->size();
    // joint kernel of (conjugation - identity) over all generators;
    // with no generators (arity 1) everything is invariant
    int ng = std::max(0, r - 1);
    SparseMatrix big(f, hn * ng, hn);
    for (int i = 0; i < ng; ++i) {
      // s_i is an involution, so its action is its own inverse
      SparseMatrix diff = hom_conjugation(n.at(r).gen[i], m.at(r).gen[i]) -
                          SparseMatrix::identity(f, hn);
      for (int rr = 0; rr < hn; ++rr)
        for (const auto& [ccol, v] : diff.row(rr)) big.set(i * hn + rr, ccol, v);
    }
    InvariantHom ih{h, big.kernel(), total};
    total += ih.dim();
    out.arity.push_back(std::move(ih));
  }
  // assemble: one basis vector per invariant element, differential from hom
  std::vector<BasisElt> bas;
  SparseMatrix d(f, total, total);
  for (std::size_t rI = 0; rI < out.arity.size(); ++rI) {
    const auto& ih = out.arity[rI];
    const auto& h = ih.hom;
    for (int j = 0; j < ih.dim(); ++j) {
      SparseVec col = ih.incl.column_vec(j);
      // invariant basis vectors are homogeneous because conjugation preserves degree
      int degv = col.empty() ? 0 : h->deg(col.front().first);
      for (const auto& [idx, val] : col) {
        (void)val;
        if (h->deg(idx) != degv) throw CheckFailed("invariant basis vector not homogeneous");
      }
      bas.push_back({"m" + std::to_string(rI + 1) + ":" + std::to_string(j), degv});
    }
    if (ih.dim() > 0) {
      SparseMatrix dk = h->d() * ih.incl;
      SparseMatrix coords = ih.incl.solve(dk); // d preserves invariants
      for (int rr = 0; rr < coords.rows(); ++rr)
        for (const auto& [ccol, v] : coords.row(rr)) d.set(ih.offset + rr, ih.offset + ccol, v);
    }
  }
  out.complex = make_cc(ChainComplex(f, std::move(bas), std::move(d), false));
  return out;
}

inline CCPtr map_sigma(const SymSeq& m, const SymSeq& n) { return map_sigma_full(m, n).complex; }

} // namespace opcalc
