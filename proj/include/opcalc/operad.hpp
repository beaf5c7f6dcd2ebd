#pragma once

// Operads and their one-sided modules in symmetric sequences of chain
// complexes.  Structure maps are stored per shape
//   gamma[k;n1,..,nk] : P(k) (x) P(n1) (x) .. (x) P(nk) -> P(n1+..+nk)
// on row-major tensor bases (the outer label slowest), and assembled into
// maps out of the composition product for the axiom checks; the assembled
// map on a partition component is the shape map followed by the action of
// the permutation aligning contiguous blocks with the partition's blocks.
// Also: the commutative operad, free operads on rooted trees with labeled
// vertices, and augmentations.

#include "opcalc/symseq.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace opcalc {

struct Shape {
  int k = 0;
  std::vector<int> ns;

  int total() const {
    int t = 0;
    for (int n : ns) t += n;
    return t;
  }

  std::string key() const {
    std::string out = std::to_string(k) + ";";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(ns[i]);
    }
    return out;
  }

  static Shape of_partition(const SetPartition& nu) {
    Shape s;
    s.k = nu.num_blocks();
    for (const auto& b : nu.blocks()) s.ns.push_back(static_cast<int>(b.size()));
    return s;
  }
};

// all shapes with k parts >= 1 and total <= N
inline std::vector<Shape> all_shapes(int N) {
  std::vector<Shape> out;
  for (int n = 1; n <= N; ++n) {
    // compositions of n
    std::vector<std::vector<int>> comps;
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int rest) {
      if (rest == 0) {
        comps.push_back(cur);
        return;
      }
      for (int first = 1; first <= rest; ++first) {
        cur.push_back(first);
        rec(rest - first);
        cur.pop_back();
      }
    };
    rec(n);
    for (auto& c : comps) out.push_back(Shape{static_cast<int>(c.size()), std::move(c)});
  }
  return out;
}

// permutation sending the contiguous standard blocks (sizes as in nu's
// canonical block order) onto nu's actual blocks, order preserved per block
inline Permutation partition_alignment(const SetPartition& nu) {
  std::vector<int> img(nu.n());
  int off = 0;
  for (const auto& b : nu.blocks()) {
    for (std::size_t t = 0; t < b.size(); ++t) img[off + static_cast<int>(t)] = b[t];
    off += static_cast<int>(b.size());
  }
  return Permutation(img);
}

namespace detail {

// expand a product of per-factor sparse columns into (tuple, coefficient) terms
inline std::vector<std::pair<std::vector<int>, Scalar>> column_product(
    Field f, const std::vector<const SparseMatrix*>& mats, const std::vector<int>& cols) {
  std::vector<std::pair<std::vector<int>, Scalar>> terms = {{{}, Scalar::one(f)}};
  for (std::size_t i = 0; i < mats.size(); ++i) {
    std::vector<std::pair<std::vector<int>, Scalar>> next;
    for (const auto& [r, v] : mats[i]->column_vec(cols[i]))
      for (const auto& [pref, c] : terms) {
        auto p2 = pref;
        p2.push_back(r);
        next.push_back({std::move(p2), c * v});
      }
    terms = std::move(next);
    if (terms.empty()) break;
  }
  return terms;
}

} // namespace detail

class Operad {
  SymSeq seq_;
  std::map<std::string, SparseMatrix> g_;

public:
  Operad(SymSeq seq, std::map<std::string, SparseMatrix> gammas)
      : seq_(std::move(seq)), g_(std::move(gammas)) {
    if (seq_.at(1).dim() != 1 || seq_.at(1).complex->deg(0) != 0)
      throw CheckFailed("operad must be reduced: arity 1 is one generator in degree 0");
  }

  const SymSeq& seq() const { return seq_; }
  const Field& field() const { return seq_.field(); }
  int arity_max() const { return seq_.arity_max(); }
  const EquivariantComplex& at(int n) const { return seq_.at(n); }

  const SparseMatrix& structure(const Shape& s) const {
    auto it = g_.find(s.key());
    if (it == g_.end()) throw CheckFailed("missing structure map for shape " + s.key());
    return it->second;
  }

  const std::map<std::string, SparseMatrix>& structure_maps() const { return g_; }

  // assembled composition along a partition nu of {0..n-1}:
  // P(#nu) (x) blocks of P(|b|) (row-major, outer slowest) -> P(n)
  SparseMatrix gamma_at(const SetPartition& nu) const {
    SparseMatrix m = structure(Shape::of_partition(nu));
    Permutation align = partition_alignment(nu);
    if (align.is_identity()) return m;
    return seq_.at(nu.n()).action_of(align) * m;
  }
};

using OperadPtr = std::shared_ptr<const Operad>;

// one-sided modules; the action is stored per shape like an operad's gamma:
//   right: R(k) (x) P(n1) (x) .. (x) P(nk) -> R(n)
//   left:  P(k) (x) L(n1) (x) .. (x) L(nk) -> L(n)
class OperadModule {
public:
  enum class Side { left, right };

private:
  Side side_;
  OperadPtr over_;
  SymSeq seq_;
  std::map<std::string, SparseMatrix> act_;

public:
  OperadModule(Side side, OperadPtr over, SymSeq seq, std::map<std::string, SparseMatrix> act)
      : side_(side), over_(std::move(over)), seq_(std::move(seq)), act_(std::move(act)) {
    if (seq_.arity_max() != over_->arity_max()) throw CheckFailed("module truncation mismatch");
    if (seq_.field() != over_->field()) throw FieldMismatch();
  }

  Side side() const { return side_; }
  const OperadPtr& over() const { return over_; }
  const SymSeq& seq() const { return seq_; }
  const Field& field() const { return seq_.field(); }
  int arity_max() const { return seq_.arity_max(); }
  const EquivariantComplex& at(int n) const { return seq_.at(n); }

  const SparseMatrix& structure(const Shape& s) const {
    auto it = act_.find(s.key());
    if (it == act_.end()) throw CheckFailed("missing action map for shape " + s.key());
    return it->second;
  }

  SparseMatrix action_at(const SetPartition& nu) const {
    SparseMatrix m = structure(Shape::of_partition(nu));
    Permutation align = partition_alignment(nu);
    if (align.is_identity()) return m;
    return seq_.at(nu.n()).action_of(align) * m;
  }
};

// ---------------------------------------------------------------------------
// assembling structure maps over the composition product

// gamma as a map of symmetric sequences P o P -> P (or module actions
// R o P -> R, P o L -> L), given the compose bookkeeping of the source
template <class AtPartition>
inline SymSeqMap assemble_over_compose(const ComposeResult& src, const SymSeq& tgt,
                                       AtPartition&& at_partition) {
  Field f = tgt.field();
  SymSeqMap out;
  for (int n = 1; n <= tgt.arity_max(); ++n) {
    const auto& cc = src.at(n);
    SparseMatrix m(f, tgt.at(n).dim(), src.seq.at(n).dim());
    for (std::size_t p = 0; p < cc.parts.size(); ++p) {
      SparseMatrix local = at_partition(cc.parts[p]); // tgt.dim x ix[p].total()
      int cnt = cc.ix[p].total();
      for (int t = 0; t < cnt; ++t)
        for (const auto& [r, v] : local.column_vec(t)) m.add_to(r, cc.offset[p] + t, v);
    }
    out.at_.push_back(ChainMap(src.seq.at(n).complex, tgt.at(n).complex, 0, std::move(m)));
  }
  return out;
}

inline SymSeqMap operad_gamma_map(const Operad& p, const ComposeResult& pp) {
  return assemble_over_compose(pp, p.seq(), [&](const SetPartition& nu) { return p.gamma_at(nu); });
}

inline SymSeqMap module_action_map(const OperadModule& m, const ComposeResult& src) {
  return assemble_over_compose(src, m.seq(),
                               [&](const SetPartition& nu) { return m.action_at(nu); });
}

// unit eta: 1 -> P
inline SymSeqMap operad_unit_map(const Operad& p, const SymSeq& unit) {
  SymSeqMap out = SymSeqMap::zero(unit, p.seq());
  SparseMatrix m(p.field(), 1, 1);
  m.set(0, 0, Scalar::one(p.field()));
  out.at_[0] = ChainMap(unit.at(1).complex, p.at(1).complex, 0, m);
  return out;
}

// augmentation P -> 1: identity in arity 1, zero above
inline SymSeqMap operad_augmentation(const Operad& p, const SymSeq& unit) {
  SymSeqMap out = SymSeqMap::zero(p.seq(), unit);
  SparseMatrix m(p.field(), 1, 1);
  m.set(0, 0, Scalar::one(p.field()));
  out.at_[0] = ChainMap(p.at(1).complex, unit.at(1).complex, 0, m);
  return out;
}

// Full operad law check: equivariant chain map, unital, associative.
// Builds P o P and (P o P) o P, so keep truncations small when calling.
inline void validate_operad(const Operad& p) {
  p.seq().validate();
  SymSeq u = unit_seq(p.field(), p.arity_max());
  auto pp = compose_full(p.seq(), p.seq());
  SymSeqMap gamma = operad_gamma_map(p, pp);
  gamma.validate(pp.seq, p.seq());

  // units: gamma o (eta o id) = left unit iso, gamma o (id o eta) = right unit iso
  auto up = compose_full(u, p.seq());
  auto pu = compose_full(p.seq(), u);
  SymSeqMap eta = operad_unit_map(p, u);
  SymSeqMap lhs = compose_maps(gamma, compose_map(eta, SymSeqMap::identity(p.seq()), up, pp));
  SymSeqMap lu = left_unit_iso(p.seq(), up);
  SymSeqMap rhs = compose_maps(gamma, compose_map(SymSeqMap::identity(p.seq()), eta, pu, pp));
  SymSeqMap ru = right_unit_iso(p.seq(), pu);
  for (int n = 1; n <= p.arity_max(); ++n) {
    if (!(lhs.at(n).m == lu.at(n).m)) throw CheckFailed("operad left unit law fails");
    if (!(rhs.at(n).m == ru.at(n).m)) throw CheckFailed("operad right unit law fails");
  }

  // associativity: gamma(gamma o id) = gamma(id o gamma) assoc
  auto pp_p = compose_full(pp.seq, p.seq());
  auto p_pp = compose_full(p.seq(), pp.seq);
  SymSeqMap left = compose_maps(gamma, compose_map(gamma, SymSeqMap::identity(p.seq()), pp_p, pp));
  SymSeqMap asc = assoc_iso(p.seq(), p.seq(), p.seq(), pp, pp_p, pp, p_pp);
  SymSeqMap right =
      compose_maps(compose_maps(gamma, compose_map(SymSeqMap::identity(p.seq()), gamma, p_pp, pp)), asc);
  for (int n = 1; n <= p.arity_max(); ++n)
    if (!(left.at(n).m == right.at(n).m)) throw CheckFailed("operad associativity fails");
}

// module law check against the operad's gamma
inline void validate_module(const OperadModule& m) {
  m.seq().validate();
  const Operad& p = *m.over();
  SymSeq u = unit_seq(p.field(), p.arity_max());
  if (m.side() == OperadModule::Side::right) {
    auto rp = compose_full(m.seq(), p.seq());
    SymSeqMap alpha = module_action_map(m, rp);
    alpha.validate(rp.seq, m.seq());
    // unit: alpha o (id o eta) = right unit iso
    auto ru_ = compose_full(m.seq(), u);
    SymSeqMap eta = operad_unit_map(p, u);
    SymSeqMap unit_path =
        compose_maps(alpha, compose_map(SymSeqMap::identity(m.seq()), eta, ru_, rp));
    SymSeqMap ru = right_unit_iso(m.seq(), ru_);
    for (int n = 1; n <= p.arity_max(); ++n)
      if (!(unit_path.at(n).m == ru.at(n).m)) throw CheckFailed("right module unit law fails");
    // associativity: alpha(alpha o id) = alpha(id o gamma) assoc on (R o P) o P
    auto pp = compose_full(p.seq(), p.seq());
    SymSeqMap gamma = operad_gamma_map(p, pp);
    auto rp_p = compose_full(rp.seq, p.seq());
    auto r_pp = compose_full(m.seq(), pp.seq);
    SymSeqMap left =
        compose_maps(alpha, compose_map(alpha, SymSeqMap::identity(p.seq()), rp_p, rp));
    SymSeqMap asc = assoc_iso(m.seq(), p.seq(), p.seq(), rp, rp_p, pp, r_pp);
    SymSeqMap right = compose_maps(
        compose_maps(alpha, compose_map(SymSeqMap::identity(m.seq()), gamma, r_pp, rp)), asc);
    for (int n = 1; n <= p.arity_max(); ++n)
      if (!(left.at(n).m == right.at(n).m)) throw CheckFailed("right module associativity fails");
  } else {
    auto pl = compose_full(p.seq(), m.seq());
    SymSeqMap beta = module_action_map(m, pl);
    beta.validate(pl.seq, m.seq());
    // unit: beta o (eta o id) = left unit iso
    auto ul = compose_full(u, m.seq());
    SymSeqMap eta = operad_unit_map(p, u);
    SymSeqMap unit_path =
        compose_maps(beta, compose_map(eta, SymSeqMap::identity(m.seq()), ul, pl));
    SymSeqMap lu = left_unit_iso(m.seq(), ul);
    for (int n = 1; n <= p.arity_max(); ++n)
      if (!(unit_path.at(n).m == lu.at(n).m)) throw CheckFailed("left module unit law fails");
    // associativity: beta(gamma o id) = beta(id o beta) assoc on (P o P) o L
    auto pp = compose_full(p.seq(), p.seq());
    SymSeqMap gamma = operad_gamma_map(p, pp);
    auto pp_l = compose_full(pp.seq, m.seq());
    auto p_pl = compose_full(p.seq(), pl.seq);
    SymSeqMap left =
        compose_maps(beta, compose_map(gamma, SymSeqMap::identity(m.seq()), pp_l, pl));
    SymSeqMap asc = assoc_iso(p.seq(), p.seq(), m.seq(), pp, pp_l, pl, p_pl);
    SymSeqMap right = compose_maps(
        compose_maps(beta, compose_map(SymSeqMap::identity(p.seq()), beta, p_pl, pl)), asc);
    for (int n = 1; n <= p.arity_max(); ++n)
      if (!(left.at(n).m == right.at(n).m)) throw CheckFailed("left module associativity fails");
  }
}

// ---------------------------------------------------------------------------
// standard operads and modules

// the commutative operad: one generator in every arity, trivial action,
// all structure maps identical to 1
inline OperadPtr com_operad(Field f, int N) {
  SymSeq seq(f, N);
  for (int n = 1; n <= N; ++n)
    seq.set(n, EquivariantComplex::trivial(n, point_complex(f, "c" + std::to_string(n), 0)));
  std::map<std::string, SparseMatrix> g;
  for (const auto& s : all_shapes(N)) {
    if (s.k > N) continue;
    SparseMatrix m(f, 1, 1);
    m.set(0, 0, Scalar::one(f));
    g[s.key()] = m;
  }
  return std::make_shared<const Operad>(SymSeq(seq), std::move(g));
}

// P as a module over itself on either side (action = gamma)
inline OperadModule operad_as_module(const OperadPtr& p, OperadModule::Side side) {
  return OperadModule(side, p, p->seq(), p->structure_maps());
}

// the unit sequence as a module over P through the augmentation: the only
// surviving action map is the (1;1) shape
inline OperadModule unit_module(const OperadPtr& p, OperadModule::Side side) {
  Field f = p->field();
  SymSeq u = unit_seq(f, p->arity_max());
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(p->arity_max())) {
    // right: u(k) (x) P(ni..); left: P(k) (x) u(ni..)
    int rows = (s.total() == 1) ? 1 : 0;
    int cols = 0;
    if (side == OperadModule::Side::right) {
      int c = u.at(s.k).dim();
      for (int n : s.ns) c *= p->at(n).dim();
      cols = c;
    } else {
      int c = p->at(s.k).dim();
      for (int n : s.ns) c *= u.at(n).dim();
      cols = c;
    }
    SparseMatrix m(f, rows, cols);
    if (s.total() == 1 && cols == 1) m.set(0, 0, Scalar::one(f));
    act[s.key()] = std::move(m);
  }
  return OperadModule(side, p, std::move(u), std::move(act));
}

// ---------------------------------------------------------------------------
// free operads on rooted trees

// A rooted tree with bijectively labeled leaves and generator-labeled
// internal vertices (arity >= 2).  Canonical form: children sorted by their
// minimal leaf; the label tensor is read in preorder.
struct Tree {
  int leaf = -1; // >= 0 for leaves
  int gen_arity = 0;
  int gen_index = 0;
  std::vector<Tree> kids;

  bool is_leaf() const { return leaf >= 0; }

  static Tree make_leaf(int label) {
    Tree t;
    t.leaf = label;
    return t;
  }

  static Tree make_node(int arity, int index, std::vector<Tree> kids) {
    Tree t;
    t.gen_arity = arity;
    t.gen_index = index;
    t.kids = std::move(kids);
    return t;
  }

  int min_leaf() const {
    if (is_leaf()) return leaf;
    int m = kids.front().min_leaf();
    for (const auto& k : kids) m = std::min(m, k.min_leaf());
    return m;
  }

  int leaf_count() const {
    if (is_leaf()) return 1;
    int c = 0;
    for (const auto& k : kids) c += k.leaf_count();
    return c;
  }

  int internal_count() const {
    if (is_leaf()) return 0;
    int c = 1;
    for (const auto& k : kids) c += k.internal_count();
    return c;
  }

  int degree(const SymSeq& gens) const {
    if (is_leaf()) return 0;
    int d = gens.at(gen_arity).complex->deg(gen_index);
    for (const auto& k : kids) d += k.degree(gens);
    return d;
  }

  void labels_preorder(const SymSeq& gens, std::vector<std::pair<int, int>>& out) const {
    if (is_leaf()) return;
    (void)gens;
    out.emplace_back(gen_arity, gen_index);
    for (const auto& k : kids) k.labels_preorder(gens, out);
  }

  std::string encode(const SymSeq& gens) const {
    if (is_leaf()) return std::to_string(leaf);
    std::string out = "(" + gens.at(gen_arity).complex->elt(gen_index).id + ":";
    for (std::size_t i = 0; i < kids.size(); ++i) {
      if (i) out += ",";
      out += kids[i].encode(gens);
    }
    return out + ")";
  }
};

// canonical form: sort children recursively by min leaf; the sign is the
// Koszul sign of the induced reordering of the preorder label tensor
inline std::pair<Tree, int> tree_canonical(const Tree& t, const SymSeq& gens) {
  if (t.is_leaf()) return {t, 1};
  int sign = 1;
  std::vector<Tree> kids;
  std::vector<int> block_deg;
  for (const auto& k : t.kids) {
    auto [ck, s] = tree_canonical(k, gens);
    sign *= s;
    block_deg.push_back(ck.degree(gens));
    kids.push_back(std::move(ck));
  }
  // stable order of children by min leaf
  std::vector<int> order(kids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return kids[a].min_leaf() < kids[b].min_leaf(); });
  sign *= koszul_reorder_sign(block_deg, order);
  std::vector<Tree> sorted;
  for (int i : order) sorted.push_back(std::move(kids[i]));
  return {Tree::make_node(t.gen_arity, t.gen_index, std::move(sorted)), sign};
}

// all canonical trees on a sorted leaf set, vertices labeled from gens
inline std::vector<Tree> trees_on_leaves(const std::vector<int>& leaves, const SymSeq& gens) {
  std::vector<Tree> out;
  if (leaves.size() == 1) {
    out.push_back(Tree::make_leaf(leaves[0]));
    return out;
  }
  int m = static_cast<int>(leaves.size());
  // partitions of the leaf set with >= 2 blocks = root's children leaf sets
  for (const auto& pi : all_partitions(m)) {
    int k = pi.num_blocks();
    if (k < 2 || k > gens.arity_max()) continue;
    if (gens.at(k).dim() == 0) continue;
    // subtree choices per block
    std::vector<std::vector<Tree>> choices;
    for (const auto& blk : pi.blocks()) {
      std::vector<int> sub;
      for (int i : blk) sub.push_back(leaves[i]);
      choices.push_back(trees_on_leaves(sub, gens));
    }
    std::vector<int> pick(k, 0);
    while (true) {
      for (int gi = 0; gi < gens.at(k).dim(); ++gi) {
        std::vector<Tree> kids;
        for (int j = 0; j < k; ++j) kids.push_back(choices[j][pick[j]]);
        out.push_back(Tree::make_node(k, gi, std::move(kids)));
      }
      int j = k - 1;
      while (j >= 0 && pick[j] + 1 == static_cast<int>(choices[j].size())) {
        pick[j] = 0;
        --j;
      }
      if (j < 0) break;
      ++pick[j];
    }
  }
  return out;
}

struct FreeOperad {
  OperadPtr operad;
  SymSeq gens;
  std::vector<std::vector<Tree>> trees; // per arity n, index n-1
  std::vector<std::map<std::string, int>> index; // encoding -> basis index

  int tree_index(int n, const std::string& enc) const {
    auto it = index.at(n - 1).find(enc);
    if (it == index.at(n - 1).end()) throw CheckFailed("unknown tree " + enc);
    return it->second;
  }
};

// graft sub[i] onto leaf i of top, relabeling sub[i]'s leaves by the
// contiguous offsets; returns the canonical tree and the Koszul sign of
// moving the label tensors from (top, sub_1, .., sub_k) into preorder
inline std::pair<Tree, int> graft(const Tree& top, const std::vector<Tree>& sub,
                                  const std::vector<int>& offsets, const SymSeq& gens) {
  // source label positions: top's labels first (0..), then sub_1's, sub_2's, ...
  std::vector<std::vector<std::pair<int, int>>> sub_labels(sub.size());
  std::vector<std::pair<int, int>> top_labels;
  top.labels_preorder(gens, top_labels);
  int pos = static_cast<int>(top_labels.size());
  std::vector<int> sub_start(sub.size());
  for (std::size_t i = 0; i < sub.size(); ++i) {
    sub[i].labels_preorder(gens, sub_labels[i]);
    sub_start[i] = pos;
    pos += static_cast<int>(sub_labels[i].size());
  }
  // walk and substitute; collect source positions in target preorder
  std::vector<int> order;
  int top_cursor = 0;
  std::function<Tree(const Tree&)> walk = [&](const Tree& t) -> Tree {
    if (t.is_leaf()) {
      int i = t.leaf;
      // append sub[i]'s label positions, relabel its leaves
      for (std::size_t s = 0; s < sub_labels[i].size(); ++s)
        order.push_back(sub_start[i] + static_cast<int>(s));
      std::function<Tree(const Tree&)> relab = [&](const Tree& u) -> Tree {
        if (u.is_leaf()) return Tree::make_leaf(u.leaf + offsets[i]);
        std::vector<Tree> kids;
        for (const auto& k : u.kids) kids.push_back(relab(k));
        return Tree::make_node(u.gen_arity, u.gen_index, std::move(kids));
      };
      return relab(sub[i]);
    }
    order.push_back(top_cursor++);
    std::vector<Tree> kids;
    for (const auto& k : t.kids) kids.push_back(walk(k));
    return Tree::make_node(t.gen_arity, t.gen_index, std::move(kids));
  };
  // the cursor must step over top's labels in preorder, which walk() does
  Tree built = walk(top);
  std::vector<int> degs;
  for (const auto& [ar, ix] : top_labels) degs.push_back(gens.at(ar).complex->deg(ix));
  for (const auto& sl : sub_labels)
    for (const auto& [ar, ix] : sl) degs.push_back(gens.at(ar).complex->deg(ix));
  int sign = koszul_reorder_sign(degs, order);
  auto [canon, s2] = tree_canonical(built, gens);
  return {canon, sign * s2};
}

// the free operad on a generator sequence (gens(1) must vanish)
inline FreeOperad free_operad(const SymSeq& gens) {
  Field f = gens.field();
  int N = gens.arity_max();
  if (gens.at(1).dim() != 0) throw CheckFailed("free operad wants generators in arities >= 2");
  FreeOperad fo{{}, gens, {}, {}};
  SymSeq seq(f, N);

  // bases: canonical trees ordered by internal vertex count then encoding
  for (int n = 1; n <= N; ++n) {
    std::vector<int> leaves(n);
    for (int i = 0; i < n; ++i) leaves[i] = i;
    auto ts = trees_on_leaves(leaves, gens);
    std::vector<std::pair<Tree, int>> canon;
    for (auto& t : ts) {
      auto [c, s] = tree_canonical(t, gens);
      if (s != 1) throw CheckFailed("enumerated tree should already be canonical");
      canon.push_back({std::move(c), 0});
    }
    std::sort(canon.begin(), canon.end(), [&](const auto& a, const auto& b) {
      int ia = a.first.internal_count(), ib = b.first.internal_count();
      if (ia != ib) return ia < ib;
      return a.first.encode(gens) < b.first.encode(gens);
    });
    std::vector<Tree> list;
    std::map<std::string, int> idx;
    std::vector<BasisElt> basis;
    for (auto& [t, s] : canon) {
      (void)s;
      std::string enc = t.encode(gens);
      idx[enc] = static_cast<int>(list.size());
      basis.push_back({enc, t.degree(gens)});
      list.push_back(std::move(t));
    }
    fo.trees.push_back(std::move(list));
    fo.index.push_back(std::move(idx));

    // differential: Leibniz over the preorder label tensor
    int dim = static_cast<int>(basis.size());
    SparseMatrix d(f, dim, dim);
    for (int col = 0; col < dim; ++col) {
      const Tree& t = fo.trees[n - 1][col];
      // iterate over internal vertices in preorder, replacing the label
      int prefix_deg = 0;
      std::function<void(const Tree&, std::function<Tree(Tree)>)> visit =
          [&](const Tree& node, std::function<Tree(Tree)> rebuild) {
            if (node.is_leaf()) return;
            // differential on this node's label
            for (const auto& [r, v] :
                 gens.at(node.gen_arity).complex->d().column_vec(node.gen_index)) {
              Tree repl = node;
              repl.gen_index = r;
              auto [ct, cs] = tree_canonical(rebuild(repl), gens);
              d.add_to(fo.index[n - 1].at(ct.encode(gens)), col,
                       Scalar::sign(f, prefix_deg) * v * Scalar::integer(f, cs));
            }
            prefix_deg += gens.at(node.gen_arity).complex->deg(node.gen_index);
            for (std::size_t ki = 0; ki < node.kids.size(); ++ki) {
              const Tree& kid = node.kids[ki];
              visit(kid, [&, ki](Tree nk) {
                Tree copy = node;
                copy.kids[ki] = std::move(nk);
                return rebuild(std::move(copy));
              });
            }
          };
      visit(t, [](Tree x) { return x; });
    }

    // actions: relabel leaves and recanonicalize
    std::vector<SparseMatrix> gen_mats;
    for (int i = 0; i + 1 < n; ++i) {
      Permutation s = Permutation::adjacent(n, i);
      SparseMatrix m(f, dim, dim);
      for (int col = 0; col < dim; ++col) {
        std::function<Tree(const Tree&)> relab = [&](const Tree& u) -> Tree {
          if (u.is_leaf()) return Tree::make_leaf(s(u.leaf));
          std::vector<Tree> kids;
          for (const auto& k : u.kids) kids.push_back(relab(k));
          return Tree::make_node(u.gen_arity, u.gen_index, std::move(kids));
        };
        auto [ct, cs] = tree_canonical(relab(fo.trees[n - 1][col]), gens);
        m.add_to(fo.index[n - 1].at(ct.encode(gens)), col, Scalar::integer(f, cs));
      }
      gen_mats.push_back(std::move(m));
    }
    seq.set(n, EquivariantComplex(n, make_cc(ChainComplex(f, std::move(basis), std::move(d), false)),
                                  std::move(gen_mats)));
  }

  // structure maps by grafting
  std::map<std::string, SparseMatrix> g;
  for (const auto& sh : all_shapes(N)) {
    int n = sh.total();
    int k = sh.k;
    if (k > N) continue;
    TensorIndexer ix;
    ix.sizes.push_back(static_cast<int>(fo.trees[k - 1].size()));
    for (int ni : sh.ns) ix.sizes.push_back(static_cast<int>(fo.trees[ni - 1].size()));
    std::vector<int> offsets;
    int off = 0;
    for (int ni : sh.ns) {
      offsets.push_back(off);
      off += ni;
    }
    SparseMatrix m(f, static_cast<int>(fo.trees[n - 1].size()), ix.total());
    for (int colv = 0; colv < ix.total(); ++colv) {
      auto tuple = ix.unflatten(colv);
      const Tree& top = fo.trees[k - 1][tuple[0]];
      std::vector<Tree> sub;
      for (int j = 0; j < k; ++j) sub.push_back(fo.trees[sh.ns[j] - 1][tuple[j + 1]]);
      auto [ct, sign] = graft(top, sub, offsets, fo.gens);
      m.add_to(fo.index[n - 1].at(ct.encode(fo.gens)), colv, Scalar::integer(f, sign));
    }
    g[sh.key()] = std::move(m);
  }

  fo.operad = std::make_shared<const Operad>(std::move(seq), std::move(g));
  return fo;
}

// functoriality in the generators: a degree-0 equivariant map of generator
// sequences induces an operad map on free operads, label by label
inline SymSeqMap free_operad_map(const FreeOperad& src, const FreeOperad& tgt,
                                 const SymSeqMap& gen_map) {
  Field f = src.gens.field();
  int N = src.gens.arity_max();
  SymSeqMap out;
  for (int n = 1; n <= N; ++n) {
    int sdim = static_cast<int>(src.trees[n - 1].size());
    SparseMatrix m(f, static_cast<int>(tgt.trees[n - 1].size()), sdim);
    for (int col = 0; col < sdim; ++col) {
      // replace each vertex label by its image, expanding linearly
      std::function<std::vector<std::pair<Tree, Scalar>>(const Tree&)> expand =
          [&](const Tree& t) -> std::vector<std::pair<Tree, Scalar>> {
        if (t.is_leaf()) return {{t, Scalar::one(f)}};
        std::vector<std::pair<std::vector<Tree>, Scalar>> kidterms = {{{}, Scalar::one(f)}};
        for (const auto& k : t.kids) {
          auto opts = expand(k);
          std::vector<std::pair<std::vector<Tree>, Scalar>> next;
          for (const auto& [kt, kv] : opts)
            for (const auto& [pref, pv] : kidterms) {
              auto p2 = pref;
              p2.push_back(kt);
              next.push_back({std::move(p2), pv * kv});
            }
          kidterms = std::move(next);
        }
        std::vector<std::pair<Tree, Scalar>> res;
        for (const auto& [lab, lv] : gen_map.at(t.gen_arity).m.column_vec(t.gen_index))
          for (const auto& [kids, kv] : kidterms)
            res.push_back({Tree::make_node(t.gen_arity, lab, kids), lv * kv});
        return res;
      };
      for (const auto& [tt, v] : expand(src.trees[n - 1][col])) {
        auto [ct, cs] = tree_canonical(tt, tgt.gens);
        m.add_to(tgt.tree_index(n, ct.encode(tgt.gens)), col, v * Scalar::integer(f, cs));
      }
    }
    out.at_.push_back(
        ChainMap(src.operad->at(n).complex, tgt.operad->at(n).complex, 0, std::move(m)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// two-sided modules

// A sequence with commuting left and right actions of the same operad.
class OperadBimodule {
  OperadPtr over_;
  SymSeq seq_;
  std::map<std::string, SparseMatrix> ract_, lact_;

public:
  OperadBimodule(OperadPtr over, SymSeq seq, std::map<std::string, SparseMatrix> right_act,
                 std::map<std::string, SparseMatrix> left_act)
      : over_(std::move(over)), seq_(std::move(seq)), ract_(std::move(right_act)),
        lact_(std::move(left_act)) {
    if (seq_.arity_max() != over_->arity_max()) throw CheckFailed("bimodule truncation mismatch");
    if (seq_.field() != over_->field()) throw FieldMismatch();
  }

  const OperadPtr& over() const { return over_; }
  const SymSeq& seq() const { return seq_; }
  const Field& field() const { return seq_.field(); }
  int arity_max() const { return seq_.arity_max(); }
  const EquivariantComplex& at(int n) const { return seq_.at(n); }

  OperadModule right_module() const {
    return OperadModule(OperadModule::Side::right, over_, seq_, ract_);
  }
  OperadModule left_module() const {
    return OperadModule(OperadModule::Side::left, over_, seq_, lact_);
  }
};

inline OperadBimodule operad_as_bimodule(const OperadPtr& p) {
  return OperadBimodule(p, p->seq(), p->structure_maps(), p->structure_maps());
}

// Both one-sided laws plus the middle interchange:
// acting on the left then the right equals the reassociated right-then-left.
inline void validate_bimodule(const OperadBimodule& m) {
  OperadModule r = m.right_module();
  OperadModule l = m.left_module();
  validate_module(r);
  validate_module(l);

  const Operad& p = *m.over();
  auto pm = compose_full(p.seq(), m.seq());
  auto mp = compose_full(m.seq(), p.seq());
  auto pm_p = compose_full(pm.seq, p.seq());
  auto p_mp = compose_full(p.seq(), mp.seq);
  SymSeqMap alpha = module_action_map(r, mp);
  SymSeqMap beta = module_action_map(l, pm);
  SymSeqMap id_p = SymSeqMap::identity(p.seq());
  SymSeqMap id_m = SymSeqMap::identity(m.seq());
  SymSeqMap left = compose_maps(alpha, compose_map(beta, id_p, pm_p, mp));
  SymSeqMap asc = assoc_iso(p.seq(), m.seq(), p.seq(), pm, pm_p, mp, p_mp);
  SymSeqMap right =
      compose_maps(compose_maps(beta, compose_map(id_p, alpha, p_mp, pm)), asc);
  for (int n = 1; n <= m.arity_max(); ++n)
    if (!(left.at(n).m == right.at(n).m))
      throw CheckFailed("bimodule left and right actions do not commute");
}

// ---------------------------------------------------------------------------
// composing a module with a plain symmetric sequence on its free side

namespace detail {

// Koszul sign for interleaving parents with their children:
//   [p_0 .. p_{K-1}, c_0 .. c_{M-1}]  ->  [p_0, kids(0).., p_1, kids(1)..]
// children[j] lists the child positions of parent j (each child once).
// The inverse reordering has the same sign (the same pairs cross).
inline int interleave_sign(const std::vector<int>& parent_degs, const std::vector<int>& child_degs,
                           const std::vector<std::vector<int>>& children) {
  std::vector<int> degs = parent_degs;
  degs.insert(degs.end(), child_degs.begin(), child_degs.end());
  int K = static_cast<int>(parent_degs.size());
  std::vector<int> perm;
  perm.reserve(degs.size());
  for (int j = 0; j < K; ++j) {
    perm.push_back(j);
    for (int c : children[j]) perm.push_back(K + c);
  }
  return koszul_reorder_sign(degs, perm);
}

} // namespace detail

// A module whose underlying sequence is a composition product, together with
// the bookkeeping needed to address its basis by (partition; labels).
struct ComposedModule {
  OperadModule module;
  ComposeResult comp;
};

// A o R as a right module, R a right module: the operad acts through R on
// each block of the outer partition.
inline ComposedModule right_module_compose(const SymSeq& a, const OperadModule& r) {
  if (r.side() != OperadModule::Side::right) throw CheckFailed("right module expected");
  Field f = r.field();
  int N = r.arity_max();
  ComposeResult ar = compose_full(a, r.seq());
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(N)) {
    int k = s.k;
    if (k > N) continue;
    int n = s.total();
    std::vector<int> off(k + 1, 0);
    for (int j = 0; j < k; ++j) off[j + 1] = off[j] + s.ns[j];
    std::vector<int> src_dims = {ar.seq.at(k).dim()};
    for (int nj : s.ns) src_dims.push_back(r.over()->at(nj).dim());
    TensorIndexer six(src_dims);
    SparseMatrix mat(f, ar.seq.at(n).dim(), six.total());
    const auto& cck = ar.at(k);
    const auto& ccn = ar.at(n);
    for (std::size_t pos = 0; pos < cck.parts.size(); ++pos) {
      const SetPartition& kap = cck.parts[pos];
      int m = kap.num_blocks();
      // blown-up partition of [n] and the per-block action matrices
      std::vector<std::vector<int>> blown;
      std::vector<SparseMatrix> blockact;
      std::vector<TensorIndexer> blockix;
      for (const auto& blk : kap.blocks()) {
        std::vector<int> big;
        std::vector<std::vector<int>> nus;
        std::vector<int> bdims = {0};
        int at = 0;
        for (int j : blk) {
          std::vector<int> range;
          for (int t = 0; t < s.ns[j]; ++t) {
            big.push_back(off[j] + t);
            range.push_back(at++);
          }
          nus.push_back(std::move(range));
          bdims.push_back(r.over()->at(s.ns[j]).dim());
        }
        bdims[0] = r.at(static_cast<int>(blk.size())).dim();
        blockix.push_back(TensorIndexer(bdims));
        blockact.push_back(r.action_at(SetPartition(at, std::move(nus))));
        blown.push_back(std::move(big));
      }
      int tpos = ccn.position_of(SetPartition(n, std::move(blown)));
      std::vector<const SparseMatrix*> mats;
      for (const auto& bm : blockact) mats.push_back(&bm);
      int cnt = cck.ix[pos].total();
      for (int t = 0; t < cnt; ++t) {
        std::vector<int> tup = cck.ix[pos].unflatten(t); // [a, r_1..r_m]
        std::vector<int> rdegs(m);
        for (int c = 0; c < m; ++c)
          rdegs[c] = r.at(static_cast<int>(kap.blocks()[c].size())).complex->deg(tup[c + 1]);
        std::vector<int> qtuple(k, 0);
        std::function<void(int)> walk = [&](int j) {
          if (j == k) {
            std::vector<int> qdegs(k);
            for (int jj = 0; jj < k; ++jj) qdegs[jj] = r.over()->at(s.ns[jj]).complex->deg(qtuple[jj]);
            int sign = detail::interleave_sign(rdegs, qdegs, kap.blocks());
            std::vector<int> cols(m);
            for (int c = 0; c < m; ++c) {
              std::vector<int> bt = {tup[c + 1]};
              for (int jj : kap.blocks()[c]) bt.push_back(qtuple[jj]);
              cols[c] = blockix[c].flatten(bt);
            }
            auto terms = detail::column_product(f, mats, cols);
            if (terms.empty()) return;
            std::vector<int> scol = {cck.offset[pos] + t};
            for (int jj = 0; jj < k; ++jj) scol.push_back(qtuple[jj]);
            int src = six.flatten(scol);
            for (auto& [rt, v] : terms) {
              std::vector<int> ttup = {tup[0]};
              for (int x : rt) ttup.push_back(x);
              mat.add_to(ccn.index(tpos, ttup), src, v * Scalar::integer(f, sign));
            }
            return;
          }
          for (int q = 0; q < r.over()->at(s.ns[j]).dim(); ++q) {
            qtuple[j] = q;
            walk(j + 1);
          }
        };
        walk(0);
      }
    }
    act[s.key()] = std::move(mat);
  }
  OperadModule mod(OperadModule::Side::right, r.over(), ar.seq, std::move(act));
  return ComposedModule{std::move(mod), std::move(ar)};
}

// L o A as a left module, L a left module: the operad acts through L on the
// outer labels, grouping the outer partitions of the factors.
inline ComposedModule left_module_compose(const OperadModule& l, const SymSeq& a) {
  if (l.side() != OperadModule::Side::left) throw CheckFailed("left module expected");
  Field f = l.field();
  int N = l.arity_max();
  ComposeResult la = compose_full(l.seq(), a);
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(N)) {
    int k = s.k;
    if (k > N) continue;
    int n = s.total();
    std::vector<int> off(k + 1, 0);
    for (int j = 0; j < k; ++j) off[j + 1] = off[j] + s.ns[j];
    std::vector<int> src_dims = {l.over()->at(k).dim()};
    for (int nj : s.ns) src_dims.push_back(la.seq.at(nj).dim());
    TensorIndexer six(src_dims);
    SparseMatrix mat(f, la.seq.at(n).dim(), six.total());
    const auto& ccn = la.at(n);
    std::vector<int> tuple(k + 1, 0);
    std::function<void(int)> walk = [&](int j) {
      if (j == k + 1) {
        // factor data
        std::vector<int> lidx(k), ldegs(k), mcounts(k);
        std::vector<std::vector<int>> alabels(k);
        std::vector<int> adegs, asizes;
        std::vector<std::vector<int>> merged;
        for (int jj = 0; jj < k; ++jj) {
          const auto& cc = la.at(s.ns[jj]);
          auto [pos, tup] = cc.locate(tuple[jj + 1]);
          const SetPartition& rho = cc.parts[pos];
          mcounts[jj] = rho.num_blocks();
          lidx[jj] = tup[0];
          ldegs[jj] = l.at(rho.num_blocks()).complex->deg(tup[0]);
          for (int b = 0; b < rho.num_blocks(); ++b) {
            const auto& blk = rho.blocks()[b];
            std::vector<int> big;
            for (int e : blk) big.push_back(off[jj] + e);
            merged.push_back(std::move(big));
            alabels[jj].push_back(tup[1 + b]);
            adegs.push_back(a.at(static_cast<int>(blk.size())).complex->deg(tup[1 + b]));
            asizes.push_back(static_cast<int>(blk.size()));
          }
        }
        int M = static_cast<int>(merged.size());
        // grouped action of the operad label on the outer l labels
        std::vector<std::vector<int>> groups;
        std::vector<int> gdims = {l.over()->at(k).dim()};
        {
          int at = 0;
          for (int jj = 0; jj < k; ++jj) {
            std::vector<int> g;
            for (int t = 0; t < mcounts[jj]; ++t) g.push_back(at++);
            groups.push_back(std::move(g));
            gdims.push_back(l.at(mcounts[jj]).dim());
          }
        }
        std::vector<std::vector<int>> children(k);
        {
          int at = 0;
          for (int jj = 0; jj < k; ++jj) {
            for (int c = 0; c < static_cast<int>(alabels[jj].size()); ++c) children[jj].push_back(at++);
          }
        }
        int sign = detail::interleave_sign(ldegs, adegs, children);
        SparseMatrix lact = l.action_at(SetPartition(M, std::move(groups)));
        std::vector<int> lcol = {tuple[0]};
        for (int jj = 0; jj < k; ++jj) lcol.push_back(lidx[jj]);
        int flat = TensorIndexer(gdims).flatten(lcol);
        auto terms = lact.column_vec(flat);
        if (terms.empty()) return;
        int tpos = ccn.position_of(SetPartition(n, std::move(merged)));
        int src = six.flatten(tuple);
        for (const auto& [lt, v] : terms) {
          std::vector<int> ttup = {lt};
          for (int jj = 0; jj < k; ++jj)
            for (int x : alabels[jj]) ttup.push_back(x);
          mat.add_to(ccn.index(tpos, ttup), src, v * Scalar::integer(f, sign));
        }
        return;
      }
      int lim = (j == 0) ? l.over()->at(k).dim() : la.seq.at(s.ns[j - 1]).dim();
      for (int x = 0; x < lim; ++x) {
        tuple[j] = x;
        walk(j + 1);
      }
    };
    walk(0);
    act[s.key()] = std::move(mat);
  }
  OperadModule mod(OperadModule::Side::left, l.over(), la.seq, std::move(act));
  return ComposedModule{std::move(mod), std::move(la)};
}

} // namespace opcalc
