#pragma once

// Two-sided simplicial bar construction B(R, P, L) for a reduced operad P, a
// right P-module R and a left P-module L, realized in its normalized (Moore)
// form.  A basis element of arity n at simplicial level k is a strict
// descending chain of set partitions of {0..n-1}
//     lam0 > lam1 > .. > lamk        (strictly finer at each step)
// decorated with
//   * an R(#blocks lam0) basis label,
//   * for every tier t = 1..k and every block j of lam(t-1) a label in P(a)
//     where a = number of lam(t)-blocks inside that block (a = 1 allowed; the
//     one-dimensional P(1) then contributes the unit),
//   * for every block b of lamk a label in L(|b|).
// Its degree is k plus the sum of the label degrees.  The differential is
//     d = d_int + (-1)^q sum_i (-1)^i d_i          (q = internal degree)
// with d_0 the R-action on the first tier, d_k the L-action on the last and
// the middle faces operadic composition of adjacent tiers.  Faces of strict
// chains are strict, so the alternating face sum closes on this basis; the
// agreement with the totalization of the unnormalized simplicial object is a
// separate, machine-checked cross-check (bar_simplicial_object).

#include <opcalc/operad.hpp>
#include <opcalc/simplicial.hpp>

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace opcalc {

struct BarChainInfo {
  std::vector<SetPartition> lam;                   // coarsest first, size k+1
  std::vector<std::vector<std::vector<int>>> nest; // nest[t] = block_nesting(lam[t], lam[t+1])
  std::vector<CCPtr> fac;                          // R-label, tier labels, L-labels
  TensorIndexer ix;
  int offset = 0;

  int k() const { return static_cast<int>(lam.size()) - 1; }
  int factors() const { return static_cast<int>(fac.size()); }

  // first factor position of tier t's labels (t = 1..k)
  int tier_base(int t) const {
    int p = 1;
    for (int s = 1; s < t; ++s) p += lam[s - 1].num_blocks();
    return p;
  }
  int l_base() const { return tier_base(k() + 1); }

  int internal_degree(const std::vector<int>& tuple) const {
    int q = 0;
    for (int i = 0; i < factors(); ++i) q += fac[i]->deg(tuple[i]);
    return q;
  }
};

inline std::string bar_chain_key(const std::vector<SetPartition>& lam) {
  std::string out;
  for (std::size_t t = 0; t < lam.size(); ++t) {
    if (t) out += ">";
    out += lam[t].str();
  }
  return out;
}

inline std::string bar_elt_id(const BarChainInfo& ci, const std::vector<int>& tuple) {
  std::string out = "B[" + bar_chain_key(ci.lam) + ";" + std::to_string(tuple[0]);
  int pos = 1;
  for (int t = 1; t <= ci.k(); ++t) {
    out += ";";
    int nb = ci.lam[t - 1].num_blocks();
    for (int j = 0; j < nb; ++j) {
      if (j) out += ",";
      out += std::to_string(tuple[pos++]);
    }
  }
  out += ";";
  int nb = ci.lam[ci.k()].num_blocks();
  for (int b = 0; b < nb; ++b) {
    if (b) out += ",";
    out += std::to_string(tuple[pos++]);
  }
  return out + "]";
}

namespace bar_detail {

// factor complexes and indexing for one chain, or nullopt if some factor is 0
inline std::optional<BarChainInfo> chain_info(const OperadModule& r, const Operad& p,
                                              const OperadModule& l,
                                              std::vector<SetPartition> lam) {
  BarChainInfo ci;
  ci.lam = std::move(lam);
  int k = ci.k();
  ci.fac.push_back(r.at(ci.lam[0].num_blocks()).complex);
  for (int t = 0; t < k; ++t) {
    ci.nest.push_back(block_nesting(ci.lam[t], ci.lam[t + 1]));
    for (const auto& ch : ci.nest.back())
      ci.fac.push_back(p.at(static_cast<int>(ch.size())).complex);
  }
  for (const auto& b : ci.lam[k].blocks())
    ci.fac.push_back(l.at(static_cast<int>(b.size())).complex);
  for (const auto& c : ci.fac) {
    if (c->size() == 0) return std::nullopt;
    ci.ix.sizes.push_back(c->size());
  }
  return ci;
}

// weak or strict descending chains of length level+1 whose decorations are
// all nonzero-dimensional, grouped by level, in a deterministic order
inline std::vector<std::vector<std::vector<SetPartition>>> enumerate_chains(
    const OperadModule& r, const Operad& p, const OperadModule& l, int n, int top, bool strict) {
  std::vector<std::vector<std::vector<SetPartition>>> emitted(top + 1);
  std::vector<std::vector<SetPartition>> frontier;
  for (const auto& lam0 : all_partitions(n))
    if (r.at(lam0.num_blocks()).dim() > 0) frontier.push_back({lam0});
  auto l_ok = [&](const SetPartition& last) {
    for (const auto& b : last.blocks())
      if (l.at(static_cast<int>(b.size())).dim() == 0) return false;
    return true;
  };
  for (int k = 0; k <= top; ++k) {
    for (const auto& ch : frontier)
      if (l_ok(ch.back())) emitted[k].push_back(ch);
    if (k == top) break;
    std::vector<std::vector<SetPartition>> next;
    for (const auto& ch : frontier) {
      const SetPartition& last = ch.back();
      std::vector<SetPartition> exts;
      if (!strict) exts.push_back(last);
      for (auto& fine : strict_refinements(last)) exts.push_back(std::move(fine));
      for (auto& fine : exts) {
        bool ok = true;
        for (const auto& children : block_nesting(last, fine))
          if (p.at(static_cast<int>(children.size())).dim() == 0) {
            ok = false;
            break;
          }
        if (!ok) continue;
        auto ch2 = ch;
        ch2.push_back(std::move(fine));
        next.push_back(std::move(ch2));
      }
    }
    frontier = std::move(next);
  }
  return emitted;
}

struct BarTerm {
  std::vector<SetPartition> lam;
  std::vector<int> tuple;
  Scalar coeff;
};

// the i-th simplicial face of the element (ci, tuple), with its Koszul
// reordering sign but without the alternating (-1)^i or the (-1)^q twist
inline std::vector<BarTerm> face_terms(const OperadModule& r, const Operad& p,
                                       const OperadModule& l, const BarChainInfo& ci,
                                       const std::vector<int>& tuple, int i) {
  Field f = p.field();
  int k = ci.k();
  std::vector<BarTerm> out;

  if (i == 0) {
    // R absorbs tier 1 along the nesting of lam1-blocks into lam0-blocks
    int K = ci.lam[0].num_blocks();
    SetPartition nu(ci.lam[1].num_blocks(), ci.nest[0]);
    SparseMatrix act = r.action_at(nu);
    TensorIndexer sub;
    for (int j = 0; j <= K; ++j) sub.sizes.push_back(ci.ix.sizes[j]);
    std::vector<int> head(tuple.begin(), tuple.begin() + K + 1);
    int col = sub.flatten(head);
    std::vector<SetPartition> lam2(ci.lam.begin() + 1, ci.lam.end());
    for (const auto& [row, v] : act.column_vec(col)) {
      BarTerm t{lam2, {}, v};
      t.tuple.push_back(row);
      t.tuple.insert(t.tuple.end(), tuple.begin() + K + 1, tuple.end());
      out.push_back(std::move(t));
    }
    return out;
  }

  // both remaining cases reorder a window [labels on lam(i-1)-blocks,
  // labels on lam(i)-blocks] so each parent is followed by its children
  int K = ci.lam[i - 1].num_blocks();
  int M = ci.lam[i].num_blocks();
  int tb = ci.tier_base(i);
  int cb = (i == k) ? ci.l_base() : ci.tier_base(i + 1); // child-label base
  std::vector<int> degs, perm;
  for (int j = 0; j < K; ++j) degs.push_back(ci.fac[tb + j]->deg(tuple[tb + j]));
  for (int c = 0; c < M; ++c) degs.push_back(ci.fac[cb + c]->deg(tuple[cb + c]));
  for (int j = 0; j < K; ++j) {
    perm.push_back(j);
    for (int c : ci.nest[i - 1][j]) perm.push_back(K + c);
  }
  Scalar sgn = Scalar::integer(f, koszul_reorder_sign(degs, perm));

  std::vector<SparseMatrix> mats;
  std::vector<int> cols;
  for (int j = 0; j < K; ++j) {
    const auto& children = ci.nest[i - 1][j];
    TensorIndexer sub;
    sub.sizes.push_back(ci.ix.sizes[tb + j]);
    std::vector<int> local = {tuple[tb + j]};
    for (int c : children) {
      sub.sizes.push_back(ci.ix.sizes[cb + c]);
      local.push_back(tuple[cb + c]);
    }
    if (i == k) {
      // L absorbs tier k: partition of the block's elements by rank
      const auto& ground = ci.lam[k - 1].block(j);
      std::vector<std::vector<int>> blocks;
      for (int c : children) {
        std::vector<int> blk;
        for (int x : ci.lam[k].block(c))
          blk.push_back(static_cast<int>(std::lower_bound(ground.begin(), ground.end(), x) -
                                         ground.begin()));
        blocks.push_back(std::move(blk));
      }
      mats.push_back(l.action_at(SetPartition(static_cast<int>(ground.size()), std::move(blocks))));
    } else {
      // compose tiers i and i+1: partition of the block's lam(i+1)-children
      std::vector<int> grand;
      for (int c : children)
        for (int d : ci.nest[i][c]) grand.push_back(d);
      std::sort(grand.begin(), grand.end());
      std::vector<std::vector<int>> blocks;
      for (int c : children) {
        std::vector<int> blk;
        for (int d : ci.nest[i][c])
          blk.push_back(
              static_cast<int>(std::lower_bound(grand.begin(), grand.end(), d) - grand.begin()));
        blocks.push_back(std::move(blk));
      }
      mats.push_back(p.gamma_at(SetPartition(static_cast<int>(grand.size()), std::move(blocks))));
    }
    cols.push_back(sub.flatten(local));
  }
  std::vector<const SparseMatrix*> mp;
  for (const auto& m : mats) mp.push_back(&m);
  auto terms = detail::column_product(f, mp, cols);

  std::vector<SetPartition> lam2;
  for (int t = 0; t <= k; ++t)
    if (t != i) lam2.push_back(ci.lam[t]);
  for (auto& [labels, v] : terms) {
    BarTerm t{lam2, {}, sgn * v};
    t.tuple.insert(t.tuple.end(), tuple.begin(), tuple.begin() + tb);
    t.tuple.insert(t.tuple.end(), labels.begin(), labels.end());
    t.tuple.insert(t.tuple.end(), tuple.begin() + cb + M, tuple.end());
    out.push_back(std::move(t));
  }
  return out;
}

} // namespace bar_detail

class Bar {
  OperadPtr p_;
  OperadModule r_, l_;
  SymSeq seq_;
  std::vector<std::vector<BarChainInfo>> info_;  // [n-1]
  std::vector<std::map<std::string, int>> pos_;  // chain key -> position

public:
  Bar(OperadModule r, OperadModule l)
      : p_(r.over()), r_(std::move(r)), l_(std::move(l)), seq_(p_->field(), p_->arity_max()) {
    if (r_.side() != OperadModule::Side::right) throw CheckFailed("bar wants a right module first");
    if (l_.side() != OperadModule::Side::left) throw CheckFailed("bar wants a left module second");
    if (l_.over() != p_) throw CheckFailed("bar inputs must be modules over the same operad");
    Field f = p_->field();
    int N = p_->arity_max();
    info_.resize(N);
    pos_.resize(N);
    for (int n = 1; n <= N; ++n) {
      auto& chains = info_[n - 1];
      auto& pos = pos_[n - 1];
      auto levels = bar_detail::enumerate_chains(r_, *p_, l_, n, n - 1, true);
      int total = 0;
      for (const auto& lev : levels)
        for (const auto& lam : lev)
          if (auto ci = bar_detail::chain_info(r_, *p_, l_, lam)) {
            ci->offset = total;
            total += ci->ix.total();
            pos[bar_chain_key(ci->lam)] = static_cast<int>(chains.size());
            chains.push_back(std::move(*ci));
          }

      std::vector<BasisElt> basis;
      basis.reserve(total);
      for (const auto& ci : chains)
        for (int t = 0; t < ci.ix.total(); ++t) {
          auto tuple = ci.ix.unflatten(t);
          basis.push_back({bar_elt_id(ci, tuple), ci.k() + ci.internal_degree(tuple)});
        }

      SparseMatrix d(f, total, total);
      for (const auto& ci : chains) {
        int k = ci.k();
        for (int t = 0; t < ci.ix.total(); ++t) {
          auto tuple = ci.ix.unflatten(t);
          int col = ci.offset + t;
          // internal (Koszul) differential
          int before = 0;
          for (int fi = 0; fi < ci.factors(); ++fi) {
            Scalar s = Scalar::sign(f, before);
            for (const auto& [row, v] : ci.fac[fi]->d().column_vec(tuple[fi])) {
              auto t2 = tuple;
              t2[fi] = row;
              d.add_to(ci.offset + ci.ix.flatten(t2), col, s * v);
            }
            before += ci.fac[fi]->deg(tuple[fi]);
          }
          // alternating face sum, twisted by the internal degree
          if (k >= 1) {
            Scalar outer = Scalar::sign(f, ci.internal_degree(tuple));
            for (int i = 0; i <= k; ++i) {
              Scalar s = outer * Scalar::sign(f, i);
              for (const auto& term : bar_detail::face_terms(r_, *p_, l_, ci, tuple, i)) {
                const BarChainInfo& tc = chains[pos.at(bar_chain_key(term.lam))];
                d.add_to(tc.offset + tc.ix.flatten(term.tuple), col, s * term.coeff);
              }
            }
          }
        }
      }
      CCPtr complex = make_cc(ChainComplex(f, std::move(basis), std::move(d), false));

      std::vector<SparseMatrix> gens;
      for (int gi = 0; gi + 1 < n; ++gi) {
        Permutation sigma = Permutation::adjacent(n, gi);
        SparseMatrix m(f, total, total);
        for (const auto& ci : chains) {
          int k = ci.k();
          std::vector<PartitionAction> acts;
          std::vector<SetPartition> ilam;
          for (int t = 0; t <= k; ++t) {
            acts.push_back(induced_action(ci.lam[t], sigma));
            ilam.push_back(acts.back().image);
          }
          const BarChainInfo& tc = chains[pos.at(bar_chain_key(ilam))];
          // per-factor matrices and destination slots
          std::vector<SparseMatrix> fmats;
          std::vector<int> dest(ci.factors());
          fmats.push_back(r_.at(ci.lam[0].num_blocks()).action_of(Permutation(acts[0].block_dest)));
          dest[0] = 0;
          for (int t = 1; t <= k; ++t) {
            int tb = ci.tier_base(t);
            for (int j = 0; j < ci.lam[t - 1].num_blocks(); ++j) {
              int dj = acts[t - 1].block_dest[j];
              dest[tb + j] = tb + dj;
              const auto& children = ci.nest[t - 1][j];
              const auto& ichildren = tc.nest[t - 1][dj];
              std::vector<int> img(children.size());
              for (std::size_t s = 0; s < children.size(); ++s) {
                int ic = acts[t].block_dest[children[s]];
                img[s] = static_cast<int>(
                    std::lower_bound(ichildren.begin(), ichildren.end(), ic) - ichildren.begin());
              }
              fmats.push_back(
                  p_->at(static_cast<int>(children.size())).action_of(Permutation(std::move(img))));
            }
          }
          int lb = ci.l_base();
          for (int b = 0; b < ci.lam[k].num_blocks(); ++b) {
            dest[lb + b] = lb + acts[k].block_dest[b];
            fmats.push_back(l_.at(static_cast<int>(ci.lam[k].block(b).size()))
                                .action_of(acts[k].within[b]));
          }
          std::vector<const SparseMatrix*> mp;
          for (const auto& fm : fmats) mp.push_back(&fm);

          for (int t = 0; t < ci.ix.total(); ++t) {
            auto tuple = ci.ix.unflatten(t);
            int col = ci.offset + t;
            // Koszul sign: each tier's labels permute among themselves
            int sgn = 1;
            for (int tt = 1; tt <= k + 1; ++tt) {
              int base = (tt <= k) ? ci.tier_base(tt) : lb;
              int cnt = (tt <= k) ? ci.lam[tt - 1].num_blocks() : ci.lam[k].num_blocks();
              std::vector<int> degs(cnt), from(cnt);
              for (int j = 0; j < cnt; ++j) {
                degs[j] = ci.fac[base + j]->deg(tuple[base + j]);
                from[dest[base + j] - base] = j;
              }
              sgn *= koszul_reorder_sign(degs, from);
            }
            auto terms = detail::column_product(f, mp, tuple);
            for (const auto& [labels, v] : terms) {
              std::vector<int> ttuple(ci.factors());
              for (int fi = 0; fi < ci.factors(); ++fi) ttuple[dest[fi]] = labels[fi];
              m.add_to(tc.offset + tc.ix.flatten(ttuple), col, v * Scalar::integer(f, sgn));
            }
          }
        }
        gens.push_back(std::move(m));
      }
      seq_.set(n, EquivariantComplex(n, complex, std::move(gens)));
    }
  }

  const OperadPtr& over() const { return p_; }
  const OperadModule& right_input() const { return r_; }
  const OperadModule& left_input() const { return l_; }
  const SymSeq& seq() const { return seq_; }
  const Field& field() const { return seq_.field(); }
  int arity_max() const { return seq_.arity_max(); }
  const EquivariantComplex& at(int n) const { return seq_.at(n); }

  const std::vector<BarChainInfo>& chains(int n) const { return info_.at(n - 1); }

  int chain_position(int n, const std::string& key) const {
    const auto& pos = pos_.at(n - 1);
    auto it = pos.find(key);
    return it == pos.end() ? -1 : it->second;
  }

  // global basis index -> (chain position, label tuple)
  std::pair<int, std::vector<int>> locate(int n, int global) const {
    const auto& chains = info_.at(n - 1);
    int lo = 0, hi = static_cast<int>(chains.size()) - 1;
    while (lo < hi) {
      int mid = (lo + hi + 1) / 2;
      if (chains[mid].offset <= global) lo = mid;
      else hi = mid - 1;
    }
    return {lo, chains[lo].ix.unflatten(global - chains[lo].offset)};
  }

  int index(int n, int chain_pos, const std::vector<int>& tuple) const {
    const auto& ci = info_.at(n - 1).at(chain_pos);
    return ci.offset + ci.ix.flatten(tuple);
  }

  int level_of(int n, int global) const { return info_.at(n - 1)[locate(n, global).first].k(); }

  void validate() const { seq_.validate(); }
};

inline Bar bar(const OperadModule& r, const OperadModule& l) { return Bar(r, l); }

// The unnormalized simplicial object behind B(R, P, L)(n): level k is spanned
// by weak descending chains of k+1 partitions (consecutive equality allowed),
// faces are the same structure maps, degeneracies duplicate a partition and
// insert an all-units tier.  Truncated at top = n-1; every weak chain of
// greater length repeats a partition, so all higher levels are degenerate and
// the truncation is honest for totalization.
inline SimplicialChainObject bar_simplicial_object(const OperadModule& r, const OperadModule& l,
                                                   int n) {
  const Operad& p = *r.over();
  Field f = p.field();
  int top = n - 1;
  auto levels = bar_detail::enumerate_chains(r, p, l, n, top, false);

  SimplicialChainObject S;
  std::vector<std::vector<BarChainInfo>> info(top + 1);
  std::vector<std::map<std::string, int>> pos(top + 1);
  for (int k = 0; k <= top; ++k) {
    int total = 0;
    for (const auto& lam : levels[k])
      if (auto ci = bar_detail::chain_info(r, p, l, lam)) {
        ci->offset = total;
        total += ci->ix.total();
        pos[k][bar_chain_key(ci->lam)] = static_cast<int>(info[k].size());
        info[k].push_back(std::move(*ci));
      }
    std::vector<BasisElt> basis;
    basis.reserve(total);
    SparseMatrix d(f, total, total);
    for (const auto& ci : info[k])
      for (int t = 0; t < ci.ix.total(); ++t) {
        auto tuple = ci.ix.unflatten(t);
        basis.push_back({bar_elt_id(ci, tuple), ci.internal_degree(tuple)});
        int before = 0;
        for (int fi = 0; fi < ci.factors(); ++fi) {
          Scalar s = Scalar::sign(f, before);
          for (const auto& [row, v] : ci.fac[fi]->d().column_vec(tuple[fi])) {
            auto t2 = tuple;
            t2[fi] = row;
            d.add_to(ci.offset + ci.ix.flatten(t2), ci.offset + t, s * v);
          }
          before += ci.fac[fi]->deg(tuple[fi]);
        }
      }
    S.level.push_back(make_cc(ChainComplex(f, std::move(basis), std::move(d), false)));
  }

  S.face.resize(top + 1);
  S.degen.resize(top + 1);
  for (int k = 1; k <= top; ++k)
    for (int i = 0; i <= k; ++i) {
      SparseMatrix m(f, S.level[k - 1]->size(), S.level[k]->size());
      for (const auto& ci : info[k])
        for (int t = 0; t < ci.ix.total(); ++t)
          for (const auto& term : bar_detail::face_terms(r, p, l, ci, ci.ix.unflatten(t), i)) {
            const BarChainInfo& tc = info[k - 1][pos[k - 1].at(bar_chain_key(term.lam))];
            m.add_to(tc.offset + tc.ix.flatten(term.tuple), ci.offset + t, term.coeff);
          }
      S.face[k].push_back(ChainMap(S.level[k], S.level[k - 1], 0, std::move(m)));
    }
  for (int k = 0; k < top; ++k)
    for (int j = 0; j <= k; ++j) {
      SparseMatrix m(f, S.level[k + 1]->size(), S.level[k]->size());
      for (const auto& ci : info[k])
        for (int t = 0; t < ci.ix.total(); ++t) {
          auto tuple = ci.ix.unflatten(t);
          std::vector<SetPartition> lam2;
          for (int s = 0; s <= ci.k(); ++s) {
            lam2.push_back(ci.lam[s]);
            if (s == j) lam2.push_back(ci.lam[s]);
          }
          int tb = ci.tier_base(j + 1);
          std::vector<int> t2(tuple.begin(), tuple.begin() + tb);
          t2.insert(t2.end(), ci.lam[j].num_blocks(), 0); // unit labels
          t2.insert(t2.end(), tuple.begin() + tb, tuple.end());
          const BarChainInfo& tc = info[k + 1][pos[k + 1].at(bar_chain_key(lam2))];
          m.add_to(tc.offset + tc.ix.flatten(t2), ci.offset + t, Scalar::one(f));
        }
      S.degen[k].push_back(ChainMap(S.level[k], S.level[k + 1], 0, std::move(m)));
    }
  return S;
}

// ---------------------------------------------------------------------------
// the augmentation to the collapsed input

// B(R, P, P) -> R (side = right), or B(P, P, L) -> L (side = left): collapse
// level 0 by the module action, zero on all higher levels.  The side being
// collapsed onto must carry the operad itself as the opposite input.
inline SymSeqMap resolution_map(const Bar& b,
                                OperadModule::Side side = OperadModule::Side::right) {
  const OperadPtr& p = b.over();
  bool right = side == OperadModule::Side::right;
  const OperadModule& consumed = right ? b.left_input() : b.right_input();
  for (int n = 1; n <= b.arity_max(); ++n)
    if (consumed.at(n).complex != p->at(n).complex)
      throw CheckFailed("resolution map needs the operad itself on the consumed side");
  const OperadModule& mod = right ? b.right_input() : b.left_input();
  SymSeqMap out = SymSeqMap::zero(b.seq(), mod.seq());
  for (int n = 1; n <= b.arity_max(); ++n) {
    SparseMatrix m(b.field(), mod.at(n).dim(), b.at(n).dim());
    for (const auto& ci : b.chains(n)) {
      if (ci.k() != 0) continue;
      SparseMatrix act = mod.action_at(ci.lam[0]);
      for (int t = 0; t < ci.ix.total(); ++t)
        for (const auto& [row, v] : act.column_vec(t)) m.add_to(row, ci.offset + t, v);
    }
    out.at_[n - 1] = ChainMap(b.at(n).complex, mod.at(n).complex, 0, std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// functoriality in all three inputs (degree-0 maps): replace labels slotwise

inline SymSeqMap bar_map(const Bar& src, const Bar& tgt, const SymSeqMap& fr,
                         const SymSeqMap& fp, const SymSeqMap& fl) {
  Field f = src.field();
  for (int n = 1; n <= src.arity_max(); ++n)
    if (fr.at(n).deg != 0 || fp.at(n).deg != 0 || fl.at(n).deg != 0)
      throw CheckFailed("bar functoriality wants degree-0 maps");
  SymSeqMap out = SymSeqMap::zero(src.seq(), tgt.seq());
  for (int n = 1; n <= src.arity_max(); ++n) {
    SparseMatrix m(f, tgt.at(n).dim(), src.at(n).dim());
    for (const auto& ci : src.chains(n)) {
      int k = ci.k();
      std::vector<const SparseMatrix*> fm = {&fr.at(ci.lam[0].num_blocks()).m};
      for (int t = 0; t < k; ++t)
        for (const auto& ch : ci.nest[t]) fm.push_back(&fp.at(static_cast<int>(ch.size())).m);
      for (const auto& blk : ci.lam[k].blocks())
        fm.push_back(&fl.at(static_cast<int>(blk.size())).m);
      int tpos = tgt.chain_position(n, bar_chain_key(ci.lam));
      for (int t = 0; t < ci.ix.total(); ++t) {
        auto terms = detail::column_product(f, fm, ci.ix.unflatten(t));
        if (terms.empty()) continue;
        if (tpos < 0) throw CheckFailed("bar map image chain missing in the target");
        for (const auto& [tup, v] : terms) m.add_to(tgt.index(n, tpos, tup), ci.offset + t, v);
      }
    }
    out.at_[n - 1] = ChainMap(src.at(n).complex, tgt.at(n).complex, 0, std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// module structures on the bar through a bimodule input

// Right action of P on B(R, P, M) when the left input M is a bimodule: blow
// up the chain of partitions along the acted points (tier labels ride along
// unchanged) and let M's right action consume the operad labels blockwise on
// the last tier.  Koszul sign: interleave the operad labels with the last
// tier's labels, children after their parent.
inline OperadModule bar_right_module(const Bar& b, const OperadBimodule& mbi) {
  const OperadPtr& p = b.over();
  if (mbi.over() != p) throw CheckFailed("bimodule is over a different operad");
  OperadModule mr = mbi.right_module();
  {
    OperadModule lm = mbi.left_module();
    for (int n = 1; n <= b.arity_max(); ++n)
      if (mbi.at(n).complex != b.left_input().at(n).complex)
        throw CheckFailed("bar right module wants the bar's left input as the bimodule");
    for (const auto& s : all_shapes(b.arity_max()))
      if (!(lm.structure(s) == b.left_input().structure(s)))
        throw CheckFailed("bimodule left action differs from the bar's left input");
  }
  Field f = b.field();
  int N = b.arity_max();
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(N)) {
    int k = s.k, n = s.total();
    std::vector<int> off(k + 1, 0);
    for (int j = 0; j < k; ++j) off[j + 1] = off[j] + s.ns[j];
    std::vector<int> dims = {b.at(k).dim()};
    for (int nj : s.ns) dims.push_back(p->at(nj).dim());
    TensorIndexer six(dims);
    SparseMatrix mat(f, b.at(n).dim(), six.total());
    for (const auto& ci : b.chains(k)) {
      int lev = ci.k();
      std::vector<SetPartition> lam2;
      for (const auto& lamt : ci.lam) {
        std::vector<std::vector<int>> blocks;
        for (const auto& blk : lamt.blocks()) {
          std::vector<int> big;
          for (int j : blk)
            for (int t = 0; t < s.ns[j]; ++t) big.push_back(off[j] + t);
          blocks.push_back(std::move(big));
        }
        lam2.push_back(SetPartition(n, std::move(blocks)));
      }
      const SetPartition& last = ci.lam[lev];
      int M = last.num_blocks();
      int lb = ci.l_base();
      std::vector<SparseMatrix> bact;
      std::vector<TensorIndexer> bix;
      bool dead = false;
      for (int bb = 0; bb < M && !dead; ++bb) {
        const auto& blk = last.block(bb);
        std::vector<std::vector<int>> nus;
        std::vector<int> bd = {ci.ix.sizes[lb + bb]};
        int at = 0;
        for (int j : blk) {
          std::vector<int> range;
          for (int t = 0; t < s.ns[j]; ++t) range.push_back(at++);
          nus.push_back(std::move(range));
          bd.push_back(p->at(s.ns[j]).dim());
        }
        SparseMatrix am = mr.action_at(SetPartition(at, std::move(nus)));
        if (am.rows() == 0) dead = true;
        bact.push_back(std::move(am));
        bix.push_back(TensorIndexer{std::move(bd)});
      }
      if (dead) continue;
      int tcpos = b.chain_position(n, bar_chain_key(lam2));
      if (tcpos < 0) throw CheckFailed("blown-up chain missing from the bar");
      std::vector<const SparseMatrix*> mp;
      for (const auto& bm : bact) mp.push_back(&bm);
      std::vector<int> qdims;
      for (int nj : s.ns) qdims.push_back(p->at(nj).dim());
      for (int t = 0; t < ci.ix.total(); ++t) {
        auto tuple = ci.ix.unflatten(t);
        std::vector<int> ldegs(M);
        for (int bb = 0; bb < M; ++bb) ldegs[bb] = ci.fac[lb + bb]->deg(tuple[lb + bb]);
        std::vector<int> qtuple(k, 0);
        std::function<void(int)> walk = [&](int j) {
          if (j == k) {
            std::vector<int> qdegs(k);
            int tq = 0;
            for (int jj = 0; jj < k; ++jj) {
              qdegs[jj] = p->at(s.ns[jj]).complex->deg(qtuple[jj]);
              tq += qdegs[jj];
            }
            // the absorbed labels also cross the simplicial suspension,
            // which sits after all internal degrees
            int sign = detail::interleave_sign(ldegs, qdegs, last.blocks());
            if ((lev * tq) % 2) sign = -sign;
            std::vector<int> cols(M);
            for (int bb = 0; bb < M; ++bb) {
              std::vector<int> local = {tuple[lb + bb]};
              for (int jj : last.block(bb)) local.push_back(qtuple[jj]);
              cols[bb] = bix[bb].flatten(local);
            }
            auto terms = detail::column_product(f, mp, cols);
            if (terms.empty()) return;
            std::vector<int> scol = {ci.offset + t};
            for (int jj = 0; jj < k; ++jj) scol.push_back(qtuple[jj]);
            int src = six.flatten(scol);
            for (const auto& [ls, v] : terms) {
              std::vector<int> ttuple(tuple.begin(), tuple.begin() + lb);
              for (int x : ls) ttuple.push_back(x);
              mat.add_to(b.index(n, tcpos, ttuple), src, v * Scalar::integer(f, sign));
            }
            return;
          }
          for (int q = 0; q < qdims[j]; ++q) {
            qtuple[j] = q;
            walk(j + 1);
          }
        };
        walk(0);
      }
    }
    act[s.key()] = std::move(mat);
  }
  return OperadModule(OperadModule::Side::right, p, b.seq(), std::move(act));
}

namespace bar_detail {

// One shuffle-merge of bar elements placed on the blocks of an outer
// partition: the merged chain refines one factor's region per step, the
// others receive unit tier labels.  Used by the comparison maps into the bar
// and by the left module structure.  The Koszul sign reorders the item list
//   [head, (r_1, tiers of x_1, l's of x_1), (r_2, ..), ..]       (source)
// to
//   [head, r_1..r_m, merged tiers in step order, l's in merged block order]
// where a tier travels as a single item of degree 1 + its internal degree.
struct MergedTerm {
  std::vector<SetPartition> lam; // the merged chain
  SetPartition kbar;             // first-tier blocks grouped by factor
  std::vector<int> rlabels;      // the factors' outer labels, factor order
  std::vector<int> rest;         // tier and last-tier labels, target order
  int sign = 1;
};

inline std::vector<MergedTerm> shuffle_merge(const Bar& b, const SetPartition& kappa,
                                             const std::vector<int>& xs, int head_deg) {
  int n = kappa.n();
  int m = kappa.num_blocks();
  struct Fac {
    const BarChainInfo* ci;
    std::vector<int> tup;
    int k;
    // blown[g] = stage-g blocks pushed onto the factor's points, with the
    // local block index
    std::vector<std::vector<std::pair<std::vector<int>, int>>> blown;
  };
  std::vector<Fac> fac(m);
  for (int c = 0; c < m; ++c) {
    int sz = static_cast<int>(kappa.block(c).size());
    auto [pos, tup] = b.locate(sz, xs[c]);
    fac[c].ci = &b.chains(sz)[pos];
    fac[c].tup = std::move(tup);
    fac[c].k = fac[c].ci->k();
    for (int g = 0; g <= fac[c].k; ++g) {
      std::vector<std::pair<std::vector<int>, int>> blocks;
      const auto& lamg = fac[c].ci->lam[g];
      for (int j = 0; j < lamg.num_blocks(); ++j) {
        std::vector<int> big;
        for (int e : lamg.block(j)) big.push_back(kappa.block(c)[e]);
        blocks.push_back({std::move(big), j});
      }
      fac[c].blown.push_back(std::move(blocks));
    }
  }
  int k = 0;
  for (const auto& fc : fac) k += fc.k;

  // source items: head, then per factor its outer label, tier items, l items
  std::vector<int> sdegs = {head_deg};
  std::vector<int> rpos(m);
  std::vector<std::vector<int>> tpos(m), lpos(m);
  for (int c = 0; c < m; ++c) {
    const BarChainInfo& ci = *fac[c].ci;
    rpos[c] = static_cast<int>(sdegs.size());
    sdegs.push_back(ci.fac[0]->deg(fac[c].tup[0]));
    for (int g = 1; g <= fac[c].k; ++g) {
      int tb = ci.tier_base(g);
      int d = 1;
      for (int j = 0; j < ci.lam[g - 1].num_blocks(); ++j)
        d += ci.fac[tb + j]->deg(fac[c].tup[tb + j]);
      tpos[c].push_back(static_cast<int>(sdegs.size()));
      sdegs.push_back(d);
    }
    int lb = ci.l_base();
    for (int bb = 0; bb < ci.lam[fac[c].k].num_blocks(); ++bb) {
      lpos[c].push_back(static_cast<int>(sdegs.size()));
      sdegs.push_back(ci.fac[lb + bb]->deg(fac[c].tup[lb + bb]));
    }
  }

  std::vector<MergedTerm> out;
  std::vector<int> word, stage(m, 0);
  auto emit = [&]() {
    std::vector<int> g(m, 0);
    auto merged_at = [&]() {
      std::vector<std::pair<std::vector<int>, std::pair<int, int>>> bl;
      for (int c = 0; c < m; ++c)
        for (const auto& [els, j] : fac[c].blown[g[c]]) bl.push_back({els, {c, j}});
      std::sort(bl.begin(), bl.end(),
                [](const auto& x, const auto& y) { return x.first.front() < y.first.front(); });
      return bl;
    };
    MergedTerm term;
    std::vector<int> perm = {0};
    for (int c = 0; c < m; ++c) perm.push_back(rpos[c]);
    auto cur = merged_at();
    {
      std::vector<std::vector<int>> blocks;
      std::vector<std::vector<int>> groups(m);
      for (std::size_t i = 0; i < cur.size(); ++i) {
        blocks.push_back(cur[i].first);
        groups[cur[i].second.first].push_back(static_cast<int>(i));
      }
      term.lam.push_back(SetPartition(n, std::move(blocks)));
      std::vector<std::vector<int>> gr;
      for (auto& gg : groups)
        if (!gg.empty()) gr.push_back(std::move(gg));
      term.kbar = SetPartition(static_cast<int>(cur.size()), std::move(gr));
    }
    for (int t = 0; t < k; ++t) {
      int w = word[t];
      auto prev = std::move(cur);
      g[w] += 1;
      cur = merged_at();
      std::vector<std::vector<int>> blocks;
      for (const auto& [els, pr] : cur) blocks.push_back(els);
      term.lam.push_back(SetPartition(n, std::move(blocks)));
      for (const auto& [els, pr] : prev)
        term.rest.push_back(pr.first == w ? fac[w].tup[fac[w].ci->tier_base(g[w]) + pr.second]
                                          : 0);
      perm.push_back(tpos[w][g[w] - 1]);
    }
    for (const auto& [els, pr] : cur) {
      term.rest.push_back(fac[pr.first].tup[fac[pr.first].ci->l_base() + pr.second]);
      perm.push_back(lpos[pr.first][pr.second]);
    }
    term.sign = koszul_reorder_sign(sdegs, perm);
    for (int c = 0; c < m; ++c) term.rlabels.push_back(fac[c].tup[0]);
    out.push_back(std::move(term));
  };
  std::function<void()> rec = [&]() {
    if (static_cast<int>(word.size()) == k) {
      emit();
      return;
    }
    for (int c = 0; c < m; ++c)
      if (stage[c] < fac[c].k) {
        word.push_back(c);
        stage[c] += 1;
        rec();
        stage[c] -= 1;
        word.pop_back();
      }
  };
  rec();
  return out;
}

} // namespace bar_detail

// Left action of P on B(M, P, L) when the right input M is a bimodule:
// shuffle-merge the bar factors along the action's blocks and let M's left
// action collect the outer labels, grouped by factor.
inline OperadModule bar_left_module(const Bar& b, const OperadBimodule& mbi) {
  const OperadPtr& p = b.over();
  if (mbi.over() != p) throw CheckFailed("bimodule is over a different operad");
  OperadModule ml = mbi.left_module();
  {
    OperadModule rm = mbi.right_module();
    for (int n = 1; n <= b.arity_max(); ++n)
      if (mbi.at(n).complex != b.right_input().at(n).complex)
        throw CheckFailed("bar left module wants the bar's right input as the bimodule");
    for (const auto& s : all_shapes(b.arity_max()))
      if (!(rm.structure(s) == b.right_input().structure(s)))
        throw CheckFailed("bimodule right action differs from the bar's right input");
  }
  Field f = b.field();
  int N = b.arity_max();
  std::map<std::string, SparseMatrix> act;
  for (const auto& s : all_shapes(N)) {
    int k = s.k, n = s.total();
    std::vector<std::vector<int>> blocks;
    int off = 0;
    for (int j = 0; j < k; ++j) {
      std::vector<int> range;
      for (int t = 0; t < s.ns[j]; ++t) range.push_back(off + t);
      off += s.ns[j];
      blocks.push_back(std::move(range));
    }
    SetPartition kap(n, std::move(blocks));
    std::vector<int> dims = {p->at(k).dim()};
    for (int nj : s.ns) dims.push_back(b.at(nj).dim());
    TensorIndexer six(dims);
    SparseMatrix mat(f, b.at(n).dim(), six.total());
    std::vector<int> xs(k, 0);
    std::function<void(int)> walk = [&](int j) {
      if (j == k) {
        auto terms = bar_detail::shuffle_merge(b, kap, xs, 0);
        for (const auto& term : terms) {
          SparseMatrix lact = ml.action_at(term.kbar);
          std::vector<int> hdims = {p->at(k).dim()};
          for (const auto& blk : term.kbar.blocks())
            hdims.push_back(b.right_input().at(static_cast<int>(blk.size())).dim());
          TensorIndexer hix{std::move(hdims)};
          int tcpos = -2;
          for (int pl = 0; pl < p->at(k).dim(); ++pl) {
            std::vector<int> hcol = {pl};
            for (int rl : term.rlabels) hcol.push_back(rl);
            auto col = lact.column_vec(hix.flatten(hcol));
            if (col.empty()) continue;
            if (tcpos == -2) tcpos = b.chain_position(n, bar_chain_key(term.lam));
            if (tcpos < 0) throw CheckFailed("merged chain missing from the bar");
            std::vector<int> scol = {pl};
            for (int x : xs) scol.push_back(x);
            int src = six.flatten(scol);
            for (const auto& [row, v] : col) {
              std::vector<int> ttuple = {row};
              for (int x : term.rest) ttuple.push_back(x);
              mat.add_to(b.index(n, tcpos, ttuple), src, v * Scalar::integer(f, term.sign));
            }
          }
        }
        return;
      }
      for (int x = 0; x < dims[j + 1]; ++x) {
        xs[j] = x;
        walk(j + 1);
      }
    };
    walk(0);
    act[s.key()] = std::move(mat);
  }
  return OperadModule(OperadModule::Side::left, p, b.seq(), std::move(act));
}

// ---------------------------------------------------------------------------
// comparison maps between composition products and bars

struct BarComparison {
  ComposedModule composed; // the absorbed input with its compose bookkeeping
  Bar bar;                 // the bar over the absorbed input
  ComposeResult source;    // the source composition product
  SymSeqMap map;           // the comparison chain map
};

// B(R, P, L) o A  ->  B(R, P, L o A): blow each chain up along the outer
// partition and pair every last-tier label with its block of A labels.  An
// isomorphism (a signed bijection of bases).
inline BarComparison chi_l(const Bar& b, const SymSeq& a) {
  ComposedModule cm = left_module_compose(b.left_input(), a);
  Bar tb(b.right_input(), cm.module);
  ComposeResult src = compose_full(b.seq(), a);
  Field f = b.field();
  SymSeqMap map = SymSeqMap::zero(src.seq, tb.seq());
  for (int n = 1; n <= b.arity_max(); ++n) {
    SparseMatrix mm(f, tb.at(n).dim(), src.seq.at(n).dim());
    const auto& cc = src.at(n);
    for (std::size_t pos = 0; pos < cc.parts.size(); ++pos) {
      const SetPartition& kap = cc.parts[pos];
      int m = kap.num_blocks();
      for (int t = 0; t < cc.ix[pos].total(); ++t) {
        auto tuple = cc.ix[pos].unflatten(t); // [x, a_1..a_m]
        auto [cpos, tup] = b.locate(m, tuple[0]);
        const BarChainInfo& ci = b.chains(m)[cpos];
        int lev = ci.k();
        std::vector<SetPartition> lam2;
        for (const auto& lamt : ci.lam) {
          std::vector<std::vector<int>> blocks;
          for (const auto& blk : lamt.blocks()) {
            std::vector<int> big;
            for (int c : blk)
              for (int e : kap.block(c)) big.push_back(e);
            blocks.push_back(std::move(big));
          }
          lam2.push_back(SetPartition(n, std::move(blocks)));
        }
        int lb = ci.l_base();
        const SetPartition& last = ci.lam[lev];
        std::vector<int> ldegs(last.num_blocks()), adegs(m);
        for (int bb = 0; bb < last.num_blocks(); ++bb)
          ldegs[bb] = ci.fac[lb + bb]->deg(tup[lb + bb]);
        int ta = 0;
        for (int c = 0; c < m; ++c) {
          adegs[c] = a.at(static_cast<int>(kap.block(c).size())).complex->deg(tuple[1 + c]);
          ta += adegs[c];
        }
        // the absorbed labels also cross the simplicial suspension,
        // which sits after all internal degrees
        int sign = detail::interleave_sign(ldegs, adegs, last.blocks());
        if ((lev * ta) % 2) sign = -sign;
        std::vector<int> ttuple(tup.begin(), tup.begin() + lb);
        for (int bb = 0; bb < last.num_blocks(); ++bb) {
          std::vector<int> merged;
          for (int c : last.block(bb))
            for (int e : kap.block(c)) merged.push_back(e);
          std::sort(merged.begin(), merged.end());
          std::vector<std::vector<int>> rho;
          std::vector<int> ltup = {tup[lb + bb]};
          for (int c : last.block(bb)) {
            std::vector<int> blk;
            for (int e : kap.block(c))
              blk.push_back(static_cast<int>(
                  std::lower_bound(merged.begin(), merged.end(), e) - merged.begin()));
            rho.push_back(std::move(blk));
            ltup.push_back(tuple[1 + c]);
          }
          int sz = static_cast<int>(merged.size());
          const auto& hc = cm.comp.at(sz);
          int ppos = hc.position_of(SetPartition(sz, std::move(rho)));
          if (ppos < 0) throw CheckFailed("composite label component missing");
          ttuple.push_back(hc.index(ppos, ltup));
        }
        int tcpos = tb.chain_position(n, bar_chain_key(lam2));
        if (tcpos < 0) throw CheckFailed("blown-up chain missing from the target bar");
        mm.add_to(tb.index(n, tcpos, ttuple), cc.offset[pos] + t, Scalar::integer(f, sign));
      }
    }
    map.at_[n - 1] = ChainMap(src.seq.at(n).complex, tb.at(n).complex, 0, std::move(mm));
  }
  return BarComparison{std::move(cm), std::move(tb), std::move(src), std::move(map)};
}

// A o B(R, P, L)  ->  B(A o R, P, L): sum of shuffle merges with the merged
// first tiers collected into A o R.  A quasi-isomorphism but not injective
// level by level (the two sides have different graded dimensions in general).
inline BarComparison chi_r(const SymSeq& a, const Bar& b) {
  ComposedModule cm = right_module_compose(a, b.right_input());
  Bar tb(cm.module, b.left_input());
  ComposeResult src = compose_full(a, b.seq());
  Field f = b.field();
  SymSeqMap map = SymSeqMap::zero(src.seq, tb.seq());
  for (int n = 1; n <= b.arity_max(); ++n) {
    SparseMatrix mm(f, tb.at(n).dim(), src.seq.at(n).dim());
    const auto& cc = src.at(n);
    for (std::size_t pos = 0; pos < cc.parts.size(); ++pos) {
      const SetPartition& kap = cc.parts[pos];
      int m = kap.num_blocks();
      for (int t = 0; t < cc.ix[pos].total(); ++t) {
        auto tuple = cc.ix[pos].unflatten(t); // [a, x_1..x_m]
        int adeg = a.at(m).complex->deg(tuple[0]);
        std::vector<int> xs(tuple.begin() + 1, tuple.end());
        for (const auto& term : bar_detail::shuffle_merge(b, kap, xs, adeg)) {
          const auto& hc = cm.comp.at(term.kbar.n());
          int hpos = hc.position_of(term.kbar);
          if (hpos < 0) throw CheckFailed("merged head partition missing");
          std::vector<int> htup = {tuple[0]};
          for (int rl : term.rlabels) htup.push_back(rl);
          std::vector<int> ttuple = {hc.index(hpos, htup)};
          for (int x : term.rest) ttuple.push_back(x);
          int tcpos = tb.chain_position(n, bar_chain_key(term.lam));
          if (tcpos < 0) throw CheckFailed("merged chain missing from the target bar");
          mm.add_to(tb.index(n, tcpos, ttuple), cc.offset[pos] + t,
                    Scalar::integer(f, term.sign));
        }
      }
    }
    map.at_[n - 1] = ChainMap(src.seq.at(n).complex, tb.at(n).complex, 0, std::move(mm));
  }
  return BarComparison{std::move(cm), std::move(tb), std::move(src), std::move(map)};
}

// ---------------------------------------------------------------------------
// the two-sided bar with a bimodule in the middle

// B(R, P, M, P, L) associated as B(B(R, P, M), P, L): the inner bar is a
// right module through M's right action (bar_right_module).
inline Bar bar_bimodule(const OperadModule& r, const OperadBimodule& m, const OperadModule& l) {
  Bar inner(r, m.left_module());
  return Bar(bar_right_module(inner, m), l);
}

// ---------------------------------------------------------------------------
// the two-sided cut: cooperad cocomposition and comodule coactions

// the bar of the operad over itself on both sides collapsed to units:
// B(1, P, 1), the carrier of the cooperad structure
inline Bar operad_bar(const OperadPtr& p) {
  return Bar(unit_module(p, OperadModule::Side::right),
             unit_module(p, OperadModule::Side::left));
}

namespace bar_detail {

inline bool is_unit_input(const OperadModule& m) {
  if (m.at(1).dim() != 1 || m.at(1).complex->deg(0) != 0) return false;
  for (int n = 2; n <= m.seq().arity_max(); ++n)
    if (m.at(n).dim() != 0) return false;
  return true;
}

} // namespace bar_detail

// Cut of B(R, P, L)(n) along a partition lam with k blocks of sizes m_1..m_k:
//   B(R, P, L)(n)  ->  B(R, P, 1)(k) (x) B(1, P, L)(m_1) (x) .. (x) B(1, P, L)(m_k)
// (upper and lower are those two bars; when R = L = 1 both equal B(1, P, 1)
// and the cuts form the cooperad cocomposition).  A chain contributes iff lam
// occurs among its tiers, every later step refines exactly one lam-block, and
// the steps are grouped block by block in canonical block order (the
// normalized front-to-back face selection of the diagonal); the upper part is
// the quotient chain above the cut, the lower parts restrict and renumber the
// chain below it.  The coefficient is the Koszul sign of redistributing the
// labels and the simplicial suspensions, which sit after all internal degrees.
// Rows are indexed by [upper(k), lower(m_1), .., lower(m_k)] row-major.
inline SparseMatrix cut_at(const Bar& b, const Bar& upper, const Bar& lower,
                           const SetPartition& lam) {
  const OperadPtr& p = b.over();
  if (upper.over() != p || lower.over() != p)
    throw CheckFailed("cut pieces must be bars over the same operad");
  if (!bar_detail::is_unit_input(upper.left_input()) ||
      !bar_detail::is_unit_input(lower.right_input()))
    throw CheckFailed("cut pieces must have a one-point module on the cut side");
  for (int a = 1; a <= b.arity_max(); ++a) {
    if (upper.right_input().at(a).complex != b.right_input().at(a).complex)
      throw CheckFailed("upper cut piece must keep the bar's right input");
    if (lower.left_input().at(a).complex != b.left_input().at(a).complex)
      throw CheckFailed("lower cut piece must keep the bar's left input");
  }

  Field f = b.field();
  int n = lam.n(), k = lam.num_blocks();
  std::vector<int> blk_of(n);
  for (int j = 0; j < k; ++j)
    for (int e : lam.block(j)) blk_of[e] = j;

  std::vector<int> dims = {upper.at(k).dim()};
  for (const auto& blk : lam.blocks())
    dims.push_back(lower.at(static_cast<int>(blk.size())).dim());
  TensorIndexer tix{dims};
  SparseMatrix out(f, tix.total(), b.at(n).dim());

  for (const auto& ci : b.chains(n)) {
    int m = ci.k();
    int t0 = -1;
    for (int t = 0; t <= m; ++t)
      if (ci.lam[t] == lam) {
        t0 = t;
        break;
      }
    if (t0 < 0) continue;

    // each step after the cut must split parents inside a single lam-block,
    // and the owners must be non-decreasing (equivalently: grouped block by
    // block in canonical block order)
    bool ok = true;
    int last_owner = 0;
    std::vector<std::vector<int>> win(k); // steps owned by each lam-block
    for (int s = t0 + 1; s <= m && ok; ++s) {
      int owner = -1;
      const auto& ns = ci.nest[s - 1];
      for (int pj = 0; pj < static_cast<int>(ns.size()) && ok; ++pj) {
        if (ns[pj].size() < 2) continue;
        int o = blk_of[ci.lam[s - 1].block(pj).front()];
        if (owner < 0)
          owner = o;
        else if (owner != o)
          ok = false;
      }
      if (owner < last_owner) ok = false; // strict steps always split something
      if (!ok) break;
      win[owner].push_back(s);
      last_owner = owner;
    }
    if (!ok) continue;

    // the quotient chain above the cut (blocks correspond one to one, order
    // preserved: the quotient block order is by minimum as well)
    std::vector<SetPartition> up;
    for (int t = 0; t <= t0; ++t) {
      std::vector<std::vector<int>> qb;
      for (const auto& blk : ci.lam[t].blocks()) {
        std::vector<int> q;
        for (int e : blk) q.push_back(blk_of[e]);
        std::sort(q.begin(), q.end());
        q.erase(std::unique(q.begin(), q.end()), q.end());
        qb.push_back(std::move(q));
      }
      up.push_back(SetPartition(k, std::move(qb)));
    }
    int ucpos = upper.chain_position(k, bar_chain_key(up));
    if (ucpos < 0) throw CheckFailed("quotient chain missing from the upper cut piece");

    // the restricted chains below it, renumbered within each lam-block
    struct LowerPart {
      int cpos;
      std::vector<int> slots;  // source factor positions feeding this part
    };
    std::vector<LowerPart> parts(k);
    for (int j = 0; j < k; ++j) {
      const auto& ground = lam.block(j);
      int mj = static_cast<int>(ground.size());
      std::vector<SetPartition> lo;
      std::vector<int> all(mj);
      for (int t = 0; t < mj; ++t) all[t] = t;
      lo.push_back(SetPartition(mj, {all}));
      std::vector<int> slots;
      for (int s : win[j]) {
        std::vector<std::vector<int>> rb;
        for (const auto& blk : ci.lam[s].blocks()) {
          if (blk_of[blk.front()] != j) continue;
          std::vector<int> r;
          for (int e : blk)
            r.push_back(static_cast<int>(
                std::lower_bound(ground.begin(), ground.end(), e) - ground.begin()));
          rb.push_back(std::move(r));
        }
        lo.push_back(SetPartition(mj, std::move(rb)));
        int tb = ci.tier_base(s);
        for (int pj = 0; pj < ci.lam[s - 1].num_blocks(); ++pj)
          if (blk_of[ci.lam[s - 1].block(pj).front()] == j) slots.push_back(tb + pj);
      }
      int lb = ci.l_base();
      for (int bb = 0; bb < ci.lam[m].num_blocks(); ++bb)
        if (blk_of[ci.lam[m].block(bb).front()] == j) slots.push_back(lb + bb);
      parts[j].cpos = lower.chain_position(mj, bar_chain_key(lo));
      if (parts[j].cpos < 0)
        throw CheckFailed("restricted chain missing from the lower cut piece");
      parts[j].slots = std::move(slots);
    }

    // item model for the sign: [R-label, tier labels, L-labels, one degree-1
    // suspension per step]; the target order is upper's items then each lower
    // part's, with each factor's suspensions after its labels
    int F = ci.factors();
    std::vector<int> perm;
    std::vector<bool> used(F + m, false);
    auto take = [&](int i) {
      perm.push_back(i);
      used[i] = true;
    };
    take(0);
    for (int s = 1; s <= t0; ++s) {
      int tb = ci.tier_base(s);
      for (int pj = 0; pj < ci.lam[s - 1].num_blocks(); ++pj) take(tb + pj);
    }
    for (int s = 1; s <= t0; ++s) take(F + s - 1);
    for (int j = 0; j < k; ++j) {
      for (int i : parts[j].slots) take(i);
      for (int s : win[j]) take(F + s - 1);
    }
    std::vector<int> spill;
    for (int i = 0; i < F + m; ++i)
      if (!used[i]) spill.push_back(i); // unit labels of quiet blocks, degree 0
    for (int i : spill) perm.push_back(i);

    int ub = ci.tier_base(t0 + 1); // upper label slots are 0..ub-1 verbatim
    for (int t = 0; t < ci.ix.total(); ++t) {
      auto tuple = ci.ix.unflatten(t);
      std::vector<int> sdegs(F + m, 1);
      for (int i = 0; i < F; ++i) sdegs[i] = ci.fac[i]->deg(tuple[i]);
      int sign = koszul_reorder_sign(sdegs, perm);

      std::vector<int> utuple(tuple.begin(), tuple.begin() + ub);
      for (int j = 0; j < k; ++j) utuple.push_back(0);
      std::vector<int> row = {upper.index(k, ucpos, utuple)};
      for (int j = 0; j < k; ++j) {
        std::vector<int> ltuple = {0};
        for (int i : parts[j].slots) ltuple.push_back(tuple[i]);
        int mj = static_cast<int>(lam.block(j).size());
        row.push_back(lower.index(mj, parts[j].cpos, ltuple));
      }
      out.add_to(tix.flatten(row), ci.offset + t, Scalar::integer(f, sign));
    }
  }
  return out;
}

} // namespace opcalc
