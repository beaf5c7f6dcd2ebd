#pragma once
// Simplicial and cosimplicial objects in chain complexes: identity validation,
// normalized (Moore) totalization and conormalized cototalization.
//
// Sign convention (fixed project-wide): for x of internal degree q at
// (co)simplicial level k,
//   totalize:   deg x = q + k,  d x = d_int x + (-1)^q * sum_i (-1)^i d_i x
//   cototalize: deg x = q - k,  d x = d_int x + (-1)^q * sum_i (-1)^i delta^i x

#include <opcalc/chain.hpp>

#include <string>
#include <utility>
#include <vector>

namespace opcalc {

// A simplicial object in chain complexes, truncated at level top():
// face[k][i] : level k -> level k-1 for 0 <= i <= k (k >= 1),
// degen[k][j]: level k -> level k+1 for 0 <= j <= k (k < top).
struct SimplicialChainObject {
  std::vector<CCPtr> level;
  std::vector<std::vector<ChainMap>> face;
  std::vector<std::vector<ChainMap>> degen;

  int top() const { return static_cast<int>(level.size()) - 1; }

  void validate() const {
    if (level.empty()) throw CheckFailed("simplicial object has no levels");
    int t = top();
    if (static_cast<int>(face.size()) != t + 1 || static_cast<int>(degen.size()) != t + 1)
      throw CheckFailed("simplicial object: face/degeneracy tables sized wrongly");
    for (int k = 0; k <= t; ++k) {
      int nf = (k == 0) ? 0 : k + 1;
      int ns = (k == t) ? 0 : k + 1;
      if (static_cast<int>(face[k].size()) != nf)
        throw CheckFailed("level " + std::to_string(k) + ": expected " + std::to_string(nf) + " faces");
      if (static_cast<int>(degen[k].size()) != ns)
        throw CheckFailed("level " + std::to_string(k) + ": expected " + std::to_string(ns) + " degeneracies");
      for (int i = 0; i < nf; ++i) {
        const ChainMap& d = face[k][i];
        if (d.src != level[k] || d.tgt != level[k - 1] || d.deg != 0)
          throw CheckFailed("face (" + std::to_string(k) + "," + std::to_string(i) + ") malformed");
        d.validate();
      }
      for (int j = 0; j < ns; ++j) {
        const ChainMap& s = degen[k][j];
        if (s.src != level[k] || s.tgt != level[k + 1] || s.deg != 0)
          throw CheckFailed("degeneracy (" + std::to_string(k) + "," + std::to_string(j) + ") malformed");
        s.validate();
      }
    }
    auto fail = [](const char* rel, int k, int i, int j) {
      throw CheckFailed(std::string("simplicial identity ") + rel + " fails at level " + std::to_string(k) +
                        ", (i,j)=(" + std::to_string(i) + "," + std::to_string(j) + ")");
    };
    // d_i d_j = d_{j-1} d_i for i < j
    for (int k = 2; k <= t; ++k)
      for (int j = 1; j <= k; ++j)
        for (int i = 0; i < j; ++i)
          if (!(face[k - 1][i].m * face[k][j].m == face[k - 1][j - 1].m * face[k][i].m))
            fail("d_i d_j = d_{j-1} d_i", k, i, j);
    // s_i s_j = s_{j+1} s_i for i <= j
    for (int k = 0; k + 2 <= t; ++k)
      for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= j; ++i)
          if (!(degen[k + 1][i].m * degen[k][j].m == degen[k + 1][j + 1].m * degen[k][i].m))
            fail("s_i s_j = s_{j+1} s_i", k, i, j);
    // d_i s_j relations on level k (k < top)
    for (int k = 0; k < t; ++k)
      for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= k + 1; ++i) {
          SparseMatrix lhs = face[k + 1][i].m * degen[k][j].m;
          if (i == j || i == j + 1) {
            if (!(lhs == SparseMatrix::identity(level[k]->field(), level[k]->size())))
              fail("d_i s_j = id", k, i, j);
          } else if (i < j) {
            if (!(lhs == degen[k - 1][j - 1].m * face[k][i].m)) fail("d_i s_j = s_{j-1} d_i", k, i, j);
          } else { // i > j + 1
            if (!(lhs == degen[k - 1][j].m * face[k][i - 1].m)) fail("d_i s_j = s_j d_{i-1}", k, i, j);
          }
        }
  }
};

struct Totalization {
  CCPtr complex;
  // per total-basis index: (simplicial level, id within that level's normalized quotient)
  std::vector<std::pair<int, std::string>> origin;
};

// Normalized (Moore) totalization: quotient each level by the span of the
// degeneracy images, then assemble with the fixed sign convention.  The
// truncation must be honest: the caller is responsible for the levels above
// `top` being entirely degenerate (for the objects built here this is the
// partition-chain length bound, asserted by the callers' tests).
inline Totalization totalize(const SimplicialChainObject& S) {
  if (S.level.empty()) throw CheckFailed("cannot totalize an empty simplicial object");
  Field f = S.level[0]->field();
  int t = S.top();

  std::vector<CCPtr> quot(t + 1);
  std::vector<ChainMap> proj;
  proj.reserve(t + 1);
  for (int k = 0; k <= t; ++k) {
    Subspace degenerate(f, S.level[k]->size());
    if (k >= 1)
      for (const ChainMap& s : S.degen[k - 1]) degenerate.insert_columns(s.m);
    auto [q, p] = quotient_by_subspace(S.level[k], degenerate);
    quot[k] = q;
    proj.push_back(p);
  }

  std::vector<BasisElt> basis;
  std::vector<std::pair<int, std::string>> origin;
  std::vector<int> offset(t + 1, 0);
  for (int k = 0; k <= t; ++k) {
    offset[k] = static_cast<int>(basis.size());
    for (int i = 0; i < quot[k]->size(); ++i) {
      basis.push_back({"t" + std::to_string(k) + ":" + quot[k]->elt(i).id, quot[k]->deg(i) + k});
      origin.emplace_back(k, quot[k]->elt(i).id);
    }
  }
  int n = static_cast<int>(basis.size());
  SparseMatrix d(f, n, n);
  for (int k = 0; k <= t; ++k) {
    for (int i = 0; i < quot[k]->size(); ++i) {
      int col = offset[k] + i;
      for (int r = 0; r < quot[k]->size(); ++r) {
        Scalar v = quot[k]->d().get(r, i);
        if (!v.is_zero()) d.add_to(offset[k] + r, col, v);
      }
      if (k >= 1) {
        // representative: quotient basis elements are original basis elements
        int rep = S.level[k]->index_of(quot[k]->elt(i).id);
        SparseVec sum;
        Scalar sgn = Scalar::one(f);
        for (int j = 0; j <= k; ++j) {
          sum = sparse_axpy(sum, sgn, S.face[k][j].m.column_vec(rep));
          sgn = -sgn;
        }
        Scalar outer = Scalar::sign(f, quot[k]->deg(i));
        for (const auto& [r, v] : proj[k - 1].m.apply(sum)) d.add_to(offset[k - 1] + r, col, outer * v);
      }
    }
  }
  return {make_cc(ChainComplex(f, std::move(basis), std::move(d))), std::move(origin)};
}

// A cosimplicial object in chain complexes, truncated at level top():
// coface[k][i] : level k -> level k+1 for 0 <= i <= k+1 (k < top),
// codegen[k][j]: level k -> level k-1 for 0 <= j <= k-1 (k >= 1).
struct CosimplicialChainObject {
  std::vector<CCPtr> level;
  std::vector<std::vector<ChainMap>> coface;
  std::vector<std::vector<ChainMap>> codegen;

  int top() const { return static_cast<int>(level.size()) - 1; }

  void validate() const {
    if (level.empty()) throw CheckFailed("cosimplicial object has no levels");
    int t = top();
    if (static_cast<int>(coface.size()) != t + 1 || static_cast<int>(codegen.size()) != t + 1)
      throw CheckFailed("cosimplicial object: coface/codegeneracy tables sized wrongly");
    for (int k = 0; k <= t; ++k) {
      int nf = (k == t) ? 0 : k + 2;
      int ns = (k == 0) ? 0 : k;
      if (static_cast<int>(coface[k].size()) != nf)
        throw CheckFailed("level " + std::to_string(k) + ": expected " + std::to_string(nf) + " cofaces");
      if (static_cast<int>(codegen[k].size()) != ns)
        throw CheckFailed("level " + std::to_string(k) + ": expected " + std::to_string(ns) + " codegeneracies");
      for (int i = 0; i < nf; ++i) {
        const ChainMap& cf = coface[k][i];
        if (cf.src != level[k] || cf.tgt != level[k + 1] || cf.deg != 0)
          throw CheckFailed("coface (" + std::to_string(k) + "," + std::to_string(i) + ") malformed");
        cf.validate();
      }
      for (int j = 0; j < ns; ++j) {
        const ChainMap& cs = codegen[k][j];
        if (cs.src != level[k] || cs.tgt != level[k - 1] || cs.deg != 0)
          throw CheckFailed("codegeneracy (" + std::to_string(k) + "," + std::to_string(j) + ") malformed");
        cs.validate();
      }
    }
    auto fail = [](const char* rel, int k, int i, int j) {
      throw CheckFailed(std::string("cosimplicial identity ") + rel + " fails at level " + std::to_string(k) +
                        ", (i,j)=(" + std::to_string(i) + "," + std::to_string(j) + ")");
    };
    // delta^j delta^i = delta^i delta^{j-1} for i < j  (level k -> k+2)
    for (int k = 0; k + 2 <= t; ++k)
      for (int j = 1; j <= k + 2; ++j)
        for (int i = 0; i < j; ++i)
          if (!(coface[k + 1][j].m * coface[k][i].m == coface[k + 1][i].m * coface[k][j - 1].m))
            fail("d^j d^i = d^i d^{j-1}", k, i, j);
    // sigma^j sigma^i = sigma^i sigma^{j+1} for i <= j  (level k+2 -> k)
    for (int k = 0; k + 2 <= t; ++k)
      for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= j; ++i)
          if (!(codegen[k + 1][j].m * codegen[k + 2][i].m == codegen[k + 1][i].m * codegen[k + 2][j + 1].m))
            fail("s^j s^i = s^i s^{j+1}", k, i, j);
    // sigma^j delta^i on level k (maps level k -> k, via level k+1); j = 0..k
    for (int k = 0; k < t; ++k)
      for (int j = 0; j <= k; ++j)
        for (int i = 0; i <= k + 1; ++i) {
          SparseMatrix lhs = codegen[k + 1][j].m * coface[k][i].m;
          if (i == j || i == j + 1) {
            if (!(lhs == SparseMatrix::identity(level[k]->field(), level[k]->size())))
              fail("s^j d^i = id", k, i, j);
          } else if (i < j) {
            if (!(lhs == coface[k - 1][i].m * codegen[k][j - 1].m)) fail("s^j d^i = d^i s^{j-1}", k, i, j);
          } else { // i > j + 1
            if (!(lhs == coface[k - 1][i - 1].m * codegen[k][j].m)) fail("s^j d^i = d^{i-1} s^j", k, i, j);
          }
        }
  }
};

struct Cototalization {
  CCPtr complex;
  std::vector<std::pair<int, std::string>> origin; // (level, conormalized basis id)
};

// Conormalized cototalization: level k is replaced by the joint kernel of the
// codegeneracies, with differential d_int + (-1)^q sum (-1)^i delta^i and
// total degree q - k.  The top provided level must conormalize to zero (the
// honest finiteness certificate); otherwise this throws.
inline Cototalization cototalize(const CosimplicialChainObject& S) {
  if (S.level.empty()) throw CheckFailed("cannot cototalize an empty cosimplicial object");
  Field f = S.level[0]->field();
  int t = S.top();

  std::vector<CCPtr> conorm(t + 1);
  std::vector<ChainMap> incl;
  incl.reserve(t + 1);
  for (int k = 0; k <= t; ++k) {
    if (k == 0) {
      conorm[0] = S.level[0];
      incl.push_back(ChainMap::identity(S.level[0]));
      continue;
    }
    // joint kernel: stack the codegeneracy matrices
    int rows = 0;
    for (const ChainMap& cs : S.codegen[k]) rows += cs.m.rows();
    SparseMatrix stacked(f, rows, S.level[k]->size());
    int at = 0;
    for (const ChainMap& cs : S.codegen[k]) {
      for (int r = 0; r < cs.m.rows(); ++r)
        for (const auto& [c, v] : cs.m.row(r)) stacked.add_to(at + r, c, v);
      at += cs.m.rows();
    }
    std::vector<SparseVec> gens;
    SparseMatrix ker = stacked.kernel();
    for (int c = 0; c < ker.cols(); ++c) gens.push_back(ker.column_vec(c));
    auto [sub, in] = subcomplex_from_vectors(S.level[k], gens, "n" + std::to_string(k) + ":");
    conorm[k] = sub;
    incl.push_back(in);
  }
  if (conorm[t]->size() != 0)
    throw CheckFailed("cosimplicial truncation dishonest: conormalized level " + std::to_string(t) +
                      " is nonzero (dim " + std::to_string(conorm[t]->size()) + ")");

  std::vector<BasisElt> basis;
  std::vector<std::pair<int, std::string>> origin;
  std::vector<int> offset(t + 1, 0);
  for (int k = 0; k <= t; ++k) {
    offset[k] = static_cast<int>(basis.size());
    for (int i = 0; i < conorm[k]->size(); ++i) {
      basis.push_back({"c" + std::to_string(k) + ":" + conorm[k]->elt(i).id, conorm[k]->deg(i) - k});
      origin.emplace_back(k, conorm[k]->elt(i).id);
    }
  }
  int n = static_cast<int>(basis.size());
  SparseMatrix d(f, n, n);
  for (int k = 0; k <= t; ++k) {
    for (int i = 0; i < conorm[k]->size(); ++i) {
      int col = offset[k] + i;
      for (int r = 0; r < conorm[k]->size(); ++r) {
        Scalar v = conorm[k]->d().get(r, i);
        if (!v.is_zero()) d.add_to(offset[k] + r, col, v);
      }
      if (k < t) {
        SparseVec amb = incl[k].m.column_vec(i);
        SparseVec sum;
        Scalar sgn = Scalar::one(f);
        for (int j = 0; j <= k + 1; ++j) {
          sum = sparse_axpy(sum, sgn, S.coface[k][j].m.apply(amb));
          sgn = -sgn;
        }
        // express in the conormalized basis of level k+1
        SparseMatrix rhs(f, S.level[k + 1]->size(), 1);
        for (const auto& [r, v] : sum) rhs.set(r, 0, v);
        SparseMatrix coords = incl[k + 1].m.solve(rhs); // throws if not conormalized-closed
        Scalar outer = Scalar::sign(f, conorm[k]->deg(i));
        for (int r = 0; r < coords.rows(); ++r)
          for (const auto& [z, v] : coords.row(r)) {
            (void)z;
            d.add_to(offset[k + 1] + r, col, outer * v);
          }
      }
    }
  }
  return {make_cc(ChainComplex(f, std::move(basis), std::move(d))), std::move(origin)};
}

} // namespace opcalc
