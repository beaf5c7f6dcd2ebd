#pragma once

// Bounded chain complexes over an exact field, chain maps, tensor products
// with Koszul signs, linear duals, mapping cones, homology, and hom-complexes.
// All basis elements carry string ids and integer degrees; differentials are
// sparse matrices acting on the whole (finite) basis with degree -1.

#include "opcalc/linalg.hpp"
#include "opcalc/perm.hpp"

#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace opcalc {

struct CheckFailed : std::runtime_error {
  explicit CheckFailed(const std::string& what) : std::runtime_error(what) {}
};

struct BasisElt {
  std::string id;
  int deg = 0;
  bool operator==(const BasisElt& o) const = default;
};

class ChainComplex {
  Field f_;
  std::vector<BasisElt> basis_;
  SparseMatrix d_; // square, degree -1
  mutable std::shared_ptr<std::unordered_map<std::string, int>> index_;

public:
  explicit ChainComplex(Field f) : f_(f), d_(f, 0, 0) {}

  ChainComplex(Field f, std::vector<BasisElt> basis, SparseMatrix d, bool check = true)
      : f_(f), basis_(std::move(basis)), d_(std::move(d)) {
    if (d_.rows() != size() || d_.cols() != size())
      throw CheckFailed("differential shape does not match basis");
    if (d_.field() != f_) throw FieldMismatch();
    if (check) validate();
  }

  static ChainComplex free_on(Field f, std::vector<BasisElt> basis) {
    SparseMatrix d(f, static_cast<int>(basis.size()), static_cast<int>(basis.size()));
    return ChainComplex(f, std::move(basis), std::move(d), false);
  }

  const Field& field() const { return f_; }
  int size() const { return static_cast<int>(basis_.size()); }
  const std::vector<BasisElt>& basis() const { return basis_; }
  const BasisElt& elt(int i) const { return basis_.at(i); }
  int deg(int i) const { return basis_.at(i).deg; }
  const SparseMatrix& d() const { return d_; }

  int index_of(const std::string& id) const {
    if (!index_) {
      index_ = std::make_shared<std::unordered_map<std::string, int>>();
      for (int i = 0; i < size(); ++i) (*index_)[basis_[i].id] = i;
    }
    auto it = index_->find(id);
    if (it == index_->end()) throw CheckFailed("basis id not found: " + id);
    return it->second;
  }

  void validate() const {
    std::unordered_map<std::string, int> seen;
    for (int i = 0; i < size(); ++i) {
      if (seen.count(basis_[i].id))
        throw CheckFailed("duplicate basis id: " + basis_[i].id);
      seen[basis_[i].id] = i;
    }
    for (int r = 0; r < size(); ++r)
      for (const auto& [c, v] : d_.row(r)) {
        (void)v;
        if (deg(r) != deg(c) - 1)
          throw CheckFailed("differential entry not of degree -1 at (" + basis_[r].id + "," + basis_[c].id + ")");
      }
    if (!(d_ * d_).is_zero()) throw CheckFailed("d*d != 0");
  }

  std::map<int, int> dims_by_degree() const {
    std::map<int, int> out;
    for (const auto& b : basis_) out[b.deg]++;
    return out;
  }

  std::vector<int> indices_in_degree(int q) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (deg(i) == q) out.push_back(i);
    return out;
  }

  int min_degree() const {
    int m = 0;
    bool first = true;
    for (const auto& b : basis_) {
      if (first || b.deg < m) m = b.deg;
      first = false;
    }
    return m;
  }

  int max_degree() const {
    int m = 0;
    bool first = true;
    for (const auto& b : basis_) {
      if (first || b.deg > m) m = b.deg;
      first = false;
    }
    return m;
  }
};

using CCPtr = std::shared_ptr<const ChainComplex>;

inline CCPtr make_cc(ChainComplex c) { return std::make_shared<const ChainComplex>(std::move(c)); }

// One-dimensional complex concentrated in a degree.
inline CCPtr point_complex(Field f, const std::string& id, int deg) {
  return make_cc(ChainComplex::free_on(f, {{id, deg}}));
}

struct ChainMap {
  CCPtr src, tgt;
  int deg = 0;
  SparseMatrix m; // tgt.size() x src.size()

  ChainMap(CCPtr s, CCPtr t, int degree, SparseMatrix mat)
      : src(std::move(s)), tgt(std::move(t)), deg(degree), m(std::move(mat)) {
    if (m.rows() != tgt->size() || m.cols() != src->size())
      throw CheckFailed("chain map matrix shape mismatch");
  }

  static ChainMap zero(CCPtr s, CCPtr t, int degree = 0) {
    SparseMatrix m(s->field(), t->size(), s->size());
    return ChainMap(std::move(s), std::move(t), degree, std::move(m));
  }

  static ChainMap identity(CCPtr c) {
    SparseMatrix m = SparseMatrix::identity(c->field(), c->size());
    return ChainMap(c, c, 0, std::move(m));
  }

  const Field& field() const { return src->field(); }

  // degree homogeneity + the chain condition d f = (-1)^deg f d
  void validate() const {
    for (int r = 0; r < m.rows(); ++r)
      for (const auto& [c, v] : m.row(r)) {
        (void)v;
        if (tgt->deg(r) != src->deg(c) + deg)
          throw CheckFailed("chain map entry of wrong degree at (" + tgt->elt(r).id + "," + src->elt(c).id + ")");
      }
    SparseMatrix lhs = tgt->d() * m;
    SparseMatrix rhs = m * src->d();
    if (deg % 2 != 0) rhs = rhs.scaled(-Scalar::one(field()));
    if (!(lhs == rhs)) throw CheckFailed("not a chain map: d f != (-1)^deg f d");
  }

  bool is_chain_map() const {
    try { validate(); return true; } catch (const CheckFailed&) { return false; }
  }

  friend ChainMap compose(const ChainMap& g, const ChainMap& f) {
    // g after f
    if (g.src->size() != f.tgt->size())
      throw CheckFailed("compose: size mismatch");
    return ChainMap(f.src, g.tgt, f.deg + g.deg, g.m * f.m);
  }

  friend ChainMap operator+(const ChainMap& a, const ChainMap& b) {
    if (a.deg != b.deg) throw CheckFailed("chain map degree mismatch in +");
    return ChainMap(a.src, a.tgt, a.deg, a.m + b.m);
  }

  friend ChainMap operator-(const ChainMap& a, const ChainMap& b) {
    if (a.deg != b.deg) throw CheckFailed("chain map degree mismatch in -");
    return ChainMap(a.src, a.tgt, a.deg, a.m - b.m);
  }

  ChainMap scaled(const Scalar& c) const { return ChainMap(src, tgt, deg, m.scaled(c)); }
};

// ---------------------------------------------------------------------------
// tensor products

// Flatten/unflatten tuples of factor indices, first factor slowest.
struct TensorIndexer {
  std::vector<int> sizes;

  int flatten(const std::vector<int>& tuple) const {
    int idx = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) idx = idx * sizes[i] + tuple[i];
    return idx;
  }

  std::vector<int> unflatten(int idx) const {
    std::vector<int> tuple(sizes.size());
    for (std::size_t i = sizes.size(); i-- > 0;) {
      tuple[i] = idx % sizes[i];
      idx /= sizes[i];
    }
    return tuple;
  }

  int total() const {
    int t = 1;
    for (int s : sizes) t *= s;
    return t;
  }
};

inline std::string tensor_id(const std::vector<std::string>& ids) {
  std::string out = "(";
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += "&";
    out += ids[i];
  }
  out += ")";
  return out;
}

// Tensor product of complexes with the Koszul differential
// d(x1&..&xm) = sum_i (-1)^(deg x1+..+deg x_{i-1}) x1&..&d x_i&..&xm.
// The empty tensor is the unit: one generator "1" in degree 0.
inline CCPtr tensor_many(Field f, const std::vector<CCPtr>& factors) {
  if (factors.empty()) return point_complex(f, "1", 0);
  TensorIndexer ix;
  for (const auto& c : factors) {
    if (c->field() != f) throw FieldMismatch();
    ix.sizes.push_back(c->size());
  }
  int n = ix.total();
  std::vector<BasisElt> basis;
  basis.reserve(n);
  for (int idx = 0; idx < n; ++idx) {
    auto tuple = ix.unflatten(idx);
    std::vector<std::string> ids;
    int deg = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      ids.push_back(factors[i]->elt(tuple[i]).id);
      deg += factors[i]->deg(tuple[i]);
    }
    basis.push_back({tensor_id(ids), deg});
  }
  SparseMatrix d(f, n, n);
  for (int idx = 0; idx < n; ++idx) {
    auto tuple = ix.unflatten(idx);
    int sign_deg = 0;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      Scalar sgn = Scalar::sign(f, sign_deg);
      for (const auto& [r, v] : factors[i]->d().column_vec(tuple[i])) {
        auto t2 = tuple;
        t2[i] = r;
        d.add_to(ix.flatten(t2), idx, sgn * v);
      }
      sign_deg += factors[i]->deg(tuple[i]);
    }
  }
  return make_cc(ChainComplex(f, std::move(basis), std::move(d), false));
}

inline CCPtr tensor(const CCPtr& a, const CCPtr& b) { return tensor_many(a->field(), {a, b}); }

// Tensor product of degree-0 chain maps (no interleaving signs needed).
inline ChainMap tensor_map_many(const std::vector<ChainMap>& maps,
                                const CCPtr& src, const CCPtr& tgt) {
  TensorIndexer six, tix;
  for (const auto& f : maps) {
    if (f.deg != 0) throw CheckFailed("tensor_map_many wants degree-0 maps");
    six.sizes.push_back(f.src->size());
    tix.sizes.push_back(f.tgt->size());
  }
  if (src->size() != six.total() || tgt->size() != tix.total())
    throw CheckFailed("tensor_map_many: ambient complexes have wrong sizes");
  Field f = src->field();
  SparseMatrix m(f, tgt->size(), src->size());
  for (int idx = 0; idx < src->size(); ++idx) {
    auto tuple = six.unflatten(idx);
    // product of i-th columns, expanded recursively
    std::vector<std::pair<std::vector<int>, Scalar>> terms = {{{}, Scalar::one(f)}};
    for (std::size_t i = 0; i < maps.size(); ++i) {
      std::vector<std::pair<std::vector<int>, Scalar>> next;
      for (const auto& [r, v] : maps[i].m.column_vec(tuple[i]))
        for (const auto& [pref, c] : terms) {
          auto p2 = pref;
          p2.push_back(r);
          next.emplace_back(std::move(p2), c * v);
        }
      terms = std::move(next);
      if (terms.empty()) break;
    }
    for (const auto& [tup, c] : terms) m.add_to(tix.flatten(tup), idx, c);
  }
  return ChainMap(src, tgt, 0, std::move(m));
}

// ---------------------------------------------------------------------------
// duals

inline std::string dual_id(const std::string& id) { return id + "*"; }

// Linear dual: basis x* in degree -deg(x); d(x*) picks up the sign (-1)^q
// where q is the degree of the source of the transposed differential block,
// making the evaluation pairing D(C) (x) C -> k a chain map.
inline CCPtr dual_complex(const CCPtr& c) {
  Field f = c->field();
  std::vector<BasisElt> basis;
  basis.reserve(c->size());
  for (const auto& b : c->basis()) basis.push_back({dual_id(b.id), -b.deg});
  SparseMatrix d(f, c->size(), c->size());
  for (int r = 0; r < c->size(); ++r)
    for (const auto& [col, v] : c->d().row(r)) {
      // d_C entry: row r (deg q-1) <- col (deg q); dual entry: row col* <- col r*
      d.add_to(col, r, Scalar::sign(f, c->deg(col)) * v);
    }
  return make_cc(ChainComplex(f, std::move(basis), std::move(d), false));
}

// Dual of a degree-0 chain map: D(f): D(tgt) -> D(src), the plain transpose.
inline ChainMap dual_map(const ChainMap& f, const CCPtr& dual_tgt_of_f, const CCPtr& dual_src_of_f) {
  if (f.deg != 0) throw CheckFailed("dual_map wants a degree-0 map");
  return ChainMap(dual_tgt_of_f, dual_src_of_f, 0, f.m.transpose());
}

// Canonical iso C -> D(D(C)): x -> (-1)^deg(x) (x*)*.
inline ChainMap double_dual_iso(const CCPtr& c, const CCPtr& ddc) {
  Field f = c->field();
  SparseMatrix m(f, ddc->size(), c->size());
  for (int i = 0; i < c->size(); ++i) {
    int j = ddc->index_of(dual_id(dual_id(c->elt(i).id)));
    m.set(j, i, Scalar::sign(f, c->deg(i)));
  }
  return ChainMap(c, ddc, 0, std::move(m));
}

// ---------------------------------------------------------------------------
// sums, cones, homology

inline CCPtr direct_sum(const CCPtr& a, const CCPtr& b, const std::string& tag_a = "A:",
                        const std::string& tag_b = "B:") {
  Field f = a->field();
  if (b->field() != f) throw FieldMismatch();
  std::vector<BasisElt> basis;
  for (const auto& e : a->basis()) basis.push_back({tag_a + e.id, e.deg});
  for (const auto& e : b->basis()) basis.push_back({tag_b + e.id, e.deg});
  int na = a->size();
  SparseMatrix d(f, na + b->size(), na + b->size());
  for (int r = 0; r < na; ++r)
    for (const auto& [c, v] : a->d().row(r)) d.set(r, c, v);
  for (int r = 0; r < b->size(); ++r)
    for (const auto& [c, v] : b->d().row(r)) d.set(na + r, na + c, v);
  return make_cc(ChainComplex(f, std::move(basis), std::move(d), false));
}

// Mapping cone of a degree-0 chain map: cone(f) = src[1] (+) tgt,
// d(shifted x) = -shift(dx) + f(x).
inline CCPtr mapping_cone(const ChainMap& f) {
  if (f.deg != 0) throw CheckFailed("mapping_cone wants a degree-0 map");
  Field k = f.field();
  int ns = f.src->size(), nt = f.tgt->size();
  std::vector<BasisElt> basis;
  basis.reserve(ns + nt);
  for (const auto& e : f.src->basis()) basis.push_back({"c:" + e.id, e.deg + 1});
  for (const auto& e : f.tgt->basis()) basis.push_back({"t:" + e.id, e.deg});
  SparseMatrix d(k, ns + nt, ns + nt);
  for (int r = 0; r < ns; ++r)
    for (const auto& [c, v] : f.src->d().row(r)) d.set(r, c, -v);
  for (int c = 0; c < ns; ++c)
    for (const auto& [r, v] : f.m.column_vec(c)) d.set(ns + r, c, v);
  for (int r = 0; r < nt; ++r)
    for (const auto& [c, v] : f.tgt->d().row(r)) d.set(ns + r, ns + c, v);
  return make_cc(ChainComplex(k, std::move(basis), std::move(d), false));
}

inline std::map<int, int> homology_dims(const ChainComplex& c) {
  // per degree: dim ker(d_q) - rank(d_{q+1})
  std::map<int, std::vector<int>> by_deg;
  for (int i = 0; i < c.size(); ++i) by_deg[c.deg(i)].push_back(i);
  std::map<int, int> ranks; // rank of d restricted to degree q sources
  for (const auto& [q, idx] : by_deg) {
    SparseMatrix block = c.d().select_cols(idx);
    ranks[q] = block.rank();
  }
  std::map<int, int> h;
  for (const auto& [q, idx] : by_deg) {
    int dim_q = static_cast<int>(idx.size());
    int rank_q = ranks.count(q) ? ranks[q] : 0;
    int rank_q1 = ranks.count(q + 1) ? ranks[q + 1] : 0;
    int hq = dim_q - rank_q - rank_q1;
    if (hq != 0) h[q] = hq;
  }
  return h;
}

inline bool is_acyclic(const ChainComplex& c) { return homology_dims(c).empty(); }

inline bool is_quasi_iso(const ChainMap& f) {
  f.validate();
  return is_acyclic(*mapping_cone(f));
}

// Homology in one degree with chosen cycle representatives; can express
// arbitrary cycles in the representative basis (for induced maps/characters).
class DegreeHomology {
  Field f_;
  int deg_;
  std::vector<int> deg_indices_;          // ambient indices of degree-q basis
  std::vector<SparseVec> reps_;           // cycle representatives (ambient coords)
  Subspace boundaries_;                   // in degree-q coordinates
  SparseMatrix reduced_reps_;             // columns: reps reduced mod boundaries (degree-q coords)
  std::unordered_map<int, int> pos_;      // ambient index -> degree-local position

  SparseVec to_local(const SparseVec& ambient) const {
    SparseVec out;
    for (const auto& [i, v] : ambient) {
      auto it = pos_.find(i);
      if (it == pos_.end()) throw CheckFailed("vector not concentrated in the homology degree");
      out.emplace_back(it->second, v);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
  }

public:
  DegreeHomology(const ChainComplex& c, int q)
      : f_(c.field()), deg_(q), boundaries_(c.field(), 0) {
    deg_indices_ = c.indices_in_degree(q);
    for (std::size_t k = 0; k < deg_indices_.size(); ++k) pos_[deg_indices_[k]] = static_cast<int>(k);
    int nq = static_cast<int>(deg_indices_.size());
    boundaries_ = Subspace(f_, nq);
    // boundaries from degree q+1
    for (int j : c.indices_in_degree(q + 1)) {
      SparseVec col = c.d().column_vec(j);
      boundaries_.insert(to_local(col));
    }
    // cycles: kernel of d restricted to degree q
    SparseMatrix dq = c.d().select_cols(deg_indices_);
    SparseMatrix ker = dq.kernel(); // nq x k
    Subspace span(f_, nq);
    std::vector<SparseVec> reduced_cols;
    for (int k = 0; k < ker.cols(); ++k) {
      SparseVec cyc;
      for (int r = 0; r < ker.rows(); ++r) {
        Scalar v = ker.get(r, k);
        if (!v.is_zero()) cyc.emplace_back(r, v);
      }
      SparseVec red = boundaries_.reduce(cyc);
      if (red.empty()) continue;
      if (!span.insert(red)) continue;
      // keep this cycle as a representative
      SparseVec ambient;
      for (const auto& [r, v] : cyc) ambient.emplace_back(deg_indices_[r], v);
      reps_.push_back(ambient);
      reduced_cols.push_back(red);
    }
    reduced_reps_ = SparseMatrix(f_, nq, static_cast<int>(reduced_cols.size()));
    for (std::size_t k = 0; k < reduced_cols.size(); ++k)
      for (const auto& [r, v] : reduced_cols[k]) reduced_reps_.set(r, static_cast<int>(k), v);
  }

  int dim() const { return static_cast<int>(reps_.size()); }
  int degree() const { return deg_; }
  const std::vector<SparseVec>& representatives() const { return reps_; }

  // Coordinates of an ambient cycle in the representative basis.
  SparseVec express(const SparseVec& ambient_cycle) const {
    SparseVec loc = boundaries_.reduce(to_local(ambient_cycle));
    SparseMatrix rhs(f_, reduced_reps_.rows(), 1);
    for (const auto& [r, v] : loc) rhs.set(r, 0, v);
    SparseMatrix x = reduced_reps_.solve(rhs);
    SparseVec out;
    for (int r = 0; r < x.rows(); ++r) {
      Scalar v = x.get(r, 0);
      if (!v.is_zero()) out.emplace_back(r, v);
    }
    return out;
  }

  // Trace of a chain endomorphism (degree 0) on this homology degree.
  Scalar trace_on_homology(const SparseMatrix& endo) const {
    Scalar tr = Scalar::zero(f_);
    for (int k = 0; k < dim(); ++k) {
      SparseVec img = endo.apply(reps_[k]);
      SparseVec coords = express(img);
      for (const auto& [r, v] : coords)
        if (r == k) tr += v;
    }
    return tr;
  }
};

// ---------------------------------------------------------------------------
// hom complexes

// Hom(C, D): basis h(y|x) of degree deg(y) - deg(x);
// d h(y|x) = sum <dy,w> h(w|x) - (-1)^{deg h} sum <dz,x> h(y|z).
inline CCPtr hom_complex(const CCPtr& c, const CCPtr& d) {
  Field f = c->field();
  if (d->field() != f) throw FieldMismatch();
  int nc = c->size(), nd = d->size();
  std::vector<BasisElt> basis;
  basis.reserve(static_cast<std::size_t>(nc) * nd);
  auto flat = [nc](int y, int x) { return y * nc + x; };
  for (int y = 0; y < nd; ++y)
    for (int x = 0; x < nc; ++x)
      basis.push_back({"h(" + d->elt(y).id + "|" + c->elt(x).id + ")", d->deg(y) - c->deg(x)});
  SparseMatrix dd(f, nd * nc, nd * nc);
  for (int y = 0; y < nd; ++y)
    for (int x = 0; x < nc; ++x) {
      int hdeg = d->deg(y) - c->deg(x);
      for (const auto& [w, v] : d->d().column_vec(y)) dd.add_to(flat(w, x), flat(y, x), v);
      Scalar sgn = -Scalar::sign(f, hdeg);
      for (int z = 0; z < nc; ++z) {
        Scalar v = c->d().get(x, z);
        if (!v.is_zero()) dd.add_to(flat(y, z), flat(y, x), sgn * v);
      }
    }
  return make_cc(ChainComplex(f, std::move(basis), std::move(dd), false));
}

// ---------------------------------------------------------------------------
// quotients and subcomplexes

// Quotient of C by a d-closed subspace; the quotient basis is the set of
// non-pivot coordinates of the subspace's echelon form.  Returns the quotient
// and the projection map.
inline std::pair<CCPtr, ChainMap> quotient_by_subspace(const CCPtr& c, const Subspace& v,
                                                       bool check_closed = true) {
  Field f = c->field();
  std::vector<int> pivots = v.pivot_columns();
  std::vector<bool> is_pivot(c->size(), false);
  for (int p : pivots) is_pivot[p] = true;
  std::vector<int> keep;
  for (int i = 0; i < c->size(); ++i)
    if (!is_pivot[i]) keep.push_back(i);
  std::vector<int> local(c->size(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) local[keep[k]] = static_cast<int>(k);

  if (check_closed) {
    for (const auto& row : v.echelon_rows()) {
      SparseVec dv = c->d().apply(row);
      if (!v.contains(dv)) throw CheckFailed("subspace not closed under the differential");
    }
  }

  std::vector<BasisElt> basis;
  basis.reserve(keep.size());
  for (int i : keep) basis.push_back(c->elt(i));
  int n = static_cast<int>(keep.size());
  SparseMatrix d(f, n, n);
  SparseMatrix proj(f, n, c->size());
  for (int i = 0; i < c->size(); ++i) {
    SparseVec e = {{i, Scalar::one(f)}};
    for (const auto& [r, val] : v.reduce(e)) {
      if (local[r] < 0) throw CheckFailed("reduction left support on a pivot column");
      proj.add_to(local[r], i, val);
    }
  }
  for (int k = 0; k < n; ++k) {
    SparseVec de = c->d().column_vec(keep[k]);
    for (const auto& [r, val] : v.reduce(de)) d.add_to(local[r], k, val);
  }
  CCPtr q = make_cc(ChainComplex(f, std::move(basis), std::move(d), false));
  return {q, ChainMap(c, q, 0, std::move(proj))};
}

// Subcomplex spanned by given vectors (must be d-closed); basis elements are
// the echelon rows, labeled "<prefix>0", "<prefix>1", ...  Returns the
// subcomplex and the inclusion map.
inline std::pair<CCPtr, ChainMap> subcomplex_from_vectors(const CCPtr& c,
                                                          const std::vector<SparseVec>& gens,
                                                          const std::string& prefix) {
  Field f = c->field();
  Subspace w(f, c->size());
  for (const auto& g : gens) w.insert(g);
  const auto& rows = w.echelon_rows();
  int n = static_cast<int>(rows.size());
  std::vector<BasisElt> basis;
  SparseMatrix incl(f, c->size(), n);
  for (int k = 0; k < n; ++k) {
    int degv = 0;
    bool first = true;
    for (const auto& [i, val] : rows[k]) {
      (void)val;
      if (first) degv = c->deg(i);
      else if (c->deg(i) != degv) throw CheckFailed("subcomplex generator not homogeneous");
      first = false;
    }
    basis.push_back({prefix + std::to_string(k), degv});
    for (const auto& [i, val] : rows[k]) incl.set(i, k, val);
  }
  // express d of each echelon row in the echelon basis
  SparseMatrix d(f, n, n);
  for (int k = 0; k < n; ++k) {
    SparseVec dv = c->d().apply(rows[k]);
    // eliminate using echelon rows, recording coefficients
    SparseVec coeffs;
    for (int j = 0; j < n; ++j) {
      int lead = rows[j].front().first;
      auto it = std::lower_bound(dv.begin(), dv.end(), lead,
                                 [](const auto& e, int col) { return e.first < col; });
      if (it != dv.end() && it->first == lead) {
        Scalar cval = it->second; // echelon rows have unit leading entries
        coeffs.emplace_back(j, cval);
        dv = sparse_axpy(dv, -cval, rows[j]);
      }
    }
    if (!dv.empty()) throw CheckFailed("generators do not span a subcomplex");
    for (const auto& [j, cv] : coeffs) d.set(j, k, cv);
  }
  CCPtr s = make_cc(ChainComplex(f, std::move(basis), std::move(d), false));
  return {s, ChainMap(s, c, 0, std::move(incl))};
}

} // namespace opcalc
