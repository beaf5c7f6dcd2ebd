#pragma once

// Sparse exact linear algebra: matrices over Q or F_p with Gaussian
// elimination (rank / kernel / solve) and echelon-form subspaces used for
// quotients and induced maps on subquotients.

#include "opcalc/scalar.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace opcalc {

struct LinAlgError : std::runtime_error {
  explicit LinAlgError(const std::string& what) : std::runtime_error(what) {}
};

// Sparse vector: sorted (index, nonzero scalar) pairs.
using SparseVec = std::vector<std::pair<int, Scalar>>;

inline SparseVec sparse_axpy(const SparseVec& x, const Scalar& c, const SparseVec& y) {
  // x + c*y, merging sorted entry lists
  SparseVec out;
  out.reserve(x.size() + y.size());
  std::size_t i = 0, j = 0;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].first < y[j].first)) {
      out.push_back(x[i++]);
    } else if (i == x.size() || y[j].first < x[i].first) {
      Scalar v = c * y[j].second;
      if (!v.is_zero()) out.emplace_back(y[j].first, v);
      ++j;
    } else {
      Scalar v = x[i].second + c * y[j].second;
      if (!v.is_zero()) out.emplace_back(x[i].first, v);
      ++i; ++j;
    }
  }
  return out;
}

class SparseMatrix {
  Field f_;
  int rows_ = 0, cols_ = 0;
  std::vector<SparseVec> row_; // row_[r] sorted by column

public:
  SparseMatrix() : f_(Field::rationals()) {}
  SparseMatrix(Field f, int rows, int cols) : f_(f), rows_(rows), cols_(cols), row_(rows) {
    if (rows < 0 || cols < 0) throw LinAlgError("negative matrix dimension");
  }

  static SparseMatrix identity(Field f, int n) {
    SparseMatrix m(f, n, n);
    for (int i = 0; i < n; ++i) m.row_[i].emplace_back(i, Scalar::one(f));
    return m;
  }

  const Field& field() const { return f_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const SparseVec& row(int r) const { return row_.at(r); }

  bool is_zero() const {
    for (const auto& r : row_)
      if (!r.empty()) return false;
    return true;
  }

  std::size_t nnz() const {
    std::size_t n = 0;
    for (const auto& r : row_) n += r.size();
    return n;
  }

  Scalar get(int r, int c) const {
    const auto& rw = row_.at(r);
    auto it = std::lower_bound(rw.begin(), rw.end(), c,
                               [](const auto& e, int col) { return e.first < col; });
    if (it != rw.end() && it->first == c) return it->second;
    return Scalar::zero(f_);
  }

  void set(int r, int c, const Scalar& v) {
    v.expect_field(f_);
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw LinAlgError("matrix index out of range");
    auto& rw = row_[r];
    auto it = std::lower_bound(rw.begin(), rw.end(), c,
                               [](const auto& e, int col) { return e.first < col; });
    if (it != rw.end() && it->first == c) {
      if (v.is_zero()) rw.erase(it);
      else it->second = v;
    } else if (!v.is_zero()) {
      rw.insert(it, {c, v});
    }
  }

  void add_to(int r, int c, const Scalar& v) {
    if (v.is_zero()) return;
    set(r, c, get(r, c) + v);
  }

  friend SparseMatrix operator+(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.f_ != b.f_) throw FieldMismatch();
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw LinAlgError("matrix shape mismatch in +");
    SparseMatrix out(a.f_, a.rows_, a.cols_);
    Scalar one = Scalar::one(a.f_);
    for (int r = 0; r < a.rows_; ++r) out.row_[r] = sparse_axpy(a.row_[r], one, b.row_[r]);
    return out;
  }

  friend SparseMatrix operator-(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.f_ != b.f_) throw FieldMismatch();
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw LinAlgError("matrix shape mismatch in -");
    SparseMatrix out(a.f_, a.rows_, a.cols_);
    Scalar mone = -Scalar::one(a.f_);
    for (int r = 0; r < a.rows_; ++r) out.row_[r] = sparse_axpy(a.row_[r], mone, b.row_[r]);
    return out;
  }

  SparseMatrix scaled(const Scalar& c) const {
    SparseMatrix out(f_, rows_, cols_);
    if (c.is_zero()) return out;
    for (int r = 0; r < rows_; ++r) {
      out.row_[r] = row_[r];
      for (auto& e : out.row_[r]) e.second *= c;
    }
    return out;
  }

  friend SparseMatrix operator*(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.f_ != b.f_) throw FieldMismatch();
    if (a.cols_ != b.rows_) throw LinAlgError("matrix shape mismatch in *");
    SparseMatrix out(a.f_, a.rows_, b.cols_);
    for (int r = 0; r < a.rows_; ++r) {
      SparseVec acc;
      for (const auto& [k, av] : a.row_[r]) acc = sparse_axpy(acc, av, b.row_[k]);
      out.row_[r] = std::move(acc);
    }
    return out;
  }

  friend bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.f_ != b.f_ || a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
    return a.row_ == b.row_;
  }

  SparseMatrix transpose() const {
    SparseMatrix out(f_, cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (const auto& [c, v] : row_[r]) out.row_[c].emplace_back(r, v);
    return out;
  }

  // column i as a sparse vector (linear scan; fine at our sizes)
  SparseVec column_vec(int i) const {
    SparseVec col;
    for (int r = 0; r < rows_; ++r) {
      const auto& rw = row_[r];
      auto it = std::lower_bound(rw.begin(), rw.end(), i,
                                 [](const auto& e, int c) { return e.first < c; });
      if (it != rw.end() && it->first == i) col.emplace_back(r, it->second);
    }
    return col;
  }

  SparseVec apply(const SparseVec& x) const {
    SparseVec out;
    for (int r = 0; r < rows_; ++r) {
      Scalar acc = Scalar::zero(f_);
      std::size_t i = 0, j = 0;
      const auto& rw = row_[r];
      while (i < rw.size() && j < x.size()) {
        if (rw[i].first < x[j].first) ++i;
        else if (x[j].first < rw[i].first) ++j;
        else { acc += rw[i].second * x[j].second; ++i; ++j; }
      }
      if (!acc.is_zero()) out.emplace_back(r, acc);
    }
    return out;
  }
  // Row echelon form in place; returns pivot (row, col) pairs in order.
  // If reduced, eliminates above pivots too (RREF with unit pivots).
  std::vector<std::pair<int, int>> echelonize(bool reduced) {
    std::vector<std::pair<int, int>> pivots;
    int pr = 0; // next pivot row position
    for (int c = 0; c < cols_ && pr < rows_; ++c) {
      // choose the sparsest row with a nonzero in column c at or below pr
      int best = -1;
      std::size_t best_sz = 0;
      for (int r = pr; r < rows_; ++r) {
        if (!row_[r].empty() && row_[r].front().first == c) {
          if (best == -1 || row_[r].size() < best_sz) { best = r; best_sz = row_[r].size(); }
        }
      }
      if (best == -1) continue;
      std::swap(row_[pr], row_[best]);
      Scalar pv = row_[pr].front().second;
      if (reduced && !pv.is_one()) {
        Scalar inv = pv.inverse();
        for (auto& e : row_[pr]) e.second *= inv;
        pv = Scalar::one(f_);
      }
      for (int r = (reduced ? 0 : pr + 1); r < rows_; ++r) {
        if (r == pr || row_[r].empty()) continue;
        const auto& rw = row_[r];
        auto it = std::lower_bound(rw.begin(), rw.end(), c,
                                   [](const auto& e, int col) { return e.first < col; });
        if (it == rw.end() || it->first != c) continue;
        Scalar factor = -(it->second / pv);
        row_[r] = sparse_axpy(row_[r], factor, row_[pr]);
      }
      pivots.emplace_back(pr, c);
      ++pr;
    }
    // canonical order: rows with earlier leading columns first
    std::sort(row_.begin(), row_.begin() + pr,
              [](const SparseVec& a, const SparseVec& b) { return a.front().first < b.front().first; });
    for (std::size_t i = 0; i < pivots.size(); ++i) pivots[i] = {static_cast<int>(i), row_[i].front().first};
    return pivots;
  }

  int rank() const {
    SparseMatrix w = *this;
    return static_cast<int>(w.echelonize(false).size());
  }

  // Basis of the null space, returned as the columns of a cols x k matrix.
  SparseMatrix kernel() const {
    SparseMatrix w = *this;
    auto pivots = w.echelonize(true);
    std::vector<int> pivot_col(cols_, -1);
    for (auto [r, c] : pivots) pivot_col[c] = r;
    std::vector<int> free_cols;
    for (int c = 0; c < cols_; ++c)
      if (pivot_col[c] < 0) free_cols.push_back(c);
    SparseMatrix out(f_, cols_, static_cast<int>(free_cols.size()));
    for (std::size_t k = 0; k < free_cols.size(); ++k) {
      int fc = free_cols[k];
      out.set(fc, static_cast<int>(k), Scalar::one(f_));
      for (auto [r, c] : pivots) {
        Scalar v = w.get(r, fc);
        if (!v.is_zero()) out.set(c, static_cast<int>(k), -v);
      }
    }
    return out;
  }

  // Solve A X = B for X (cols_B many right-hand sides); throws if inconsistent.
  SparseMatrix solve(const SparseMatrix& b) const {
    if (f_ != b.f_) throw FieldMismatch();
    if (b.rows_ != rows_) throw LinAlgError("rhs row count mismatch in solve");
    // augmented elimination
    SparseMatrix aug(f_, rows_, cols_ + b.cols_);
    for (int r = 0; r < rows_; ++r) {
      aug.row_[r] = row_[r];
      for (const auto& [c, v] : b.row_[r]) aug.row_[r].emplace_back(cols_ + c, v);
    }
    std::vector<std::pair<int, int>> pivots;
    int pr = 0;
    for (int c = 0; c < cols_ && pr < rows_; ++c) {
      int best = -1;
      std::size_t best_sz = 0;
      for (int r = pr; r < rows_; ++r) {
        if (!aug.row_[r].empty() && aug.row_[r].front().first == c) {
          if (best == -1 || aug.row_[r].size() < best_sz) { best = r; best_sz = aug.row_[r].size(); }
        }
      }
      if (best == -1) continue;
      std::swap(aug.row_[pr], aug.row_[best]);
      Scalar pv = aug.row_[pr].front().second;
      Scalar inv = pv.inverse();
      for (auto& e : aug.row_[pr]) e.second *= inv;
      for (int r = 0; r < rows_; ++r) {
        if (r == pr || aug.row_[r].empty()) continue;
        const auto& rw = aug.row_[r];
        auto it = std::lower_bound(rw.begin(), rw.end(), c,
                                   [](const auto& e, int col) { return e.first < col; });
        if (it == rw.end() || it->first != c) continue;
        Scalar factor = -it->second;
        aug.row_[r] = sparse_axpy(aug.row_[r], factor, aug.row_[pr]);
      }
      pivots.emplace_back(pr, c);
      ++pr;
    }
    // consistency: no row with support only in the augmented block
    for (int r = 0; r < rows_; ++r)
      if (!aug.row_[r].empty() && aug.row_[r].front().first >= cols_)
        throw LinAlgError("inconsistent linear system in solve");
    SparseMatrix x(f_, cols_, b.cols_);
    for (auto [r, c] : pivots)
      for (const auto& [cc, v] : aug.row_[r])
        if (cc >= cols_) x.set(c, cc - cols_, v);
    return x;
  }

  // Columns restricted to a subset of row indices (in the given order).
  SparseMatrix select_rows(const std::vector<int>& idx) const {
    SparseMatrix out(f_, static_cast<int>(idx.size()), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) out.row_[i] = row_.at(idx[i]);
    return out;
  }

  SparseMatrix select_cols(const std::vector<int>& idx) const {
    std::vector<int> pos(cols_, -1);
    for (std::size_t i = 0; i < idx.size(); ++i) pos.at(idx[i]) = static_cast<int>(i);
    SparseMatrix out(f_, rows_, static_cast<int>(idx.size()));
    for (int r = 0; r < rows_; ++r)
      for (const auto& [c, v] : row_[r])
        if (pos[c] >= 0) out.row_[r].emplace_back(pos[c], v);
    return out;
  }

  SparseMatrix column(int c) const { return select_cols({c}); }
};

// A subspace of k^n kept in reduced row-echelon form; supports membership,
// reduction modulo the subspace, and extension.  Used for degenerate-part
// quotients and homology representatives.
class Subspace {
  Field f_;
  int dim_ambient_;
  std::vector<SparseVec> rows_; // echelon rows, unit leading entries, leading cols strictly increasing

public:
  Subspace(Field f, int ambient) : f_(f), dim_ambient_(ambient) {}

  int ambient() const { return dim_ambient_; }
  int dim() const { return static_cast<int>(rows_.size()); }
  const std::vector<SparseVec>& echelon_rows() const { return rows_; }

  std::vector<int> pivot_columns() const {
    std::vector<int> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r.front().first);
    return out;
  }

  // Reduce v modulo the subspace; result has no support on pivot columns.
  SparseVec reduce(SparseVec v) const {
    for (const auto& r : rows_) {
      int lead = r.front().first;
      auto it = std::lower_bound(v.begin(), v.end(), lead,
                                 [](const auto& e, int c) { return e.first < c; });
      if (it != v.end() && it->first == lead) {
        Scalar factor = -it->second;
        v = sparse_axpy(v, factor, r);
      }
    }
    return v;
  }

  bool contains(const SparseVec& v) const { return reduce(v).empty(); }

  // Insert v; returns true if it enlarged the subspace.
  bool insert(SparseVec v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    Scalar inv = v.front().second.inverse();
    for (auto& e : v) e.second *= inv;
    // eliminate the new pivot from existing rows to stay fully reduced
    int lead = v.front().first;
    for (auto& r : rows_) {
      auto it = std::lower_bound(r.begin(), r.end(), lead,
                                 [](const auto& e, int c) { return e.first < c; });
      if (it != r.end() && it->first == lead) {
        Scalar factor = -it->second;
        r = sparse_axpy(r, factor, v);
      }
    }
    auto pos = std::lower_bound(rows_.begin(), rows_.end(), lead,
                                [](const SparseVec& r, int c) { return r.front().first < c; });
    rows_.insert(pos, std::move(v));
    return true;
  }

  void insert_columns(const SparseMatrix& m) {
    SparseMatrix t = m.transpose();
    for (int r = 0; r < t.rows(); ++r)
      if (!t.row(r).empty()) insert(t.row(r));
  }
};

} // namespace opcalc
