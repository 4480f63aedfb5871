#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "coordnet/common.hpp"

namespace coordnet {

/// Binary matrix stored twice: compressed rows (per-user tweet lists) and
/// compressed columns (per-tweet audience lists, the inverted index). Both
/// views hold strictly increasing indices and encode the same entry set.
class SparseBinaryMatrix {
 public:
  SparseBinaryMatrix() = default;

  /// Entries may arrive in any order; duplicates collapse.
  SparseBinaryMatrix(std::size_t rows, std::size_t cols,
                     std::vector<std::pair<Index, Index>> entries);

  std::size_t rows() const { return n_rows_; }
  std::size_t cols() const { return n_cols_; }
  std::size_t nonzeros() const { return row_idx_.size(); }

  std::span<const Index> row(Index r) const {
    return {col_idx_.data() + row_ptr_[r], col_idx_.data() + row_ptr_[r + 1]};
  }
  std::span<const Index> col(Index c) const {
    return {row_idx_.data() + col_ptr_[c], row_idx_.data() + col_ptr_[c + 1]};
  }
  std::size_t row_support(Index r) const { return row_ptr_[r + 1] - row_ptr_[r]; }
  std::size_t col_support(Index c) const { return col_ptr_[c + 1] - col_ptr_[c]; }

  bool contains(Index r, Index c) const;

  template <typename Scalar>
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> to_eigen() const {
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(nonzeros());
    for (Index r = 0; r < n_rows_; ++r)
      for (Index c : row(r)) trips.emplace_back(r, c, Scalar(1));
    Eigen::SparseMatrix<Scalar, Eigen::RowMajor> m(n_rows_, n_cols_);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
  }

  template <typename Scalar>
  MatrixX<Scalar> to_dense() const {
    MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n_rows_, n_cols_);
    for (Index r = 0; r < n_rows_; ++r)
      for (Index c : row(r)) m(r, c) = Scalar(1);
    return m;
  }

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<Index> row_idx_;
};

/// Size of the intersection of two strictly increasing index lists.
std::size_t overlap(std::span<const Index> a, std::span<const Index> b);

/// Cosine between two 0/1 rows: |S_u n S_v| / sqrt(|S_u| |S_v|).
/// Throws DataError if either row is empty.
double cosine(Index u, Index v, const SparseBinaryMatrix& m);

/// Same value as cosine() for given counts; shared so every code path rounds
/// identically.
inline double cosine_from_counts(std::size_t common, std::size_t size_u, std::size_t size_v) {
  return static_cast<double>(common) /
         std::sqrt(static_cast<double>(static_cast<unsigned long long>(size_u) * size_v));
}

}  // namespace coordnet
