#include "coordnet/sparse.hpp"

#include <algorithm>
#include <string>

namespace coordnet {

SparseBinaryMatrix::SparseBinaryMatrix(std::size_t rows, std::size_t cols,
                                       std::vector<std::pair<Index, Index>> entries)
    : n_rows_(rows), n_cols_(cols) {
  std::sort(entries.begin(), entries.end());
  entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
  for (const auto& [r, c] : entries)
    if (r >= rows || c >= cols)
      throw DataError("matrix entry (" + std::to_string(r) + ", " + std::to_string(c) +
                      ") out of range");

  row_ptr_.assign(rows + 1, 0);
  col_ptr_.assign(cols + 1, 0);
  col_idx_.reserve(entries.size());
  for (const auto& [r, c] : entries) {
    ++row_ptr_[r + 1];
    ++col_ptr_[c + 1];
    col_idx_.push_back(c);
  }
  for (std::size_t i = 0; i < rows; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (std::size_t j = 0; j < cols; ++j) col_ptr_[j + 1] += col_ptr_[j];

  // Row-major traversal fills each column in increasing row order.
  row_idx_.resize(entries.size());
  std::vector<std::size_t> cursor(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const auto& [r, c] : entries) row_idx_[cursor[c]++] = r;
}

bool SparseBinaryMatrix::contains(Index r, Index c) const {
  auto cols = row(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

std::size_t overlap(std::span<const Index> a, std::span<const Index> b) {
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

double cosine(Index u, Index v, const SparseBinaryMatrix& m) {
  if (u >= m.rows() || v >= m.rows()) throw DataError("cosine: row index out of range");
  const auto su = m.row(u);
  const auto sv = m.row(v);
  if (su.empty() || sv.empty())
    throw DataError("cosine undefined for empty row " + std::to_string(su.empty() ? u : v));
  return cosine_from_counts(overlap(su, sv), su.size(), sv.size());
}

}  // namespace coordnet
