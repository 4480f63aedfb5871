#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "coordnet/sparse.hpp"

namespace coordnet {

struct ContingencyTable {
  std::int64_t a = 0;  // both shared
  std::int64_t b = 0;  // first only
  std::int64_t c = 0;  // second only
  std::int64_t d = 0;  // neither

  std::int64_t n() const { return a + b + c + d; }
  friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

struct PhiScore {
  std::optional<double> value;        // |phi|, empty when a marginal is zero
  std::optional<double> chi_squared;  // n * phi^2, same definedness
  bool defined() const { return value.has_value(); }
};

struct Edge {
  Index u = 0;  // u < v
  Index v = 0;
  double cosine = 0.0;
  std::optional<ContingencyTable> table;  // set by score_graph
  PhiScore phi;

  std::optional<double> phi_value() const { return phi.value; }
};

/// Undirected union of each node's k highest-cosine neighbors. Edges are kept
/// sorted by (u, v).
struct NeighborGraph {
  std::size_t n_nodes = 0;
  int k = 3;
  std::vector<Edge> edges;

  bool scored() const;
  std::vector<std::size_t> degrees() const;
};

/// Exact k-NN graph through the inverted index. Ties in cosine go to the
/// lower row index; neighbors with zero cosine are never selected.
NeighborGraph knn_graph(const SparseBinaryMatrix& m, int k = 3);

/// Per-row ranked neighbor choices (the directed half of knn_graph).
std::vector<std::vector<std::pair<Index, double>>> knn_choices(const SparseBinaryMatrix& m, int k);

}  // namespace coordnet
