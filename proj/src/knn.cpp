#include "coordnet/knn.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "coordnet/parallel.hpp"

namespace coordnet {

bool NeighborGraph::scored() const {
  return std::all_of(edges.begin(), edges.end(), [](const Edge& e) { return e.table.has_value(); });
}

std::vector<std::size_t> NeighborGraph::degrees() const {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto& e : edges) {
    ++deg[e.u];
    ++deg[e.v];
  }
  return deg;
}

std::vector<std::vector<std::pair<Index, double>>> knn_choices(const SparseBinaryMatrix& m, int k) {
  const std::size_t n = m.rows();
  if (k <= 0) throw ConfigError("k must be positive");
  if (static_cast<std::size_t>(k) >= n)
    throw ConfigError("k = " + std::to_string(k) + " must be smaller than the number of rows (" +
                      std::to_string(n) + ")");
  for (Index r = 0; r < n; ++r)
    if (m.row_support(r) == 0) throw DataError("row " + std::to_string(r) + " has no entries");

  std::vector<std::vector<std::pair<Index, double>>> choices(n);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> counts(n, 0);
    std::vector<Index> touched;
    std::vector<std::pair<Index, double>> cand;
    for (std::size_t r = begin; r < end; ++r) {
      const auto u = static_cast<Index>(r);
      touched.clear();
      for (Index t : m.row(u))
        for (Index v : m.col(t)) {
          if (v == u) continue;
          if (counts[v]++ == 0) touched.push_back(v);
        }
      cand.clear();
      const std::size_t su = m.row_support(u);
      for (Index v : touched) {
        cand.emplace_back(v, cosine_from_counts(counts[v], su, m.row_support(v)));
        counts[v] = 0;
      }
      const auto better = [](const auto& x, const auto& y) {
        return x.second > y.second || (x.second == y.second && x.first < y.first);
      };
      const std::size_t keep = std::min<std::size_t>(k, cand.size());
      std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), better);
      choices[r].assign(cand.begin(), cand.begin() + keep);
    }
  });
  return choices;
}

NeighborGraph knn_graph(const SparseBinaryMatrix& m, int k) {
  const auto choices = knn_choices(m, k);
  NeighborGraph g;
  g.n_nodes = m.rows();
  g.k = k;
  for (Index u = 0; u < choices.size(); ++u)
    for (const auto& [v, cos] : choices[u]) {
      Edge e;
      e.u = std::min(u, v);
      e.v = std::max(u, v);
      e.cosine = cos;
      g.edges.push_back(e);
    }
  std::sort(g.edges.begin(), g.edges.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                            [](const Edge& x, const Edge& y) { return x.u == y.u && x.v == y.v; }),
                g.edges.end());
  return g;
}

}  // namespace coordnet
