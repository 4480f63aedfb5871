#include "coordnet/hdbscan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "coordnet/parallel.hpp"

namespace coordnet {

ClusterSelection parse_cluster_selection(std::string_view tag) {
  if (tag == "excess_of_mass" || tag == "eom") return ClusterSelection::excess_of_mass;
  if (tag == "leaf") return ClusterSelection::leaf;
  throw ConfigError("unknown cluster selection '" + std::string(tag) + "'");
}

std::string_view to_string(ClusterSelection s) {
  return s == ClusterSelection::excess_of_mass ? "excess_of_mass" : "leaf";
}

void ClusterParams::validate() const {
  if (min_cluster_size < 2) throw ConfigError("min_cluster_size must be >= 2");
  if (min_samples < 0) throw ConfigError("min_samples must be >= 1 (or 0 for the default)");
}

std::size_t ClusterAssignment::noise_count() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), -1));
}

std::vector<std::size_t> ClusterAssignment::cluster_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n_clusters), 0);
  for (int l : labels)
    if (l >= 0) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

namespace {

double distance(const PointMatrix& p, Eigen::Index a, Eigen::Index b) {
  return (p.row(a) - p.row(b)).norm();
}

}  // namespace

Eigen::VectorXd core_distances(const PointMatrix& points, int min_samples) {
  const auto n = points.rows();
  if (min_samples < 1 || min_samples > n)
    throw ConfigError("min_samples " + std::to_string(min_samples) + " must lie in [1, " + std::to_string(n) + "]");
  Eigen::VectorXd core(n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    std::vector<double> d(static_cast<std::size_t>(n));
    for (std::size_t i = begin; i < end; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) d[j] = distance(points, static_cast<Eigen::Index>(i), j);
      auto kth = d.begin() + (min_samples - 1);
      std::nth_element(d.begin(), kth, d.end());
      core[static_cast<Eigen::Index>(i)] = *kth;
    }
  }, 16);
  return core;
}

double mutual_reachability(const PointMatrix& points, const Eigen::VectorXd& core, Index a, Index b) {
  return std::max({core[a], core[b], distance(points, a, b)});
}

std::vector<MstEdge> mutual_reachability_mst(const PointMatrix& points, const Eigen::VectorXd& core) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<MstEdge> mst;
  if (n < 2) return mst;
  mst.reserve(n - 1);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> key(n, inf);
  std::vector<Index> parent(n, 0);
  std::vector<char> in_tree(n, 0);

  struct Best {
    double key = inf;
    std::size_t idx = 0;
    bool valid = false;
  };
  const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(thread_count(), n / 2048));
  std::vector<Best> partial(chunks);

  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    const double core_cur = core[static_cast<Eigen::Index>(current)];
    const std::size_t chunk = (n + chunks - 1) / chunks;
    parallel_for(chunks, [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        Best b;
        for (std::size_t v = c * chunk; v < std::min(n, (c + 1) * chunk); ++v) {
          if (in_tree[v]) continue;
          const double d = std::max({core_cur, core[static_cast<Eigen::Index>(v)],
                                     distance(points, static_cast<Eigen::Index>(current), static_cast<Eigen::Index>(v))});
          if (d < key[v]) {
            key[v] = d;
            parent[v] = static_cast<Index>(current);
          }
          if (!b.valid || key[v] < b.key) b = {key[v], v, true};
        }
        partial[c] = b;
      }
    }, 1);
    Best best;
    for (const auto& b : partial)
      if (b.valid && (!best.valid || b.key < best.key)) best = b;
    in_tree[best.idx] = 1;
    mst.push_back({parent[best.idx], static_cast<Index>(best.idx), best.key});
    current = best.idx;
  }
  return mst;
}

namespace {

struct Dendrogram {
  // Nodes 0..n-1 are points; node n + i is the i-th merge.
  std::vector<Index> left, right;
  std::vector<double> dist;
  std::vector<std::size_t> size;
  std::size_t n_points = 0;

  bool is_point(Index node) const { return node < n_points; }
  Index merge(Index node) const { return node - static_cast<Index>(n_points); }
  std::size_t node_size(Index node) const { return is_point(node) ? 1 : size[merge(node)]; }
};

Dendrogram single_linkage(std::vector<MstEdge> mst, std::size_t n) {
  for (auto& e : mst)
    if (e.a > e.b) std::swap(e.a, e.b);
  std::sort(mst.begin(), mst.end(), [](const MstEdge& x, const MstEdge& y) {
    return std::tie(x.weight, x.a, x.b) < std::tie(y.weight, y.a, y.b);
  });
  Dendrogram dg;
  dg.n_points = n;
  std::vector<Index> uf(2 * n - 1);
  std::iota(uf.begin(), uf.end(), Index{0});
  auto find = [&](Index x) {
    while (uf[x] != x) {
      uf[x] = uf[uf[x]];
      x = uf[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < mst.size(); ++i) {
    const Index ra = find(mst[i].a), rb = find(mst[i].b);
    const auto node = static_cast<Index>(n + i);
    dg.left.push_back(ra);
    dg.right.push_back(rb);
    dg.dist.push_back(mst[i].weight);
    dg.size.push_back(dg.node_size(ra) + dg.node_size(rb));
    uf[ra] = node;
    uf[rb] = node;
  }
  return dg;
}

template <typename F>
void for_each_point(const Dendrogram& dg, Index node, F&& f) {
  std::vector<Index> stack{node};
  while (!stack.empty()) {
    const Index x = stack.back();
    stack.pop_back();
    if (dg.is_point(x)) {
      f(x);
    } else {
      stack.push_back(dg.right[dg.merge(x)]);
      stack.push_back(dg.left[dg.merge(x)]);
    }
  }
}

double to_lambda(double d) {
  return d > 0.0 ? 1.0 / d : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<CondensedEntry> condense_tree(std::vector<MstEdge> mst, std::size_t n, int min_cluster_size) {
  std::vector<CondensedEntry> out;
  if (n < 2) return out;
  const Dendrogram dg = single_linkage(std::move(mst), n);
  const auto mcs = static_cast<std::size_t>(min_cluster_size);
  const auto root = static_cast<Index>(2 * n - 2);

  std::vector<Index> label(2 * n - 1, 0);
  Index next_cluster = 1;
  std::vector<Index> queue{root};
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    const Index node = queue[qi];
    const Index m = dg.merge(node);
    const double lambda = to_lambda(dg.dist[m]);
    const Index parent = label[node];
    const Index kids[2] = {dg.left[m], dg.right[m]};
    const bool big[2] = {dg.node_size(kids[0]) >= mcs, dg.node_size(kids[1]) >= mcs};

    if (big[0] && big[1]) {
      for (Index kid : kids) {
        label[kid] = next_cluster++;
        out.push_back({parent, label[kid], lambda, dg.node_size(kid), false});
        queue.push_back(kid);
      }
      continue;
    }
    for (int s = 0; s < 2; ++s) {
      if (big[s]) {
        label[kids[s]] = parent;
        queue.push_back(kids[s]);
      } else {
        for_each_point(dg, kids[s], [&](Index p) { out.push_back({parent, p, lambda, 1, true}); });
      }
    }
  }
  return out;
}

ClusterAssignment cluster(const PointMatrix& points, const ClusterParams& params) {
  params.validate();
  const auto n = static_cast<std::size_t>(points.rows());
  if (n < 2 || n < static_cast<std::size_t>(params.min_cluster_size))
    throw ConfigError("cannot cluster " + std::to_string(n) + " points with min_cluster_size " +
                      std::to_string(params.min_cluster_size));
  if (!points.allFinite()) throw DataError("cluster input contains non-finite values");

  const Eigen::VectorXd core = core_distances(points, params.effective_min_samples());
  const auto tree = condense_tree(mutual_reachability_mst(points, core), n, params.min_cluster_size);

  Index n_nodes = 1;
  for (const auto& e : tree)
    if (!e.is_point) n_nodes = std::max(n_nodes, e.child + 1);
  std::vector<Index> cluster_parent(n_nodes, 0);
  std::vector<double> birth(n_nodes, 0.0), stability(n_nodes, 0.0);
  std::vector<std::vector<Index>> children(n_nodes);
  for (const auto& e : tree)
    if (!e.is_point) {
      cluster_parent[e.child] = e.parent;
      birth[e.child] = e.lambda;
      children[e.parent].push_back(e.child);
    }
  for (const auto& e : tree) {
    const double span = e.lambda == birth[e.parent] ? 0.0 : e.lambda - birth[e.parent];
    stability[e.parent] += span * static_cast<double>(e.child_size);
  }

  // The root is never selected, so a single all-encompassing cluster is noise.
  std::vector<char> selected(n_nodes, 0);
  if (params.selection == ClusterSelection::leaf) {
    for (Index c = 1; c < n_nodes; ++c) selected[c] = children[c].empty();
  } else {
    std::vector<double> score = stability;
    for (Index c = n_nodes; c-- > 1;) {
      double child_sum = 0.0;
      for (Index k : children[c]) child_sum += score[k];
      if (!children[c].empty() && child_sum > score[c]) {
        score[c] = child_sum;
      } else {
        selected[c] = 1;
        std::vector<Index> stack(children[c]);
        while (!stack.empty()) {
          const Index d = stack.back();
          stack.pop_back();
          selected[d] = 0;
          stack.insert(stack.end(), children[d].begin(), children[d].end());
        }
      }
    }
  }

  // Selected ancestor (or self) of every cluster, numbered in id order.
  std::vector<int> final_label(n_nodes, -1);
  int n_clusters = 0;
  for (Index c = 1; c < n_nodes; ++c)
    if (selected[c]) final_label[c] = n_clusters++;
  std::vector<int> owner(n_nodes, -1);
  for (Index c = 1; c < n_nodes; ++c)
    owner[c] = selected[c] ? final_label[c] : owner[cluster_parent[c]];

  ClusterAssignment out;
  out.n_clusters = n_clusters;
  out.labels.assign(n, -1);
  out.membership_strength.assign(n, 0.0);
  std::vector<double> point_lambda(n, 0.0);
  std::vector<double> max_lambda(static_cast<std::size_t>(n_clusters), 0.0);
  for (const auto& e : tree) {
    if (!e.is_point) continue;
    const int l = owner[e.parent];
    out.labels[e.child] = l;
    point_lambda[e.child] = e.lambda;
    if (l >= 0 && std::isfinite(e.lambda)) max_lambda[l] = std::max(max_lambda[l], e.lambda);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int l = out.labels[i];
    if (l < 0) continue;
    const double lam = point_lambda[i];
    const double top = max_lambda[l];
    out.membership_strength[i] = (!std::isfinite(lam) || top <= 0.0) ? 1.0 : std::min(lam, top) / top;
  }
  return out;
}

}  // namespace coordnet
