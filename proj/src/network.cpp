#include "coordnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "coordnet/parallel.hpp"

namespace coordnet {

UnionFind::UnionFind(std::size_t n) : parent_(n), rank_(n, 0), components_(n) {
  std::iota(parent_.begin(), parent_.end(), Index{0});
}

Index UnionFind::find(Index x) {
  while (parent_[x] != x) {
    parent_[x] = parent_[parent_[x]];
    x = parent_[x];
  }
  return x;
}

bool UnionFind::unite(Index a, Index b) {
  a = find(a);
  b = find(b);
  if (a == b) return false;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
  --components_;
  return true;
}

namespace {

bool passes(const Edge& e, double threshold) { return e.phi.value && *e.phi.value >= threshold; }

}  // namespace

SweepPoint sweep_point(const NeighborGraph& g, double threshold) {
  SweepPoint p;
  p.threshold = threshold;
  UnionFind uf(g.n_nodes);
  for (const auto& e : g.edges)
    if (passes(e, threshold)) {
      ++p.n_edges;
      uf.unite(e.u, e.v);
    }
  p.n_components = uf.components();

  std::vector<std::size_t> nodes(g.n_nodes, 0), edges(g.n_nodes, 0);
  std::vector<Index> first(g.n_nodes, static_cast<Index>(g.n_nodes));
  for (Index x = 0; x < g.n_nodes; ++x) {
    const Index r = uf.find(x);
    ++nodes[r];
    first[r] = std::min(first[r], x);
  }
  for (const auto& e : g.edges)
    if (passes(e, threshold)) ++edges[uf.find(e.u)];

  std::optional<Index> best;
  for (Index r = 0; r < g.n_nodes; ++r) {
    if (nodes[r] == 0) continue;
    if (!best || nodes[r] > nodes[*best] ||
        (nodes[r] == nodes[*best] &&
         (edges[r] > edges[*best] || (edges[r] == edges[*best] && first[r] < first[*best]))))
      best = r;
  }
  if (best) p.n_lcc_edges = edges[*best];
  if (p.n_edges > 0 && p.n_lcc_edges > 0)
    p.log_ratio = std::log10(static_cast<double>(p.n_edges) / static_cast<double>(p.n_lcc_edges));
  return p;
}

std::vector<SweepPoint> threshold_sweep(const NeighborGraph& g, int n_points) {
  if (n_points < 1) throw ConfigError("sweep needs at least one point");
  const bool any = std::any_of(g.edges.begin(), g.edges.end(), [](const Edge& e) { return e.phi.defined(); });
  if (!any) return {};
  std::vector<SweepPoint> out(static_cast<std::size_t>(n_points));
  parallel_for(out.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      out[i] = sweep_point(g, static_cast<double>(i) / n_points);
  }, 1);
  return out;
}

std::vector<HistogramBin> histogram(std::span<const double> values, int n_bins) {
  if (n_bins < 1) throw ConfigError("histogram needs at least one bin");
  std::vector<HistogramBin> bins(static_cast<std::size_t>(n_bins));
  for (int i = 0; i < n_bins; ++i) {
    bins[i].lo = static_cast<double>(i) / n_bins;
    bins[i].hi = static_cast<double>(i + 1) / n_bins;
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("histogram value outside [0, 1]");
    const auto b = std::min(static_cast<int>(std::floor(v * n_bins)), n_bins - 1);
    ++bins[b].count;
  }
  return bins;
}

std::vector<HistogramBin> phi_histogram(const NeighborGraph& g, int n_bins) {
  std::vector<double> values;
  values.reserve(g.edges.size());
  for (const auto& e : g.edges)
    if (e.phi.value) values.push_back(*e.phi.value);
  return histogram(values, n_bins);
}

std::vector<double> smooth(std::span<const HistogramBin> hist, int window) {
  if (window < 1 || window % 2 == 0) throw ConfigError("smoothing window must be a positive odd integer");
  const int n = static_cast<int>(hist.size());
  const int half = window / 2;
  std::vector<double> s(hist.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += static_cast<double>(hist[j].count);
    s[i] = sum / (hi - lo + 1);
  }
  return s;
}

namespace {

struct Peak {
  int lo, hi;  // plateau extent
  double height;
  double prominence;
};

// Plateau-aware local maxima (boundary bins included), with prominence measured against the lowest
// point on each side before reaching higher ground (or the boundary).
std::vector<Peak> find_peaks(const std::vector<double>& s) {
  const int n = static_cast<int>(s.size());
  std::vector<Peak> peaks;
  for (int i = 0; i < n;) {
    int j = i;
    while (j + 1 < n && s[j + 1] == s[i]) ++j;
    const bool left_lower = i == 0 || s[i - 1] < s[i];
    const bool right_lower = j == n - 1 || s[j + 1] < s[i];
    if (left_lower && right_lower && s[i] > 0.0 && !(i == 0 && j == n - 1)) peaks.push_back({i, j, s[i], 0.0});
    i = j + 1;
  }
  // A peak touching the boundary has only one side to descend into; the
  // missing side imposes no base.
  for (auto& p : peaks) {
    double base = -std::numeric_limits<double>::infinity();
    if (p.lo > 0) {
      double left_min = p.height;
      for (int k = p.lo - 1; k >= 0 && s[k] <= p.height; --k) left_min = std::min(left_min, s[k]);
      base = std::max(base, left_min);
    }
    if (p.hi < n - 1) {
      double right_min = p.height;
      for (int k = p.hi + 1; k < n && s[k] <= p.height; ++k) right_min = std::min(right_min, s[k]);
      base = std::max(base, right_min);
    }
    p.prominence = p.height - base;
  }
  return peaks;
}

}  // namespace

std::optional<double> find_valley(std::span<const HistogramBin> hist, int smoothing_window) {
  if (hist.empty()) return std::nullopt;
  const auto s = smooth(hist, smoothing_window);
  auto peaks = find_peaks(s);
  if (peaks.size() < 2) return std::nullopt;
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
  const Peak& p1 = peaks[0].lo < peaks[1].lo ? peaks[0] : peaks[1];
  const Peak& p2 = peaks[0].lo < peaks[1].lo ? peaks[1] : peaks[0];
  if (p2.lo - p1.hi < 2) return std::nullopt;

  double lowest = s[p1.hi + 1];
  for (int i = p1.hi + 1; i < p2.lo; ++i) lowest = std::min(lowest, s[i]);
  int first = -1, last = -1;
  for (int i = p1.hi + 1; i < p2.lo; ++i)
    if (s[i] == lowest) {
      if (first < 0) first = i;
      last = i;
    }
  return 0.5 * (hist[first].center() + hist[last].center());
}

std::vector<Index> extract_candidates(const NeighborGraph& g, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("candidate threshold must lie in [0, 1]");
  std::vector<bool> flag(g.n_nodes, false);
  for (const auto& e : g.edges)
    if (passes(e, threshold)) flag[e.u] = flag[e.v] = true;
  std::vector<Index> out;
  for (Index x = 0; x < g.n_nodes; ++x)
    if (flag[x]) out.push_back(x);
  return out;
}

std::vector<std::optional<double>> max_incident_phi(const NeighborGraph& g) {
  std::vector<std::optional<double>> best(g.n_nodes);
  for (const auto& e : g.edges) {
    if (!e.phi.value) continue;
    for (Index x : {e.u, e.v})
      if (!best[x] || *e.phi.value > *best[x]) best[x] = *e.phi.value;
  }
  return best;
}

}  // namespace coordnet
