#pragma once

#include <optional>
#include <span>
#include <vector>

#include "coordnet/knn.hpp"

namespace coordnet {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n);
  Index find(Index x);
  bool unite(Index a, Index b);
  std::size_t components() const { return components_; }

 private:
  std::vector<Index> parent_;
  std::vector<Index> rank_;
  std::size_t components_;
};

struct SweepPoint {
  double threshold = 0.0;
  std::size_t n_edges = 0;      // defined-phi edges with phi >= threshold
  std::size_t n_lcc_edges = 0;  // edges inside the largest component
  std::optional<double> log_ratio;  // log10(n_edges / n_lcc_edges); empty if either is 0
  std::size_t n_components = 0;     // isolated nodes included
};

/// Component statistics of g restricted to edges with defined phi >= threshold.
/// The largest component is the one with most nodes; ties go to more edges,
/// then to the lowest member index.
SweepPoint sweep_point(const NeighborGraph& g, double threshold);

/// Thresholds i / n_points for i = 0 .. n_points - 1, ascending. Returns an
/// empty sequence if g has no defined-phi edge.
std::vector<SweepPoint> threshold_sweep(const NeighborGraph& g, int n_points = 100);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  double center() const { return 0.5 * (lo + hi); }
};

/// Equal-width bins over [0, 1]; a value of exactly 1 lands in the last bin.
std::vector<HistogramBin> histogram(std::span<const double> values, int n_bins);
std::vector<HistogramBin> phi_histogram(const NeighborGraph& g, int n_bins);

/// Centered moving average; the window is truncated at both ends.
std::vector<double> smooth(std::span<const HistogramBin> hist, int window);

/// Threshold at the bottom of the dip between the two most prominent modes of
/// the smoothed histogram. A flat bottom resolves to its midpoint. Returns
/// nothing for a histogram with fewer than two modes.
std::optional<double> find_valley(std::span<const HistogramBin> hist, int smoothing_window = 5);

/// Sorted user indices with at least one defined-phi edge at or above threshold.
std::vector<Index> extract_candidates(const NeighborGraph& g, double threshold = 0.67);

/// Largest defined phi among each node's incident edges.
std::vector<std::optional<double>> max_incident_phi(const NeighborGraph& g);

}  // namespace coordnet
