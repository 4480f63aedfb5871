#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "coordnet/common.hpp"

namespace coordnet {

enum class ClusterSelection { excess_of_mass, leaf };

ClusterSelection parse_cluster_selection(std::string_view tag);
std::string_view to_string(ClusterSelection s);

struct ClusterParams {
  int min_cluster_size = 50;
  int min_samples = 0;  // 0 means "same as min_cluster_size"
  ClusterSelection selection = ClusterSelection::excess_of_mass;

  int effective_min_samples() const { return min_samples > 0 ? min_samples : min_cluster_size; }
  void validate() const;
};

struct ClusterAssignment {
  std::vector<int> labels;  // -1 is noise
  int n_clusters = 0;
  std::vector<double> membership_strength;

  std::size_t noise_count() const;
  std::vector<std::size_t> cluster_sizes() const;
};

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MstEdge {
  Index a = 0;
  Index b = 0;
  double weight = 0.0;
};

// One row of the condensed cluster tree: `child` is either a point (when
// child_size == 1 and is_point) or a cluster id. Cluster 0 is the root.
struct CondensedEntry {
  Index parent = 0;
  Index child = 0;
  double lambda = 0.0;  // 1 / distance at which the child leaves the parent
  std::size_t child_size = 0;
  bool is_point = false;
};

/// Distance from each point to its min_samples-th nearest neighbor, counting
/// the point itself as the first.
Eigen::VectorXd core_distances(const PointMatrix& points, int min_samples);

double mutual_reachability(const PointMatrix& points, const Eigen::VectorXd& core, Index a, Index b);

/// Prim's algorithm on the complete mutual-reachability graph, starting at
/// point 0. Equal keys go to the lowest point index.
std::vector<MstEdge> mutual_reachability_mst(const PointMatrix& points, const Eigen::VectorXd& core);

std::vector<CondensedEntry> condense_tree(std::vector<MstEdge> mst, std::size_t n_points, int min_cluster_size);

/// HDBSCAN on Euclidean rows of `points`.
ClusterAssignment cluster(const PointMatrix& points, const ClusterParams& params = {});

}  // namespace coordnet
