#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coordnet/corpus.hpp"

namespace coordnet {

struct CoordGroupSpec {
  int group_size = 20;
  int shared_pool = 40;
  double overlap_rate = 0.95;  // fraction of the pool each member shares
};

struct SynthConfig {
  int n_organic_users = 2000;
  int n_organic_clusters = 4;
  int n_tweets = 5000;
  std::vector<CoordGroupSpec> coord_groups;
  double organic_activity = 30.0;  // mean distinct shares per organic user
  double noise_rate = 0.02;        // fraction of shares drawn uniformly from all tweets
  double zipf_exponent = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  std::set<std::string> coordinated_users;
  std::map<std::string, int> coordinated_group_of;
  std::map<std::string, int> organic_cluster_of;

  nlohmann::json to_json() const;
};

struct SynthCorpus {
  std::vector<ShareEvent> events;
  GroundTruth truth;
};

/// Tweets are laid out as the coordinated groups' private pools first, then
/// the organic clusters' pools in equal contiguous blocks. Organic users draw
/// from their cluster pool by Zipf popularity; coordinated members share a
/// random overlap_rate fraction of their group's pool. Both add uniform noise
/// shares at noise_rate.
SynthCorpus generate(const SynthConfig& cfg);

}  // namespace coordnet
