#include "coordnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

namespace coordnet {

namespace {

std::string token(const char* prefix, int width, long long i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*lld", prefix, width, i);
  return buf;
}

std::string tweet_token(int t) { return token("t", 7, t); }

constexpr std::int64_t kWindowStart = 1667606400;  // 2022-11-05T00:00:00Z
constexpr std::int64_t kWindowLength = 7 * 24 * 3600;

// Draws `count` distinct values in [0, n), ascending.
std::vector<int> sample_distinct(int n, int count, std::mt19937_64& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(all[i], all[pick(rng)]);
  }
  all.resize(static_cast<std::size_t>(count));
  std::sort(all.begin(), all.end());
  return all;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_tweets < 1) throw ConfigError("n_tweets must be positive");
  if (n_organic_users < 0) throw ConfigError("n_organic_users must be >= 0");
  if (n_organic_users > 0 && n_organic_clusters < 1) throw ConfigError("organic users need at least one cluster");
  if (!(noise_rate >= 0.0 && noise_rate < 1.0)) throw ConfigError("noise_rate must lie in [0, 1)");
  if (!(organic_activity > 0.0)) throw ConfigError("organic_activity must be positive");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
  long long pooled = 0;
  for (const auto& g : coord_groups) {
    if (g.group_size < 1 || g.shared_pool < 1) throw ConfigError("coordinated groups need positive size and pool");
    if (!(g.overlap_rate > 0.0 && g.overlap_rate <= 1.0)) throw ConfigError("overlap_rate must lie in (0, 1]");
    if (!(g.overlap_rate > noise_rate)) throw ConfigError("overlap_rate must exceed noise_rate");
    pooled += g.shared_pool;
  }
  const long long organic_tweets = n_tweets - pooled;
  if (n_organic_users > 0) {
    if (organic_tweets < n_organic_clusters)
      throw ConfigError("tweet pool too small: coordinated pools leave " + std::to_string(organic_tweets) +
                        " tweets for " + std::to_string(n_organic_clusters) + " organic clusters");
    const long long per_cluster = organic_tweets / n_organic_clusters;
    if (organic_activity > static_cast<double>(per_cluster))
      throw ConfigError("organic_activity exceeds the per-cluster tweet pool (" + std::to_string(per_cluster) + ")");
  } else if (organic_tweets < 0) {
    throw ConfigError("coordinated pools exceed n_tweets");
  }
}

nlohmann::json GroundTruth::to_json() const {
  nlohmann::json j;
  j["coordinated_users"] = nlohmann::json::array();
  for (const auto& u : coordinated_users) j["coordinated_users"].push_back(u);
  j["coordinated_groups"] = nlohmann::json::object();
  for (const auto& [u, g] : coordinated_group_of) j["coordinated_groups"][u] = g;
  j["organic_clusters"] = nlohmann::json::object();
  for (const auto& [u, c] : organic_cluster_of) j["organic_clusters"][u] = c;
  return j;
}

SynthCorpus generate(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<int> any_tweet(0, cfg.n_tweets - 1);
  std::uniform_int_distribution<std::int64_t> when(0, kWindowLength - 1);
  std::bernoulli_distribution is_noise(cfg.noise_rate);
  SynthCorpus out;

  auto emit = [&](const std::string& user, std::vector<int> tweets) {
    std::sort(tweets.begin(), tweets.end());
    tweets.erase(std::unique(tweets.begin(), tweets.end()), tweets.end());
    for (int t : tweets) out.events.push_back({user, tweet_token(t), kWindowStart + when(rng)});
  };

  int pool_start = 0;
  for (std::size_t g = 0; g < cfg.coord_groups.size(); ++g) {
    const auto& spec = cfg.coord_groups[g];
    const int picks = std::max(1, static_cast<int>(std::lround(spec.overlap_rate * spec.shared_pool)));
    // Expected noise shares per member so that noise is noise_rate of the total.
    const double noise_mean = picks * cfg.noise_rate / (1.0 - cfg.noise_rate);
    std::poisson_distribution<int> noise_count(noise_mean > 0 ? noise_mean : 1.0);
    for (int m = 0; m < spec.group_size; ++m) {
      const std::string user = token("c", 3, static_cast<long long>(g)) + token("_u", 4, m);
      std::vector<int> tweets;
      for (int off : sample_distinct(spec.shared_pool, picks, rng)) tweets.push_back(pool_start + off);
      const int extra = noise_mean > 0 ? noise_count(rng) : 0;
      for (int i = 0; i < extra; ++i) tweets.push_back(any_tweet(rng));
      emit(user, std::move(tweets));
      out.truth.coordinated_users.insert(user);
      out.truth.coordinated_group_of[user] = static_cast<int>(g);
    }
    pool_start += spec.shared_pool;
  }

  if (cfg.n_organic_users > 0) {
    const int organic_tweets = cfg.n_tweets - pool_start;
    const int per_cluster = organic_tweets / cfg.n_organic_clusters;
    std::vector<double> weights(static_cast<std::size_t>(per_cluster));
    for (int r = 0; r < per_cluster; ++r) weights[r] = 1.0 / std::pow(r + 1.0, cfg.zipf_exponent);
    std::discrete_distribution<int> zipf(weights.begin(), weights.end());
    std::poisson_distribution<int> activity(cfg.organic_activity);

    for (int i = 0; i < cfg.n_organic_users; ++i) {
      const int c = i % cfg.n_organic_clusters;
      const int base = pool_start + c * per_cluster;
      const std::string user = token("o", 1, c) + token("_u", 6, i);
      const int want = std::clamp(activity(rng), 1, per_cluster);
      std::vector<char> taken(static_cast<std::size_t>(cfg.n_tweets), 0);
      std::vector<int> tweets;
      // Rejection on repeats; the cap keeps heavy-headed pools from stalling.
      for (int tries = 0; static_cast<int>(tweets.size()) < want && tries < 50 * want; ++tries) {
        const int t = is_noise(rng) ? any_tweet(rng) : base + zipf(rng);
        if (!taken[t]) {
          taken[t] = 1;
          tweets.push_back(t);
        }
      }
      emit(user, std::move(tweets));
      out.truth.organic_cluster_of[user] = c;
    }
  }
  return out;
}

}  // namespace coordnet
