#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coordnet/sparse.hpp"

namespace coordnet {

struct ShareEvent {
  std::string user_id;
  std::string tweet_id;
  std::optional<std::int64_t> timestamp;

  friend bool operator==(const ShareEvent&, const ShareEvent&) = default;
};

enum class EventFormat { csv, jsonl };

EventFormat parse_event_format(std::string_view tag);
std::string_view to_string(EventFormat f);

enum class FilterMode {
  single_pass,  // audience filter on raw data, then activity filter once
  fixed_point   // alternate both filters until neither removes anything
};

FilterMode parse_filter_mode(std::string_view tag);
std::string_view to_string(FilterMode m);

struct FilterConfig {
  int min_user_activity = 20;
  int min_tweet_audience = 10;
  FilterMode mode = FilterMode::single_pass;

  void validate() const;
};

// Bidirectional token <-> dense index map. Indices follow ascending
// byte-wise token order.
class TokenIndex {
 public:
  TokenIndex() = default;
  explicit TokenIndex(std::vector<std::string> sorted_tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(Index i) const { return tokens_.at(i); }
  std::optional<Index> find(std::string_view token) const;
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, Index> lookup_;
};

struct ShareCorpus {
  TokenIndex users;
  TokenIndex tweets;
  SparseBinaryMatrix incidence;  // users x tweets

  std::size_t n_users() const { return incidence.rows(); }
  std::size_t n_tweets() const { return incidence.cols(); }
  std::size_t n_entries() const { return incidence.nonzeros(); }
};

/// Parses share events from CSV (`user_id,tweet_id[,timestamp]`, header
/// optional) or JSON lines. Blank lines are skipped. Malformed records raise
/// DataError naming the 1-based line number.
std::vector<ShareEvent> parse_events(std::istream& in, EventFormat format);
std::vector<ShareEvent> read_events_file(const std::string& path, EventFormat format);

void write_events_csv(std::ostream& out, const std::vector<ShareEvent>& events);

/// Collapses duplicate (user, tweet) pairs, applies the audience and activity
/// filters, and interns the survivors. Tweets left with no sharer after the
/// activity filter are dropped so every column is non-empty.
ShareCorpus build_corpus(const std::vector<ShareEvent>& events, const FilterConfig& cfg = {});

}  // namespace coordnet
