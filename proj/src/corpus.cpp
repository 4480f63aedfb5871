#include "coordnet/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace coordnet {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

std::int64_t parse_timestamp(std::string_view s, std::size_t line) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) fail(line, "invalid timestamp '" + std::string(s) + "'");
  return v;
}

ShareEvent parse_csv_record(std::string_view text, std::size_t line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    fields.push_back(trim(text.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() > 3) fail(line, "expected at most 3 fields, found " + std::to_string(fields.size()));
  if (fields[0].empty()) fail(line, "missing user_id");
  if (fields.size() < 2 || fields[1].empty()) fail(line, "missing tweet_id");
  ShareEvent ev{std::string(fields[0]), std::string(fields[1]), std::nullopt};
  if (fields.size() == 3 && !fields[2].empty()) ev.timestamp = parse_timestamp(fields[2], line);
  return ev;
}

std::string id_field(const nlohmann::json& obj, const char* key, std::size_t line) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) fail(line, std::string("missing ") + key);
  std::string out;
  if (it->is_string())
    out = it->get<std::string>();
  else if (it->is_number_integer())
    out = it->dump();
  else
    fail(line, std::string(key) + " must be a string or integer");
  if (out.empty()) fail(line, std::string("missing ") + key);
  return out;
}

ShareEvent parse_json_record(std::string_view text, std::size_t line) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(line, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) fail(line, "record is not a JSON object");
  ShareEvent ev{id_field(obj, "user_id", line), id_field(obj, "tweet_id", line), std::nullopt};
  if (const auto it = obj.find("timestamp"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer()) fail(line, "timestamp must be an integer");
    ev.timestamp = it->get<std::int64_t>();
  }
  return ev;
}

}  // namespace

EventFormat parse_event_format(std::string_view tag) {
  if (tag == "csv") return EventFormat::csv;
  if (tag == "jsonl") return EventFormat::jsonl;
  throw ConfigError("unknown event format '" + std::string(tag) + "' (expected csv or jsonl)");
}

std::string_view to_string(EventFormat f) { return f == EventFormat::csv ? "csv" : "jsonl"; }

FilterMode parse_filter_mode(std::string_view tag) {
  if (tag == "single_pass") return FilterMode::single_pass;
  if (tag == "fixed_point") return FilterMode::fixed_point;
  throw ConfigError("unknown filter mode '" + std::string(tag) + "'");
}

std::string_view to_string(FilterMode m) {
  return m == FilterMode::single_pass ? "single_pass" : "fixed_point";
}

void FilterConfig::validate() const {
  if (min_user_activity < 1) throw ConfigError("min_user_activity must be >= 1");
  if (min_tweet_audience < 1) throw ConfigError("min_tweet_audience must be >= 1");
}

TokenIndex::TokenIndex(std::vector<std::string> sorted_tokens) : tokens_(std::move(sorted_tokens)) {
  lookup_.reserve(tokens_.size());
  for (Index i = 0; i < tokens_.size(); ++i) lookup_.emplace(tokens_[i], i);
}

std::optional<Index> TokenIndex::find(std::string_view token) const {
  const auto it = lookup_.find(std::string(token));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<ShareEvent> parse_events(std::istream& in, EventFormat format) {
  std::vector<ShareEvent> events;
  std::string buf;
  std::size_t line = 0;
  bool first_record = true;
  while (std::getline(in, buf)) {
    ++line;
    const auto text = trim(buf);
    if (text.empty()) continue;
    if (format == EventFormat::csv) {
      if (first_record && text.substr(0, text.find(',')) == "user_id") {
        first_record = false;
        continue;
      }
      events.push_back(parse_csv_record(text, line));
    } else {
      events.push_back(parse_json_record(text, line));
    }
    first_record = false;
  }
  return events;
}

std::vector<ShareEvent> read_events_file(const std::string& path, EventFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return parse_events(in, format);
}

void write_events_csv(std::ostream& out, const std::vector<ShareEvent>& events) {
  out << "user_id,tweet_id,timestamp\n";
  for (const auto& e : events) {
    out << e.user_id << ',' << e.tweet_id << ',';
    if (e.timestamp) out << *e.timestamp;
    out << '\n';
  }
}

namespace {

using Pair = std::pair<Index, Index>;  // (user, tweet) in provisional ids

std::vector<Pair> drop_by_support(const std::vector<Pair>& pairs, std::size_t n, bool by_tweet,
                                  int min_support) {
  std::vector<std::size_t> support(n, 0);
  for (const auto& p : pairs) ++support[by_tweet ? p.second : p.first];
  std::vector<Pair> kept;
  kept.reserve(pairs.size());
  for (const auto& p : pairs)
    if (support[by_tweet ? p.second : p.first] >= static_cast<std::size_t>(min_support))
      kept.push_back(p);
  return kept;
}

// Byte-wise sorted, de-duplicated tokens.
std::vector<std::string> sorted_unique(std::vector<std::string> tokens) {
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  return tokens;
}

}  // namespace

ShareCorpus build_corpus(const std::vector<ShareEvent>& events, const FilterConfig& cfg) {
  cfg.validate();
  if (events.empty()) throw DataError("empty corpus: no share events");

  std::vector<std::string> user_tokens, tweet_tokens;
  user_tokens.reserve(events.size());
  tweet_tokens.reserve(events.size());
  for (const auto& e : events) {
    if (e.user_id.empty() || e.tweet_id.empty()) throw DataError("share event with empty id");
    user_tokens.push_back(e.user_id);
    tweet_tokens.push_back(e.tweet_id);
  }
  const TokenIndex all_users(sorted_unique(std::move(user_tokens)));
  const TokenIndex all_tweets(sorted_unique(std::move(tweet_tokens)));

  std::vector<Pair> pairs;
  pairs.reserve(events.size());
  for (const auto& e : events) pairs.emplace_back(*all_users.find(e.user_id), *all_tweets.find(e.tweet_id));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  pairs = drop_by_support(pairs, all_tweets.size(), true, cfg.min_tweet_audience);
  pairs = drop_by_support(pairs, all_users.size(), false, cfg.min_user_activity);
  if (cfg.mode == FilterMode::fixed_point) {
    for (std::size_t before = 0; before != pairs.size();) {
      before = pairs.size();
      pairs = drop_by_support(pairs, all_tweets.size(), true, cfg.min_tweet_audience);
      pairs = drop_by_support(pairs, all_users.size(), false, cfg.min_user_activity);
    }
  }
  if (pairs.empty())
    throw DataError("empty corpus: no (user, tweet) pairs survive the activity/audience filters");

  // Provisional ids are already in token order, so compaction keeps it.
  std::vector<Index> user_map(all_users.size(), 0), tweet_map(all_tweets.size(), 0);
  std::vector<bool> user_seen(all_users.size(), false), tweet_seen(all_tweets.size(), false);
  for (const auto& [u, t] : pairs) {
    user_seen[u] = true;
    tweet_seen[t] = true;
  }
  std::vector<std::string> kept_users, kept_tweets;
  for (Index u = 0; u < all_users.size(); ++u)
    if (user_seen[u]) {
      user_map[u] = static_cast<Index>(kept_users.size());
      kept_users.push_back(all_users.token(u));
    }
  for (Index t = 0; t < all_tweets.size(); ++t)
    if (tweet_seen[t]) {
      tweet_map[t] = static_cast<Index>(kept_tweets.size());
      kept_tweets.push_back(all_tweets.token(t));
    }
  for (auto& [u, t] : pairs) {
    u = user_map[u];
    t = tweet_map[t];
  }

  ShareCorpus corpus;
  const std::size_t nu = kept_users.size(), nt = kept_tweets.size();
  corpus.users = TokenIndex(std::move(kept_users));
  corpus.tweets = TokenIndex(std::move(kept_tweets));
  corpus.incidence = SparseBinaryMatrix(nu, nt, std::move(pairs));
  return corpus;
}

}  // namespace coordnet
