#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "coordnet/corpus.hpp"

using namespace coordnet;

namespace {

std::vector<ShareEvent> parse(const std::string& text, EventFormat f = EventFormat::csv) {
  std::istringstream in(text);
  return parse_events(in, f);
}

std::vector<ShareEvent> grid(int users, int tweets) {
  std::vector<ShareEvent> ev;
  for (int u = 0; u < users; ++u)
    for (int t = 0; t < tweets; ++t) ev.push_back({"u" + std::to_string(u), "t" + std::to_string(t), std::nullopt});
  return ev;
}

std::vector<ShareEvent> random_events(std::mt19937_64& rng, int n_events, int users, int tweets) {
  std::uniform_int_distribution<int> pu(0, users - 1), pt(0, tweets - 1);
  std::vector<ShareEvent> ev;
  for (int i = 0; i < n_events; ++i)
    ev.push_back({"u" + std::to_string(pu(rng)), "t" + std::to_string(pt(rng)), std::nullopt});
  return ev;
}

bool same(const ShareCorpus& a, const ShareCorpus& b) {
  if (a.users.tokens() != b.users.tokens() || a.tweets.tokens() != b.tweets.tokens()) return false;
  if (a.n_entries() != b.n_entries()) return false;
  for (Index r = 0; r < a.n_users(); ++r)
    if (!std::equal(a.incidence.row(r).begin(), a.incidence.row(r).end(), b.incidence.row(r).begin(),
                    b.incidence.row(r).end()))
      return false;
  return true;
}

}  // namespace

TEST_CASE("csv record maps fields directly") {
  const auto ev = parse("u1,t9,1667692800\n");
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == ShareEvent{"u1", "t9", 1667692800});
}

TEST_CASE("jsonl record without timestamp") {
  const auto ev = parse("{\"user_id\":\"u1\",\"tweet_id\":\"t9\"}\n", EventFormat::jsonl);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == ShareEvent{"u1", "t9", std::nullopt});
}

TEST_CASE("jsonl accepts integer ids and explicit timestamps") {
  const auto ev = parse("{\"user_id\":42,\"tweet_id\":\"t\",\"timestamp\":5}\n\n", EventFormat::jsonl);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0] == ShareEvent{"42", "t", 5});
}

TEST_CASE("csv with missing tweet id reports the line") {
  try {
    parse("u1,\n");
    FAIL("expected a DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 1") != std::string::npos);
    CHECK(msg.find("missing tweet_id") != std::string::npos);
  }
}

TEST_CASE("csv header is skipped but still counts as a line") {
  const auto ev = parse("user_id,tweet_id,timestamp\nu1,t1,\nu2,t1,7\n");
  REQUIRE(ev.size() == 2);
  CHECK_FALSE(ev[0].timestamp.has_value());
  CHECK(*ev[1].timestamp == 7);
  CHECK_THROWS_WITH_AS(parse("user_id,tweet_id\nu1,t1\nu2,t2,notanumber\n"), doctest::Contains("line 3"), DataError);
}

TEST_CASE("malformed records") {
  CHECK_THROWS_AS(parse(",t1\n"), DataError);
  CHECK_THROWS_AS(parse("a,b,1,2\n"), DataError);
  CHECK_THROWS_AS(parse("{\"user_id\":\"u\"}\n", EventFormat::jsonl), DataError);
  CHECK_THROWS_AS(parse("not json\n", EventFormat::jsonl), DataError);
  CHECK_THROWS_AS(parse("[1,2]\n", EventFormat::jsonl), DataError);
}

TEST_CASE("unknown format tag is a configuration error") {
  CHECK_THROWS_AS(parse_event_format("xml"), ConfigError);
  CHECK(parse_event_format("jsonl") == EventFormat::jsonl);
}

TEST_CASE("three users sharing the same two tweets") {
  FilterConfig cfg;
  cfg.min_user_activity = 2;
  cfg.min_tweet_audience = 3;
  const auto c = build_corpus(grid(3, 2), cfg);
  CHECK(c.n_users() == 3);
  CHECK(c.n_tweets() == 2);
  CHECK(c.n_entries() == 6);
}

TEST_CASE("a lone user whose tweets nobody else shares leaves an empty corpus") {
  CHECK_THROWS_WITH_AS(build_corpus(grid(1, 25)), doctest::Contains("empty corpus"), DataError);
  CHECK_THROWS_AS(build_corpus({}), DataError);
}

TEST_CASE("repeated events binarize to one entry") {
  std::vector<ShareEvent> ev(5, ShareEvent{"u", "t", std::nullopt});
  FilterConfig cfg;
  cfg.min_user_activity = 1;
  cfg.min_tweet_audience = 1;
  const auto c = build_corpus(ev, cfg);
  CHECK(c.n_entries() == 1);
}

TEST_CASE("filter config bounds") {
  FilterConfig cfg;
  cfg.min_user_activity = 0;
  CHECK_THROWS_AS(build_corpus(grid(2, 2), cfg), ConfigError);
}

TEST_CASE("indices follow lexicographic token order") {
  std::vector<ShareEvent> ev{{"zed", "t2", {}}, {"amy", "t1", {}}, {"bob", "t2", {}}, {"amy", "t2", {}}};
  const auto c = build_corpus(ev, {1, 1, FilterMode::single_pass});
  CHECK(c.users.tokens() == std::vector<std::string>{"amy", "bob", "zed"});
  CHECK(c.tweets.tokens() == std::vector<std::string>{"t1", "t2"});
  CHECK(*c.users.find("bob") == 1);
  CHECK_FALSE(c.users.find("nobody").has_value());
  CHECK(c.incidence.contains(0, 0));
  CHECK_FALSE(c.incidence.contains(1, 0));
}

TEST_CASE("single-pass order: audience filter on raw data, then activity once") {
  // t1 has audience 2, t2 audience 1. Audience >= 2 keeps only t1, which
  // leaves c with no shares.
  std::vector<ShareEvent> ev{{"a", "t1", {}}, {"b", "t1", {}}, {"c", "t2", {}}};
  const auto c = build_corpus(ev, {1, 2, FilterMode::single_pass});
  CHECK(c.users.tokens() == std::vector<std::string>{"a", "b"});
  CHECK(c.tweets.tokens() == std::vector<std::string>{"t1"});

  // Single pass can leave a column under the audience bound; fixed point cannot.
  std::vector<ShareEvent> ev2{{"a", "t1", {}}, {"a", "t2", {}}, {"b", "t1", {}}, {"c", "t2", {}}, {"c", "t3", {}},
                              {"d", "t3", {}}, {"d", "t1", {}}};
  const auto sp = build_corpus(ev2, {2, 2, FilterMode::single_pass});
  const auto fp = build_corpus(ev2, {2, 2, FilterMode::fixed_point});
  for (Index t = 0; t < fp.n_tweets(); ++t) CHECK(fp.incidence.col_support(t) >= 2);
  for (Index u = 0; u < fp.n_users(); ++u) CHECK(fp.incidence.row_support(u) >= 2);
  CHECK(sp.n_entries() >= fp.n_entries());
}

TEST_CASE("property: binarization idempotence, filter soundness, determinism") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    auto ev = random_events(rng, 600, 40, 30);
    FilterConfig cfg{3 + trial % 4, 2 + trial % 5, FilterMode::single_pass};
    ShareCorpus c;
    try {
      c = build_corpus(ev, cfg);
    } catch (const DataError&) {
      continue;
    }

    auto doubled = ev;
    doubled.insert(doubled.end(), ev.begin(), ev.end());
    CHECK(same(build_corpus(doubled, cfg), c));

    auto shuffled = ev;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(same(build_corpus(shuffled, cfg), c));

    // Rows meet the activity bound on the final matrix; every kept column had
    // the required audience in the raw, de-duplicated data.
    for (Index u = 0; u < c.n_users(); ++u) CHECK(c.incidence.row_support(u) >= static_cast<std::size_t>(cfg.min_user_activity));
    for (Index t = 0; t < c.n_tweets(); ++t) {
      std::set<std::string> audience;
      for (const auto& e : ev)
        if (e.tweet_id == c.tweets.token(t)) audience.insert(e.user_id);
      CHECK(audience.size() >= static_cast<std::size_t>(cfg.min_tweet_audience));
      CHECK(c.incidence.col_support(t) >= 1);
    }

    cfg.mode = FilterMode::fixed_point;
    try {
      const auto fp = build_corpus(ev, cfg);
      for (Index u = 0; u < fp.n_users(); ++u) CHECK(fp.incidence.row_support(u) >= static_cast<std::size_t>(cfg.min_user_activity));
      for (Index t = 0; t < fp.n_tweets(); ++t) CHECK(fp.incidence.col_support(t) >= static_cast<std::size_t>(cfg.min_tweet_audience));
    } catch (const DataError&) {
    }
  }
}

TEST_CASE("csv writer round-trips through the parser") {
  std::vector<ShareEvent> ev{{"u1", "t1", 3}, {"u2", "t1", std::nullopt}};
  std::stringstream ss;
  write_events_csv(ss, ev);
  CHECK(parse_events(ss, EventFormat::csv) == ev);
}
