#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "coordnet/association.hpp"
#include "oracles.hpp"

using namespace coordnet;

namespace {

SparseBinaryMatrix from_rows(std::size_t cols, const std::vector<std::vector<Index>>& rows) {
  std::vector<std::pair<Index, Index>> e;
  for (Index r = 0; r < rows.size(); ++r)
    for (Index c : rows[r]) e.emplace_back(r, c);
  return {rows.size(), cols, e};
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("contingency examples") {
  // Tweets t1..t4 are columns 0..3 of a 10-tweet universe.
  const auto m = from_rows(10, {{0, 1, 2}, {1, 2, 3}});
  CHECK(contingency(0, 1, m) == ContingencyTable{2, 1, 1, 6});

  const auto same = from_rows(12, {{0, 1, 2, 3, 4}, {0, 1, 2, 3, 4}});
  CHECK(contingency(0, 1, same) == ContingencyTable{5, 0, 0, 7});

  const auto disjoint = from_rows(5, {{0, 1}, {2, 3, 4}});
  CHECK(contingency(0, 1, disjoint) == ContingencyTable{0, 2, 3, 0});

  CHECK_THROWS_AS(contingency(1, 1, m), DataError);
}

TEST_CASE("phi and chi-squared for (2, 1, 1, 6)") {
  const ContingencyTable t{2, 1, 1, 6};
  const auto s = phi(t);
  REQUIRE(s.defined());
  CHECK(*s.value == doctest::Approx(11.0 / 21.0).epsilon(1e-14));
  CHECK(*s.chi_squared == doctest::Approx(10.0 * 121.0 / 441.0).epsilon(1e-14));
  // Independent route: Pearson's sum over (O - E)^2 / E.
  CHECK(*s.chi_squared == doctest::Approx(oracle::chi_squared_expected(2, 1, 1, 6)).epsilon(1e-12));
  CHECK(std::sqrt(*s.chi_squared / 10.0) == doctest::Approx(*s.value).epsilon(1e-12));
}

TEST_CASE("phi anchors") {
  CHECK(*phi({5, 0, 0, 5}).value == 1.0);
  CHECK(*phi({1, 1, 1, 1}).value == 0.0);
  CHECK(*phi({1, 1, 1, 1}).chi_squared == 0.0);
  for (std::int64_t x = 1; x < 30; x += 3)
    for (std::int64_t y = 1; y < 30; y += 4) {
      CHECK(*phi({x, 0, 0, y}).value == 1.0);
      CHECK(*phi({x, x, x, x}).value == 0.0);
    }
}

TEST_CASE("phi is undefined when a marginal is zero") {
  // First user shared every tweet in the universe: no "first no" row.
  const auto s = phi({4, 0, 0, 0});
  CHECK_FALSE(s.defined());
  CHECK_FALSE(s.chi_squared.has_value());
  CHECK_FALSE(phi({0, 0, 3, 5}).defined());
}

TEST_CASE("cell-product variant") {
  CHECK(*phi_cell_product({2, 1, 1, 6}) == doctest::Approx(11.0 / std::sqrt(12.0)).epsilon(1e-14));
  CHECK_FALSE(phi_cell_product({5, 0, 0, 5}).has_value());
}

TEST_CASE("property: phi^2 n equals chi-squared and lies in [0, 1]") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> cell(0, 5000);
  int checked = 0;
  while (checked < 1000) {
    const ContingencyTable t{cell(rng), cell(rng), cell(rng), cell(rng)};
    const auto s = phi(t);
    if (!s.defined()) continue;
    ++checked;
    const double v = *s.value, chi = *s.chi_squared;
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(v * v * static_cast<double>(t.n()) - chi) <= 1e-10 * std::max(chi, 1e-300) + 1e-300);
    if (chi > 0) CHECK(rel(chi, oracle::chi_squared_expected(t.a, t.b, t.c, t.d)) < 1e-9);
  }
}

TEST_CASE("phi is symmetric in the user order") {
  std::mt19937_64 rng(9);
  const auto m = oracle::random_matrix(rng, 30, 50, 0.2);
  for (Index u = 0; u < 30; ++u)
    for (Index v = u + 1; v < 30; ++v) {
      const auto a = phi(contingency(u, v, m));
      const auto b = phi(contingency(v, u, m));
      CHECK(a.value == b.value);
      const auto t = contingency(u, v, m);
      CHECK(t.a + t.b == static_cast<std::int64_t>(m.row_support(u)));
      CHECK(t.a + t.c == static_cast<std::int64_t>(m.row_support(v)));
      CHECK(t.n() == static_cast<std::int64_t>(m.cols()));
    }
}

TEST_CASE("score_graph attaches tables and phi") {
  const auto same = from_rows(4, {{0, 1}, {0, 1}});
  const auto g = score_graph(knn_graph(same, 1), same);
  REQUIRE(g.edges.size() == 1);
  CHECK(*g.edges[0].phi.value == 1.0);
  CHECK(g.scored());

  const auto m = from_rows(10, {{0, 1, 2}, {1, 2, 3}});
  const auto g2 = score_graph(knn_graph(m, 1), m);
  REQUIRE(g2.edges.size() == 1);
  CHECK(*g2.edges[0].phi.value == doctest::Approx(0.5238095238095238).epsilon(1e-12));
  CHECK(*g2.edges[0].table == ContingencyTable{2, 1, 1, 6});
  CHECK(g2.edges[0].cosine == doctest::Approx(2.0 / 3.0));

  const auto bigger = from_rows(10, {{0}, {0}, {1}});
  CHECK_THROWS_AS(score_graph(knn_graph(m, 1), bigger), DataError);
}

TEST_CASE("score_graph is schedule independent") {
  std::mt19937_64 rng(19);
  const auto m = oracle::random_matrix(rng, 300, 200, 0.05);
  const auto g = knn_graph(m, 3);
  set_thread_count(1);
  const auto a = score_graph(g, m);
  set_thread_count(5);
  const auto b = score_graph(g, m);
  set_thread_count(1);
  for (std::size_t i = 0; i < a.edges.size(); ++i) {
    CHECK(a.edges[i].phi.value == b.edges[i].phi.value);
    CHECK(a.edges[i].phi.chi_squared == b.edges[i].phi.chi_squared);
  }
}

TEST_CASE("chi-squared(1) upper quantiles against reference values") {
  // Reference values from an independent statistical library (scipy chi2.isf).
  CHECK(rel(chi2_1_upper_quantile(0.05), 3.841458820694124) < 1e-9);
  CHECK(rel(chi2_1_upper_quantile(1e-9), 37.324893051362324) < 1e-9);
  CHECK(rel(chi2_1_upper_quantile(1e-4 / 109118), 37.495079058754264) < 1e-9);
  CHECK(rel(chi2_1_upper_quantile(1e-15), 64.43046352012365) < 1e-9);
  CHECK(rel(chi2_1_upper_quantile(0.5), 0.4549364231195724) < 1e-9);
  CHECK(rel(chi2_1_upper_quantile(0.999), 1.570797149262492e-06) < 1e-9);
  CHECK(chi2_1_upper_quantile(1.0) == 0.0);
  // Round trip through erfc.
  for (double p : {0.3, 1e-3, 1e-7, 1e-12}) CHECK(rel(std::erfc(std::sqrt(chi2_1_upper_quantile(p) / 2)), p) < 1e-9);
  CHECK_THROWS_AS(chi2_1_upper_quantile(0.0), ConfigError);
}

TEST_CASE("critical phi") {
  CHECK(rel(critical_phi(0.05, 1, 1000), 0.061979503230456146) < 1e-9);
  CHECK(critical_phi(1.0 - 1e-12, 1, 1000) < 1e-5);
  CHECK(critical_phi(1e-4, 109118, 5000) > critical_phi(1e-4, 1, 5000));
  CHECK_THROWS_AS(critical_phi(0.0, 1, 10), ConfigError);
  CHECK_THROWS_AS(critical_phi(0.5, 0, 10), ConfigError);
}
