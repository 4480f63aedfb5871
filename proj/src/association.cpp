#include "coordnet/association.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "coordnet/parallel.hpp"

namespace coordnet {

ContingencyTable contingency(Index u1, Index u2, const SparseBinaryMatrix& m) {
  if (u1 == u2) throw DataError("contingency: self-comparison of row " + std::to_string(u1));
  if (u1 >= m.rows() || u2 >= m.rows()) throw DataError("contingency: row index out of range");
  const auto s1 = m.row(u1);
  const auto s2 = m.row(u2);
  ContingencyTable t;
  t.a = static_cast<std::int64_t>(overlap(s1, s2));
  t.b = static_cast<std::int64_t>(s1.size()) - t.a;
  t.c = static_cast<std::int64_t>(s2.size()) - t.a;
  t.d = static_cast<std::int64_t>(m.cols()) - t.a - t.b - t.c;
  return t;
}

PhiScore phi(const ContingencyTable& t) {
  const double r1 = static_cast<double>(t.a + t.b);
  const double r2 = static_cast<double>(t.c + t.d);
  const double c1 = static_cast<double>(t.a + t.c);
  const double c2 = static_cast<double>(t.b + t.d);
  if (r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0) return {};
  // ad - bc is exact in 64-bit for any realistic corpus size.
  const double cross = static_cast<double>(t.a * t.d - t.b * t.c);
  const double marginals = r1 * r2 * c1 * c2;
  PhiScore s;
  s.value = std::min(1.0, std::abs(cross) / std::sqrt(marginals));
  s.chi_squared = static_cast<double>(t.n()) * cross * cross / marginals;
  return s;
}

std::optional<double> phi_cell_product(const ContingencyTable& t) {
  if (t.a == 0 || t.b == 0 || t.c == 0 || t.d == 0) return std::nullopt;
  const double cross = static_cast<double>(t.a * t.d - t.b * t.c);
  const double cells = static_cast<double>(t.a) * t.b * static_cast<double>(t.c) * t.d;
  return std::abs(cross) / std::sqrt(cells);
}

NeighborGraph score_graph(NeighborGraph g, const SparseBinaryMatrix& m) {
  if (g.n_nodes != m.rows())
    throw DataError("score_graph: graph has " + std::to_string(g.n_nodes) + " nodes but matrix has " +
                    std::to_string(m.rows()) + " rows");
  for (const auto& e : g.edges)
    if (e.u >= m.rows() || e.v >= m.rows() || e.u == e.v)
      throw DataError("score_graph: edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                      ") inconsistent with matrix");
  parallel_for(g.edges.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      auto& e = g.edges[i];
      e.table = contingency(e.u, e.v, m);
      e.phi = phi(*e.table);
    }
  });
  return g;
}

double chi2_1_upper_quantile(double tail_prob) {
  if (!(tail_prob > 0.0) || tail_prob > 1.0)
    throw ConfigError("chi-squared tail probability must lie in (0, 1]");
  if (tail_prob == 1.0) return 0.0;

  // Solve erfc(z) = p for z >= 0. Newton on log(erfc) converges quickly in
  // the far tail; each step is clamped to the current bracket.
  const double log_p = std::log(tail_prob);
  double lo = 0.0, hi = 1.0;
  while (std::erfc(hi) > tail_prob) hi *= 2.0;
  double z = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double e = std::erfc(z);
    if (e > tail_prob)
      lo = z;
    else
      hi = z;
    const double f = std::log(e) - log_p;
    const double dlog = -2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z) / e;
    double next = z - f / dlog;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 1e-15 * std::max(1.0, z) || hi - lo <= 1e-15 * std::max(1.0, z)) {
      z = next;
      break;
    }
    z = next;
  }
  return 2.0 * z * z;
}

double critical_phi(double alpha, long long m_comparisons, long long n) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (m_comparisons < 1) throw ConfigError("number of comparisons must be positive");
  if (n < 1) throw ConfigError("table size n must be positive");
  const double q = chi2_1_upper_quantile(alpha / static_cast<double>(m_comparisons));
  return std::sqrt(q / static_cast<double>(n));
}

}  // namespace coordnet
