#pragma once

#include <optional>

#include "coordnet/knn.hpp"

namespace coordnet {

/// 2x2 table of shared / unshared tweets for two distinct users over the
/// whole tweet universe of m.
ContingencyTable contingency(Index u1, Index u2, const SparseBinaryMatrix& m);

/// Standard phi coefficient (marginal-product denominator) and the matching
/// Pearson chi-squared statistic. Both are undefined when any marginal is 0.
PhiScore phi(const ContingencyTable& t);

/// |ad - bc| / sqrt(abcd): the cell-product variant, kept for comparison with
/// the standard form. Undefined whenever any cell is 0.
std::optional<double> phi_cell_product(const ContingencyTable& t);

/// Attaches contingency tables and phi to every edge of g.
NeighborGraph score_graph(NeighborGraph g, const SparseBinaryMatrix& m);

/// Upper quantile of chi-squared with one degree of freedom:
/// returns q with P(X > q) = tail_prob. Solved through erfc, since
/// P(X > q) = erfc(sqrt(q / 2)).
double chi2_1_upper_quantile(double tail_prob);

/// Phi at which a single-table chi-squared test rejects independence at
/// level alpha after Bonferroni correction over m_comparisons tables of n.
double critical_phi(double alpha, long long m_comparisons, long long n);

}  // namespace coordnet
