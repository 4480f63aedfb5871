#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coordnet/common.hpp"
#include "coordnet/parallel.hpp"
#include "coordnet/sparse.hpp"

namespace coordnet {

/// The binarized incidence matrix minus its independence-model expectation,
///   delta(u, t) = obs(u, t) - n_user(u) * n_tweet(t) / n_total,
/// available only through products; delta itself is never formed.
template <typename Scalar>
class CenteredOperator {
 public:
  explicit CenteredOperator(SparseBinaryMatrix base) : base_(std::move(base)) {
    row_totals_.resize(base_.rows());
    col_totals_.resize(base_.cols());
    for (Index r = 0; r < base_.rows(); ++r) row_totals_[r] = Scalar(base_.row_support(r));
    for (Index c = 0; c < base_.cols(); ++c) col_totals_[c] = Scalar(base_.col_support(c));
    grand_total_ = Scalar(base_.nonzeros());
    if (base_.nonzeros() == 0) throw DataError("centering an empty matrix");
  }

  Eigen::Index rows() const { return static_cast<Eigen::Index>(base_.rows()); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(base_.cols()); }
  const SparseBinaryMatrix& base() const { return base_; }
  const VectorX<Scalar>& row_totals() const { return row_totals_; }
  const VectorX<Scalar>& col_totals() const { return col_totals_; }
  Scalar grand_total() const { return grand_total_; }

  /// delta * x, x indexed by tweet.
  VectorX<Scalar> apply(const Eigen::Ref<const VectorX<Scalar>>& x) const {
    if (x.size() != cols())
      throw DataError("centered product: expected length " + std::to_string(cols()) + ", got " +
                      std::to_string(x.size()));
    const Scalar shift = col_totals_.dot(x) / grand_total_;
    VectorX<Scalar> y(rows());
    parallel_for(base_.rows(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t r = begin; r < end; ++r) {
        Scalar acc(0);
        for (Index c : base_.row(static_cast<Index>(r))) acc += x[c];
        y[r] = acc - shift * row_totals_[r];
      }
    }, 256);
    return y;
  }

  /// delta^T * y, y indexed by user.
  VectorX<Scalar> apply_transpose(const Eigen::Ref<const VectorX<Scalar>>& y) const {
    if (y.size() != rows())
      throw DataError("centered transpose product: expected length " + std::to_string(rows()) + ", got " +
                      std::to_string(y.size()));
    const Scalar shift = row_totals_.dot(y) / grand_total_;
    VectorX<Scalar> x(cols());
    parallel_for(base_.cols(), [&](std::size_t begin, std::size_t end) {
      for (std::size_t c = begin; c < end; ++c) {
        Scalar acc(0);
        for (Index r : base_.col(static_cast<Index>(c))) acc += y[r];
        x[c] = acc - shift * col_totals_[c];
      }
    }, 256);
    return x;
  }

  MatrixX<Scalar> to_dense() const {
    MatrixX<Scalar> d = base_.to_dense<Scalar>();
    d.noalias() -= row_totals_ * col_totals_.transpose() / grand_total_;
    return d;
  }

 private:
  SparseBinaryMatrix base_;
  VectorX<Scalar> row_totals_;
  VectorX<Scalar> col_totals_;
  Scalar grand_total_{0};
};

template <typename Scalar, typename Derived>
VectorX<Scalar> centered_matvec(const CenteredOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& x) {
  return op.apply(x.template cast<Scalar>());
}

template <typename Scalar, typename Derived>
VectorX<Scalar> centered_matvec_transpose(const CenteredOperator<Scalar>& op, const Eigen::MatrixBase<Derived>& y) {
  return op.apply_transpose(y.template cast<Scalar>());
}

enum class ScoreScaling {
  singular_value,  // principal coordinates: U * diag(sigma)
  none             // raw singular vectors
};

struct SvdOptions {
  int rank = 3;
  std::uint64_t seed = 0;
  double tol = 1e-8;        // residual norm relative to the largest singular value
  int max_iterations = 1000;  // restarts
  int basis_size = 0;       // Krylov basis; 0 picks max(2 * rank + 10, rank + 20)
  ScoreScaling scaling = ScoreScaling::singular_value;
};

template <typename Scalar>
struct LatentSpace {
  VectorX<Scalar> singular_values;  // descending
  MatrixX<Scalar> left_vectors;     // users x rank, orthonormal columns
  MatrixX<Scalar> right_vectors;    // tweets x rank, orthonormal columns
  MatrixX<Scalar> user_scores;
  MatrixX<Scalar> tweet_loadings;
  VectorX<Scalar> residuals;  // ||delta^T u_i - sigma_i v_i|| at exit
  int iterations = 0;
  int matvecs = 0;

  int rank() const { return static_cast<int>(singular_values.size()); }
};

namespace detail {

template <typename Scalar>
void orthogonalize(Eigen::Ref<VectorX<Scalar>> w, const Eigen::Ref<const MatrixX<Scalar>>& basis,
                   VectorX<Scalar>* coeffs = nullptr) {
  if (basis.cols() == 0) {
    if (coeffs) coeffs->resize(0);
    return;
  }
  VectorX<Scalar> h = basis.transpose() * w;
  w.noalias() -= basis * h;
  const VectorX<Scalar> h2 = basis.transpose() * w;
  w.noalias() -= basis * h2;
  if (coeffs) *coeffs = h + h2;
}

template <typename Scalar, typename Rng>
VectorX<Scalar> random_unit(Eigen::Index n, const Eigen::Ref<const MatrixX<Scalar>>& basis, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int attempt = 0; attempt < 8; ++attempt) {
    VectorX<Scalar> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = Scalar(normal(rng));
    orthogonalize<Scalar>(v, basis);
    const Scalar nv = v.norm();
    if (nv > Scalar(1e-3)) return v / nv;
  }
  return VectorX<Scalar>();
}

// Flips each singular pair so the largest-magnitude entry of the left vector
// is positive (first such entry on ties).
template <typename Scalar>
void fix_signs(MatrixX<Scalar>& left, MatrixX<Scalar>& right) {
  for (Eigen::Index j = 0; j < left.cols(); ++j) {
    Eigen::Index arg = 0;
    Scalar best(-1);
    for (Eigen::Index i = 0; i < left.rows(); ++i)
      if (std::abs(left(i, j)) > best) {
        best = std::abs(left(i, j));
        arg = i;
      }
    if (left.rows() > 0 && left(arg, j) < Scalar(0)) {
      left.col(j) *= Scalar(-1);
      right.col(j) *= Scalar(-1);
    }
  }
}

}  // namespace detail

/// Top singular triplets of the centered operator by restarted Golub-Kahan
/// bidiagonalization with full reorthogonalization (thick restart keeps the
/// leading Ritz vectors). Only operator products touch the data. The sweep is
/// run on delta or delta^T, whichever has fewer columns, so the basis can grow
/// to the full column space and terminate exactly on small problems.
template <typename Scalar>
LatentSpace<Scalar> truncated_svd(const CenteredOperator<Scalar>& op, const SvdOptions& opt = {}) {
  const Eigen::Index min_dim = std::min(op.rows(), op.cols());
  if (opt.rank < 1 || opt.rank > min_dim)
    throw ConfigError("latent rank " + std::to_string(opt.rank) + " must lie in [1, " + std::to_string(min_dim) +
                      "]");
  if (!(opt.tol > 0)) throw ConfigError("SVD tolerance must be positive");
  if (opt.max_iterations < 1) throw ConfigError("SVD iteration cap must be positive");

  const bool transposed = op.rows() < op.cols();
  const Eigen::Index n_left = transposed ? op.cols() : op.rows();
  const Eigen::Index n_right = min_dim;
  auto forward = [&](const VectorX<Scalar>& v) { return transposed ? op.apply_transpose(v) : op.apply(v); };
  auto backward = [&](const VectorX<Scalar>& u) { return transposed ? op.apply(u) : op.apply_transpose(u); };

  const Eigen::Index rank = opt.rank;
  const Eigen::Index wanted_basis = opt.basis_size > 0 ? opt.basis_size : std::max(2 * rank + 10, rank + 20);
  const Eigen::Index kmax = std::min<Eigen::Index>(std::max(wanted_basis, rank + 1), n_right);
  const Eigen::Index keep = std::min<Eigen::Index>(rank + (kmax - rank) / 2, kmax - 1);

  std::mt19937_64 rng(opt.seed);
  MatrixX<Scalar> V = MatrixX<Scalar>::Zero(n_right, kmax);
  MatrixX<Scalar> U = MatrixX<Scalar>::Zero(n_left, kmax);
  MatrixX<Scalar> B = MatrixX<Scalar>::Zero(kmax, kmax);
  VectorX<Scalar> r = detail::random_unit<Scalar>(n_right, MatrixX<Scalar>(n_right, 0), rng);

  LatentSpace<Scalar> out;
  Eigen::Index j = 0;
  Scalar scale(0);
  const Scalar tiny = std::numeric_limits<Scalar>::epsilon() * Scalar(64);
  MatrixX<Scalar> X, Y;
  VectorX<Scalar> sigma, resid(rank);

  for (int iter = 1;; ++iter) {
    while (j < kmax) {
      detail::orthogonalize<Scalar>(r, V.leftCols(j));
      Scalar beta = r.norm();
      if (beta <= tiny * std::max(scale, Scalar(1))) {
        r = detail::random_unit<Scalar>(n_right, V.leftCols(j), rng);
        if (r.size() == 0) break;
        beta = Scalar(1);
      }
      V.col(j) = r / beta;

      VectorX<Scalar> w = forward(V.col(j));
      ++out.matvecs;
      VectorX<Scalar> h;
      detail::orthogonalize<Scalar>(w, U.leftCols(j), &h);
      if (j > 0) B.col(j).head(j) = h;
      const Scalar alpha = w.norm();
      scale = std::max(scale, alpha);
      if (alpha <= tiny * std::max(scale, Scalar(1))) {
        VectorX<Scalar> u = detail::random_unit<Scalar>(n_left, U.leftCols(j), rng);
        U.col(j) = u;
        B(j, j) = Scalar(0);
      } else {
        U.col(j) = w / alpha;
        B(j, j) = alpha;
      }
      r = backward(U.col(j));
      ++out.matvecs;
      ++j;
    }

    Eigen::JacobiSVD<MatrixX<Scalar>> svd(B.topLeftCorner(j, j), Eigen::ComputeFullU | Eigen::ComputeFullV);
    X = svd.matrixU();
    Y = svd.matrixV();
    sigma = svd.singularValues();
    scale = std::max(scale, sigma.size() > 0 ? sigma[0] : Scalar(0));

    detail::orthogonalize<Scalar>(r, V.leftCols(j));
    const Scalar rnorm = r.norm();
    const bool full_space = j == n_right;
    bool converged = j >= rank;
    for (Eigen::Index i = 0; i < rank && i < j; ++i) {
      resid[i] = full_space ? Scalar(0) : rnorm * std::abs(X(j - 1, i));
      converged = converged && resid[i] <= Scalar(opt.tol) * std::max(scale, tiny);
    }
    out.iterations = iter;
    if (converged || full_space) break;
    if (iter >= opt.max_iterations) {
      std::ostringstream msg;
      msg << "truncated SVD did not converge in " << opt.max_iterations << " restarts; residuals:";
      for (Eigen::Index i = 0; i < rank; ++i) msg << ' ' << resid[i];
      throw ConvergenceError(msg.str());
    }

    // Thick restart on the leading Ritz vectors; r stays the residual direction.
    const MatrixX<Scalar> Vk = V.leftCols(j) * Y.leftCols(keep);
    const MatrixX<Scalar> Uk = U.leftCols(j) * X.leftCols(keep);
    V.leftCols(keep) = Vk;
    U.leftCols(keep) = Uk;
    B.setZero();
    for (Eigen::Index i = 0; i < keep; ++i) B(i, i) = sigma[i];
    j = keep;
  }

  MatrixX<Scalar> left = U.leftCols(j) * X.leftCols(rank);
  MatrixX<Scalar> right = V.leftCols(j) * Y.leftCols(rank);
  if (transposed) std::swap(left, right);
  detail::fix_signs(left, right);

  out.singular_values = sigma.head(rank);
  out.residuals = resid;
  out.left_vectors = std::move(left);
  out.right_vectors = std::move(right);
  if (opt.scaling == ScoreScaling::singular_value) {
    out.user_scores = out.left_vectors * out.singular_values.asDiagonal();
    out.tweet_loadings = out.right_vectors * out.singular_values.asDiagonal();
  } else {
    out.user_scores = out.left_vectors;
    out.tweet_loadings = out.right_vectors;
  }
  return out;
}

struct ScreeRow {
  int dimension = 0;  // 1-based
  double singular_value = 0.0;
  double variance_fraction = 0.0;
};

template <typename Scalar>
std::vector<ScreeRow> scree(const LatentSpace<Scalar>& ls) {
  const double total = static_cast<double>(ls.singular_values.squaredNorm());
  std::vector<ScreeRow> rows;
  for (Eigen::Index i = 0; i < ls.singular_values.size(); ++i) {
    const double s = static_cast<double>(ls.singular_values[i]);
    rows.push_back({static_cast<int>(i + 1), s, total > 0 ? s * s / total : 0.0});
  }
  return rows;
}

template <typename Scalar>
struct NormalizedRows {
  MatrixX<Scalar> rows;
  std::vector<Index> zero_rows;  // left as zeros
};

template <typename Derived>
NormalizedRows<typename Derived::Scalar> l2_normalize_rows(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  NormalizedRows<Scalar> out{scores, {}};
  for (Eigen::Index i = 0; i < out.rows.rows(); ++i) {
    const Scalar n = out.rows.row(i).norm();
    if (n > Scalar(0))
      out.rows.row(i) /= n;
    else
      out.zero_rows.push_back(static_cast<Index>(i));
  }
  return out;
}

}  // namespace coordnet
