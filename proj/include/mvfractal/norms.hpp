#pragma once

#include "mvfractal/signal.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace mvf {

/// Exponents of the mixed matrix norms. `p` applies within a row (or across
/// the V vectors of one outer slice), `q` across rows, `r` inside each
/// vector for the three-level norm.
struct NormOrder {
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
  bool p_infinite = false;  ///< inner aggregation is a maximum

  /// The norm axioms are only guaranteed for p >= 1 and q >= 1.
  bool is_true_norm() const noexcept { return (p_infinite || p >= 1.0) && q >= 1.0; }
};

/// Dense U x V x M array of M-dimensional vectors. The vector index is
/// contiguous, so `vec(u, v)` is a view of one observation.
class Array3 {
 public:
  Array3() = default;
  Array3(Index outer, Index inner, Index dim);

  Index outer() const noexcept { return outer_; }
  Index inner() const noexcept { return inner_; }
  Index dim() const noexcept { return dim_; }

  double& operator()(Index u, Index v, Index m) { return data_[offset(u, v) + static_cast<std::size_t>(m)]; }
  double operator()(Index u, Index v, Index m) const { return data_[offset(u, v) + static_cast<std::size_t>(m)]; }

  std::span<double> vec(Index u, Index v) { return {data_.data() + offset(u, v), static_cast<std::size_t>(dim_)}; }
  std::span<const double> vec(Index u, Index v) const {
    return {data_.data() + offset(u, v), static_cast<std::size_t>(dim_)};
  }

  /// V x M row-major view of outer slice `u`.
  using SliceMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
  SliceMap slice(Index u) const { return SliceMap(data_.data() + offset(u, 0), inner_, dim_); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Array3 scaled(double k) const;
  Array3 operator+(const Array3& other) const;

 private:
  std::size_t offset(Index u, Index v) const {
    return (static_cast<std::size_t>(u) * static_cast<std::size_t>(inner_) + static_cast<std::size_t>(v)) *
           static_cast<std::size_t>(dim_);
  }

  Index outer_ = 0;
  Index inner_ = 0;
  Index dim_ = 0;
  std::vector<double> data_;
};

/// Symmetric positive-definite matrix with its spectral factorization
/// Sigma = Q^T diag(lambda) Q (rows of Q are eigenvectors).
///
/// `factor()` is S = diag(sqrt(lambda)) Q with S^T S = Sigma. `whitener()` is
/// W = diag(1/sqrt(lambda)) Q with W^T W = Sigma^{-1}, so that
/// |W z|^2 = z^T Sigma^{-1} z without ever forming the inverse.
class SpdMatrix {
 public:
  /// Exact identity: factor and whitener are I with no eigensolve.
  static SpdMatrix identity(Index dim);

  const Eigen::MatrixXd& sigma() const noexcept { return sigma_; }
  const Eigen::MatrixXd& factor() const noexcept { return factor_; }
  const Eigen::MatrixXd& whitener() const noexcept { return whitener_; }
  const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return eigenvectors_; }
  double shrinkage() const noexcept { return shrinkage_; }
  bool is_identity() const noexcept { return identity_; }
  Index dim() const noexcept { return sigma_.rows(); }

  /// z^T Sigma^{-1} z evaluated as |W z|^2.
  double squared_distance(std::span<const double> z) const;

 private:
  friend SpdMatrix spd_factorize(const Eigen::MatrixXd& sigma, double shrinkage);
  SpdMatrix() = default;

  Eigen::MatrixXd sigma_;
  Eigen::MatrixXd factor_;
  Eigen::MatrixXd whitener_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd eigenvectors_;
  double shrinkage_ = 0.0;
  bool identity_ = false;
};

inline constexpr double kDefaultShrinkage = 1e-6;

/// Eigendecomposition and whitening of `sigma` after shrinking toward
/// tr(Sigma)/M * I by `shrinkage`. Throws NotSymmetric when the input is
/// asymmetric beyond 1e-12 relative and NotPositiveDefinite (carrying the
/// smallest eigenvalue in the message) instead of repairing an indefinite or
/// numerically singular matrix.
SpdMatrix spd_factorize(const Eigen::MatrixXd& sigma, double shrinkage = 0.0);

/// (sum_i (sum_j |z_ij|^p)^(q/p))^(1/q); rows are the outer index.
double lpq_norm(const Eigen::MatrixXd& z, const NormOrder& order);

/// Three-level norm: |.|^r over the vector index, then p over the inner
/// index, then q over the outer index.
double lpqr_norm(const Array3& z, const NormOrder& order);

/// lpq norm of the Euclidean lengths of the vectors.
double lpq_euclid_norm(const Array3& z, const NormOrder& order);

/// lpq norm of the Mahalanobis lengths sqrt(z^T Sigma^{-1} z), computed on
/// whitened vectors.
double mahalanobis_lpq_norm(const Array3& z, const SpdMatrix& cov, const NormOrder& order);

/// Aggregates a U x V table of nonnegative magnitudes with the (p, q) rule
/// shared by every norm above. Switches to log-domain sums when |q/p|, |p| or
/// |q| exceeds 50.
double aggregate_pq(const Eigen::MatrixXd& magnitudes, const NormOrder& order);

}  // namespace mvf
