#include "mvfractal/norms.hpp"

#include "mvfractal/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvf {

Array3::Array3(Index outer, Index inner, Index dim)
    : outer_(outer), inner_(inner), dim_(dim),
      data_(static_cast<std::size_t>(outer * inner * dim), 0.0) {
  if (outer < 0 || inner < 0 || dim < 0) throw Error(ErrorKind::InvalidArgument, "negative array extent");
}

Array3 Array3::scaled(double k) const {
  Array3 out = *this;
  for (double& v : out.data_) v *= k;
  return out;
}

Array3 Array3::operator+(const Array3& other) const {
  if (outer_ != other.outer_ || inner_ != other.inner_ || dim_ != other.dim_) {
    throw Error(ErrorKind::DimensionMismatch, "array extents differ");
  }
  Array3 out = *this;
  for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += other.data_[i];
  return out;
}

SpdMatrix SpdMatrix::identity(Index dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  SpdMatrix out;
  out.sigma_ = Eigen::MatrixXd::Identity(dim, dim);
  out.factor_ = out.sigma_;
  out.whitener_ = out.sigma_;
  out.eigenvalues_ = Eigen::VectorXd::Ones(dim);
  out.eigenvectors_ = out.sigma_;
  out.identity_ = true;
  return out;
}

double SpdMatrix::squared_distance(std::span<const double> z) const {
  const Index m = dim();
  if (static_cast<Index>(z.size()) != m) throw Error(ErrorKind::DimensionMismatch, "vector length differs from covariance");
  double acc = 0.0;
  if (identity_) {
    for (double v : z) acc += v * v;
    return acc;
  }
  for (Index r = 0; r < m; ++r) {
    double w = 0.0;
    for (Index c = 0; c < m; ++c) w += whitener_(r, c) * z[static_cast<std::size_t>(c)];
    acc += w * w;
  }
  return acc;
}

SpdMatrix spd_factorize(const Eigen::MatrixXd& sigma, double shrinkage) {
  if (sigma.rows() == 0 || sigma.rows() != sigma.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance must be square and non-empty");
  }
  if (!sigma.allFinite()) throw Error(ErrorKind::NonFinite, "covariance has non-finite entries");
  if (!(shrinkage >= 0.0 && shrinkage < 1.0)) throw Error(ErrorKind::InvalidArgument, "shrinkage must lie in [0, 1)");

  const double max_abs = sigma.cwiseAbs().maxCoeff();
  const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * max_abs) {
    throw Error(ErrorKind::NotSymmetric, "covariance asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }

  const Index m = sigma.rows();
  Eigen::MatrixXd shrunk = 0.5 * (sigma + sigma.transpose());
  if (shrinkage > 0.0) {
    const double mean_var = shrunk.trace() / static_cast<double>(m);
    shrunk *= (1.0 - shrinkage);
    shrunk.diagonal().array() += shrinkage * mean_var;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(shrunk);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NotPositiveDefinite, "eigensolver failed");
  const Eigen::VectorXd& lambda = solver.eigenvalues();  // ascending
  const double lambda_min = lambda(0);
  const double lambda_max = lambda(m - 1);
  // Numerically singular counts as not positive definite.
  const double floor = 10.0 * static_cast<double>(m) * std::numeric_limits<double>::epsilon() * std::abs(lambda_max);
  if (!(lambda_min > 0.0) || lambda_min <= floor) {
    throw Error(ErrorKind::NotPositiveDefinite, "smallest eigenvalue " + std::to_string(lambda_min));
  }

  SpdMatrix out;
  out.sigma_ = shrunk;
  out.eigenvalues_ = lambda;
  out.eigenvectors_ = solver.eigenvectors().transpose();
  out.factor_ = lambda.cwiseSqrt().asDiagonal() * out.eigenvectors_;
  out.whitener_ = lambda.cwiseSqrt().cwiseInverse().asDiagonal() * out.eigenvectors_;
  out.shrinkage_ = shrinkage;
  return out;
}

namespace {

double log_sum_exp(std::span<const double> logs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : logs) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double v : logs) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

void check_order(const NormOrder& order) {
  if (order.q == 0.0) throw Error(ErrorKind::ZeroDivision, "q = 0 has no power-sum form; use the logarithmic mean");
  if (!order.p_infinite && order.p == 0.0) throw Error(ErrorKind::ZeroDivision, "p must be nonzero");
  if (!std::isfinite(order.q) || (!order.p_infinite && !std::isfinite(order.p))) {
    throw Error(ErrorKind::NonFinite, "norm exponents must be finite");
  }
}

}  // namespace

double aggregate_pq(const Eigen::MatrixXd& magnitudes, const NormOrder& order) {
  check_order(order);
  if (!magnitudes.allFinite()) throw Error(ErrorKind::NonFinite, "norm input has non-finite entries");
  const double p = order.p;
  const double q = order.q;
  const Index rows = magnitudes.rows();
  const Index cols = magnitudes.cols();
  const bool use_logs = !order.p_infinite && (std::abs(q / p) > 50.0 || std::abs(p) > 50.0 || std::abs(q) > 50.0);

  // log of each row's inner aggregate (sum_v m^p)^(1/p)
  std::vector<double> row_log(static_cast<std::size_t>(rows));
  std::vector<double> scratch(static_cast<std::size_t>(cols));
  for (Index u = 0; u < rows; ++u) {
    double inner_log;
    if (order.p_infinite) {
      inner_log = std::log(magnitudes.row(u).maxCoeff());
    } else {
      for (Index v = 0; v < cols; ++v) {
        const double m = magnitudes(u, v);
        if (m == 0.0 && p < 0.0) throw Error(ErrorKind::DegenerateSegment, "zero entry with negative p", u);
        scratch[static_cast<std::size_t>(v)] = p * std::log(m);
      }
      inner_log = log_sum_exp(scratch) / p;
    }
    if (!std::isfinite(inner_log) && q < 0.0) {
      throw Error(ErrorKind::DegenerateSegment, "zero row summary with negative q", u);
    }
    row_log[static_cast<std::size_t>(u)] = inner_log;
  }

  if (use_logs || order.p_infinite) {
    for (double& v : row_log) v *= q;
    const double total = log_sum_exp(row_log);
    return std::exp(total / q);
  }

  // Direct power sums; the log pass above only served the zero checks.
  double total = 0.0;
  for (Index u = 0; u < rows; ++u) {
    double inner = 0.0;
    for (Index v = 0; v < cols; ++v) {
      const double m = magnitudes(u, v);
      if (m != 0.0) inner += std::pow(m, p);
    }
    if (inner != 0.0) total += std::pow(inner, q / p);
  }
  return std::pow(total, 1.0 / q);
}

double lpq_norm(const Eigen::MatrixXd& z, const NormOrder& order) { return aggregate_pq(z.cwiseAbs(), order); }

double lpqr_norm(const Array3& z, const NormOrder& order) {
  if (order.r < 1.0 || !std::isfinite(order.r)) throw Error(ErrorKind::InvalidArgument, "r must be >= 1");
  Eigen::MatrixXd mags(z.outer(), z.inner());
  for (Index u = 0; u < z.outer(); ++u) {
    for (Index v = 0; v < z.inner(); ++v) {
      double acc = 0.0;
      for (double x : z.vec(u, v)) acc += std::pow(std::abs(x), order.r);
      mags(u, v) = std::pow(acc, 1.0 / order.r);
    }
  }
  return aggregate_pq(mags, order);
}

double lpq_euclid_norm(const Array3& z, const NormOrder& order) {
  Eigen::MatrixXd mags(z.outer(), z.inner());
  for (Index u = 0; u < z.outer(); ++u) {
    for (Index v = 0; v < z.inner(); ++v) {
      double acc = 0.0;
      for (double x : z.vec(u, v)) acc += x * x;
      mags(u, v) = std::sqrt(acc);
    }
  }
  return aggregate_pq(mags, order);
}

double mahalanobis_lpq_norm(const Array3& z, const SpdMatrix& cov, const NormOrder& order) {
  if (cov.dim() != z.dim()) throw Error(ErrorKind::DimensionMismatch, "covariance dimension differs from vector length");
  Eigen::MatrixXd mags(z.outer(), z.inner());
  for (Index u = 0; u < z.outer(); ++u)
    for (Index v = 0; v < z.inner(); ++v) mags(u, v) = std::sqrt(cov.squared_distance(z.vec(u, v)));
  return aggregate_pq(mags, order);
}

}  // namespace mvf
