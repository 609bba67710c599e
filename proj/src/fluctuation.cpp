#include "mvfractal/fluctuation.hpp"

#include "mvfractal/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mvf {

const char* to_string(Variant v) noexcept {
  switch (v) {
    case Variant::Univariate: return "uni";
    case Variant::EuclideanMMFDFA: return "mmfdfa";
    case Variant::MahalanobisFM: return "fm";
  }
  return "?";
}

const char* to_string(CovarianceMode m) noexcept {
  switch (m) {
    case CovarianceMode::Identity: return "identity";
    case CovarianceMode::DiagonalVariances: return "diag";
    case CovarianceMode::FullSample: return "full";
  }
  return "?";
}

const char* to_string(CovarianceScope s) noexcept {
  switch (s) {
    case CovarianceScope::GlobalDetrended: return "global";
    case CovarianceScope::PerScale: return "per-scale";
  }
  return "?";
}

Profile cumulative_profile(const MultichannelSeries& series) {
  const Eigen::MatrixXd& x = series.samples();
  Profile out;
  out.source_mean = x.colwise().mean();
  out.values.resize(x.rows(), x.cols());
  for (Index c = 0; c < x.cols(); ++c) {
    double acc = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      acc += x(i, c) - out.source_mean(c);
      out.values(i, c) = acc;
    }
  }
  return out;
}

std::vector<Index> segment_starts(Index length, Index scale, bool mirrored) {
  if (scale < 1) throw Error(ErrorKind::InvalidArgument, "scale must be positive");
  const Index count = length / scale;
  if (count < 1) {
    throw Error(ErrorKind::ScaleTooLarge, "scale " + std::to_string(scale) + " exceeds series length " +
                                              std::to_string(length));
  }
  std::vector<Index> starts;
  starts.reserve(static_cast<std::size_t>(mirrored ? 2 * count : count));
  for (Index u = 0; u < count; ++u) starts.push_back(u * scale);
  if (mirrored) {
    for (Index b = 0; b < count; ++b) starts.push_back(length - (b + 1) * scale);
  }
  return starts;
}

namespace {

// Orthonormal basis (scale x (order+1)) of polynomials up to `order`,
// evaluated on points mapped to [-1, 1].
Eigen::MatrixXd polynomial_basis(Index scale, int order) {
  const Index cols = order + 1;
  Eigen::MatrixXd vandermonde(scale, cols);
  const double half = 0.5 * static_cast<double>(scale - 1);
  for (Index i = 0; i < scale; ++i) {
    const double t = (static_cast<double>(i) - half) / half;
    double power = 1.0;
    for (Index k = 0; k < cols; ++k) {
      vandermonde(i, k) = power;
      power *= t;
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(vandermonde);
  return qr.householderQ() * Eigen::MatrixXd::Identity(scale, cols);
}

}  // namespace

Array3 segment_and_detrend(const Profile& profile, Index scale, const DetrendConfig& cfg) {
  if (cfg.order < 0) throw Error(ErrorKind::InvalidArgument, "detrend order must be >= 0");
  if (scale <= cfg.order + 1) {
    throw Error(ErrorKind::RankDeficientFit, "scale " + std::to_string(scale) + " cannot support a degree-" +
                                                 std::to_string(cfg.order) + " fit with nonzero residual");
  }
  const Eigen::MatrixXd& y = profile.values;
  const auto starts = segment_starts(y.rows(), scale, cfg.mirrored);
  const Eigen::MatrixXd basis = polynomial_basis(scale, cfg.order);

  Array3 out(static_cast<Index>(starts.size()), scale, y.cols());
  for (std::size_t u = 0; u < starts.size(); ++u) {
    const auto block = y.middleRows(starts[u], scale);
    const Eigen::MatrixXd residual = block - basis * (basis.transpose() * block);
    for (Index v = 0; v < scale; ++v)
      for (Index c = 0; c < y.cols(); ++c) out(static_cast<Index>(u), v, c) = residual(v, c);
  }
  return out;
}

SegmentedFluctuations segment_all(const Profile& profile, const ScaleGrid& scales, const DetrendConfig& cfg) {
  SegmentedFluctuations out;
  out.scale_grid = scales;
  out.per_scale.reserve(scales.size());
  for (Index s : scales.scales()) out.per_scale.push_back(segment_and_detrend(profile, s, cfg));
  return out;
}

std::vector<double> segment_energies(const Array3& residuals, const SpdMatrix* cov) {
  if (cov && cov->dim() != residuals.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "covariance is " + std::to_string(cov->dim()) + "x" +
                                                  std::to_string(cov->dim()) + " but residuals have " +
                                                  std::to_string(residuals.dim()) + " channels");
  }
  std::vector<double> energies(static_cast<std::size_t>(residuals.outer()));
  const double inv_len = 1.0 / static_cast<double>(residuals.inner());
  for (Index u = 0; u < residuals.outer(); ++u) {
    double acc = 0.0;
    for (Index v = 0; v < residuals.inner(); ++v) {
      const auto z = residuals.vec(u, v);
      if (cov) {
        acc += cov->squared_distance(z);
      } else {
        double d = 0.0;
        for (double x : z) d += x * x;
        acc += d;
      }
    }
    energies[static_cast<std::size_t>(u)] = acc * inv_len;
  }
  return energies;
}

double fluctuation_from_energies(std::span<const double> energies, double q) {
  if (energies.empty()) throw Error(ErrorKind::EmptyInput, "no segments");
  const double n = static_cast<double>(energies.size());
  if (q <= 0.0) {
    for (std::size_t u = 0; u < energies.size(); ++u) {
      if (energies[u] == 0.0) {
        throw Error(ErrorKind::DegenerateSegment, "segment with zero fluctuation at q <= 0",
                    static_cast<long long>(u));
      }
    }
  }
  if (q == 0.0) {
    double acc = 0.0;
    for (double e : energies) acc += std::log(e);
    return std::exp(0.5 * acc / n);
  }
  const double half_q = 0.5 * q;
  if (std::abs(half_q) > 50.0) {
    double hi = -std::numeric_limits<double>::infinity();
    for (double e : energies) hi = std::max(hi, half_q * std::log(e));
    if (!std::isfinite(hi)) return 0.0;
    double acc = 0.0;
    for (double e : energies) acc += std::exp(half_q * std::log(e) - hi);
    return std::exp((hi + std::log(acc / n)) / q);
  }
  double acc = 0.0;
  for (double e : energies) acc += std::pow(e, half_q);
  return std::pow(acc / n, 1.0 / q);
}

namespace {

FluctuationSurface build_surface(const SegmentedFluctuations& residuals, const QGrid& q_grid, Variant variant,
                                 const auto& covariance_for_scale) {
  FluctuationSurface out;
  out.variant = variant;
  out.q_grid = q_grid;
  out.scale_grid = residuals.scale_grid;
  out.values.resize(static_cast<Index>(q_grid.size()), static_cast<Index>(residuals.per_scale.size()));
  for (std::size_t k = 0; k < residuals.per_scale.size(); ++k) {
    const auto energies = segment_energies(residuals.per_scale[k], covariance_for_scale(k));
    for (std::size_t j = 0; j < q_grid.size(); ++j) {
      const double f = fluctuation_from_energies(energies, q_grid[j]);
      if (!(f > 0.0) || !std::isfinite(f)) {
        throw Error(ErrorKind::DegenerateSegment,
                    "fluctuation at scale " + std::to_string(residuals.scale_grid[k]) + " is not positive",
                    static_cast<long long>(k));
      }
      out.values(static_cast<Index>(j), static_cast<Index>(k)) = f;
    }
  }
  return out;
}

}  // namespace

FluctuationSurface fluctuation_univariate(const SegmentedFluctuations& residuals, const QGrid& q_grid) {
  for (const auto& r : residuals.per_scale) {
    if (r.dim() != 1) {
      throw Error(ErrorKind::MultichannelInput, "univariate analysis needs exactly one channel, got " +
                                                    std::to_string(r.dim()));
    }
  }
  return build_surface(residuals, q_grid, Variant::Univariate, [](std::size_t) -> const SpdMatrix* { return nullptr; });
}

SpdMatrix estimate_covariance(const Eigen::MatrixXd& samples, CovarianceMode mode) {
  const Index n = samples.rows();
  const Index m = samples.cols();
  if (m < 1) throw Error(ErrorKind::EmptyInput, "no channels");
  if (mode == CovarianceMode::Identity) return SpdMatrix::identity(m);

  const Index needed = mode == CovarianceMode::FullSample ? 4 * m : 2;
  if (n < needed) {
    throw Error(ErrorKind::InsufficientSamples,
                "need " + std::to_string(needed) + " residual vectors, have " + std::to_string(n));
  }
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  const double denom = static_cast<double>(n - 1);

  if (mode == CovarianceMode::DiagonalVariances) {
    const Eigen::VectorXd variances = centered.colwise().squaredNorm().transpose() / denom;
    return spd_factorize(variances.asDiagonal().toDenseMatrix(), 0.0);
  }

  Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
  cov = 0.5 * (cov + cov.transpose());
  constexpr std::array<double, 5> kShrinkageLadder{kDefaultShrinkage, 1e-4, 1e-2, 1e-1, 0.5};
  for (double shrinkage : kShrinkageLadder) {
    try {
      return spd_factorize(cov, shrinkage);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    }
  }
  throw Error(ErrorKind::NotPositiveDefinite, "sample covariance stays singular after shrinkage");
}

SpdMatrix estimate_covariance(const Array3& residuals, CovarianceMode mode) {
  Eigen::MatrixXd samples(residuals.outer() * residuals.inner(), residuals.dim());
  Index row = 0;
  for (Index u = 0; u < residuals.outer(); ++u)
    for (Index v = 0; v < residuals.inner(); ++v, ++row)
      for (Index c = 0; c < residuals.dim(); ++c) samples(row, c) = residuals(u, v, c);
  return estimate_covariance(samples, mode);
}

FluctuationSurface fluctuation_fm(const SegmentedFluctuations& residuals, const SpdMatrix& cov, const QGrid& q_grid) {
  auto out = build_surface(residuals, q_grid, Variant::MahalanobisFM,
                           [&cov](std::size_t) -> const SpdMatrix* { return &cov; });
  out.covariance_used = cov;
  return out;
}

FluctuationSurface fluctuation_fm(const SegmentedFluctuations& residuals, std::span<const SpdMatrix> per_scale,
                                  const QGrid& q_grid) {
  if (per_scale.size() != residuals.per_scale.size()) {
    throw Error(ErrorKind::DimensionMismatch, "need one covariance per scale");
  }
  auto out = build_surface(residuals, q_grid, Variant::MahalanobisFM,
                           [per_scale](std::size_t k) -> const SpdMatrix* { return &per_scale[k]; });
  out.per_scale_covariance.assign(per_scale.begin(), per_scale.end());
  return out;
}

FluctuationSurface fluctuation_mmfdfa(const SegmentedFluctuations& residuals, const QGrid& q_grid) {
  if (residuals.per_scale.empty()) throw Error(ErrorKind::EmptyInput, "no scales");
  auto out = fluctuation_fm(residuals, SpdMatrix::identity(residuals.per_scale.front().dim()), q_grid);
  out.variant = Variant::EuclideanMMFDFA;
  out.covariance_used.reset();
  return out;
}

FluctuationSurface analyze_fluctuations(const MultichannelSeries& series, Variant variant, const ScaleGrid& scales,
                                        const QGrid& q_grid, const DetrendConfig& detrend,
                                        const CovarianceEstimator& estimator) {
  const Profile profile = cumulative_profile(series);
  const SegmentedFluctuations residuals = segment_all(profile, scales, detrend);
  switch (variant) {
    case Variant::Univariate: return fluctuation_univariate(residuals, q_grid);
    case Variant::EuclideanMMFDFA: return fluctuation_mmfdfa(residuals, q_grid);
    case Variant::MahalanobisFM: break;
  }
  if (estimator.scope == CovarianceScope::GlobalDetrended) {
    const SpdMatrix cov = estimate_covariance(residuals.per_scale.front(), estimator.mode);
    return fluctuation_fm(residuals, cov, q_grid);
  }
  std::vector<SpdMatrix> per_scale;
  per_scale.reserve(residuals.per_scale.size());
  for (const auto& r : residuals.per_scale) per_scale.push_back(estimate_covariance(r, estimator.mode));
  return fluctuation_fm(residuals, per_scale, q_grid);
}

}  // namespace mvf
