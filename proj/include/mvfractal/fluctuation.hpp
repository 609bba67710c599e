#pragma once

#include "mvfractal/norms.hpp"
#include "mvfractal/signal.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mvf {

struct DetrendConfig {
  int order = 2;          ///< polynomial degree fitted per segment
  bool mirrored = true;   ///< also segment from the end of the series
};

enum class Variant { Univariate, EuclideanMMFDFA, MahalanobisFM };

const char* to_string(Variant v) noexcept;

/// Detrended residuals for every scale of a grid. `per_scale[k]` is a
/// (segments x scale x M) array: forward segments first, then the
/// backward block when mirrored.
struct SegmentedFluctuations {
  ScaleGrid scale_grid;
  std::vector<Array3> per_scale;
};

/// F_q(s) over a (q, s) grid; rows follow the q grid, columns the scales.
struct FluctuationSurface {
  Variant variant = Variant::MahalanobisFM;
  Eigen::MatrixXd values;
  QGrid q_grid;
  ScaleGrid scale_grid;
  std::optional<SpdMatrix> covariance_used;       ///< single covariance for every scale
  std::vector<SpdMatrix> per_scale_covariance;    ///< filled for per-scale estimation
};

enum class CovarianceMode { Identity, DiagonalVariances, FullSample };
enum class CovarianceScope { GlobalDetrended, PerScale };

/// How the covariance of the Mahalanobis variant is obtained. Global scope
/// pools the residuals at the smallest scale and uses one matrix for all
/// scales; per-scale scope estimates one matrix per scale.
struct CovarianceEstimator {
  CovarianceMode mode = CovarianceMode::FullSample;
  CovarianceScope scope = CovarianceScope::GlobalDetrended;
};

const char* to_string(CovarianceMode m) noexcept;
const char* to_string(CovarianceScope s) noexcept;

/// y_i = sum_{j<=i} (x_j - mean(x)) per channel.
Profile cumulative_profile(const MultichannelSeries& series);

/// First sample index of each segment: forward windows from 0, then (when
/// mirrored) backward windows ending at N, the last window first.
std::vector<Index> segment_starts(Index length, Index scale, bool mirrored);

/// Cuts the profile into windows of length `scale` and subtracts a
/// least-squares polynomial of degree `cfg.order` from each channel of each
/// window. Requires order + 2 <= scale <= N.
Array3 segment_and_detrend(const Profile& profile, Index scale, const DetrendConfig& cfg);

SegmentedFluctuations segment_all(const Profile& profile, const ScaleGrid& scales, const DetrendConfig& cfg);

/// Mean squared length of the residual vectors in each segment:
/// E_u = (1/s) sum_v z^T Sigma^{-1} z. With no covariance the plain
/// Euclidean energy is used.
std::vector<double> segment_energies(const Array3& residuals, const SpdMatrix* cov = nullptr);

/// Power mean of segment energies: ((1/n) sum E^(q/2))^(1/q), and
/// exp((1/2n) sum ln E) at q = 0. Zero energies with q <= 0 raise
/// DegenerateSegment.
double fluctuation_from_energies(std::span<const double> energies, double q);

/// Single-channel MFDFA fluctuation function.
FluctuationSurface fluctuation_univariate(const SegmentedFluctuations& residuals, const QGrid& q_grid);

/// Covariance of pooled residual vectors (or of the rows of a sample
/// matrix). FullSample escalates shrinkage from 1e-6 until the
/// factorization succeeds.
SpdMatrix estimate_covariance(const Array3& residuals, CovarianceMode mode);
SpdMatrix estimate_covariance(const Eigen::MatrixXd& samples, CovarianceMode mode);

/// Mahalanobis-weighted fluctuation function using one covariance for all
/// scales.
FluctuationSurface fluctuation_fm(const SegmentedFluctuations& residuals, const SpdMatrix& cov, const QGrid& q_grid);

/// Same, with one covariance per scale.
FluctuationSurface fluctuation_fm(const SegmentedFluctuations& residuals, std::span<const SpdMatrix> per_scale,
                                  const QGrid& q_grid);

/// Euclidean multichannel baseline; identical to fluctuation_fm with the
/// identity covariance.
FluctuationSurface fluctuation_mmfdfa(const SegmentedFluctuations& residuals, const QGrid& q_grid);

/// Profile, detrending, covariance estimation and the chosen variant in one
/// call.
FluctuationSurface analyze_fluctuations(const MultichannelSeries& series, Variant variant, const ScaleGrid& scales,
                                        const QGrid& q_grid, const DetrendConfig& detrend = {},
                                        const CovarianceEstimator& estimator = {});

}  // namespace mvf
