#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace mvf {

using Index = Eigen::Index;

/// N x M multichannel record. Rows are time samples, columns are channels.
///
/// Instances are always valid: the constructor rejects empty input, a
/// non-positive rate, non-finite samples and a label list of the wrong size.
/// Samples are stored verbatim; nothing is repaired or resampled.
class MultichannelSeries {
 public:
  MultichannelSeries(Eigen::MatrixXd samples, double sample_rate_hz,
                     std::vector<std::string> channel_labels = {});

  const Eigen::MatrixXd& samples() const noexcept { return samples_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::vector<std::string>& channel_labels() const noexcept { return labels_; }

  Index length() const noexcept { return samples_.rows(); }
  Index channels() const noexcept { return samples_.cols(); }

 private:
  Eigen::MatrixXd samples_;
  double sample_rate_hz_;
  std::vector<std::string> labels_;
};

/// Validates `raw` and wraps it. Labels default to ch0..ch{M-1}.
MultichannelSeries validate_series(const Eigen::MatrixXd& raw, double sample_rate_hz,
                                   std::vector<std::string> channel_labels = {});

std::vector<std::string> default_channel_labels(Index channels);

/// Cumulative profile of a mean-removed series (one column per channel).
struct Profile {
  Eigen::MatrixXd values;
  Eigen::RowVectorXd source_mean;
};

/// Strictly increasing window lengths used for segmentation. Every scale
/// leaves at least four full windows in the series it was built for.
class ScaleGrid {
 public:
  ScaleGrid() = default;

  /// Validates an explicit list of scales against a series length and
  /// polynomial detrending order.
  static ScaleGrid from_scales(std::vector<Index> scales, Index series_length, int detrend_order);

  /// `count` logarithmically spaced integer scales in [min_scale, max_scale],
  /// rounded and deduplicated.
  static ScaleGrid log_spaced(Index min_scale, Index max_scale, int count, Index series_length,
                              int detrend_order);

  /// 20 log-spaced scales in [16, floor(N/4)].
  static ScaleGrid default_for(Index series_length, int detrend_order);

  const std::vector<Index>& scales() const noexcept { return scales_; }
  std::size_t size() const noexcept { return scales_.size(); }
  Index operator[](std::size_t i) const { return scales_[i]; }

 private:
  explicit ScaleGrid(std::vector<Index> scales) : scales_(std::move(scales)) {}
  std::vector<Index> scales_;
};

/// Strictly increasing moment orders. Always contains q = 2.
class QGrid {
 public:
  /// -5 to 5 in steps of 0.5.
  QGrid();
  explicit QGrid(std::vector<double> q_values);

  static QGrid range(double q_min, double q_max, double step);

  const std::vector<double>& values() const noexcept { return q_; }
  std::size_t size() const noexcept { return q_.size(); }
  double operator[](std::size_t i) const { return q_[i]; }

  /// Position of `q` in the grid, matched within 1e-12.
  std::optional<std::size_t> index_of(double q) const;

 private:
  std::vector<double> q_;
};

}  // namespace mvf
