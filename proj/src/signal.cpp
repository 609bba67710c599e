#include "mvfractal/signal.hpp"

#include "mvfractal/error.hpp"

#include <algorithm>
#include <cmath>

namespace mvf {

std::vector<std::string> default_channel_labels(Index channels) {
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(channels));
  for (Index c = 0; c < channels; ++c) labels.push_back("ch" + std::to_string(c));
  return labels;
}

MultichannelSeries::MultichannelSeries(Eigen::MatrixXd samples, double sample_rate_hz,
                                       std::vector<std::string> channel_labels)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz), labels_(std::move(channel_labels)) {
  if (samples_.rows() == 0 || samples_.cols() == 0) {
    throw Error(ErrorKind::EmptyInput, "series has no samples");
  }
  if (samples_.rows() < 2) {
    throw Error(ErrorKind::EmptyInput, "series needs at least two samples");
  }
  if (!(sample_rate_hz_ > 0.0) || !std::isfinite(sample_rate_hz_)) {
    throw Error(ErrorKind::RateNonPositive, "sample rate must be positive and finite");
  }
  for (Index i = 0; i < samples_.rows(); ++i) {
    for (Index c = 0; c < samples_.cols(); ++c) {
      if (!std::isfinite(samples_(i, c))) {
        throw Error(ErrorKind::NonFinite, "non-finite sample in channel " + std::to_string(c), i);
      }
    }
  }
  if (labels_.empty()) labels_ = default_channel_labels(samples_.cols());
  if (static_cast<Index>(labels_.size()) != samples_.cols()) {
    throw Error(ErrorKind::InvalidArgument, "expected " + std::to_string(samples_.cols()) +
                                                " channel labels, got " + std::to_string(labels_.size()));
  }
}

MultichannelSeries validate_series(const Eigen::MatrixXd& raw, double sample_rate_hz,
                                   std::vector<std::string> channel_labels) {
  return MultichannelSeries(raw, sample_rate_hz, std::move(channel_labels));
}

ScaleGrid ScaleGrid::from_scales(std::vector<Index> scales, Index series_length, int detrend_order) {
  if (scales.empty()) throw Error(ErrorKind::InvalidArgument, "scale grid is empty");
  if (detrend_order < 0) throw Error(ErrorKind::InvalidArgument, "detrend order must be >= 0");
  for (std::size_t i = 0; i < scales.size(); ++i) {
    if (i > 0 && scales[i] <= scales[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "scales must be strictly increasing", static_cast<long long>(i));
    }
  }
  if (scales.front() < detrend_order + 2) {
    throw Error(ErrorKind::RankDeficientFit,
                "smallest scale " + std::to_string(scales.front()) + " is below detrend order + 2");
  }
  if (series_length / scales.back() < 4) {
    throw Error(ErrorKind::ScaleTooLarge, "largest scale " + std::to_string(scales.back()) +
                                              " leaves fewer than 4 segments for N=" +
                                              std::to_string(series_length));
  }
  return ScaleGrid(std::move(scales));
}

ScaleGrid ScaleGrid::log_spaced(Index min_scale, Index max_scale, int count, Index series_length,
                                int detrend_order) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "scale count must be positive");
  if (min_scale < 1 || max_scale < min_scale) {
    throw Error(ErrorKind::InvalidArgument, "invalid scale interval");
  }
  std::vector<Index> scales;
  const double lo = std::log(static_cast<double>(min_scale));
  const double hi = std::log(static_cast<double>(max_scale));
  for (int i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const auto s = static_cast<Index>(std::llround(std::exp(lo + t * (hi - lo))));
    if (scales.empty() || s > scales.back()) scales.push_back(s);
  }
  return from_scales(std::move(scales), series_length, detrend_order);
}

ScaleGrid ScaleGrid::default_for(Index series_length, int detrend_order) {
  const Index max_scale = series_length / 4;
  const Index min_scale = std::max<Index>(16, detrend_order + 2);
  if (max_scale < min_scale) {
    throw Error(ErrorKind::ScaleTooLarge,
                "series of length " + std::to_string(series_length) + " is too short for the default scale grid");
  }
  return log_spaced(min_scale, max_scale, 20, series_length, detrend_order);
}

namespace {

void check_q_values(const std::vector<double>& q) {
  if (q.empty()) throw Error(ErrorKind::InvalidArgument, "q grid is empty");
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (!std::isfinite(q[i])) throw Error(ErrorKind::NonFinite, "q value is not finite", static_cast<long long>(i));
    if (i > 0 && q[i] <= q[i - 1]) {
      throw Error(ErrorKind::InvalidArgument, "q values must be strictly increasing", static_cast<long long>(i));
    }
  }
  const bool has_two = std::any_of(q.begin(), q.end(), [](double v) { return std::abs(v - 2.0) < 1e-12; });
  if (!has_two) throw Error(ErrorKind::InvalidArgument, "q grid must contain q = 2");
}

}  // namespace

QGrid::QGrid() : QGrid(range(-5.0, 5.0, 0.5)) {}

QGrid::QGrid(std::vector<double> q_values) : q_(std::move(q_values)) {
  for (double& v : q_) {
    if (std::abs(v) < 1e-12) v = 0.0;
  }
  check_q_values(q_);
}

QGrid QGrid::range(double q_min, double q_max, double step) {
  if (!(step > 0.0) || !(q_max >= q_min)) throw Error(ErrorKind::InvalidArgument, "invalid q range");
  std::vector<double> q;
  const auto count = static_cast<long long>(std::floor((q_max - q_min) / step + 1e-9)) + 1;
  for (long long i = 0; i < count; ++i) {
    double v = q_min + static_cast<double>(i) * step;
    // snap accumulated rounding onto the step lattice
    const double snapped = std::round(v * 1e9) / 1e9;
    if (std::abs(snapped - v) < 1e-9) v = snapped;
    q.push_back(v);
  }
  return QGrid(std::move(q));
}

std::optional<std::size_t> QGrid::index_of(double q) const {
  for (std::size_t i = 0; i < q_.size(); ++i) {
    if (std::abs(q_[i] - q) < 1e-12) return i;
  }
  return std::nullopt;
}

}  // namespace mvf
