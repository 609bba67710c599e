#pragma once

#include "mvfractal/fluctuation.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mvf {

/// Per-q multifractal descriptors. `fit_hurst` fills h_q and h_fit_r2;
/// `derive_spectrum` completes the rest.
struct MultifractalFeatures {
  QGrid q_grid;
  std::vector<double> h_q;
  std::vector<double> h_fit_r2;
  std::vector<double> tau_q;
  std::vector<double> alpha_q;
  std::vector<double> f_alpha;

  bool complete() const noexcept { return !f_alpha.empty(); }

  /// Indices of fits whose r^2 is below `min_r2`.
  std::vector<std::size_t> low_quality_fits(double min_r2 = 0.95) const;

  /// True when h_q does not increase with q beyond `slack`.
  bool hurst_non_increasing(double slack = 1e-6) const;
};

/// Inclusive interval of scales used for the log-log fit.
struct FitRange {
  Index min_scale = 0;
  Index max_scale = 0;
};

/// Ordinary least-squares slope of log F_q(s) against log s for each q.
/// Needs at least four scales inside the fit range.
MultifractalFeatures fit_hurst(const FluctuationSurface& surface, std::optional<FitRange> range = std::nullopt);

/// Mass exponents tau_q = q h_q - 1, Hoelder exponents as the derivative of
/// tau (three-point differences on the q grid, one-sided at the ends) and
/// f(alpha_q) = q alpha_q - tau_q. Needs at least three q values.
MultifractalFeatures derive_spectrum(MultifractalFeatures fitted);
MultifractalFeatures derive_spectrum(std::span<const double> h_q, const QGrid& q_grid);

/// Fixed-length scalar summary used for diagnosis.
struct FeatureVector {
  double delta_h = 0.0;         ///< max h_q - min h_q
  double spectrum_width = 0.0;  ///< max alpha - min alpha
  double spectrum_skew = 0.0;   ///< ((a_peak - a_min) - (a_max - a_peak)) / width
  double alpha_peak = 0.0;      ///< alpha at the maximum of f(alpha)
  double h2 = 0.0;              ///< h_q at q = 2
  double tau_curvature = 0.0;   ///< second divided difference of tau at q = 0

  static constexpr std::size_t kSize = 6;
  static constexpr std::array<std::string_view, kSize> kNames{
      "delta_h", "spectrum_width", "spectrum_skew", "alpha_peak", "h2", "tau_curvature"};

  Eigen::VectorXd as_vector() const;
  static FeatureVector from_vector(const Eigen::VectorXd& v);
};

FeatureVector summarize_features(const MultifractalFeatures& features);

}  // namespace mvf
