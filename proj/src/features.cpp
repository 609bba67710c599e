#include "mvfractal/features.hpp"

#include "mvfractal/error.hpp"

#include <algorithm>
#include <cmath>

namespace mvf {

std::vector<std::size_t> MultifractalFeatures::low_quality_fits(double min_r2) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < h_fit_r2.size(); ++i)
    if (h_fit_r2[i] < min_r2) out.push_back(i);
  return out;
}

bool MultifractalFeatures::hurst_non_increasing(double slack) const {
  for (std::size_t i = 1; i < h_q.size(); ++i)
    if (h_q[i] > h_q[i - 1] + slack) return false;
  return true;
}

MultifractalFeatures fit_hurst(const FluctuationSurface& surface, std::optional<FitRange> range) {
  const auto& scales = surface.scale_grid.scales();
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!range || (scales[k] >= range->min_scale && scales[k] <= range->max_scale)) used.push_back(k);
  }
  if (used.size() < 4) {
    throw Error(ErrorKind::TooFewScales, "log-log fit needs at least 4 scales, have " + std::to_string(used.size()));
  }

  std::vector<double> log_s;
  for (std::size_t k : used) log_s.push_back(std::log(static_cast<double>(scales[k])));
  const double n = static_cast<double>(used.size());
  double mean_x = 0.0;
  for (double x : log_s) mean_x += x;
  mean_x /= n;
  double sxx = 0.0;
  for (double x : log_s) sxx += (x - mean_x) * (x - mean_x);

  MultifractalFeatures out;
  out.q_grid = surface.q_grid;
  for (std::size_t j = 0; j < surface.q_grid.size(); ++j) {
    std::vector<double> log_f;
    for (std::size_t k : used) log_f.push_back(std::log(surface.values(static_cast<Index>(j), static_cast<Index>(k))));
    double mean_y = 0.0;
    for (double y : log_f) mean_y += y;
    mean_y /= n;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < log_f.size(); ++i) {
      sxy += (log_s[i] - mean_x) * (log_f[i] - mean_y);
      syy += (log_f[i] - mean_y) * (log_f[i] - mean_y);
    }
    out.h_q.push_back(sxy / sxx);
    out.h_fit_r2.push_back(syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0);
  }
  return out;
}

namespace {

// Derivative at x[at] of the parabola through (x[i], y[i]) for i in {a, a+1, a+2}.
double three_point_derivative(const std::vector<double>& x, const std::vector<double>& y, std::size_t a,
                              std::size_t at) {
  const double x0 = x[a], x1 = x[a + 1], x2 = x[a + 2];
  const double t = x[at];
  return y[a] * (2.0 * t - x1 - x2) / ((x0 - x1) * (x0 - x2)) +
         y[a + 1] * (2.0 * t - x0 - x2) / ((x1 - x0) * (x1 - x2)) +
         y[a + 2] * (2.0 * t - x0 - x1) / ((x2 - x0) * (x2 - x1));
}

}  // namespace

MultifractalFeatures derive_spectrum(MultifractalFeatures fitted) {
  const auto& q = fitted.q_grid.values();
  const std::size_t n = q.size();
  if (n < 3) throw Error(ErrorKind::GridTooCoarse, "spectrum needs at least 3 q values");
  if (fitted.h_q.size() != n) throw Error(ErrorKind::DimensionMismatch, "h_q length differs from the q grid");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(fitted.h_q[i])) throw Error(ErrorKind::NonFinite, "h_q is not finite", static_cast<long long>(i));
  }

  fitted.tau_q.resize(n);
  for (std::size_t i = 0; i < n; ++i) fitted.tau_q[i] = q[i] * fitted.h_q[i] - 1.0;

  fitted.alpha_q.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1);
    fitted.alpha_q[i] = three_point_derivative(q, fitted.tau_q, a, i);
  }

  fitted.f_alpha.resize(n);
  for (std::size_t i = 0; i < n; ++i) fitted.f_alpha[i] = q[i] * fitted.alpha_q[i] - fitted.tau_q[i];
  return fitted;
}

MultifractalFeatures derive_spectrum(std::span<const double> h_q, const QGrid& q_grid) {
  MultifractalFeatures fitted;
  fitted.q_grid = q_grid;
  fitted.h_q.assign(h_q.begin(), h_q.end());
  fitted.h_fit_r2.assign(h_q.size(), 1.0);
  return derive_spectrum(std::move(fitted));
}

Eigen::VectorXd FeatureVector::as_vector() const {
  Eigen::VectorXd v(static_cast<Index>(kSize));
  v << delta_h, spectrum_width, spectrum_skew, alpha_peak, h2, tau_curvature;
  return v;
}

FeatureVector FeatureVector::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != static_cast<Index>(kSize)) throw Error(ErrorKind::DimensionMismatch, "feature vector has wrong length");
  return FeatureVector{v(0), v(1), v(2), v(3), v(4), v(5)};
}

FeatureVector summarize_features(const MultifractalFeatures& features) {
  if (!features.complete()) throw Error(ErrorKind::InvalidArgument, "features are missing the spectrum");
  const auto& q = features.q_grid.values();
  const std::size_t n = q.size();

  FeatureVector out;
  const auto [h_min, h_max] = std::minmax_element(features.h_q.begin(), features.h_q.end());
  out.delta_h = *h_max - *h_min;

  const auto [a_min, a_max] = std::minmax_element(features.alpha_q.begin(), features.alpha_q.end());
  out.spectrum_width = *a_max - *a_min;
  const auto peak = static_cast<std::size_t>(
      std::distance(features.f_alpha.begin(), std::max_element(features.f_alpha.begin(), features.f_alpha.end())));
  out.alpha_peak = features.alpha_q[peak];
  out.spectrum_skew = out.spectrum_width > 0.0
                          ? ((out.alpha_peak - *a_min) - (*a_max - out.alpha_peak)) / out.spectrum_width
                          : 0.0;

  const auto two = features.q_grid.index_of(2.0);
  out.h2 = features.h_q[*two];

  // Nearest interior node to q = 0.
  std::size_t c = 1;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (std::abs(q[i]) < std::abs(q[c])) c = i;
  const double hm = q[c] - q[c - 1];
  const double hp = q[c + 1] - q[c];
  const auto& tau = features.tau_q;
  out.tau_curvature = 2.0 * ((tau[c + 1] - tau[c]) / hp - (tau[c] - tau[c - 1]) / hm) / (hp + hm);
  return out;
}

}  // namespace mvf
