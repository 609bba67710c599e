#include "mvfractal/diagnosis.hpp"

#include "mvfractal/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mvf {

const char* to_string(DistanceKind k) noexcept {
  switch (k) {
    case DistanceKind::Euclidean: return "euclidean";
    case DistanceKind::Mahalanobis: return "mahalanobis";
  }
  return "?";
}

const char* to_string(MarginPolicy p) noexcept {
  switch (p) {
    case MarginPolicy::MaxHealthy: return "max-healthy";
    case MarginPolicy::Midpoint: return "midpoint";
  }
  return "?";
}

const char* to_string(FeatureMode m) noexcept {
  switch (m) {
    case FeatureMode::Descriptors: return "descriptors";
    case FeatureMode::RawCurves: return "raw-curves";
  }
  return "?";
}

const char* to_string(HealthLabel l) noexcept {
  switch (l) {
    case HealthLabel::Healthy: return "healthy";
    case HealthLabel::Faulty: return "faulty";
  }
  return "?";
}

Eigen::VectorXd DiagnosisModel::standardize(const Eigen::VectorXd& features) const {
  if (features.size() != dim()) {
    throw Error(ErrorKind::DimensionMismatch, "candidate has " + std::to_string(features.size()) +
                                                  " features, model expects " + std::to_string(dim()));
  }
  return (features - reference_center).cwiseQuotient(reference_scale);
}

DistanceKind default_distance_kind(std::size_t reference_count, Index feature_count) {
  return reference_count >= 3 * static_cast<std::size_t>(feature_count) ? DistanceKind::Mahalanobis
                                                                          : DistanceKind::Euclidean;
}

namespace {

SpdMatrix factorize_feature_cov(const Eigen::MatrixXd& cov) {
  static constexpr std::array<double, 5> kLadder{kDefaultShrinkage, 1e-4, 1e-2, 1e-1, 0.5};
  for (double shrinkage : kLadder) {
    try {
      return spd_factorize(cov, shrinkage);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NotPositiveDefinite) throw;
    }
  }
  throw Error(ErrorKind::NotPositiveDefinite, "feature covariance stays singular after shrinkage");
}

}  // namespace

DiagnosisModel fit_reference(std::span<const Eigen::VectorXd> healthy, std::optional<DistanceKind> kind,
                             FeatureMode mode) {
  if (healthy.size() < 2) {
    throw Error(ErrorKind::InsufficientReference, "at least 2 healthy references required, have " +
                                                      std::to_string(healthy.size()));
  }
  const Index d = healthy.front().size();
  if (d == 0) throw Error(ErrorKind::EmptyInput, "feature vectors are empty");
  for (std::size_t i = 0; i < healthy.size(); ++i) {
    if (healthy[i].size() != d) {
      throw Error(ErrorKind::DimensionMismatch, "reference feature lengths differ", static_cast<long long>(i));
    }
    if (!healthy[i].allFinite()) throw Error(ErrorKind::NonFinite, "reference features", static_cast<long long>(i));
  }

  DiagnosisModel model;
  model.reference_features.assign(healthy.begin(), healthy.end());
  model.feature_mode = mode;
  // Raw curves are compared pointwise in plain L2 over the q grid.
  const bool raw = mode == FeatureMode::RawCurves;
  model.distance_kind = kind.value_or(raw ? DistanceKind::Euclidean : default_distance_kind(healthy.size(), d));

  const double n = static_cast<double>(healthy.size());
  model.reference_center = Eigen::VectorXd::Zero(d);
  for (const auto& v : healthy) model.reference_center += v;
  model.reference_center /= n;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& v : healthy) var += (v - model.reference_center).cwiseAbs2();
  var /= n - 1.0;
  model.reference_scale = raw ? Eigen::VectorXd::Ones(d) : Eigen::VectorXd(var.cwiseSqrt());
  // A feature that never varies across the references is left unscaled.
  for (Index i = 0; i < d; ++i)
    if (!(model.reference_scale(i) > 0.0)) model.reference_scale(i) = 1.0;

  if (model.distance_kind == DistanceKind::Mahalanobis) {
    Eigen::MatrixXd z(static_cast<Index>(healthy.size()), d);
    for (std::size_t i = 0; i < healthy.size(); ++i) z.row(static_cast<Index>(i)) = model.standardize(healthy[i]);
    const Eigen::MatrixXd cov = (z.transpose() * z) / (n - 1.0);
    model.reference_cov = factorize_feature_cov(cov);
  }
  return model;
}

DiagnosisModel make_model(Eigen::VectorXd center, Eigen::VectorXd scale, std::optional<Eigen::MatrixXd> feature_cov,
                          double threshold) {
  if (center.size() == 0) throw Error(ErrorKind::EmptyInput, "center is empty");
  if (scale.size() != center.size()) throw Error(ErrorKind::DimensionMismatch, "scale length differs from center");
  if ((scale.array() <= 0.0).any()) throw Error(ErrorKind::InvalidArgument, "feature scales must be positive");
  DiagnosisModel model;
  model.reference_center = std::move(center);
  model.reference_scale = std::move(scale);
  if (feature_cov) {
    if (feature_cov->rows() != model.dim()) throw Error(ErrorKind::DimensionMismatch, "covariance size differs");
    model.distance_kind = DistanceKind::Mahalanobis;
    model.reference_cov = spd_factorize(*feature_cov);
  }
  model.threshold = threshold;
  return model;
}

double feature_distance(const Eigen::VectorXd& candidate, const DiagnosisModel& model) {
  const Eigen::VectorXd z = model.standardize(candidate);
  if (model.distance_kind == DistanceKind::Mahalanobis) {
    if (!model.reference_cov) throw Error(ErrorKind::InvalidArgument, "Mahalanobis model has no covariance");
    return std::sqrt(model.reference_cov->squared_distance(std::span<const double>(z.data(), static_cast<std::size_t>(z.size()))));
  }
  return z.norm();
}

double feature_distance(const FeatureVector& candidate, const DiagnosisModel& model) {
  return feature_distance(candidate.as_vector(), model);
}

double threshold_from_distances(std::span<const double> healthy, std::span<const double> faulty, MarginPolicy policy,
                                double epsilon) {
  if (healthy.size() < 2) throw Error(ErrorKind::InsufficientReference, "at least 2 healthy distances required");
  if (!(epsilon >= 0.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must be >= 0");
  const double max_h = *std::max_element(healthy.begin(), healthy.end());
  if (policy == MarginPolicy::MaxHealthy) return (1.0 + epsilon) * max_h;
  if (faulty.empty()) throw Error(ErrorKind::InvalidArgument, "midpoint policy needs faulty references");
  const double min_f = *std::min_element(faulty.begin(), faulty.end());
  if (min_f <= max_h) {
    throw Error(ErrorKind::NoSeparation, "closest faulty distance " + std::to_string(min_f) +
                                             " does not exceed farthest healthy distance " + std::to_string(max_h));
  }
  return 0.5 * (max_h + min_f);
}

DiagnosisModel calibrate_threshold(std::span<const Eigen::VectorXd> healthy, std::span<const Eigen::VectorXd> faulty,
                                   const CalibrationOptions& options) {
  DiagnosisModel model = fit_reference(healthy, options.kind, options.feature_mode);
  std::vector<double> dh;
  for (const auto& v : healthy) dh.push_back(feature_distance(v, model));
  std::vector<double> df;
  for (const auto& v : faulty) df.push_back(feature_distance(v, model));
  model.threshold = threshold_from_distances(dh, df, options.policy, options.epsilon);
  model.margin_policy = options.policy;
  model.epsilon = options.epsilon;
  return model;
}

DiagnosisModel calibrate_threshold(std::span<const FeatureVector> healthy, std::span<const FeatureVector> faulty,
                                   const CalibrationOptions& options) {
  std::vector<Eigen::VectorXd> h;
  for (const auto& f : healthy) h.push_back(f.as_vector());
  std::vector<Eigen::VectorXd> f;
  for (const auto& v : faulty) f.push_back(v.as_vector());
  CalibrationOptions opts = options;
  opts.feature_mode = FeatureMode::Descriptors;
  return calibrate_threshold(h, f, opts);
}

HealthDecision classify(const Eigen::VectorXd& candidate, const DiagnosisModel& model) {
  HealthDecision out;
  out.distance = feature_distance(candidate, model);
  out.threshold = model.threshold;
  out.margin = out.distance - out.threshold;
  out.label = out.distance > out.threshold ? HealthLabel::Faulty : HealthLabel::Healthy;
  return out;
}

HealthDecision classify(const FeatureVector& candidate, const DiagnosisModel& model) {
  return classify(candidate.as_vector(), model);
}

Eigen::VectorXd curve_features(const MultifractalFeatures& features) {
  if (!features.complete()) throw Error(ErrorKind::InvalidArgument, "features are missing the spectrum");
  const auto n = static_cast<Index>(features.h_q.size());
  Eigen::VectorXd out(3 * n);
  for (Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    out(i) = features.tau_q[k];
    out(n + i) = features.h_q[k];
    out(2 * n + i) = features.f_alpha[k];
  }
  return out;
}

}  // namespace mvf
