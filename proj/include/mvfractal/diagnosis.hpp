#pragma once

#include "mvfractal/features.hpp"
#include "mvfractal/norms.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace mvf {

enum class DistanceKind { Euclidean, Mahalanobis };
enum class MarginPolicy { MaxHealthy, Midpoint };
/// Which multifractal quantities enter the distance: the scalar descriptors
/// of FeatureVector or the raw tau/H/f curves over a shared q grid.
enum class FeatureMode { Descriptors, RawCurves };
enum class HealthLabel { Healthy, Faulty };

const char* to_string(DistanceKind k) noexcept;
const char* to_string(MarginPolicy p) noexcept;
const char* to_string(FeatureMode m) noexcept;
const char* to_string(HealthLabel l) noexcept;

/// Reference statistics of healthy machines and the decision threshold.
/// Distances are taken on features standardized by the healthy mean and
/// standard deviation; the Mahalanobis kind additionally whitens with the
/// covariance of the standardized references.
struct DiagnosisModel {
  std::vector<Eigen::VectorXd> reference_features;
  DistanceKind distance_kind = DistanceKind::Euclidean;
  FeatureMode feature_mode = FeatureMode::Descriptors;
  Eigen::VectorXd reference_center;
  Eigen::VectorXd reference_scale;
  std::optional<SpdMatrix> reference_cov;
  double threshold = 0.0;
  MarginPolicy margin_policy = MarginPolicy::MaxHealthy;
  double epsilon = 0.05;

  Index dim() const noexcept { return reference_center.size(); }
  Eigen::VectorXd standardize(const Eigen::VectorXd& features) const;
};

struct HealthDecision {
  double distance = 0.0;
  double threshold = 0.0;
  double margin = 0.0;  ///< distance - threshold
  HealthLabel label = HealthLabel::Healthy;
};

/// Mahalanobis is chosen when there are at least 3 references per feature.
DistanceKind default_distance_kind(std::size_t reference_count, Index feature_count);

/// Fits center, scale and (for Mahalanobis) covariance from healthy
/// references. The threshold is left at zero.
DiagnosisModel fit_reference(std::span<const Eigen::VectorXd> healthy, std::optional<DistanceKind> kind = std::nullopt,
                             FeatureMode mode = FeatureMode::Descriptors);

/// Model with explicit reference statistics, for distances in a fixed
/// feature metric. `feature_cov` is the covariance of the standardized
/// features; with no covariance the distance is Euclidean.
DiagnosisModel make_model(Eigen::VectorXd center, Eigen::VectorXd scale,
                          std::optional<Eigen::MatrixXd> feature_cov = std::nullopt, double threshold = 0.0);

double feature_distance(const Eigen::VectorXd& candidate, const DiagnosisModel& model);
double feature_distance(const FeatureVector& candidate, const DiagnosisModel& model);

/// MaxHealthy: (1 + epsilon) * max healthy distance. Midpoint: halfway
/// between the largest healthy and the smallest faulty distance; throws
/// NoSeparation when they overlap.
double threshold_from_distances(std::span<const double> healthy, std::span<const double> faulty, MarginPolicy policy,
                                double epsilon = 0.05);

struct CalibrationOptions {
  MarginPolicy policy = MarginPolicy::MaxHealthy;
  double epsilon = 0.05;
  std::optional<DistanceKind> kind;
  FeatureMode feature_mode = FeatureMode::Descriptors;
};

DiagnosisModel calibrate_threshold(std::span<const Eigen::VectorXd> healthy, std::span<const Eigen::VectorXd> faulty,
                                   const CalibrationOptions& options = {});
DiagnosisModel calibrate_threshold(std::span<const FeatureVector> healthy, std::span<const FeatureVector> faulty,
                                   const CalibrationOptions& options = {});

/// Faulty exactly when the distance exceeds the threshold; a distance equal
/// to the threshold is Healthy.
HealthDecision classify(const Eigen::VectorXd& candidate, const DiagnosisModel& model);
HealthDecision classify(const FeatureVector& candidate, const DiagnosisModel& model);

/// tau_q, h_q and f(alpha_q) concatenated, for FeatureMode::RawCurves.
Eigen::VectorXd curve_features(const MultifractalFeatures& features);

}  // namespace mvf
