#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvfractal/diagnosis.hpp"
#include "mvfractal/error.hpp"

#include <cmath>
#include <random>

using namespace mvf;

namespace {

std::vector<Eigen::VectorXd> gaussian_cloud(std::size_t count, Index dim, double shift, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd v(dim);
    for (Index j = 0; j < dim; ++j) v(j) = shift + (1.0 + 0.5 * static_cast<double>(j)) * g(rng);
    out.push_back(v);
  }
  return out;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::IoError;
}

}  // namespace

TEST_CASE("distance at the center is zero") {
  const auto refs = gaussian_cloud(40, 3, 0.0, 1);
  for (DistanceKind k : {DistanceKind::Euclidean, DistanceKind::Mahalanobis}) {
    const DiagnosisModel m = fit_reference(refs, k);
    CHECK(feature_distance(m.reference_center, m) == 0.0);
  }
}

TEST_CASE("identity covariance matches standardized Euclidean") {
  Eigen::VectorXd center(3), scale(3), x(3);
  center << 1.0, -2.0, 0.5;
  scale << 2.0, 0.5, 1.0;
  x << 3.0, 1.0, -1.0;
  const auto e = make_model(center, scale);
  const auto m = make_model(center, scale, Eigen::MatrixXd::Identity(3, 3));
  CHECK(e.distance_kind == DistanceKind::Euclidean);
  CHECK(m.distance_kind == DistanceKind::Mahalanobis);
  const double expected = std::sqrt(1.0 + 36.0 + 2.25);
  CHECK(feature_distance(x, e) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(feature_distance(x, m) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("hand-computed Mahalanobis distance") {
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 1.0;
  cov(1, 1) = 4.0;
  const auto m = make_model(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2), cov);
  Eigen::VectorXd phi(2);
  phi << 1.0, 2.0;
  CHECK(feature_distance(phi, m) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(kind_of([&] { feature_distance(Eigen::VectorXd::Zero(3), m); }) == ErrorKind::DimensionMismatch);
}

TEST_CASE("thresholds") {
  const std::vector<double> h{1.0, 2.0};
  const std::vector<double> f{6.0, 8.0};
  CHECK(threshold_from_distances(h, f, MarginPolicy::Midpoint) == 4.0);
  CHECK(threshold_from_distances(h, {}, MarginPolicy::MaxHealthy, 0.05) == doctest::Approx(2.1).epsilon(1e-15));
  CHECK(kind_of([&] { threshold_from_distances(h, std::vector<double>{1.5, 9.0}, MarginPolicy::Midpoint); }) ==
        ErrorKind::NoSeparation);
  // faulty distances do not move a MaxHealthy threshold
  CHECK(threshold_from_distances(h, std::vector<double>{2.0}, MarginPolicy::MaxHealthy) ==
        threshold_from_distances(h, {}, MarginPolicy::MaxHealthy));
  CHECK(kind_of([&] { threshold_from_distances(std::vector<double>{1.0}, f, MarginPolicy::Midpoint); }) ==
        ErrorKind::InsufficientReference);
  CHECK(kind_of([&] { threshold_from_distances(h, {}, MarginPolicy::Midpoint); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("boundary and margin") {
  const auto m = make_model(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), std::nullopt, 2.0);
  Eigen::VectorXd x(1);
  x << 2.0;
  CHECK(classify(x, m).label == HealthLabel::Healthy);
  CHECK(classify(x, m).margin == 0.0);
  x << std::nextafter(2.0, 3.0);
  CHECK(classify(x, m).label == HealthLabel::Faulty);
  double last = -1e300;
  for (double v = 0.0; v < 5.0; v += 0.25) {
    x << v;
    const auto d = classify(x, m);
    CHECK(d.margin >= last);
    CHECK(d.margin == d.distance - d.threshold);
    CHECK((d.label == HealthLabel::Faulty) == (d.distance > d.threshold));
    last = d.margin;
  }
}

TEST_CASE("calibration accepts every healthy reference") {
  const auto healthy = gaussian_cloud(30, 6, 0.0, 2);
  const auto faulty = gaussian_cloud(10, 6, 6.0, 3);
  for (MarginPolicy p : {MarginPolicy::MaxHealthy, MarginPolicy::Midpoint}) {
    CalibrationOptions opt;
    opt.policy = p;
    opt.kind = DistanceKind::Mahalanobis;
    const auto m = calibrate_threshold(healthy, faulty, opt);
    for (const auto& h : healthy) CHECK(classify(h, m).label == HealthLabel::Healthy);
    if (p == MarginPolicy::Midpoint)
      for (const auto& f : faulty) CHECK(classify(f, m).label == HealthLabel::Faulty);
    CHECK(m.threshold > 0.0);
  }
}

TEST_CASE("distances do not depend on feature units") {
  const auto refs = gaussian_cloud(40, 4, 0.0, 4);
  Eigen::VectorXd units(4);
  units << 1e-3, 10.0, 2.0, 1e4;
  std::vector<Eigen::VectorXd> scaled;
  for (const auto& r : refs) scaled.push_back(units.asDiagonal() * r + Eigen::VectorXd::Constant(4, 7.0));
  const auto probe = gaussian_cloud(5, 4, 1.0, 5);
  for (DistanceKind k : {DistanceKind::Euclidean, DistanceKind::Mahalanobis}) {
    const auto a = fit_reference(refs, k);
    const auto b = fit_reference(scaled, k);
    for (const auto& p : probe) {
      const Eigen::VectorXd q = units.asDiagonal() * p + Eigen::VectorXd::Constant(4, 7.0);
      CHECK(feature_distance(q, b) == doctest::Approx(feature_distance(p, a)).epsilon(1e-9));
    }
  }
}

TEST_CASE("default distance and reference errors") {
  CHECK(default_distance_kind(18, 6) == DistanceKind::Mahalanobis);
  CHECK(default_distance_kind(17, 6) == DistanceKind::Euclidean);
  CHECK(fit_reference(gaussian_cloud(10, 6, 0.0, 6)).distance_kind == DistanceKind::Euclidean);
  CHECK(fit_reference(gaussian_cloud(20, 6, 0.0, 6)).distance_kind == DistanceKind::Mahalanobis);
  CHECK(kind_of([] { fit_reference(gaussian_cloud(1, 3, 0.0, 7)); }) == ErrorKind::InsufficientReference);
  std::vector<Eigen::VectorXd> mixed{Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)};
  CHECK(kind_of([&] { fit_reference(mixed); }) == ErrorKind::DimensionMismatch);
  std::vector<Eigen::VectorXd> bad = gaussian_cloud(3, 2, 0.0, 8);
  bad[1](0) = std::nan("");
  CHECK(kind_of([&] { fit_reference(bad); }) == ErrorKind::NonFinite);
}

TEST_CASE("constant feature keeps unit scale") {
  auto refs = gaussian_cloud(10, 3, 0.0, 9);
  for (auto& r : refs) r(1) = 4.0;
  const auto m = fit_reference(refs, DistanceKind::Euclidean);
  CHECK(m.reference_scale(1) == 1.0);
  CHECK(std::isfinite(feature_distance(refs[0], m)));
}

TEST_CASE("raw curve mode") {
  MultifractalFeatures f;
  f.q_grid = QGrid(std::vector<double>{-1.0, 0.0, 2.0});
  f.h_q = {0.8, 0.7, 0.6};
  f.tau_q = {-1.8, -1.0, 0.2};
  f.h_fit_r2 = {1.0, 1.0, 1.0};
  f.alpha_q = {0.8, 0.7, 0.6};
  f.f_alpha = {1.0, 1.0, 1.0};
  const Eigen::VectorXd c = curve_features(f);
  REQUIRE(c.size() == 9);
  CHECK(c(0) == -1.8);
  CHECK(c(3) == 0.8);
  CHECK(c(8) == 1.0);

  std::vector<Eigen::VectorXd> refs = gaussian_cloud(5, 9, 0.0, 10);
  const auto m = fit_reference(refs, std::nullopt, FeatureMode::RawCurves);
  CHECK(m.feature_mode == FeatureMode::RawCurves);
  CHECK(m.distance_kind == DistanceKind::Euclidean);
  CHECK(m.reference_scale == Eigen::VectorXd::Ones(9));
  CHECK(feature_distance(refs[0], m) == doctest::Approx((refs[0] - m.reference_center).norm()).epsilon(1e-14));
}

TEST_CASE("names") {
  CHECK(std::string(to_string(DistanceKind::Mahalanobis)) == "mahalanobis");
  CHECK(std::string(to_string(MarginPolicy::MaxHealthy)) == "max-healthy");
  CHECK(std::string(to_string(FeatureMode::RawCurves)) == "raw-curves");
  CHECK(std::string(to_string(HealthLabel::Faulty)) == "faulty");
}
