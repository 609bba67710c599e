#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvfractal/error.hpp"
#include "mvfractal/norms.hpp"
#include "oracles.hpp"

using namespace mvf;

namespace {

Array3 random_array(Index u, Index v, Index m, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Array3 a(u, v, m);
  for (double& x : a.data()) x = g(rng);
  return a;
}

// Triple loop with pow everywhere.
double lpqr_oracle(const Array3& z, double p, double q, double r) {
  double outer = 0.0;
  for (Index u = 0; u < z.outer(); ++u) {
    double inner = 0.0;
    for (Index v = 0; v < z.inner(); ++v) {
      double len = 0.0;
      for (Index c = 0; c < z.dim(); ++c) len += std::pow(std::abs(z(u, v, c)), r);
      inner += std::pow(std::pow(len, 1.0 / r), p);
    }
    outer += std::pow(std::pow(inner, 1.0 / p), q);
  }
  return std::pow(outer, 1.0 / q);
}

// Mahalanobis lengths from an explicit inverse.
double mahalanobis_oracle(const Array3& z, const Eigen::MatrixXd& sigma, double p, double q) {
  const Eigen::MatrixXd inv = sigma.inverse();
  double outer = 0.0;
  for (Index u = 0; u < z.outer(); ++u) {
    double inner = 0.0;
    for (Index v = 0; v < z.inner(); ++v) {
      Eigen::VectorXd x(z.dim());
      for (Index c = 0; c < z.dim(); ++c) x(c) = z(u, v, c);
      inner += std::pow(std::sqrt(x.dot(inv * x)), p);
    }
    outer += std::pow(std::pow(inner, 1.0 / p), q);
  }
  return std::pow(outer, 1.0 / q);
}

}  // namespace

TEST_CASE("lpq hand cases") {
  Eigen::MatrixXd z(2, 2);
  z << 3, 4, 0, 0;
  CHECK(lpq_norm(z, {2, 1}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(lpq_norm(Eigen::MatrixXd::Identity(2, 2), {2, 2}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("lpq matches the scalar-loop oracle") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 50; ++t) {
    const Eigen::MatrixXd z = oracle::random_matrix(5, 3, rng);
    CHECK(oracle::relative(lpq_norm(z, {2, 4}), oracle::lpq(z, 2, 4)) < 1e-12);
    CHECK(oracle::relative(lpq_norm(z, {1.5, 3}), oracle::lpq(z, 1.5, 3)) < 1e-12);
    CHECK(oracle::relative(lpq_norm(z, {2, -2}), oracle::lpq(z, 2, -2)) < 1e-12);
  }
}

TEST_CASE("lpqr with r = 2 collapses to the Euclidean form") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const Array3 z = random_array(4, 6, 3, rng);
    for (auto [p, q] : {std::pair{1.0, 1.0}, {2.0, 2.0}, {3.0, 1.5}}) {
      const NormOrder o{p, q, 2.0};
      CHECK(oracle::relative(lpqr_norm(z, o), lpq_euclid_norm(z, o)) < 1e-14);
      CHECK(oracle::relative(lpq_euclid_norm(z, o), lpqr_oracle(z, p, q, 2.0)) < 1e-12);
    }
    CHECK(oracle::relative(lpqr_norm(z, {2, 3, 1.5}), lpqr_oracle(z, 2, 3, 1.5)) < 1e-12);
  }
}

TEST_CASE("degenerate arrays") {
  CHECK(lpqr_norm(Array3(2, 3, 2), {}) == 0.0);
  Array3 one(1, 1, 1);
  one(0, 0, 0) = -2.5;
  for (double p : {1.0, 2.0, 3.5})
    for (double q : {1.0, 4.0}) CHECK(lpqr_norm(one, {p, q, 1.7}) == doctest::Approx(2.5).epsilon(1e-14));
  Array3 unit(3, 4, 2);
  for (Index u = 0; u < 3; ++u)
    for (Index v = 0; v < 4; ++v) unit(u, v, v % 2) = 1.0;
  CHECK(lpq_euclid_norm(unit, {1, 1}) == doctest::Approx(12.0).epsilon(1e-15));
}

TEST_CASE("order validation") {
  Eigen::MatrixXd z = Eigen::MatrixXd::Ones(2, 2);
  CHECK_THROWS_AS(lpq_norm(z, {2, 0}), Error);
  try {
    lpq_norm(z, {2, 0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroDivision);
  }
  Eigen::MatrixXd zero_row = z;
  zero_row.row(1).setZero();
  try {
    lpq_norm(zero_row, {2, -1});
    FAIL("expected DegenerateSegment");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSegment);
  }
  z(0, 0) = std::nan("");
  CHECK_THROWS_AS(lpq_norm(z, {}), Error);
  CHECK(NormOrder{2, 2}.is_true_norm());
  CHECK_FALSE(NormOrder{0.5, 2}.is_true_norm());
  CHECK_FALSE(NormOrder{2, -1}.is_true_norm());
}

TEST_CASE("log-domain aggregation agrees with direct sums") {
  std::mt19937_64 rng(13);
  Eigen::MatrixXd m = oracle::random_matrix(6, 5, rng).cwiseAbs().array() + 0.5;
  const double direct = aggregate_pq(m, {2.0, 40.0});
  const double direct_oracle = oracle::lpq(m, 2.0, 40.0);
  CHECK(oracle::relative(direct, direct_oracle) < 1e-12);
  // q/p = 60 takes the log path
  const double logpath = aggregate_pq(m, {1.0, 60.0});
  CHECK(oracle::relative(logpath, oracle::lpq(m, 1.0, 60.0)) < 1e-12);
  // overflow in the direct path is avoided
  Eigen::MatrixXd big = Eigen::MatrixXd::Constant(3, 3, 1e10);
  CHECK(std::isfinite(aggregate_pq(big, {2.0, 80.0})));
  CHECK(oracle::relative(aggregate_pq(big, {2.0, 80.0}), std::pow(3.0, 1.0 / 80.0) * std::sqrt(3.0) * 1e10) < 1e-12);
}

TEST_CASE("spd_factorize invariants") {
  std::mt19937_64 rng(14);
  for (Index m = 1; m <= 6; ++m) {
    const Eigen::MatrixXd s = oracle::random_spd(m, rng);
    const SpdMatrix f = spd_factorize(s);
    const double scale = s.cwiseAbs().maxCoeff();
    CHECK((f.factor().transpose() * f.factor() - s).cwiseAbs().maxCoeff() <= 1e-10 * scale);
    CHECK((f.eigenvectors().transpose() * f.eigenvectors() - Eigen::MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() <=
          1e-10);
    CHECK((f.whitener().transpose() * f.whitener() - s.inverse()).cwiseAbs().maxCoeff() <=
          1e-10 * s.inverse().cwiseAbs().maxCoeff());
    for (Index i = 1; i < m; ++i) CHECK(f.eigenvalues()(i - 1) <= f.eigenvalues()(i));
  }
}

TEST_CASE("spd_factorize hand cases and failures") {
  const SpdMatrix id = spd_factorize(Eigen::MatrixXd::Identity(3, 3));
  CHECK((id.factor().transpose() * id.factor() - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd d(2, 2);
  d << 4, 0, 0, 9;
  const std::array<double, 2> z{2, 3};
  CHECK(std::sqrt(spd_factorize(d).squared_distance(z)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

  Eigen::MatrixXd asym(2, 2);
  asym << 1, 0.5, 0.4, 1;
  try {
    spd_factorize(asym);
    FAIL("expected NotSymmetric");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotSymmetric);
  }
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  try {
    spd_factorize(indefinite);
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPositiveDefinite);
    CHECK(std::string(e.what()).find("-1") != std::string::npos);
  }
  Eigen::MatrixXd singular(2, 2);
  singular << 1, 1, 1, 1;
  CHECK_THROWS_AS(spd_factorize(singular), Error);
  // shrinkage repairs the singular case
  const SpdMatrix shrunk = spd_factorize(singular, 0.1);
  CHECK(shrunk.eigenvalues()(0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(shrunk.shrinkage() == 0.1);
  CHECK_THROWS_AS(spd_factorize(singular, 1.0), Error);
}

TEST_CASE("Mahalanobis norm against the explicit-inverse oracle") {
  std::mt19937_64 rng(15);
  for (int t = 0; t < 40; ++t) {
    const Index m = 1 + t % 6;
    const Eigen::MatrixXd s = oracle::random_spd(m, rng);
    const Array3 z = random_array(3, 5, m, rng);
    const NormOrder o{2.0, 3.0};
    CHECK(oracle::relative(mahalanobis_lpq_norm(z, spd_factorize(s), o), mahalanobis_oracle(z, s, 2.0, 3.0)) < 1e-10);
  }
}

TEST_CASE("Mahalanobis reductions") {
  std::mt19937_64 rng(16);
  const Array3 z = random_array(4, 4, 3, rng);
  const NormOrder o{2.0, 2.0};
  CHECK(oracle::relative(mahalanobis_lpq_norm(z, SpdMatrix::identity(3), o), lpq_euclid_norm(z, o)) < 1e-12);
  CHECK(oracle::relative(mahalanobis_lpq_norm(z, spd_factorize(Eigen::MatrixXd::Identity(3, 3)), o),
                         lpq_euclid_norm(z, o)) < 1e-12);

  Eigen::Vector3d var(0.5, 2.0, 7.0);
  Array3 normalized = z;
  for (Index u = 0; u < 4; ++u)
    for (Index v = 0; v < 4; ++v)
      for (Index c = 0; c < 3; ++c) normalized(u, v, c) /= std::sqrt(var(c));
  CHECK(oracle::relative(mahalanobis_lpq_norm(z, spd_factorize(var.asDiagonal().toDenseMatrix()), o),
                         lpq_euclid_norm(normalized, o)) < 1e-12);

  // bivariate closed form, rho = 0.5, sigma = (1, 2), z = (1, 1)
  const double rho = 0.5, s1 = 1.0, s2 = 2.0;
  Eigen::Matrix2d sig;
  sig << s1 * s1, rho * s1 * s2, rho * s1 * s2, s2 * s2;
  Array3 one(1, 1, 2);
  one(0, 0, 0) = 1.0;
  one(0, 0, 1) = 1.0;
  const double closed = std::sqrt((1.0 / (1.0 - rho * rho)) * (1.0 / (s1 * s1) + 1.0 / (s2 * s2) - 2.0 * rho / (s1 * s2)));
  CHECK(oracle::relative(mahalanobis_lpq_norm(one, spd_factorize(sig), o), closed) < 1e-12);
  CHECK(closed == doctest::Approx(1.0).epsilon(1e-15));

  CHECK_THROWS_AS(mahalanobis_lpq_norm(z, SpdMatrix::identity(2), o), Error);
}

TEST_CASE("whitening equivalence and homogeneity") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 20; ++t) {
    const Index m = 2 + t % 4;
    const SpdMatrix cov = spd_factorize(oracle::random_spd(m, rng));
    const Array3 z = random_array(3, 4, m, rng);
    Array3 white(3, 4, m);
    for (Index u = 0; u < 3; ++u)
      for (Index v = 0; v < 4; ++v) {
        Eigen::VectorXd x(m);
        for (Index c = 0; c < m; ++c) x(c) = z(u, v, c);
        const Eigen::VectorXd w = cov.whitener() * x;
        for (Index c = 0; c < m; ++c) white(u, v, c) = w(c);
      }
    const NormOrder o{2.0, 1.5};
    CHECK(oracle::relative(mahalanobis_lpq_norm(z, cov, o), lpq_euclid_norm(white, o)) < 1e-10);
    const double k = 3.7;
    CHECK(oracle::relative(mahalanobis_lpq_norm(z.scaled(k), cov, o), k * mahalanobis_lpq_norm(z, cov, o)) < 1e-12);
    CHECK(oracle::relative(lpqr_norm(z.scaled(k), {1.0, 2.0, 3.0}), k * lpqr_norm(z, {1.0, 2.0, 3.0})) < 1e-12);
  }
}

TEST_CASE("Array3 layout") {
  Array3 a(2, 3, 4);
  a(1, 2, 3) = 5.0;
  CHECK(a.vec(1, 2)[3] == 5.0);
  CHECK(a.data()[((1 * 3) + 2) * 4 + 3] == 5.0);
  CHECK(a.slice(1)(2, 3) == 5.0);
  CHECK_THROWS_AS(a + Array3(2, 3, 3), Error);
}
