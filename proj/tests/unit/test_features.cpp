#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvfractal/error.hpp"
#include "mvfractal/features.hpp"
#include "mvfractal/synthetic.hpp"

#include <cmath>

using namespace mvf;

namespace {

FluctuationSurface power_law_surface(double c, double h, const QGrid& q) {
  FluctuationSurface s;
  s.q_grid = q;
  s.scale_grid = ScaleGrid::from_scales({16, 32, 50, 80, 128, 200, 256}, 4096, 2);
  s.values.resize(static_cast<Index>(q.size()), static_cast<Index>(s.scale_grid.size()));
  for (std::size_t k = 0; k < s.scale_grid.size(); ++k)
    for (std::size_t j = 0; j < q.size(); ++j)
      s.values(static_cast<Index>(j), static_cast<Index>(k)) = c * std::pow(static_cast<double>(s.scale_grid[k]), h);
  return s;
}

double analytic_tau(double q) { return -std::log2(std::pow(0.6, q) + std::pow(0.4, q)); }

MultifractalFeatures cascade_noise_features(CascadeWeights w) {
  const auto s = gen_cascade_noise(1 << 14, 1, w, 0.0, 21);
  const auto surface = analyze_fluctuations(s, Variant::Univariate, ScaleGrid::default_for(s.length(), 2),
                                            QGrid::range(-3, 3, 0.5), {}, {});
  return derive_spectrum(fit_hurst(surface));
}

}  // namespace

TEST_CASE("exact power law") {
  const QGrid q;
  const auto f = fit_hurst(power_law_surface(1.0, 0.7, q));
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(f.h_q[i] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(f.h_fit_r2[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto g = fit_hurst(power_law_surface(42.0, 0.7, q));
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(std::abs(g.h_q[i] - f.h_q[i]) < 1e-12);
  CHECK(g.low_quality_fits().empty());
  CHECK(g.hurst_non_increasing());
}

TEST_CASE("fit range and scale count") {
  const QGrid q;
  const auto s = power_law_surface(1.0, 0.4, q);
  const auto ranged = fit_hurst(s, FitRange{32, 200});
  CHECK(ranged.h_q[0] == doctest::Approx(0.4).epsilon(1e-12));
  try {
    fit_hurst(s, FitRange{32, 80});
    FAIL("expected TooFewScales");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewScales);
  }
}

TEST_CASE("monofractal spectrum collapse") {
  const QGrid q;
  const std::vector<double> h(q.size(), 0.63);
  const auto f = derive_spectrum(h, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(f.tau_q[i] == doctest::Approx(q[i] * 0.63 - 1.0).epsilon(1e-15));
    CHECK(f.alpha_q[i] == doctest::Approx(0.63).epsilon(1e-12));
    CHECK(f.f_alpha[i] == doctest::Approx(1.0).epsilon(1e-12));
  }
  const auto fv = summarize_features(f);
  CHECK(fv.delta_h == 0.0);
  CHECK(fv.spectrum_width <= 2e-2);
  CHECK(fv.h2 == 0.63);
  CHECK(std::abs(fv.tau_curvature) < 1e-12);
}

TEST_CASE("spectrum identities") {
  const QGrid q = QGrid::range(-4, 4, 0.25);
  std::vector<double> h;
  for (double v : q.values()) h.push_back(0.8 - 0.1 * std::tanh(v));
  const auto f = derive_spectrum(h, q);
  const auto zero = *q.index_of(0.0);
  CHECK(f.tau_q[zero] == -1.0);
  CHECK(f.f_alpha[zero] == 1.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    CHECK(f.tau_q[i] == q[i] * h[i] - 1.0);
    CHECK(std::abs(q[i] * f.alpha_q[i] - f.f_alpha[i] - f.tau_q[i]) < 1e-10);
  }
  const auto fv = summarize_features(f);
  CHECK(fv.delta_h >= 0.0);
  CHECK(fv.spectrum_width >= 0.0);
  CHECK(fv.spectrum_skew >= -1.0);
  CHECK(fv.spectrum_skew <= 1.0);
  CHECK_THROWS_AS(derive_spectrum(std::vector<double>{0.5, 0.5}, QGrid(std::vector<double>{1.0, 2.0})), Error);
}

TEST_CASE("alpha converges as the q step halves") {
  auto h_of = [](double v) { return 0.7 - 0.05 * v + 0.01 * std::sin(v); };
  const QGrid coarse = QGrid::range(-4, 4, 0.5);
  const QGrid fine = QGrid::range(-4, 4, 0.25);
  std::vector<double> hc, hf;
  for (double v : coarse.values()) hc.push_back(h_of(v));
  for (double v : fine.values()) hf.push_back(h_of(v));
  const auto a = derive_spectrum(hc, coarse);
  const auto b = derive_spectrum(hf, fine);
  double sup = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) sup = std::max(sup, std::abs(a.alpha_q[i] - b.alpha_q[*fine.index_of(coarse[i])]));
  CHECK(sup < 1e-2);
}

TEST_CASE("symmetric spectrum has zero skew") {
  // tau = q (a - b q) - 1 gives alpha linear in q and f symmetric about q = 0
  const QGrid q;
  std::vector<double> h;
  for (double v : q.values()) h.push_back(0.7 - 0.02 * v);
  const auto fv = summarize_features(derive_spectrum(h, q));
  CHECK(std::abs(fv.spectrum_skew) < 0.05);
  CHECK(fv.alpha_peak == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(fv.spectrum_width == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(fv.tau_curvature == doctest::Approx(-0.04).epsilon(1e-10));
  CHECK(fv.delta_h == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("feature vector round trip") {
  const FeatureVector fv{0.1, 0.2, -0.3, 0.4, 0.5, -0.6};
  const FeatureVector back = FeatureVector::from_vector(fv.as_vector());
  CHECK(back.as_vector() == fv.as_vector());
  CHECK(FeatureVector::kNames[4] == "h2");
  CHECK_THROWS_AS(FeatureVector::from_vector(Eigen::VectorXd::Zero(5)), Error);
}

TEST_CASE("binomial cascade measure spectrum") {
  // Dyadic scales match the cascade's discrete scale invariance.
  const QGrid q = QGrid::range(-3, 3, 0.5);
  const auto s = gen_cascade_measure(14, {0.6, 0.4});
  const auto grid = ScaleGrid::log_spaced(16, 4096, 9, s.length(), 2);
  const auto f = derive_spectrum(fit_hurst(analyze_fluctuations(s, Variant::Univariate, grid, q, {}, {})));
  std::vector<double> tau;
  for (double v : q.values()) tau.push_back(analytic_tau(v));
  std::vector<double> h_exact;
  for (std::size_t i = 0; i < q.size(); ++i) h_exact.push_back(q[i] == 0.0 ? 0.0 : (tau[i] + 1.0) / q[i]);
  const auto exact = derive_spectrum(h_exact, q);
  double sup_f = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) sup_f = std::max(sup_f, std::abs(f.f_alpha[i] - exact.f_alpha[i]));
  CHECK(sup_f < 0.05);
}

TEST_CASE("spectrum width grows with cascade asymmetry") {
  const double w50 = summarize_features(cascade_noise_features({0.5, 0.5})).spectrum_width;
  const double w60 = summarize_features(cascade_noise_features({0.6, 0.4})).spectrum_width;
  const double w70 = summarize_features(cascade_noise_features({0.7, 0.3})).spectrum_width;
  CHECK(w50 < w60);
  CHECK(w60 < w70);
}
