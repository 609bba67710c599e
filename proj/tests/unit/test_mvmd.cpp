#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mvfractal/error.hpp"
#include "mvfractal/mvmd.hpp"
#include "mvfractal/synthetic.hpp"

#include <cmath>
#include <complex>
#include <numbers>

using namespace mvf;

namespace {

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd x = a.array() - a.mean();
  const Eigen::VectorXd y = b.array() - b.mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

Eigen::VectorXd power_spectrum(const Eigen::VectorXd& x) {
  const Index n = x.size();
  Eigen::VectorXd p(n / 2);
  for (Index k = 0; k < n / 2; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (Index i = 0; i < n; ++i)
      acc += x(i) * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i) / static_cast<double>(n));
    p(k) = std::norm(acc);
  }
  return p;
}

const std::vector<Tone> kTones{{50.0, 1.0}, {120.0, 1.0}};

}  // namespace

TEST_CASE("two-tone recovery") {
  const auto s = gen_tone_mix(1000, 2, kTones, 1000.0);
  MvmdConfig cfg;
  cfg.k_modes = 2;
  const ModeSet ms = mvmd_decompose(s, cfg);
  REQUIRE(ms.k() == 2);
  CHECK(std::abs(ms.omegas[0] - 0.05) < 0.02 * 0.05);
  CHECK(std::abs(ms.omegas[1] - 0.12) < 0.02 * 0.12);
  for (Index k = 0; k < 2; ++k)
    for (Index c = 0; c < 2; ++c)
      CHECK(correlation(ms.modes[static_cast<std::size_t>(k)].col(c),
                        tone_component(1000, 1000.0, kTones[static_cast<std::size_t>(k)], k, c)) > 0.99);

  Eigen::MatrixXd sum = ms.residual;
  for (const auto& m : ms.modes) sum += m;
  CHECK((sum - s.samples()).cwiseAbs().maxCoeff() <= 1e-12);

  // spectral overlap of the two modes
  const Eigen::VectorXd p0 = power_spectrum(ms.modes[0].col(0));
  const Eigen::VectorXd p1 = power_spectrum(ms.modes[1].col(0));
  CHECK(p0.dot(p1) / (p0.norm() * p1.norm()) < 0.3);

  const ModeSet again = mvmd_decompose(s, cfg);
  CHECK(again.omegas == ms.omegas);
  for (std::size_t k = 0; k < 2; ++k) CHECK(again.modes[k] == ms.modes[k]);
}

TEST_CASE("single tone with one mode") {
  const std::vector<Tone> one{{80.0, 2.0}};
  const auto s = gen_tone_mix(1000, 1, one, 1000.0);
  MvmdConfig cfg;
  cfg.k_modes = 1;
  const ModeSet ms = mvmd_decompose(s, cfg);
  CHECK(ms.relative_residual() < 1e-2);
  CHECK(std::abs(ms.omegas[0] - 0.08) < 1e-3);
}

TEST_CASE("configuration errors") {
  const auto s = gen_white_noise(64, 1, 1);
  MvmdConfig cfg;
  cfg.k_modes = 17;
  try {
    mvmd_decompose(s, cfg);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::KTooLarge);
  }
  cfg = {};
  cfg.tolerance = 1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.max_iterations = 5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.k_modes = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("iteration cap returns a partial result") {
  const auto s = gen_tone_mix(1000, 2, kTones, 1000.0, 0.3, 4);
  MvmdConfig cfg;
  cfg.k_modes = 4;
  cfg.max_iterations = 10;
  cfg.tolerance = 1e-12;
  const ModeSet ms = mvmd_decompose(s, cfg);
  CHECK_FALSE(ms.converged);
  CHECK(ms.iterations == 20);  // both phases capped
  for (std::size_t k = 1; k < ms.omegas.size(); ++k) CHECK(ms.omegas[k] >= ms.omegas[k - 1]);
}

TEST_CASE("broadband input is reconstructed") {
  const auto s = gen_white_noise(4096, 3, 17);
  MvmdConfig cfg;
  cfg.k_modes = 4;
  const ModeSet ms = mvmd_decompose(s, cfg);
  CHECK(ms.relative_residual() < 1e-4);
  for (std::size_t k = 1; k < ms.omegas.size(); ++k) CHECK(ms.omegas[k] > ms.omegas[k - 1]);

  // without the reconstruction phase the modes are band-limited Wiener
  // estimates and leave most of the noise in the residual
  cfg.dual_step = 0.0;
  const ModeSet wiener = mvmd_decompose(s, cfg);
  CHECK(wiener.relative_residual() > 0.3);
  CHECK(wiener.omegas == ms.omegas);
}

TEST_CASE("omega initializations") {
  const auto s = gen_tone_mix(1000, 2, kTones, 1000.0);
  for (OmegaInit init : {OmegaInit::Random, OmegaInit::Zero}) {
    MvmdConfig cfg;
    cfg.k_modes = 2;
    cfg.omega_init = init;
    cfg.seed = 3;
    const ModeSet ms = mvmd_decompose(s, cfg);
    CHECK(ms.k() == 2);
    CHECK(ms.omegas[0] <= ms.omegas[1]);
  }
}

TEST_CASE("per-mode Hurst scoring") {
  const auto white = gen_white_noise(8192, 2, 5);
  const auto fgn = gen_fgn(8192, 2, 0.8, 0.3, 6);
  const ModeSet set = make_mode_set(MultichannelSeries(white.samples() + fgn.samples(), 1.0),
                                    {fgn.samples(), white.samples(), white.samples()});
  const ModeSet scored = score_modes_hurst(set);
  REQUIRE(scored.hurst_per_mode.size() == 3);
  CHECK(std::abs(scored.hurst_per_mode[0] - 0.8) < 0.07);
  CHECK(std::abs(scored.hurst_per_mode[1] - 0.5) < 0.07);
  CHECK(scored.hurst_per_mode[1] == scored.hurst_per_mode[2]);
  CHECK_THROWS_AS(select_k1(set), Error);
}

TEST_CASE("cutoff selection") {
  const std::vector<double> h{0.85, 0.8, 0.78, 0.5, 0.49};
  CHECK(select_k1(h) == 3);
  std::vector<double> shifted = h;
  for (double& v : shifted) v += 0.37;
  CHECK(select_k1(shifted) == 3);
  CHECK(select_k1(std::vector<double>{0.9, 0.6, 0.3}) == 1);  // tie goes to the smaller k
  CHECK(select_k1(std::vector<double>{0.5, 0.5}) == 1);
  try {
    select_k1(std::vector<double>{0.5});
    FAIL("expected SingleMode");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingleMode);
  }
}

TEST_CASE("reconstruction") {
  const auto s = gen_tone_mix(1000, 2, kTones, 1000.0, 0.2, 9);
  MvmdConfig cfg;
  cfg.k_modes = 3;
  const ModeSet ms = mvmd_decompose(s, cfg);
  Eigen::MatrixXd all = ms.modes[0] + ms.modes[1] + ms.modes[2];
  CHECK((reconstruct_signal(ms, 3).samples() - all).cwiseAbs().maxCoeff() == 0.0);
  CHECK((reconstruct_signal(ms, 3).samples() - (s.samples() - ms.residual)).cwiseAbs().maxCoeff() < 1e-12);
  try {
    reconstruct_signal(ms, 0);
    FAIL("expected IndexOutOfRange");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IndexOutOfRange);
  }
  CHECK_THROWS_AS(reconstruct_signal(ms, 4), Error);

  // the two tone modes reproduce the clean signal under noise
  const auto clean = gen_tone_mix(1000, 2, kTones, 1000.0);
  MvmdConfig two;
  two.k_modes = 2;
  const ModeSet tm = mvmd_decompose(s, two);
  const auto recon = reconstruct_signal(tm, 2);
  for (Index c = 0; c < 2; ++c) CHECK(correlation(recon.samples().col(c), clean.samples().col(c)) > 0.95);
}
