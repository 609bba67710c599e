#include "mvfractal/synthetic.hpp"

#include "fft.hpp"
#include "mvfractal/error.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <random>

namespace mvf {

namespace {

void check_shape(Index n, Index m, Index min_n) {
  if (n < min_n) {
    throw Error(ErrorKind::InvalidArgument, "need at least " + std::to_string(min_n) + " samples");
  }
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "need at least one channel");
}

void check_cross_corr(double cross_corr) {
  if (!(cross_corr >= 0.0 && cross_corr < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "cross_corr must lie in [0, 1)");
  }
}

// Lower Cholesky factor of the m x m equicorrelation matrix.
Eigen::MatrixXd equicorrelation_factor(Index m, double rho) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Constant(m, m, rho);
  r.diagonal().setOnes();
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  return llt.matrixL();
}

// Rows of `independent` are time samples; the returned channels have pairwise
// correlation rho and unchanged marginal variance.
Eigen::MatrixXd mix_channels(const Eigen::MatrixXd& independent, double rho) {
  if (rho == 0.0 || independent.cols() == 1) return independent;
  const Eigen::MatrixXd l = equicorrelation_factor(independent.cols(), rho);
  return independent * l.transpose();
}

bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

MultichannelSeries gen_white_noise(Index n, Index m, std::uint64_t seed, double sample_rate_hz) {
  check_shape(n, m, 64);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < m; ++c) x(i, c) = normal(rng);
  return MultichannelSeries(std::move(x), sample_rate_hz);
}

double fgn_autocovariance(double hurst, Index lag) {
  const double k = std::abs(static_cast<double>(lag));
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(std::abs(k - 1.0), h2));
}

MultichannelSeries gen_fgn(Index n, Index m, double hurst, double cross_corr, std::uint64_t seed,
                           double sample_rate_hz) {
  check_shape(n, m, 2);
  if (!(hurst > 0.0 && hurst < 1.0)) throw Error(ErrorKind::InvalidArgument, "hurst must lie in (0, 1)");
  check_cross_corr(cross_corr);

  // First row of the 2n circulant that embeds the n x n Toeplitz covariance.
  const Index len = 2 * n;
  std::vector<detail::Complex> row(static_cast<std::size_t>(len));
  for (Index k = 0; k <= n; ++k) row[static_cast<std::size_t>(k)] = fgn_autocovariance(hurst, k);
  for (Index k = 1; k < n; ++k) row[static_cast<std::size_t>(len - k)] = fgn_autocovariance(hurst, k);
  const auto spectrum = detail::fft_forward(std::move(row));

  std::vector<double> scale(spectrum.size());
  double lambda_max = 0.0;
  for (const auto& v : spectrum) lambda_max = std::max(lambda_max, v.real());
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    double lambda = spectrum[k].real();
    if (lambda < -1e-10 * lambda_max) {
      throw Error(ErrorKind::EmbeddingFailure,
                  "circulant embedding has a negative eigenvalue " + std::to_string(lambda),
                  static_cast<long long>(k));
    }
    scale[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(len));
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd independent(n, m);
  // The real and imaginary parts of one transform are two independent paths.
  for (Index c = 0; c < m; c += 2) {
    std::vector<detail::Complex> w(static_cast<std::size_t>(len));
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double re = normal(rng);
      const double im = normal(rng);
      w[k] = scale[k] * detail::Complex(re, im);
    }
    const auto path = detail::fft_forward(std::move(w));
    for (Index i = 0; i < n; ++i) {
      independent(i, c) = path[static_cast<std::size_t>(i)].real();
      if (c + 1 < m) independent(i, c + 1) = path[static_cast<std::size_t>(i)].imag();
    }
  }
  return MultichannelSeries(mix_channels(independent, cross_corr), sample_rate_hz);
}

std::vector<double> binomial_cascade(int levels, CascadeWeights weights, std::optional<std::uint64_t> shuffle_seed) {
  if (levels < 0 || levels > 30) throw Error(ErrorKind::InvalidArgument, "cascade levels must lie in [0, 30]");
  if (!(weights.first > 0.0 && weights.second > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cascade weights must be positive");
  }
  std::optional<std::mt19937_64> rng;
  if (shuffle_seed) rng.emplace(*shuffle_seed);
  std::bernoulli_distribution coin(0.5);

  std::vector<double> cells{1.0};
  for (int level = 0; level < levels; ++level) {
    std::vector<double> next(cells.size() * 2);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const bool swap = rng && coin(*rng);
      next[2 * j] = cells[j] * (swap ? weights.second : weights.first);
      next[2 * j + 1] = cells[j] * (swap ? weights.first : weights.second);
    }
    cells = std::move(next);
  }
  // unit mean: total mass is (w0 + w1)^levels over 2^levels cells
  const double norm = std::pow(2.0 / (weights.first + weights.second), levels);
  for (double& v : cells) v *= norm;
  return cells;
}

MultichannelSeries gen_cascade_measure(int levels, CascadeWeights weights, double sample_rate_hz) {
  const auto cells = binomial_cascade(levels, weights);
  Eigen::MatrixXd x(static_cast<Index>(cells.size()), 1);
  for (std::size_t i = 0; i < cells.size(); ++i) x(static_cast<Index>(i), 0) = cells[i];
  return MultichannelSeries(std::move(x), sample_rate_hz);
}

MultichannelSeries gen_cascade_noise(Index n, Index m, CascadeWeights weights, double cross_corr,
                                     std::uint64_t seed, double sample_rate_hz) {
  check_shape(n, m, 2);
  check_cross_corr(cross_corr);
  if (!is_power_of_two(n)) throw Error(ErrorKind::InvalidArgument, "cascade length must be a power of two");
  int levels = 0;
  while ((Index{1} << levels) < n) ++levels;

  // Seed the envelope and the noise from distinct streams of the same seed.
  const auto envelope = binomial_cascade(levels, weights, seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd noise(n, m);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < m; ++c) noise(i, c) = normal(rng);
  Eigen::MatrixXd x = mix_channels(noise, cross_corr);
  for (Index i = 0; i < n; ++i) x.row(i) *= std::sqrt(envelope[static_cast<std::size_t>(i)]);
  return MultichannelSeries(std::move(x), sample_rate_hz);
}

Eigen::VectorXd tone_component(Index n, double sample_rate_hz, const Tone& tone, Index tone_index, Index channel) {
  Eigen::VectorXd out(n);
  const double phase = 0.3 * static_cast<double>(tone_index + 1) * static_cast<double>(channel);
  const double w = 2.0 * std::numbers::pi * tone.freq_hz / sample_rate_hz;
  for (Index i = 0; i < n; ++i) out(i) = tone.amplitude * std::sin(w * static_cast<double>(i) + phase);
  return out;
}

MultichannelSeries gen_tone_mix(Index n, Index m, std::span<const Tone> tones, double sample_rate_hz,
                                double noise_std, std::uint64_t seed) {
  check_shape(n, m, 2);
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorKind::RateNonPositive, "sample rate must be positive");
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, m);
  for (std::size_t j = 0; j < tones.size(); ++j)
    for (Index c = 0; c < m; ++c) x.col(c) += tone_component(n, sample_rate_hz, tones[j], static_cast<Index>(j), c);
  if (noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, noise_std);
    for (Index i = 0; i < n; ++i)
      for (Index c = 0; c < m; ++c) x(i, c) += normal(rng);
  }
  return MultichannelSeries(std::move(x), sample_rate_hz);
}

}  // namespace mvf
