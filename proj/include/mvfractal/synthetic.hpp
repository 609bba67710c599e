#pragma once

#include "mvfractal/signal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mvf {

// Reproducible test and benchmark signals. Every generator is a pure function
// of its arguments: the same seed gives bit-identical output for a given build.

/// i.i.d. standard Gaussian samples. Requires n >= 64.
MultichannelSeries gen_white_noise(Index n, Index m, std::uint64_t seed, double sample_rate_hz = 1.0);

/// Autocovariance of unit-variance fractional Gaussian noise at `lag`.
double fgn_autocovariance(double hurst, Index lag);

/// Fractional Gaussian noise with exact covariance, synthesized by circulant
/// embedding. Channels are mixed to an equicorrelated structure with pairwise
/// correlation `cross_corr`; each channel keeps unit variance and the target
/// Hurst exponent.
MultichannelSeries gen_fgn(Index n, Index m, double hurst, double cross_corr, std::uint64_t seed,
                           double sample_rate_hz = 1.0);

struct CascadeWeights {
  double first = 0.6;
  double second = 0.4;
};

/// Binomial multiplicative cascade after `levels` splits (2^levels cells).
/// Without a seed the first weight always goes to the left child, which is
/// the classic deterministic construction. With a seed the assignment is
/// flipped at random per split, which rearranges cells but leaves the
/// multiset of values (and thus the mass exponents) unchanged. The result is
/// normalized to unit mean.
std::vector<double> binomial_cascade(int levels, CascadeWeights weights,
                                     std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Single-channel series of deterministic cascade values (length 2^levels).
MultichannelSeries gen_cascade_measure(int levels, CascadeWeights weights, double sample_rate_hz = 1.0);

/// Multifractal noise: equicorrelated Gaussian noise whose local variance
/// follows a randomly ordered cascade shared by all channels. `n` must be a
/// power of two. Equal weights give plain white noise.
MultichannelSeries gen_cascade_noise(Index n, Index m, CascadeWeights weights, double cross_corr,
                                     std::uint64_t seed, double sample_rate_hz = 1.0);

struct Tone {
  double freq_hz = 0.0;
  double amplitude = 1.0;
};

/// Clean component of tone `tone_index` in channel `channel`:
/// amplitude * sin(2 pi f t + 0.3 (tone_index + 1) channel).
Eigen::VectorXd tone_component(Index n, double sample_rate_hz, const Tone& tone, Index tone_index, Index channel);

/// Sum of tones per channel plus optional Gaussian noise of standard
/// deviation `noise_std`.
MultichannelSeries gen_tone_mix(Index n, Index m, std::span<const Tone> tones, double sample_rate_hz,
                                double noise_std = 0.0, std::uint64_t seed = 0);

}  // namespace mvf
