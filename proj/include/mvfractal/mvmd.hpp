#pragma once

#include "mvfractal/fluctuation.hpp"
#include "mvfractal/signal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace mvf {

enum class OmegaInit { UniformSpread, Random, Zero };

const char* to_string(OmegaInit init) noexcept;

/// Settings of the multivariate variational mode decomposition.
struct MvmdConfig {
  int k_modes = 8;
  double penalty_alpha = 2000.0;  ///< bandwidth penalty
  double tolerance = 1e-6;        ///< relative update |du| / |u| between sweeps
  int max_iterations = 500;
  OmegaInit omega_init = OmegaInit::UniformSpread;
  std::uint64_t seed = 0;         ///< used by OmegaInit::Random
  double dual_step = 1.0;         ///< Lagrange multiplier step; 0 disables the reconstruction phase

  void validate() const;
};

/// Decomposition result. Modes are ordered by ascending center frequency
/// (cycles per sample) and share one frequency across all channels.
struct ModeSet {
  std::vector<Eigen::MatrixXd> modes;   ///< K arrays of N x M
  std::vector<double> omegas;
  std::optional<int> k1_cutoff;
  std::vector<double> hurst_per_mode;
  Eigen::MatrixXd residual;             ///< input minus the sum of all modes
  double sample_rate_hz = 1.0;
  std::vector<std::string> channel_labels;
  int iterations = 0;
  bool converged = true;

  int k() const noexcept { return static_cast<int>(modes.size()); }
  /// |residual|_2 / |x|_2 where x is the decomposed input.
  double relative_residual() const;
};

/// Builds a mode set from externally constructed modes; the residual is the
/// input minus their sum.
ModeSet make_mode_set(const MultichannelSeries& input, std::vector<Eigen::MatrixXd> modes,
                      std::vector<double> omegas = {});

/// ADMM-style frequency-domain MVMD. The signal is mirror-extended and each
/// mode is updated as a Wiener filter of the analytic spectrum centered on a
/// frequency shared across channels. A first phase moves the frequencies to
/// the power-weighted mean of their mode; a second phase freezes them and
/// runs dual ascent on the reconstruction constraint until the relative
/// spectral residual is below `tolerance`. Each phase is capped at
/// `max_iterations`; when a cap is hit the partial result is returned with
/// `converged == false`.
ModeSet mvmd_decompose(const MultichannelSeries& series, const MvmdConfig& cfg);

/// Settings used when scoring each mode with the q = 2 Mahalanobis
/// fluctuation function.
struct HurstScoring {
  DetrendConfig detrend{};
  CovarianceEstimator covariance{};
  std::optional<ScaleGrid> scales;  ///< default grid for the series length when unset
};

/// Fills `hurst_per_mode` with the q = 2 generalized Hurst exponent of every
/// mode treated as an M-channel series.
ModeSet score_modes_hurst(ModeSet modes, const HurstScoring& scoring = {});

/// 1-based cutoff K1 at the largest jump between consecutive H2 values; ties
/// go to the smaller index.
int select_k1(std::span<const double> hurst_per_mode);
int select_k1(const ModeSet& modes);

/// Sum of the first `k1` modes.
MultichannelSeries reconstruct_signal(const ModeSet& modes, int k1);

}  // namespace mvf
