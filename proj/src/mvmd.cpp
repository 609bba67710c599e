#include "mvfractal/mvmd.hpp"

#include "fft.hpp"
#include "mvfractal/error.hpp"
#include "mvfractal/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mvf {

const char* to_string(OmegaInit init) noexcept {
  switch (init) {
    case OmegaInit::UniformSpread: return "uniform";
    case OmegaInit::Random: return "random";
    case OmegaInit::Zero: return "zero";
  }
  return "?";
}

void MvmdConfig::validate() const {
  if (k_modes < 1) throw Error(ErrorKind::InvalidArgument, "k_modes must be >= 1");
  if (!(penalty_alpha > 0.0)) throw Error(ErrorKind::InvalidArgument, "penalty_alpha must be positive");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must lie in (0, 1)");
  if (max_iterations < 10) throw Error(ErrorKind::InvalidArgument, "max_iterations must be >= 10");
  if (!(dual_step >= 0.0)) throw Error(ErrorKind::InvalidArgument, "dual_step must be >= 0");
}

double ModeSet::relative_residual() const {
  Eigen::MatrixXd input = residual;
  for (const auto& m : modes) input += m;
  const double norm = input.norm();
  return norm > 0.0 ? residual.norm() / norm : residual.norm();
}

ModeSet make_mode_set(const MultichannelSeries& input, std::vector<Eigen::MatrixXd> modes, std::vector<double> omegas) {
  if (modes.empty()) throw Error(ErrorKind::InvalidArgument, "mode set is empty");
  for (const auto& m : modes) {
    if (m.rows() != input.length() || m.cols() != input.channels()) {
      throw Error(ErrorKind::DimensionMismatch, "mode shape differs from the input");
    }
  }
  if (!omegas.empty() && omegas.size() != modes.size()) {
    throw Error(ErrorKind::DimensionMismatch, "one center frequency per mode expected");
  }
  ModeSet out;
  out.residual = input.samples();
  for (const auto& m : modes) out.residual -= m;
  out.modes = std::move(modes);
  out.omegas = omegas.empty() ? std::vector<double>(out.modes.size(), 0.0) : std::move(omegas);
  out.sample_rate_hz = input.sample_rate_hz();
  out.channel_labels = input.channel_labels();
  return out;
}

namespace {

using detail::Complex;

std::vector<double> initial_omegas(const MvmdConfig& cfg, Index length) {
  const auto k = static_cast<std::size_t>(cfg.k_modes);
  std::vector<double> omega(k, 0.0);
  switch (cfg.omega_init) {
    case OmegaInit::UniformSpread:
      for (std::size_t i = 0; i < k; ++i) omega[i] = (static_cast<double>(i) + 0.5) * 0.5 / static_cast<double>(k);
      break;
    case OmegaInit::Random: {
      // log-uniform between one cycle per record and Nyquist
      std::mt19937_64 rng(cfg.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const double lo = std::log(1.0 / static_cast<double>(length));
      const double hi = std::log(0.5);
      for (auto& w : omega) w = std::exp(lo + (hi - lo) * unit(rng));
      std::sort(omega.begin(), omega.end());
      break;
    }
    case OmegaInit::Zero: break;
  }
  return omega;
}

}  // namespace

ModeSet mvmd_decompose(const MultichannelSeries& series, const MvmdConfig& cfg) {
  cfg.validate();
  const Index n = series.length();
  const Index m = series.channels();
  const int k_modes = cfg.k_modes;
  if (n < 4 * static_cast<Index>(k_modes)) {
    throw Error(ErrorKind::KTooLarge, std::to_string(k_modes) + " modes need at least " +
                                          std::to_string(4 * k_modes) + " samples");
  }
  const Eigen::MatrixXd& x = series.samples();

  // Mirror extension to length 2n: reversed first half, signal, reversed second half.
  const Index half = n / 2;
  const Index ext = 2 * n;
  const auto bins = static_cast<std::size_t>(n);  // non-negative frequencies 0 .. (n-1)/ext
  std::vector<std::vector<Complex>> f_plus(static_cast<std::size_t>(m));
  for (Index c = 0; c < m; ++c) {
    std::vector<Complex> buf(static_cast<std::size_t>(ext));
    Index pos = 0;
    for (Index i = half - 1; i >= 0; --i) buf[static_cast<std::size_t>(pos++)] = x(i, c);
    for (Index i = 0; i < n; ++i) buf[static_cast<std::size_t>(pos++)] = x(i, c);
    for (Index i = n - 1; i >= half; --i) buf[static_cast<std::size_t>(pos++)] = x(i, c);
    auto spec = detail::fft_forward(std::move(buf));
    spec.resize(bins);
    f_plus[static_cast<std::size_t>(c)] = std::move(spec);
  }
  std::vector<double> freqs(bins);
  for (std::size_t j = 0; j < bins; ++j) freqs[j] = static_cast<double>(j) / static_cast<double>(ext);

  const auto kk = static_cast<std::size_t>(k_modes);
  const auto mm = static_cast<std::size_t>(m);
  // u[k][c][j]
  std::vector<std::vector<std::vector<Complex>>> u(
      kk, std::vector<std::vector<Complex>>(mm, std::vector<Complex>(bins, Complex(0.0, 0.0))));
  std::vector<std::vector<Complex>> lambda(mm, std::vector<Complex>(bins, Complex(0.0, 0.0)));
  std::vector<double> omega = initial_omegas(cfg, n);

  int iteration = 0;
  std::vector<std::vector<Complex>> total(mm, std::vector<Complex>(bins));
  std::vector<Complex> previous(bins);
  double f_energy = 0.0;
  for (const auto& fc : f_plus)
    for (const auto& v : fc) f_energy += std::norm(v);

  // One Gauss-Seidel sweep: each mode sees the latest update of the others.
  // Returns the squared update and the squared mode norms.
  auto sweep = [&](bool move_omega) {
    double diff = 0.0;
    double energy = 0.0;
    for (std::size_t c = 0; c < mm; ++c) {
      std::fill(total[c].begin(), total[c].end(), Complex(0.0, 0.0));
      for (std::size_t k = 0; k < kk; ++k)
        for (std::size_t j = 0; j < bins; ++j) total[c][j] += u[k][c][j];
    }
    for (std::size_t k = 0; k < kk; ++k) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t c = 0; c < mm; ++c) {
        auto& uk = u[k][c];
        auto& sum = total[c];
        previous = uk;
        for (std::size_t j = 0; j < bins; ++j) {
          const Complex others = sum[j] - uk[j];
          const double d = freqs[j] - omega[k];
          uk[j] = (f_plus[c][j] - others - 0.5 * lambda[c][j]) / (1.0 + cfg.penalty_alpha * d * d);
          sum[j] = others + uk[j];
          const double p = std::norm(uk[j]);
          num += freqs[j] * p;
          den += p;
          diff += std::norm(uk[j] - previous[j]);
        }
      }
      energy += den;
      if (move_omega && den > 0.0) omega[k] = num / den;
    }
    return std::make_pair(diff, energy);
  };

  // Bandwidth phase: modes and shared center frequencies, no multiplier.
  bool converged = false;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    ++iteration;
    const auto [diff, energy] = sweep(true);
    if (energy > 0.0 ? std::sqrt(diff / energy) < cfg.tolerance : diff == 0.0) {
      converged = true;
      break;
    }
  }

  // Reconstruction phase: dual ascent with the center frequencies frozen.
  // Moving frequencies and a growing multiplier feed each other and diverge
  // on broadband input; with fixed frequencies the problem is a convex
  // quadratic and the multiplier settles.
  if (cfg.dual_step > 0.0 && f_energy > 0.0) {
    bool reconstructed = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      ++iteration;
      sweep(false);
      double primal = 0.0;
      for (std::size_t c = 0; c < mm; ++c)
        for (std::size_t j = 0; j < bins; ++j) {
          const Complex r = total[c][j] - f_plus[c][j];
          lambda[c][j] += cfg.dual_step * r;
          primal += std::norm(r);
        }
      if (std::sqrt(primal / f_energy) < cfg.tolerance) {
        reconstructed = true;
        break;
      }
    }
    converged = converged && reconstructed;
  }

  // Back to the time domain: Hermitian completion, inverse FFT, drop the mirror.
  std::vector<Eigen::MatrixXd> modes(kk, Eigen::MatrixXd(n, m));
  for (std::size_t k = 0; k < kk; ++k) {
    for (std::size_t c = 0; c < mm; ++c) {
      std::vector<Complex> full(static_cast<std::size_t>(ext), Complex(0.0, 0.0));
      full[0] = Complex(u[k][c][0].real(), 0.0);
      for (std::size_t j = 1; j < bins; ++j) {
        full[j] = u[k][c][j];
        full[static_cast<std::size_t>(ext) - j] = std::conj(u[k][c][j]);
      }
      const auto time = detail::fft_backward(std::move(full));
      for (Index i = 0; i < n; ++i) {
        modes[k](i, static_cast<Index>(c)) = time[static_cast<std::size_t>(half + i)].real() / static_cast<double>(ext);
      }
    }
  }

  std::vector<std::size_t> order(kk);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&omega](std::size_t a, std::size_t b) { return omega[a] < omega[b]; });
  std::vector<Eigen::MatrixXd> sorted_modes;
  std::vector<double> sorted_omega;
  for (std::size_t idx : order) {
    sorted_modes.push_back(std::move(modes[idx]));
    sorted_omega.push_back(omega[idx]);
  }

  ModeSet out = make_mode_set(series, std::move(sorted_modes), std::move(sorted_omega));
  out.iterations = iteration;
  out.converged = converged;
  return out;
}

ModeSet score_modes_hurst(ModeSet modes, const HurstScoring& scoring) {
  if (modes.modes.empty()) throw Error(ErrorKind::InvalidArgument, "mode set is empty");
  const Index n = modes.modes.front().rows();
  const ScaleGrid scales = scoring.scales ? *scoring.scales : ScaleGrid::default_for(n, scoring.detrend.order);
  const QGrid q_two(std::vector<double>{2.0});
  modes.hurst_per_mode.clear();
  for (const auto& mode : modes.modes) {
    const MultichannelSeries s(mode, modes.sample_rate_hz, modes.channel_labels);
    const auto surface = analyze_fluctuations(s, Variant::MahalanobisFM, scales, q_two, scoring.detrend,
                                              scoring.covariance);
    modes.hurst_per_mode.push_back(fit_hurst(surface).h_q.front());
  }
  return modes;
}

int select_k1(std::span<const double> h2) {
  if (h2.size() < 2) throw Error(ErrorKind::SingleMode, "cutoff selection needs at least two modes");
  std::size_t best = 0;
  double best_gap = std::abs(h2[0] - h2[1]);
  for (std::size_t k = 1; k + 1 < h2.size(); ++k) {
    const double gap = std::abs(h2[k] - h2[k + 1]);
    // gaps equal up to rounding count as ties
    if (gap > best_gap + 1e-12 * std::max(1.0, best_gap)) {
      best = k;
      best_gap = gap;
    }
  }
  return static_cast<int>(best) + 1;
}

int select_k1(const ModeSet& modes) {
  if (modes.hurst_per_mode.size() != modes.modes.size()) {
    throw Error(ErrorKind::InvalidArgument, "modes have not been scored");
  }
  return select_k1(modes.hurst_per_mode);
}

MultichannelSeries reconstruct_signal(const ModeSet& modes, int k1) {
  if (k1 < 1 || k1 > modes.k()) {
    throw Error(ErrorKind::IndexOutOfRange, "cutoff must lie in [1, " + std::to_string(modes.k()) + "]", k1);
  }
  Eigen::MatrixXd sum = modes.modes.front();
  for (int k = 1; k < k1; ++k) sum += modes.modes[static_cast<std::size_t>(k)];
  return MultichannelSeries(std::move(sum), modes.sample_rate_hz, modes.channel_labels);
}

}  // namespace mvf
