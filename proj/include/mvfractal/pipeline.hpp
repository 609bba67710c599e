#pragma once

#include "mvfractal/diagnosis.hpp"
#include "mvfractal/error.hpp"
#include "mvfractal/features.hpp"
#include "mvfractal/fluctuation.hpp"
#include "mvfractal/io.hpp"
#include "mvfractal/mvmd.hpp"
#include "mvfractal/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mvf {

inline constexpr const char* kLibraryVersion = "0.1.0";

Variant parse_variant(std::string_view text);
CovarianceMode parse_covariance_mode(std::string_view text);

/// Scale grid request. A zero bound means "the default for the series".
struct ScaleSpec {
  Index min_scale = 0;
  Index max_scale = 0;
  int count = 20;

  ScaleGrid build(Index series_length, int detrend_order) const;
  /// "MIN:MAX:COUNT"
  static ScaleSpec parse(std::string_view text);
};

struct QSpec {
  double q_min = -5.0;
  double q_max = 5.0;
  double step = 0.5;

  QGrid build() const;
  /// "MIN:MAX:STEP"
  static QSpec parse(std::string_view text);
};

struct PipelineConfig {
  std::string input_path;
  IngestOptions ingest;
  std::optional<MvmdConfig> mvmd;  ///< unset disables the decomposition stage
  std::optional<int> k1_override;
  DetrendConfig detrend;
  ScaleSpec scales;
  QSpec q;
  std::optional<FitRange> fit_range;
  CovarianceEstimator covariance;
  Variant variant = Variant::MahalanobisFM;
  std::string output_dir;
  std::string model_path;  ///< optional diagnosis model to classify against
  std::uint64_t seed = 0;

  void validate() const;
};

/// Canonical JSON of the configuration (keys sorted, doubles round-trip).
/// `output_dir` is where results go, not what is computed, and is omitted.
std::string config_to_json(const PipelineConfig& cfg);
/// Reads a JSON config; fields absent from the document keep their value in
/// `base`.
PipelineConfig config_from_json(std::string_view text, PipelineConfig base = {});
/// FNV-1a 64-bit hash of `config_to_json`, as 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

/// Everything computed from one series.
struct AnalysisResult {
  std::optional<ModeSet> modes;
  std::optional<int> k1;
  FluctuationSurface surface;
  MultifractalFeatures features;
  FeatureVector feature_vector;
};

/// ingest-free part of the pipeline: optional MVMD and K1 reconstruction,
/// then fluctuation analysis, fit, spectrum and descriptors.
AnalysisResult analyze_series(const MultichannelSeries& series, const PipelineConfig& cfg);
/// Same downstream stages on the sum of the first `k1` of the given modes.
AnalysisResult analyze_modes(const ModeSet& modes, int k1, const PipelineConfig& cfg);

/// Error raised by `run_pipeline`, naming the stage that failed.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause);
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct RunReport {
  std::string status = "ok";
  std::string failed_stage;
  std::string error_message;
  std::string generated_at;  ///< UTC, ISO 8601
  std::string config_json;
  std::string config_hash;
  std::optional<AnalysisResult> analysis;
  std::optional<HealthDecision> decision;
  Index series_length = 0;
  std::vector<std::string> channel_labels;
  double sample_rate_hz = 0.0;

  /// The report without `generated_at` is a pure function of config and input.
  std::string to_json(bool with_timestamp = true) const;
};

/// Runs ingest, analysis and optional classification, writing report.json
/// and the TSV tables into `cfg.output_dir` (when set). On failure the
/// partial report is written with status "failed" next to a FAILED marker,
/// and a StageError is thrown.
RunReport run_pipeline(const PipelineConfig& cfg);

/// TSV tables: log-log fluctuation function, H(q), tau(q), f(alpha) and the
/// per-mode metadata.
std::string fluctuation_table(const FluctuationSurface& surface);
std::string hurst_table(const MultifractalFeatures& features);
std::string tau_table(const MultifractalFeatures& features);
std::string spectrum_table(const MultifractalFeatures& features);
std::string modes_table(const ModeSet& modes);

std::string model_to_json(const DiagnosisModel& model);
DiagnosisModel model_from_json(std::string_view text);

/// Feature vector used by the model's feature mode.
Eigen::VectorXd diagnosis_features(const AnalysisResult& result, FeatureMode mode);

/// Analyzes every series with `cfg` and calibrates a model on the results.
DiagnosisModel calibrate_from_series(std::span<const MultichannelSeries> healthy,
                                     std::span<const MultichannelSeries> faulty, const PipelineConfig& cfg,
                                     const CalibrationOptions& options = {});

enum class SynthKind { WhiteNoise, Fgn, Cascade, ToneMix };

const char* to_string(SynthKind k) noexcept;
SynthKind parse_synth_kind(std::string_view text);

struct SynthSpec {
  SynthKind kind = SynthKind::WhiteNoise;
  Index n = 16384;
  Index m = 1;
  std::uint64_t seed = 0;
  double sample_rate_hz = 1.0;
  double hurst = 0.7;
  double cross_corr = 0.0;
  CascadeWeights weights;
  std::vector<Tone> tones{{50.0, 1.0}, {120.0, 1.0}};
  double noise_std = 0.0;
};

MultichannelSeries generate(const SynthSpec& spec);
std::string synth_spec_to_json(const SynthSpec& spec, InputFormat format, bool hex);

/// Writes the generated series to `path` and its parameters to
/// `path` + ".json".
MultichannelSeries emit_synthetic(const SynthSpec& spec, const std::filesystem::path& path, InputFormat format,
                                  bool hex = true);

}  // namespace mvf
