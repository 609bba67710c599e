// Batch front end: analyze, decompose, calibrate, classify, synth.

#include "mvfractal/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

using namespace mvf;

struct CommonFlags {
  std::string config;
  std::string input;
  std::string format;
  std::string channels;
  std::string variant;
  std::optional<int> k;
  std::optional<int> k1;
  std::string scales;
  std::string q;
  std::optional<int> detrend_order;
  std::string cov;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> rate;
  std::optional<Index> raw_channels;
};

void add_common(CLI::App* app, CommonFlags& f, bool with_input = true) {
  app->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
  if (with_input) app->add_option("--input", f.input, "signal file");
  app->add_option("--format", f.format, "csv or raw64")->check(CLI::IsMember({"csv", "raw64"}));
  app->add_option("--channels", f.channels, "comma-separated channel labels or indices");
  app->add_option("--variant", f.variant, "uni, mmfdfa or fm")->check(CLI::IsMember({"uni", "mmfdfa", "fm"}));
  app->add_option("--k", f.k, "number of MVMD modes (enables decomposition)");
  app->add_option("--k1", f.k1, "override the selected mode cutoff");
  app->add_option("--scales", f.scales, "MIN:MAX:COUNT");
  app->add_option("--q", f.q, "MIN:MAX:STEP");
  app->add_option("--detrend-order", f.detrend_order, "polynomial detrending order");
  app->add_option("--cov", f.cov, "identity, diag or full")->check(CLI::IsMember({"identity", "diag", "full"}));
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--rate", f.rate, "sample rate in Hz");
  app->add_option("--raw-channels", f.raw_channels, "channel count of raw64 input");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

PipelineConfig build_config(const CommonFlags& f) {
  PipelineConfig cfg;
  if (!f.config.empty()) cfg = config_from_json(read_file(f.config), cfg);
  if (!f.input.empty()) cfg.input_path = f.input;
  if (!f.format.empty()) cfg.ingest.format = parse_input_format(f.format);
  if (!f.channels.empty()) cfg.ingest.selection = split_list(f.channels);
  if (!f.variant.empty()) cfg.variant = parse_variant(f.variant);
  if (f.k) {
    MvmdConfig m = cfg.mvmd.value_or(MvmdConfig{});
    m.k_modes = *f.k;
    cfg.mvmd = m;
  }
  if (f.k1) cfg.k1_override = f.k1;
  if (!f.scales.empty()) cfg.scales = ScaleSpec::parse(f.scales);
  if (!f.q.empty()) cfg.q = QSpec::parse(f.q);
  if (f.detrend_order) cfg.detrend.order = *f.detrend_order;
  if (!f.cov.empty()) cfg.covariance.mode = parse_covariance_mode(f.cov);
  if (!f.out.empty()) cfg.output_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.rate) cfg.ingest.sample_rate_hz = *f.rate;
  if (f.raw_channels) cfg.ingest.raw_channels = *f.raw_channels;
  return cfg;
}

void print_summary(const RunReport& report) {
  const auto& a = *report.analysis;
  const auto& fv = a.feature_vector;
  std::printf("config %s\n", report.config_hash.c_str());
  std::printf("series %lld x %zu at %g Hz\n", static_cast<long long>(report.series_length), report.channel_labels.size(),
              report.sample_rate_hz);
  if (a.modes) std::printf("modes K=%d K1=%d\n", a.modes->k(), a.k1.value_or(0));
  std::printf("h2 %.6f  delta_h %.6f  width %.6f  alpha_peak %.6f\n", fv.h2, fv.delta_h, fv.spectrum_width,
              fv.alpha_peak);
  const auto low = a.features.low_quality_fits();
  if (!low.empty()) std::printf("warning: %zu q values with r^2 < 0.95\n", low.size());
  if (report.decision) {
    std::printf("decision %s  distance %.6f  threshold %.6f  margin %.6f\n", to_string(report.decision->label),
                report.decision->distance, report.decision->threshold, report.decision->margin);
  }
}

int run_analyze(const CommonFlags& f, const std::string& model) {
  PipelineConfig cfg = build_config(f);
  if (!model.empty()) cfg.model_path = model;
  print_summary(run_pipeline(cfg));
  return 0;
}

int run_decompose(const CommonFlags& f) {
  PipelineConfig cfg = build_config(f);
  if (!cfg.mvmd) cfg.mvmd = MvmdConfig{};
  cfg.validate();
  const MultichannelSeries series = ingest(cfg.input_path, cfg.ingest);
  MvmdConfig m = *cfg.mvmd;
  m.seed = cfg.seed;
  ModeSet modes = mvmd_decompose(series, m);
  modes = score_modes_hurst(std::move(modes),
                            HurstScoring{cfg.detrend, cfg.covariance, cfg.scales.build(series.length(), cfg.detrend.order)});
  modes.k1_cutoff = cfg.k1_override ? *cfg.k1_override : (modes.k() > 1 ? select_k1(modes) : 1);
  if (!cfg.output_dir.empty()) {
    const std::filesystem::path dir = cfg.output_dir;
    for (int k = 0; k < modes.k(); ++k) {
      const MultichannelSeries mode(modes.modes[static_cast<std::size_t>(k)], modes.sample_rate_hz, modes.channel_labels);
      write_csv(dir / ("mode_" + std::to_string(k + 1) + ".csv"), mode, true);
    }
    write_csv(dir / "reconstructed.csv", reconstruct_signal(modes, *modes.k1_cutoff), true);
    write_file_atomic(dir / "modes.tsv", modes_table(modes));
  }
  std::cout << modes_table(modes);
  std::printf("K1 %d  iterations %d  converged %s  relative residual %.3e\n", *modes.k1_cutoff, modes.iterations,
              modes.converged ? "yes" : "no", modes.relative_residual());
  return 0;
}

int run_calibrate(const CommonFlags& f, const std::vector<std::string>& healthy, const std::vector<std::string>& faulty,
                  const std::string& policy, double epsilon, const std::string& distance, const std::string& mode) {
  const PipelineConfig cfg = build_config(f);
  cfg.validate();
  std::vector<MultichannelSeries> h;
  for (const auto& p : healthy) h.push_back(ingest(p, cfg.ingest));
  std::vector<MultichannelSeries> fa;
  for (const auto& p : faulty) fa.push_back(ingest(p, cfg.ingest));
  CalibrationOptions opts;
  opts.policy = policy == "midpoint" ? MarginPolicy::Midpoint : MarginPolicy::MaxHealthy;
  opts.epsilon = epsilon;
  if (distance == "euclidean") opts.kind = DistanceKind::Euclidean;
  if (distance == "mahalanobis") opts.kind = DistanceKind::Mahalanobis;
  opts.feature_mode = mode == "raw-curves" ? FeatureMode::RawCurves : FeatureMode::Descriptors;
  const DiagnosisModel model = calibrate_from_series(h, fa, cfg, opts);
  const std::string text = model_to_json(model);
  if (!cfg.output_dir.empty()) {
    write_file_atomic(std::filesystem::path(cfg.output_dir) / "model.json", text);
  } else {
    std::cout << text;
  }
  std::printf("threshold %.6f  distance %s  references %zu\n", model.threshold, to_string(model.distance_kind),
              model.reference_features.size());
  return 0;
}

int run_synth(SynthSpec spec, const std::string& output, const std::string& format, bool decimal,
              const std::vector<double>& weights, const std::vector<std::string>& tones) {
  if (!weights.empty()) {
    if (weights.size() != 2) throw Error(ErrorKind::InvalidArgument, "--weights needs two values");
    spec.weights = CascadeWeights{weights[0], weights[1]};
  }
  if (!tones.empty()) {
    spec.tones.clear();
    for (const auto& t : tones) {
      const auto colon = t.find(':');
      Tone tone;
      tone.freq_hz = std::stod(t.substr(0, colon));
      if (colon != std::string::npos) tone.amplitude = std::stod(t.substr(colon + 1));
      spec.tones.push_back(tone);
    }
  }
  const InputFormat fmt = parse_input_format(format);
  const auto series = emit_synthetic(spec, output, fmt, !decimal);
  std::printf("wrote %lld x %lld to %s\n", static_cast<long long>(series.length()),
              static_cast<long long>(series.channels()), output.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate multifractal analysis and fault diagnosis"};
  app.require_subcommand(1);

  CommonFlags analyze_flags;
  std::string analyze_model;
  auto* analyze = app.add_subcommand("analyze", "fluctuation analysis, spectrum and optional diagnosis");
  add_common(analyze, analyze_flags);
  analyze->add_option("--model", analyze_model, "diagnosis model to classify against")->check(CLI::ExistingFile);

  CommonFlags decompose_flags;
  auto* decompose = app.add_subcommand("decompose", "MVMD with per-mode Hurst scoring and K1 selection");
  add_common(decompose, decompose_flags);

  CommonFlags calibrate_flags;
  std::vector<std::string> healthy;
  std::vector<std::string> faulty;
  std::string policy = "max-healthy";
  double epsilon = 0.05;
  std::string distance = "auto";
  std::string feature_mode = "descriptors";
  auto* calibrate = app.add_subcommand("calibrate", "fit a diagnosis model from labeled recordings");
  add_common(calibrate, calibrate_flags, false);
  calibrate->add_option("--healthy", healthy, "healthy recordings")->required()->check(CLI::ExistingFile);
  calibrate->add_option("--faulty", faulty, "faulty recordings")->check(CLI::ExistingFile);
  calibrate->add_option("--policy", policy, "max-healthy or midpoint")->check(CLI::IsMember({"max-healthy", "midpoint"}));
  calibrate->add_option("--epsilon", epsilon, "relative margin of the max-healthy policy");
  calibrate->add_option("--distance", distance, "auto, euclidean or mahalanobis")
      ->check(CLI::IsMember({"auto", "euclidean", "mahalanobis"}));
  calibrate->add_option("--feature-mode", feature_mode, "descriptors or raw-curves")
      ->check(CLI::IsMember({"descriptors", "raw-curves"}));

  CommonFlags classify_flags;
  std::string classify_model;
  auto* classify_cmd = app.add_subcommand("classify", "analyze a recording and classify it");
  add_common(classify_cmd, classify_flags);
  classify_cmd->add_option("--model", classify_model, "diagnosis model")->required()->check(CLI::ExistingFile);

  SynthSpec spec;
  std::string synth_kind = "white";
  std::string synth_out;
  std::string synth_format = "csv";
  bool synth_decimal = false;
  std::vector<double> weights;
  std::vector<std::string> tones;
  auto* synth = app.add_subcommand("synth", "write a synthetic test signal with a JSON sidecar");
  synth->add_option("--kind", synth_kind, "white, fgn, cascade or tones")
      ->check(CLI::IsMember({"white", "fgn", "cascade", "tones"}));
  synth->add_option("--n", spec.n, "samples per channel");
  synth->add_option("--m", spec.m, "channels");
  synth->add_option("--seed", spec.seed, "random seed");
  synth->add_option("--rate", spec.sample_rate_hz, "sample rate in Hz");
  synth->add_option("--hurst", spec.hurst, "Hurst exponent of fgn");
  synth->add_option("--cross-corr", spec.cross_corr, "pairwise channel correlation");
  synth->add_option("--weights", weights, "cascade weights A,B")->delimiter(',');
  synth->add_option("--tones", tones, "tones FREQ[:AMP],...")->delimiter(',');
  synth->add_option("--noise-std", spec.noise_std, "additive noise of tones");
  synth->add_option("--format", synth_format, "csv or raw64")->check(CLI::IsMember({"csv", "raw64"}));
  synth->add_flag("--decimal", synth_decimal, "write decimal instead of hex floats in CSV");
  synth->add_option("--output", synth_out, "output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) return run_analyze(analyze_flags, analyze_model);
    if (*decompose) return run_decompose(decompose_flags);
    if (*calibrate) return run_calibrate(calibrate_flags, healthy, faulty, policy, epsilon, distance, feature_mode);
    if (*classify_cmd) return run_analyze(classify_flags, classify_model);
    if (*synth) {
      spec.kind = parse_synth_kind(synth_kind);
      return run_synth(spec, synth_out, synth_format, synth_decimal, weights, tones);
    }
  } catch (const mvf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
