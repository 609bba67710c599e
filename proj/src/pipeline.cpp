#include "mvfractal/pipeline.hpp"

#include "fft.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <ctime>
#include <functional>

namespace mvf {

using json = nlohmann::json;

Variant parse_variant(std::string_view text) {
  if (text == "uni") return Variant::Univariate;
  if (text == "mmfdfa") return Variant::EuclideanMMFDFA;
  if (text == "fm") return Variant::MahalanobisFM;
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + std::string(text) + "'");
}

CovarianceMode parse_covariance_mode(std::string_view text) {
  if (text == "identity") return CovarianceMode::Identity;
  if (text == "diag") return CovarianceMode::DiagonalVariances;
  if (text == "full") return CovarianceMode::FullSample;
  throw Error(ErrorKind::InvalidArgument, "unknown covariance mode '" + std::string(text) + "'");
}

namespace {

CovarianceScope parse_scope(std::string_view text) {
  if (text == "global") return CovarianceScope::GlobalDetrended;
  if (text == "per-scale") return CovarianceScope::PerScale;
  throw Error(ErrorKind::InvalidArgument, "unknown covariance scope '" + std::string(text) + "'");
}

OmegaInit parse_omega_init(std::string_view text) {
  if (text == "uniform") return OmegaInit::UniformSpread;
  if (text == "random") return OmegaInit::Random;
  if (text == "zero") return OmegaInit::Zero;
  throw Error(ErrorKind::InvalidArgument, "unknown omega init '" + std::string(text) + "'");
}

std::vector<std::string_view> split_colon(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto c = text.find(':', start);
    parts.push_back(text.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return parts;
}

template <typename T>
T parse_field(std::string_view field, std::string_view what) {
  T v{};
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw Error(ErrorKind::ParseError, "cannot parse " + std::string(what) + " from '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

ScaleGrid ScaleSpec::build(Index series_length, int detrend_order) const {
  if (min_scale == 0 && max_scale == 0 && count == 20) return ScaleGrid::default_for(series_length, detrend_order);
  const Index lo = min_scale > 0 ? min_scale : std::max<Index>(16, detrend_order + 2);
  const Index hi = max_scale > 0 ? max_scale : series_length / 4;
  return ScaleGrid::log_spaced(lo, hi, count, series_length, detrend_order);
}

ScaleSpec ScaleSpec::parse(std::string_view text) {
  const auto parts = split_colon(text);
  if (parts.size() != 3) throw Error(ErrorKind::ParseError, "scales must be MIN:MAX:COUNT");
  return ScaleSpec{parse_field<Index>(parts[0], "min scale"), parse_field<Index>(parts[1], "max scale"),
                   parse_field<int>(parts[2], "scale count")};
}

QGrid QSpec::build() const { return QGrid::range(q_min, q_max, step); }

QSpec QSpec::parse(std::string_view text) {
  const auto parts = split_colon(text);
  if (parts.size() != 3) throw Error(ErrorKind::ParseError, "q grid must be MIN:MAX:STEP");
  return QSpec{parse_field<double>(parts[0], "q min"), parse_field<double>(parts[1], "q max"),
               parse_field<double>(parts[2], "q step")};
}

void PipelineConfig::validate() const {
  if (mvmd) mvmd->validate();
  if (k1_override && !mvmd) throw Error(ErrorKind::InvalidArgument, "k1 override needs the decomposition stage");
  if (k1_override && *k1_override < 1) throw Error(ErrorKind::IndexOutOfRange, "k1 must be >= 1", *k1_override);
  if (detrend.order < 0) throw Error(ErrorKind::InvalidArgument, "detrend order must be >= 0");
  if (variant == Variant::Univariate && ingest.selection.size() > 1) {
    throw Error(ErrorKind::MultichannelInput, "univariate variant needs exactly one selected channel");
  }
}

namespace {

json config_json_object(const PipelineConfig& cfg) {
  json j;
  j["input"] = {{"path", cfg.input_path},
                {"format", to_string(cfg.ingest.format)},
                {"channels", cfg.ingest.selection},
                {"sample_rate_hz", cfg.ingest.sample_rate_hz ? json(*cfg.ingest.sample_rate_hz) : json(nullptr)},
                {"raw_channels", cfg.ingest.raw_channels},
                {"raw_labels", cfg.ingest.raw_labels}};
  if (cfg.mvmd) {
    j["mvmd"] = {{"k_modes", cfg.mvmd->k_modes},
                 {"penalty_alpha", cfg.mvmd->penalty_alpha},
                 {"tolerance", cfg.mvmd->tolerance},
                 {"max_iterations", cfg.mvmd->max_iterations},
                 {"omega_init", to_string(cfg.mvmd->omega_init)},
                 {"dual_step", cfg.mvmd->dual_step}};
  } else {
    j["mvmd"] = nullptr;
  }
  j["k1"] = cfg.k1_override ? json(*cfg.k1_override) : json(nullptr);
  j["detrend"] = {{"order", cfg.detrend.order}, {"mirrored", cfg.detrend.mirrored}};
  j["scales"] = {{"min", cfg.scales.min_scale}, {"max", cfg.scales.max_scale}, {"count", cfg.scales.count}};
  j["q"] = {{"min", cfg.q.q_min}, {"max", cfg.q.q_max}, {"step", cfg.q.step}};
  j["fit_range"] = cfg.fit_range ? json{{"min_scale", cfg.fit_range->min_scale}, {"max_scale", cfg.fit_range->max_scale}}
                                 : json(nullptr);
  j["covariance"] = {{"mode", to_string(cfg.covariance.mode)}, {"scope", to_string(cfg.covariance.scope)}};
  j["variant"] = to_string(cfg.variant);
  j["model_path"] = cfg.model_path;
  j["seed"] = cfg.seed;
  return j;
}

template <typename T>
void read_if(const json& obj, const char* key, T& target) {
  if (obj.contains(key) && !obj.at(key).is_null()) target = obj.at(key).get<T>();
}

}  // namespace

std::string config_to_json(const PipelineConfig& cfg) { return config_json_object(cfg).dump(2); }

PipelineConfig config_from_json(std::string_view text, PipelineConfig cfg) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what(), static_cast<long long>(e.byte));
  }
  try {
    if (j.contains("input")) {
      const auto& in = j.at("input");
      read_if(in, "path", cfg.input_path);
      if (in.contains("format")) cfg.ingest.format = parse_input_format(in.at("format").get<std::string>());
      read_if(in, "channels", cfg.ingest.selection);
      if (in.contains("sample_rate_hz")) {
        const auto& r = in.at("sample_rate_hz");
        cfg.ingest.sample_rate_hz = r.is_null() ? std::nullopt : std::optional<double>(r.get<double>());
      }
      read_if(in, "raw_channels", cfg.ingest.raw_channels);
      read_if(in, "raw_labels", cfg.ingest.raw_labels);
    }
    if (j.contains("mvmd")) {
      const auto& m = j.at("mvmd");
      if (m.is_null() || (m.is_boolean() && !m.get<bool>())) {
        cfg.mvmd.reset();
      } else {
        MvmdConfig mc = cfg.mvmd.value_or(MvmdConfig{});
        if (m.is_object()) {
          read_if(m, "k_modes", mc.k_modes);
          read_if(m, "penalty_alpha", mc.penalty_alpha);
          read_if(m, "tolerance", mc.tolerance);
          read_if(m, "max_iterations", mc.max_iterations);
          if (m.contains("omega_init")) mc.omega_init = parse_omega_init(m.at("omega_init").get<std::string>());
          read_if(m, "dual_step", mc.dual_step);
        }
        cfg.mvmd = mc;
      }
    }
    if (j.contains("k1")) {
      cfg.k1_override = j.at("k1").is_null() ? std::nullopt : std::optional<int>(j.at("k1").get<int>());
    }
    if (j.contains("detrend")) {
      read_if(j.at("detrend"), "order", cfg.detrend.order);
      read_if(j.at("detrend"), "mirrored", cfg.detrend.mirrored);
    }
    if (j.contains("scales")) {
      read_if(j.at("scales"), "min", cfg.scales.min_scale);
      read_if(j.at("scales"), "max", cfg.scales.max_scale);
      read_if(j.at("scales"), "count", cfg.scales.count);
    }
    if (j.contains("q")) {
      read_if(j.at("q"), "min", cfg.q.q_min);
      read_if(j.at("q"), "max", cfg.q.q_max);
      read_if(j.at("q"), "step", cfg.q.step);
    }
    if (j.contains("fit_range")) {
      const auto& f = j.at("fit_range");
      if (f.is_null()) {
        cfg.fit_range.reset();
      } else {
        cfg.fit_range = FitRange{f.at("min_scale").get<Index>(), f.at("max_scale").get<Index>()};
      }
    }
    if (j.contains("covariance")) {
      const auto& c = j.at("covariance");
      if (c.contains("mode")) cfg.covariance.mode = parse_covariance_mode(c.at("mode").get<std::string>());
      if (c.contains("scope")) cfg.covariance.scope = parse_scope(c.at("scope").get<std::string>());
    }
    if (j.contains("variant")) cfg.variant = parse_variant(j.at("variant").get<std::string>());
    read_if(j, "model_path", cfg.model_path);
    read_if(j, "output_dir", cfg.output_dir);
    read_if(j, "seed", cfg.seed);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string canonical = config_json_object(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StageError::StageError(std::string stage, const Error& cause)
    : Error(cause.kind(), stage + ": " + cause.message(), cause.index()), stage_(std::move(stage)) {}

namespace {

void require_variant_fits(const MultichannelSeries& series, const PipelineConfig& cfg) {
  if (cfg.variant == Variant::Univariate && series.channels() != 1) {
    throw Error(ErrorKind::MultichannelInput,
                "univariate variant needs exactly one channel, have " + std::to_string(series.channels()));
  }
}

struct Decomposed {
  ModeSet modes;
  int k1 = 1;
  MultichannelSeries reconstructed;
};

Decomposed decompose_stage(const MultichannelSeries& series, const PipelineConfig& cfg) {
  MvmdConfig mc = *cfg.mvmd;
  mc.seed = cfg.seed;
  ModeSet modes = mvmd_decompose(series, mc);
  HurstScoring scoring{cfg.detrend, cfg.covariance, cfg.scales.build(series.length(), cfg.detrend.order)};
  modes = score_modes_hurst(std::move(modes), scoring);
  const int k1 = cfg.k1_override ? *cfg.k1_override : (modes.k() == 1 ? 1 : select_k1(modes));
  modes.k1_cutoff = k1;
  MultichannelSeries recon = reconstruct_signal(modes, k1);
  return Decomposed{std::move(modes), k1, std::move(recon)};
}

FluctuationSurface fluctuation_stage(const MultichannelSeries& series, const PipelineConfig& cfg) {
  require_variant_fits(series, cfg);
  const ScaleGrid grid = cfg.scales.build(series.length(), cfg.detrend.order);
  return analyze_fluctuations(series, cfg.variant, grid, cfg.q.build(), cfg.detrend, cfg.covariance);
}

void feature_stage(AnalysisResult& out, const PipelineConfig& cfg) {
  out.features = derive_spectrum(fit_hurst(out.surface, cfg.fit_range));
  out.feature_vector = summarize_features(out.features);
}

}  // namespace

AnalysisResult analyze_series(const MultichannelSeries& series, const PipelineConfig& cfg) {
  AnalysisResult out;
  if (cfg.mvmd) {
    auto d = decompose_stage(series, cfg);
    out.surface = fluctuation_stage(d.reconstructed, cfg);
    out.modes = std::move(d.modes);
    out.k1 = d.k1;
  } else {
    out.surface = fluctuation_stage(series, cfg);
  }
  feature_stage(out, cfg);
  return out;
}

AnalysisResult analyze_modes(const ModeSet& modes, int k1, const PipelineConfig& cfg) {
  AnalysisResult out;
  out.surface = fluctuation_stage(reconstruct_signal(modes, k1), cfg);
  out.modes = modes;
  out.modes->k1_cutoff = k1;
  out.k1 = k1;
  feature_stage(out, cfg);
  return out;
}

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  const auto r = static_cast<Index>(rows.size());
  const Index c = r ? static_cast<Index>(rows.at(0).size()) : 0;
  Eigen::MatrixXd m(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Index>(row.size()) != c) throw Error(ErrorKind::ParseError, "ragged matrix");
    for (Index j = 0; j < c; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& arr) {
  const auto v = arr.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

json modes_json(const ModeSet& modes) {
  std::vector<double> freqs;
  for (double w : modes.omegas) freqs.push_back(w * modes.sample_rate_hz);
  return {{"k", modes.k()},
          {"omegas", modes.omegas},
          {"frequencies_hz", freqs},
          {"hurst_per_mode", modes.hurst_per_mode},
          {"k1", modes.k1_cutoff ? json(*modes.k1_cutoff) : json(nullptr)},
          {"iterations", modes.iterations},
          {"converged", modes.converged},
          {"relative_residual", modes.relative_residual()}};
}

json surface_json(const FluctuationSurface& s) {
  json j = {{"variant", to_string(s.variant)},
            {"q", s.q_grid.values()},
            {"scales", s.scale_grid.scales()},
            {"values", matrix_json(s.values)}};
  if (s.covariance_used) {
    j["covariance"] = matrix_json(s.covariance_used->sigma());
    j["covariance_shrinkage"] = s.covariance_used->shrinkage();
  } else {
    j["covariance"] = nullptr;
  }
  if (!s.per_scale_covariance.empty()) {
    json per = json::array();
    for (const auto& c : s.per_scale_covariance) per.push_back(matrix_json(c.sigma()));
    j["per_scale_covariance"] = std::move(per);
  }
  return j;
}

json features_json(const MultifractalFeatures& f) {
  return {{"q", f.q_grid.values()},       {"h_q", f.h_q},         {"h_fit_r2", f.h_fit_r2},
          {"tau_q", f.tau_q},             {"alpha_q", f.alpha_q}, {"f_alpha", f.f_alpha},
          {"low_quality_fits", f.low_quality_fits()}};
}

json feature_vector_json(const FeatureVector& fv) {
  json j;
  const Eigen::VectorXd v = fv.as_vector();
  for (std::size_t i = 0; i < FeatureVector::kSize; ++i) j[std::string(FeatureVector::kNames[i])] = v(static_cast<Index>(i));
  return j;
}

std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string RunReport::to_json(bool with_timestamp) const {
  json j;
  j["status"] = status;
  if (!failed_stage.empty()) {
    j["failed_stage"] = failed_stage;
    j["error"] = error_message;
  }
  if (with_timestamp) j["generated_at"] = generated_at;
  j["config"] = config_json.empty() ? json(nullptr) : json::parse(config_json);
  j["provenance"] = {{"config_hash", config_hash},
                     {"library", std::string("mvfractal ") + kLibraryVersion},
                     {"eigen", eigen_version()},
                     {"fftw", detail::fft_library_version()},
                     {"seed", config_json.empty() ? json(nullptr) : json::parse(config_json).at("seed")}};
  if (series_length > 0) {
    j["input"] = {{"length", series_length}, {"channels", channel_labels}, {"sample_rate_hz", sample_rate_hz}};
  }
  if (analysis) {
    if (analysis->modes) j["modes"] = modes_json(*analysis->modes);
    j["surface"] = surface_json(analysis->surface);
    if (analysis->features.complete()) {
      j["features"] = features_json(analysis->features);
      j["feature_vector"] = feature_vector_json(analysis->feature_vector);
    }
  }
  if (decision) {
    j["decision"] = {{"distance", decision->distance},
                     {"threshold", decision->threshold},
                     {"margin", decision->margin},
                     {"label", to_string(decision->label)}};
  }
  return j.dump(2) + "\n";
}

std::string fluctuation_table(const FluctuationSurface& surface) {
  std::string out = "q\tscale\tlog_scale\tlog_fq\n";
  const auto& q = surface.q_grid.values();
  const auto& s = surface.scale_grid.scales();
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t k = 0; k < s.size(); ++k) {
      out += format_double(q[i]) + '\t' + std::to_string(s[k]) + '\t' +
             format_double(std::log(static_cast<double>(s[k]))) + '\t' +
             format_double(std::log(surface.values(static_cast<Index>(i), static_cast<Index>(k)))) + '\n';
    }
  }
  return out;
}

std::string hurst_table(const MultifractalFeatures& f) {
  std::string out = "q\th_q\tr2\n";
  for (std::size_t i = 0; i < f.h_q.size(); ++i)
    out += format_double(f.q_grid[i]) + '\t' + format_double(f.h_q[i]) + '\t' + format_double(f.h_fit_r2[i]) + '\n';
  return out;
}

std::string tau_table(const MultifractalFeatures& f) {
  std::string out = "q\ttau_q\n";
  for (std::size_t i = 0; i < f.tau_q.size(); ++i) out += format_double(f.q_grid[i]) + '\t' + format_double(f.tau_q[i]) + '\n';
  return out;
}

std::string spectrum_table(const MultifractalFeatures& f) {
  std::string out = "q\talpha\tf_alpha\n";
  for (std::size_t i = 0; i < f.alpha_q.size(); ++i)
    out += format_double(f.q_grid[i]) + '\t' + format_double(f.alpha_q[i]) + '\t' + format_double(f.f_alpha[i]) + '\n';
  return out;
}

std::string modes_table(const ModeSet& modes) {
  std::string out = "mode\tomega\tfreq_hz\th2\tselected\n";
  for (int k = 0; k < modes.k(); ++k) {
    const auto i = static_cast<std::size_t>(k);
    const std::string h2 = i < modes.hurst_per_mode.size() ? format_double(modes.hurst_per_mode[i]) : "nan";
    const bool selected = modes.k1_cutoff && k < *modes.k1_cutoff;
    out += std::to_string(k + 1) + '\t' + format_double(modes.omegas[i]) + '\t' +
           format_double(modes.omegas[i] * modes.sample_rate_hz) + '\t' + h2 + '\t' + (selected ? "1" : "0") + '\n';
  }
  return out;
}

Eigen::VectorXd diagnosis_features(const AnalysisResult& result, FeatureMode mode) {
  return mode == FeatureMode::RawCurves ? curve_features(result.features) : result.feature_vector.as_vector();
}

RunReport run_pipeline(const PipelineConfig& cfg) {
  RunReport report;
  report.generated_at = utc_now();
  const std::filesystem::path out_dir = cfg.output_dir;

  auto flush = [&]() {
    if (out_dir.empty()) return;
    write_file_atomic(out_dir / "report.json", report.to_json());
    if (!report.analysis) return;
    const auto& a = *report.analysis;
    if (a.modes) write_file_atomic(out_dir / "modes.tsv", modes_table(*a.modes));
    if (a.surface.values.size() > 0) write_file_atomic(out_dir / "fluctuation.tsv", fluctuation_table(a.surface));
    if (a.features.complete()) {
      write_file_atomic(out_dir / "hurst.tsv", hurst_table(a.features));
      write_file_atomic(out_dir / "tau.tsv", tau_table(a.features));
      write_file_atomic(out_dir / "spectrum.tsv", spectrum_table(a.features));
    }
  };

  std::string stage = "config";
  try {
    cfg.validate();
    report.config_json = config_to_json(cfg);
    report.config_hash = config_hash(cfg);

    stage = "ingest";
    if (cfg.input_path.empty()) throw Error(ErrorKind::InvalidArgument, "no input path");
    const MultichannelSeries series = ingest(cfg.input_path, cfg.ingest);
    report.series_length = series.length();
    report.channel_labels = series.channel_labels();
    report.sample_rate_hz = series.sample_rate_hz();

    report.analysis.emplace();
    auto& a = *report.analysis;
    std::optional<MultichannelSeries> analyzed;
    if (cfg.mvmd) {
      stage = "mvmd";
      auto d = decompose_stage(series, cfg);
      a.modes = std::move(d.modes);
      a.k1 = d.k1;
      analyzed = std::move(d.reconstructed);
    }
    stage = "fluctuation";
    a.surface = fluctuation_stage(analyzed ? *analyzed : series, cfg);
    stage = "features";
    feature_stage(a, cfg);

    if (!cfg.model_path.empty()) {
      stage = "diagnosis";
      const DiagnosisModel model = model_from_json(read_file(cfg.model_path));
      report.decision = classify(diagnosis_features(a, model.feature_mode), model);
    }
    stage = "write";
    flush();
  } catch (const Error& e) {
    report.status = "failed";
    report.failed_stage = stage;
    report.error_message = e.what();
    if (!out_dir.empty() && stage != "write") {
      try {
        flush();
        write_file_atomic(out_dir / "FAILED", stage + ": " + e.what() + "\n");
      } catch (const Error&) {
        // the original error is the one worth reporting
      }
    }
    throw StageError(stage, e);
  }
  return report;
}

std::string model_to_json(const DiagnosisModel& model) {
  json j;
  j["distance_kind"] = to_string(model.distance_kind);
  j["feature_mode"] = to_string(model.feature_mode);
  j["margin_policy"] = to_string(model.margin_policy);
  j["epsilon"] = model.epsilon;
  j["threshold"] = model.threshold;
  j["center"] = vector_json(model.reference_center);
  j["scale"] = vector_json(model.reference_scale);
  if (model.reference_cov) {
    j["feature_cov"] = matrix_json(model.reference_cov->sigma());
    j["feature_cov_shrinkage"] = model.reference_cov->shrinkage();
  } else {
    j["feature_cov"] = nullptr;
  }
  json refs = json::array();
  for (const auto& r : model.reference_features) refs.push_back(vector_json(r));
  j["reference_features"] = std::move(refs);
  if (model.feature_mode == FeatureMode::Descriptors) {
    j["feature_names"] = std::vector<std::string>(FeatureVector::kNames.begin(), FeatureVector::kNames.end());
  }
  return j.dump(2) + "\n";
}

DiagnosisModel model_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    std::optional<Eigen::MatrixXd> cov;
    if (!j.at("feature_cov").is_null()) cov = matrix_from_json(j.at("feature_cov"));
    DiagnosisModel model = make_model(vector_from_json(j.at("center")), vector_from_json(j.at("scale")), cov,
                                      j.at("threshold").get<double>());
    const auto kind = j.at("distance_kind").get<std::string>();
    if (kind != to_string(model.distance_kind)) throw Error(ErrorKind::ParseError, "distance kind disagrees with covariance");
    const auto mode = j.at("feature_mode").get<std::string>();
    if (mode == to_string(FeatureMode::RawCurves)) {
      model.feature_mode = FeatureMode::RawCurves;
    } else if (mode != to_string(FeatureMode::Descriptors)) {
      throw Error(ErrorKind::ParseError, "unknown feature mode '" + mode + "'");
    }
    const auto policy = j.at("margin_policy").get<std::string>();
    model.margin_policy = policy == to_string(MarginPolicy::Midpoint) ? MarginPolicy::Midpoint : MarginPolicy::MaxHealthy;
    model.epsilon = j.at("epsilon").get<double>();
    for (const auto& r : j.at("reference_features")) model.reference_features.push_back(vector_from_json(r));
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("model: ") + e.what());
  }
}

DiagnosisModel calibrate_from_series(std::span<const MultichannelSeries> healthy,
                                     std::span<const MultichannelSeries> faulty, const PipelineConfig& cfg,
                                     const CalibrationOptions& options) {
  auto features = [&](std::span<const MultichannelSeries> set) {
    std::vector<Eigen::VectorXd> out;
    for (const auto& s : set) out.push_back(diagnosis_features(analyze_series(s, cfg), options.feature_mode));
    return out;
  };
  const auto h = features(healthy);
  const auto f = features(faulty);
  return calibrate_threshold(h, f, options);
}

const char* to_string(SynthKind k) noexcept {
  switch (k) {
    case SynthKind::WhiteNoise: return "white";
    case SynthKind::Fgn: return "fgn";
    case SynthKind::Cascade: return "cascade";
    case SynthKind::ToneMix: return "tones";
  }
  return "?";
}

SynthKind parse_synth_kind(std::string_view text) {
  if (text == "white") return SynthKind::WhiteNoise;
  if (text == "fgn") return SynthKind::Fgn;
  if (text == "cascade") return SynthKind::Cascade;
  if (text == "tones") return SynthKind::ToneMix;
  throw Error(ErrorKind::InvalidArgument, "unknown synthetic kind '" + std::string(text) + "'");
}

MultichannelSeries generate(const SynthSpec& spec) {
  switch (spec.kind) {
    case SynthKind::WhiteNoise: return gen_white_noise(spec.n, spec.m, spec.seed, spec.sample_rate_hz);
    case SynthKind::Fgn: return gen_fgn(spec.n, spec.m, spec.hurst, spec.cross_corr, spec.seed, spec.sample_rate_hz);
    case SynthKind::Cascade:
      return gen_cascade_noise(spec.n, spec.m, spec.weights, spec.cross_corr, spec.seed, spec.sample_rate_hz);
    case SynthKind::ToneMix:
      return gen_tone_mix(spec.n, spec.m, spec.tones, spec.sample_rate_hz, spec.noise_std, spec.seed);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown synthetic kind");
}

std::string synth_spec_to_json(const SynthSpec& spec, InputFormat format, bool hex) {
  json j = {{"kind", to_string(spec.kind)}, {"n", spec.n},
            {"m", spec.m},                  {"seed", spec.seed},
            {"sample_rate_hz", spec.sample_rate_hz}, {"format", to_string(format)}};
  if (format == InputFormat::Csv) j["hex_floats"] = hex;
  switch (spec.kind) {
    case SynthKind::WhiteNoise: break;
    case SynthKind::Fgn:
      j["hurst"] = spec.hurst;
      j["cross_corr"] = spec.cross_corr;
      break;
    case SynthKind::Cascade:
      j["weights"] = {spec.weights.first, spec.weights.second};
      j["cross_corr"] = spec.cross_corr;
      break;
    case SynthKind::ToneMix: {
      json tones = json::array();
      for (const auto& t : spec.tones) tones.push_back({{"freq_hz", t.freq_hz}, {"amplitude", t.amplitude}});
      j["tones"] = std::move(tones);
      j["noise_std"] = spec.noise_std;
      break;
    }
  }
  return j.dump(2) + "\n";
}

MultichannelSeries emit_synthetic(const SynthSpec& spec, const std::filesystem::path& path, InputFormat format,
                                  bool hex) {
  MultichannelSeries series = generate(spec);
  if (format == InputFormat::Csv) {
    write_csv(path, series, hex);
  } else {
    write_raw_f64le(path, series);
  }
  auto sidecar = path;
  sidecar += ".json";
  write_file_atomic(sidecar, synth_spec_to_json(spec, format, hex));
  return series;
}

}  // namespace mvf
