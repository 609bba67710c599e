#pragma once

#include "mvfractal/signal.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mvf {

enum class InputFormat { Csv, RawF64LE };

const char* to_string(InputFormat f) noexcept;
/// Accepts "csv" and "raw64".
InputFormat parse_input_format(std::string_view text);

/// How to read a file. The sample rate and, for raw files, the channel count
/// and labels are not stored in the data and must come from here.
struct IngestOptions {
  InputFormat format = InputFormat::Csv;
  /// Channel labels or 0-based column indices; empty keeps every channel.
  std::vector<std::string> selection;
  /// Overrides the rate inferred from a CSV time column. Defaults to 1 Hz
  /// when neither is available.
  std::optional<double> sample_rate_hz;
  Index raw_channels = 1;
  std::vector<std::string> raw_labels;
};

/// CSV: a header row of channel labels, then one row per sample, with '.'
/// as decimal point regardless of locale. Hex floats ("0x1.8p+1") are
/// accepted. A leading column named t or time is a time axis: it is not a
/// channel and gives the sample rate when none is configured.
///
/// RawF64LE: little-endian doubles, channel-interleaved.
MultichannelSeries ingest(const std::filesystem::path& path, const IngestOptions& options);

MultichannelSeries parse_csv(std::string_view text, const IngestOptions& options);
MultichannelSeries parse_raw_f64le(std::string_view bytes, const IngestOptions& options);

/// Writes `content` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// CSV text with a header of channel labels. `hex` writes hexadecimal
/// floats, otherwise shortest round-trip decimal.
std::string format_csv(const MultichannelSeries& series, bool hex = false);
std::string format_raw_f64le(const MultichannelSeries& series);

void write_csv(const std::filesystem::path& path, const MultichannelSeries& series, bool hex = false);
void write_raw_f64le(const std::filesystem::path& path, const MultichannelSeries& series);

/// Shortest decimal that parses back to exactly `value`.
std::string format_double(double value);
/// Hexadecimal float representation, exact by construction.
std::string format_hex_double(double value);

}  // namespace mvf
