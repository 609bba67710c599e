#include "mvfractal/io.hpp"

#include "mvfractal/error.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mvf {

const char* to_string(InputFormat f) noexcept {
  switch (f) {
    case InputFormat::Csv: return "csv";
    case InputFormat::RawF64LE: return "raw64";
  }
  return "?";
}

InputFormat parse_input_format(std::string_view text) {
  if (text == "csv") return InputFormat::Csv;
  if (text == "raw64" || text == "rawf64le") return InputFormat::RawF64LE;
  throw Error(ErrorKind::InvalidArgument, "unknown input format '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  bool negative = false;
  std::string_view body = field;
  if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  auto format = std::chars_format::general;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    body.remove_prefix(2);
    format = std::chars_format::hex;
  }
  if (body.empty() || body.front() == '-' || body.front() == '+') return false;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v, format);
  if (ec != std::errc() || ptr != body.data() + body.size()) return false;
  out = negative ? -v : v;
  return true;
}

bool is_time_label(std::string_view label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower == "t" || lower == "time" || lower == "time_s";
}

std::vector<Index> resolve_selection(const std::vector<std::string>& selection, const std::vector<std::string>& labels) {
  std::vector<Index> out;
  if (selection.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) out.push_back(static_cast<Index>(i));
    return out;
  }
  for (const auto& token : selection) {
    const auto it = std::find(labels.begin(), labels.end(), token);
    if (it != labels.end()) {
      out.push_back(static_cast<Index>(it - labels.begin()));
      continue;
    }
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (ec == std::errc() && ptr == token.data() + token.size() && index < labels.size()) {
      out.push_back(static_cast<Index>(index));
      continue;
    }
    throw Error(ErrorKind::ChannelNotFound, "no channel '" + token + "'");
  }
  return out;
}

MultichannelSeries select_columns(const Eigen::MatrixXd& all, const std::vector<std::string>& labels,
                                  const std::vector<std::string>& selection, double rate) {
  const auto cols = resolve_selection(selection, labels);
  Eigen::MatrixXd picked(all.rows(), static_cast<Index>(cols.size()));
  std::vector<std::string> picked_labels;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    picked.col(static_cast<Index>(j)) = all.col(cols[j]);
    picked_labels.push_back(labels[static_cast<std::size_t>(cols[j])]);
  }
  return MultichannelSeries(std::move(picked), rate, std::move(picked_labels));
}

}  // namespace

MultichannelSeries parse_csv(std::string_view text, const IngestOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const auto line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  std::size_t first = 0;
  while (first < lines.size() && trim(lines[first]).empty()) ++first;
  if (first == lines.size()) throw Error(ErrorKind::EmptyInput, "CSV has no header");

  const auto header = split_fields(lines[first]);
  const bool has_time = is_time_label(header.front());
  const std::size_t offset = has_time ? 1 : 0;
  std::vector<std::string> labels;
  for (std::size_t j = offset; j < header.size(); ++j) labels.emplace_back(header[j]);
  if (labels.empty()) throw Error(ErrorKind::EmptyInput, "CSV has no channel columns");

  std::vector<double> time;
  std::vector<double> values;
  std::size_t rows = 0;
  for (std::size_t li = first + 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const auto line_no = static_cast<long long>(li + 1);
    const auto fields = split_fields(lines[li]);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::ParseError,
                  "expected " + std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()),
                  line_no);
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v)) {
        throw Error(ErrorKind::ParseError, "cannot parse '" + std::string(fields[j]) + "' as a number", line_no);
      }
      (j < offset ? time : values).push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorKind::EmptyInput, "CSV has no samples");

  const auto m = static_cast<Index>(labels.size());
  Eigen::MatrixXd all(static_cast<Index>(rows), m);
  for (std::size_t i = 0; i < rows; ++i)
    for (Index j = 0; j < m; ++j) all(static_cast<Index>(i), j) = values[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)];

  double rate = 1.0;
  if (options.sample_rate_hz) {
    rate = *options.sample_rate_hz;
  } else if (has_time && rows >= 2) {
    const double span = time.back() - time.front();
    if (!(span > 0.0)) throw Error(ErrorKind::RateNonPositive, "time column is not increasing");
    rate = static_cast<double>(rows - 1) / span;
  }
  return select_columns(all, labels, options.selection, rate);
}

MultichannelSeries parse_raw_f64le(std::string_view bytes, const IngestOptions& options) {
  const Index m = options.raw_channels;
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "raw channel count must be >= 1");
  const std::size_t record = sizeof(double) * static_cast<std::size_t>(m);
  if (bytes.size() % record != 0) {
    throw Error(ErrorKind::TruncatedRecord, std::to_string(bytes.size()) + " bytes is not a whole number of " +
                                                std::to_string(m) + "-channel records",
                static_cast<long long>(bytes.size() / record));
  }
  const auto n = static_cast<Index>(bytes.size() / record);
  if (n == 0) throw Error(ErrorKind::EmptyInput, "raw file is empty");
  Eigen::MatrixXd all(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      std::uint64_t bits = 0;
      const auto pos = (static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)) * 8;
      for (int b = 7; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(b)]);
      all(i, j) = std::bit_cast<double>(bits);
    }
  }
  std::vector<std::string> labels = options.raw_labels;
  if (labels.empty()) labels = default_channel_labels(m);
  if (static_cast<Index>(labels.size()) != m) throw Error(ErrorKind::InvalidArgument, "one label per raw channel expected");
  return select_columns(all, labels, options.selection, options.sample_rate_hz.value_or(1.0));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "read failed for " + path.string());
  return std::move(buf).str();
}

MultichannelSeries ingest(const std::filesystem::path& path, const IngestOptions& options) {
  const std::string content = read_file(path);
  return options.format == InputFormat::Csv ? parse_csv(content, options) : parse_raw_f64le(content, options);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorKind::IoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string format_hex_double(double value) {
  char buf[64];
  char* p = buf;
  if (std::signbit(value)) *p++ = '-';
  *p++ = '0';
  *p++ = 'x';
  const auto [ptr, ec] = std::to_chars(p, buf + sizeof buf, std::abs(value), std::chars_format::hex);
  return std::string(buf, ptr);
}

std::string format_csv(const MultichannelSeries& series, bool hex) {
  std::string out;
  const auto& labels = series.channel_labels();
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j) out += ',';
    out += labels[j];
  }
  out += '\n';
  const auto& x = series.samples();
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (j) out += ',';
      out += hex ? format_hex_double(x(i, j)) : format_double(x(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string format_raw_f64le(const MultichannelSeries& series) {
  const auto& x = series.samples();
  std::string out(static_cast<std::size_t>(x.size()) * 8, '\0');
  std::size_t pos = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      auto bits = std::bit_cast<std::uint64_t>(x(i, j));
      for (int b = 0; b < 8; ++b) {
        out[pos++] = static_cast<char>(bits & 0xff);
        bits >>= 8;
      }
    }
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const MultichannelSeries& series, bool hex) {
  write_file_atomic(path, format_csv(series, hex));
}

void write_raw_f64le(const std::filesystem::path& path, const MultichannelSeries& series) {
  write_file_atomic(path, format_raw_f64le(series));
}

}  // namespace mvf
