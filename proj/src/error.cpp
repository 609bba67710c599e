#include "mvfractal/error.hpp"

namespace mvf {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::RateNonPositive: return "RateNonPositive";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::EmbeddingFailure: return "EmbeddingFailure";
    case ErrorKind::ZeroDivision: return "ZeroDivision";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::DegenerateSegment: return "DegenerateSegment";
    case ErrorKind::ScaleTooLarge: return "ScaleTooLarge";
    case ErrorKind::RankDeficientFit: return "RankDeficientFit";
    case ErrorKind::MultichannelInput: return "MultichannelInput";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::TooFewScales: return "TooFewScales";
    case ErrorKind::GridTooCoarse: return "GridTooCoarse";
    case ErrorKind::KTooLarge: return "KTooLarge";
    case ErrorKind::SingleMode: return "SingleMode";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::InsufficientReference: return "InsufficientReference";
    case ErrorKind::NoSeparation: return "NoSeparation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::ChannelNotFound: return "ChannelNotFound";
    case ErrorKind::TruncatedRecord: return "TruncatedRecord";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, std::optional<long long> index) {
  std::string out = to_string(kind);
  out += ": ";
  out += message;
  if (index) {
    out += " (index ";
    out += std::to_string(*index);
    out += ")";
  }
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<long long> index)
    : std::runtime_error(compose(kind, message, index)), kind_(kind), message_(message), index_(index) {}

}  // namespace mvf
