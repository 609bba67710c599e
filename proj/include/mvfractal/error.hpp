#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace mvf {

/// Failure categories raised by the library. Every throwing operation uses
/// `mvf::Error` with one of these kinds so callers can branch without parsing
/// messages.
enum class ErrorKind {
  EmptyInput,
  NonFinite,
  RateNonPositive,
  InvalidArgument,
  EmbeddingFailure,
  ZeroDivision,
  DimensionMismatch,
  NotSymmetric,
  NotPositiveDefinite,
  DegenerateSegment,
  ScaleTooLarge,
  RankDeficientFit,
  MultichannelInput,
  InsufficientSamples,
  TooFewScales,
  GridTooCoarse,
  KTooLarge,
  SingleMode,
  IndexOutOfRange,
  InsufficientReference,
  NoSeparation,
  ParseError,
  ChannelNotFound,
  TruncatedRecord,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::optional<long long> index = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind and index decoration of what().
  const std::string& message() const noexcept { return message_; }
  /// Sample, line or segment index associated with the failure, when known.
  std::optional<long long> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::string message_;
  std::optional<long long> index_;
};

}  // namespace mvf
