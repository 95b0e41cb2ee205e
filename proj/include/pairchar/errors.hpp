#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pairchar {

enum class ErrorKind {
  format,
  truncation,
  ordering,
  range,
  parameter,
  degenerate,
  fit,
  shape,
  io,
  usage,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base of every error raised by the library. The kind is stable and is what
/// the command-line front end prints; byte_offset is set by the PTAG decoder.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        std::optional<std::uint64_t> byte_offset = std::nullopt);

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::uint64_t> byte_offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  std::optional<std::uint64_t> offset_;
};

#define PAIRCHAR_DEFINE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& message,                              \
                  std::optional<std::uint64_t> byte_offset = std::nullopt) \
        : Error(ErrorKind::Kind, message, byte_offset) {}                  \
  }

PAIRCHAR_DEFINE_ERROR(FormatError, format);
PAIRCHAR_DEFINE_ERROR(TruncationError, truncation);
PAIRCHAR_DEFINE_ERROR(OrderingError, ordering);
PAIRCHAR_DEFINE_ERROR(RangeError, range);
PAIRCHAR_DEFINE_ERROR(ParameterError, parameter);
PAIRCHAR_DEFINE_ERROR(DegenerateError, degenerate);
PAIRCHAR_DEFINE_ERROR(FitError, fit);
PAIRCHAR_DEFINE_ERROR(ShapeError, shape);
PAIRCHAR_DEFINE_ERROR(IoError, io);
PAIRCHAR_DEFINE_ERROR(UsageError, usage);

#undef PAIRCHAR_DEFINE_ERROR

}  // namespace pairchar
