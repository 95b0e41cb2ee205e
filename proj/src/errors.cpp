#include "pairchar/errors.hpp"

namespace pairchar {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::format: return "format";
    case ErrorKind::truncation: return "truncation";
    case ErrorKind::ordering: return "ordering";
    case ErrorKind::range: return "range";
    case ErrorKind::parameter: return "parameter";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::fit: return "fit";
    case ErrorKind::shape: return "shape";
    case ErrorKind::io: return "io";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message, std::optional<std::uint64_t> byte_offset)
    : std::runtime_error(message), kind_(kind), offset_(byte_offset) {}

}  // namespace pairchar
