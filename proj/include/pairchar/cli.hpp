#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "pairchar/errors.hpp"

namespace pairchar::cli {

/// Runs the pairchar command line: simulate, sweep, correlate, fit, report.
/// Returns 0 on success, 1 on a runtime failure and 2 on a usage or input
/// error. Failures print one line "error: <kind>: <message>" to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int exit_code(ErrorKind kind) noexcept;

/// Nonnegative integer that may be written in exponent form ("1e9").
std::uint64_t parse_count(const std::string& text);

}  // namespace pairchar::cli
