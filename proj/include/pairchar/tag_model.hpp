#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pairchar {

inline constexpr std::uint8_t kChannelA = 0;
inline constexpr std::uint8_t kChannelB = 1;
inline constexpr std::uint16_t kChannelCount = 2;

/// One detection event. Timestamps are integer picoseconds since the start
/// of acquisition.
struct TimeTag {
  std::uint64_t timestamp_ps = 0;
  std::uint8_t channel = kChannelA;

  friend auto operator<=>(const TimeTag&, const TimeTag&) = default;
};

/// Excitation pulse train. The default period is 12500 ps (80 MHz).
struct PulseClock {
  std::uint64_t period_ps = 12500;
  std::uint64_t origin_ps = 0;

  /// Nearest pulse to t, i.e. round((t - origin) / period). Exact halves go
  /// to the later pulse. Saturates at the int64 range.
  std::int64_t pulse_index(std::uint64_t timestamp_ps) const noexcept;

  /// Nominal time of pulse k, or nullopt if it is not representable.
  std::optional<std::uint64_t> pulse_time(std::int64_t index) const noexcept;

  double repetition_rate_hz() const noexcept { return 1e12 / static_cast<double>(period_ps); }

  friend bool operator==(const PulseClock&, const PulseClock&) = default;
};

struct TagStreamHeader {
  std::uint16_t version = 1;
  PulseClock clock;
  std::uint16_t channel_count = kChannelCount;
  std::uint64_t pulse_count = 0;
  std::uint64_t resolution_ps = 165;

  /// Exclusive upper bound on record timestamps:
  /// origin + (pulse_count + 1) * period. nullopt when it overflows 64 bits.
  std::optional<std::uint64_t> timestamp_bound() const noexcept;

  friend bool operator==(const TagStreamHeader&, const TagStreamHeader&) = default;
};

struct TagStream {
  TagStreamHeader header;
  std::vector<TimeTag> tags;

  friend bool operator==(const TagStream&, const TagStream&) = default;
};

struct Violation {
  std::string invariant;
  std::optional<std::size_t> index;  // first offending tag, if tag-level
  std::string detail;
};

/// Checks every header and tag invariant. Returns one entry per violated
/// invariant, each carrying the first offending index. Never throws.
std::vector<Violation> validate_stream(const TagStreamHeader& header,
                                       std::span<const TimeTag> tags);

/// Splits a merged stream into per-channel time-ordered sequences.
void split_channels(std::span<const TimeTag> tags, std::vector<TimeTag>& a,
                    std::vector<TimeTag>& b);

}  // namespace pairchar
