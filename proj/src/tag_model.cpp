#include "pairchar/tag_model.hpp"

#include <limits>

namespace pairchar {

std::int64_t PulseClock::pulse_index(std::uint64_t timestamp_ps) const noexcept {
  if (period_ps == 0) return 0;
  // Fast path covers every realistic acquisition.
  constexpr std::uint64_t kSafe = std::uint64_t{1} << 62;
  if (timestamp_ps < kSafe && origin_ps < kSafe && period_ps < kSafe) {
    const std::int64_t delta =
        static_cast<std::int64_t>(timestamp_ps) - static_cast<std::int64_t>(origin_ps);
    const std::int64_t period = static_cast<std::int64_t>(period_ps);
    const std::int64_t shifted = delta + period / 2;
    std::int64_t q = shifted / period;
    if (shifted % period != 0 && shifted < 0) --q;
    return q;
  }
  const __int128 delta = static_cast<__int128>(timestamp_ps) - static_cast<__int128>(origin_ps);
  const __int128 period = static_cast<__int128>(period_ps);
  const __int128 shifted = delta + period / 2;
  __int128 q = shifted / period;
  if (shifted % period != 0 && shifted < 0) --q;
  constexpr auto lo = std::numeric_limits<std::int64_t>::min();
  constexpr auto hi = std::numeric_limits<std::int64_t>::max();
  if (q < lo) return lo;
  if (q > hi) return hi;
  return static_cast<std::int64_t>(q);
}

std::optional<std::uint64_t> PulseClock::pulse_time(std::int64_t index) const noexcept {
  const __int128 t = static_cast<__int128>(origin_ps) +
                     static_cast<__int128>(index) * static_cast<__int128>(period_ps);
  if (t < 0 || t > static_cast<__int128>(std::numeric_limits<std::uint64_t>::max())) {
    return std::nullopt;
  }
  return static_cast<std::uint64_t>(t);
}

std::optional<std::uint64_t> TagStreamHeader::timestamp_bound() const noexcept {
  const unsigned __int128 bound =
      static_cast<unsigned __int128>(clock.origin_ps) +
      (static_cast<unsigned __int128>(pulse_count) + 1) * clock.period_ps;
  if (bound > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  return static_cast<std::uint64_t>(bound);
}

std::vector<Violation> validate_stream(const TagStreamHeader& header,
                                       std::span<const TimeTag> tags) {
  std::vector<Violation> out;
  if (header.version != 1) {
    out.push_back({"version", std::nullopt, "unsupported format version"});
  }
  if (header.clock.period_ps == 0) {
    out.push_back({"period_positive", std::nullopt, "pulse period must be > 0"});
  }
  if (header.resolution_ps == 0) {
    out.push_back({"resolution_positive", std::nullopt, "resolution must be > 0"});
  }
  if (header.channel_count != kChannelCount) {
    out.push_back({"channel_count", std::nullopt, "channel count must be 2"});
  }
  const auto bound = header.timestamp_bound();
  if (!bound) {
    out.push_back({"timestamp_bound", std::nullopt, "pulse span overflows 64 bits"});
  }

  std::optional<std::size_t> first_unsorted;
  std::optional<std::size_t> first_bad_channel;
  std::optional<std::size_t> first_out_of_range;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (!first_unsorted && i > 0 && tags[i].timestamp_ps < tags[i - 1].timestamp_ps) {
      first_unsorted = i;
    }
    if (!first_bad_channel && tags[i].channel >= kChannelCount) first_bad_channel = i;
    if (!first_out_of_range && bound && tags[i].timestamp_ps >= *bound) first_out_of_range = i;
  }
  if (first_unsorted) {
    out.push_back({"ordering", first_unsorted, "timestamp decreases"});
  }
  if (first_bad_channel) {
    out.push_back({"channel_range", first_bad_channel, "channel outside {0, 1}"});
  }
  if (first_out_of_range) {
    out.push_back({"timestamp_bound", first_out_of_range,
                   "timestamp beyond (pulse_count + 1) periods"});
  }
  return out;
}

void split_channels(std::span<const TimeTag> tags, std::vector<TimeTag>& a,
                    std::vector<TimeTag>& b) {
  a.clear();
  b.clear();
  for (const auto& t : tags) {
    if (t.channel == kChannelA) {
      a.push_back(t);
    } else if (t.channel == kChannelB) {
      b.push_back(t);
    }
  }
}

}  // namespace pairchar
