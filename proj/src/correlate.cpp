#include "pairchar/correlate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <ostream>
#include <string>

#include "pairchar/errors.hpp"

namespace pairchar {
namespace {

void check_options(const CorrelateOptions& options) {
  if (options.max_slot < 1) throw ParameterError("slot radius W must be >= 1");
}

}  // namespace

CoincidenceHistogram CoincidenceHistogram::zeros(std::int64_t max_slot, std::uint64_t period_ps,
                                                 std::uint64_t pulse_count) {
  CoincidenceHistogram h;
  h.max_slot = max_slot;
  h.counts.assign(static_cast<std::size_t>(2 * max_slot + 1), 0);
  h.pulse_count = pulse_count;
  h.period_ps = period_ps;
  return h;
}

std::uint64_t CoincidenceHistogram::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  return sum;
}

void CoincidenceCounter::Window::evict_before(std::int64_t pulse) {
  while (head < items.size() && items[head].pulse < pulse) ++head;
  if (head > 4096 && head * 2 > items.size()) {
    items.erase(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(head));
    head = 0;
  }
}

CoincidenceCounter::CoincidenceCounter(const PulseClock& clock, const CorrelateOptions& options)
    : clock_(clock), options_(options) {
  check_options(options_);
  if (clock_.period_ps == 0) throw ParameterError("pulse period must be > 0");
  counts_.assign(static_cast<std::size_t>(2 * options_.max_slot + 1), 0);
}

void CoincidenceCounter::count_against(const Window& other, const Entry& current, bool current_is_b) {
  const std::int64_t w = options_.max_slot;
  std::uint64_t* center = counts_.data() + w;
  const auto& items = other.items;
  if (!options_.slot_window_ps) {
    if (current_is_b) {
      for (std::size_t i = other.head; i < items.size(); ++i) ++center[current.pulse - items[i].pulse];
    } else {
      for (std::size_t i = other.head; i < items.size(); ++i) ++center[items[i].pulse - current.pulse];
    }
    return;
  }
  const double half = static_cast<double>(*options_.slot_window_ps) / 2.0;
  const double period = static_cast<double>(clock_.period_ps);
  for (std::size_t i = other.head; i < items.size(); ++i) {
    const std::int64_t d = current.pulse - items[i].pulse;
    const double dt = static_cast<double>(current.timestamp_ps - items[i].timestamp_ps);
    if (std::abs(dt - static_cast<double>(d) * period) <= half) {
      ++center[current_is_b ? d : -d];
    }
  }
}

void CoincidenceCounter::push(const TimeTag& tag) {
  if (last_ && tag.timestamp_ps < *last_) {
    throw OrderingError("correlator input unsorted at timestamp " + std::to_string(tag.timestamp_ps));
  }
  if (tag.channel >= kChannelCount) {
    throw RangeError("correlator input has channel " + std::to_string(tag.channel));
  }
  last_ = tag.timestamp_ps;
  const Entry e{clock_.pulse_index(tag.timestamp_ps), tag.timestamp_ps};
  const bool is_b = tag.channel == kChannelB;
  auto& own = windows_[is_b ? 1 : 0];
  auto& other = windows_[is_b ? 0 : 1];
  const std::int64_t oldest = e.pulse - options_.max_slot;
  other.evict_before(oldest);
  count_against(other, e, is_b);
  own.evict_before(oldest);
  own.push(e);
  ++singles_[is_b ? 1 : 0];
}

void CoincidenceCounter::push(std::span<const TimeTag> tags) {
  for (const auto& t : tags) push(t);
}

CoincidenceHistogram CoincidenceCounter::histogram(std::uint64_t pulse_count) const {
  CoincidenceHistogram h;
  h.max_slot = options_.max_slot;
  h.counts = counts_;
  h.pulse_count = pulse_count;
  h.period_ps = clock_.period_ps;
  return h;
}

CoincidenceHistogram cross_correlate(std::span<const TimeTag> tags_a, std::span<const TimeTag> tags_b,
                                     const PulseClock& clock, const CorrelateOptions& options,
                                     std::uint64_t pulse_count) {
  CoincidenceCounter counter(clock, options);
  std::size_t i = 0;
  std::size_t j = 0;
  // Channel fields of the inputs are ignored; position decides the side.
  while (i < tags_a.size() || j < tags_b.size()) {
    const bool take_a =
        j == tags_b.size() || (i < tags_a.size() && tags_a[i].timestamp_ps <= tags_b[j].timestamp_ps);
    if (take_a) {
      counter.push(TimeTag{tags_a[i++].timestamp_ps, kChannelA});
    } else {
      counter.push(TimeTag{tags_b[j++].timestamp_ps, kChannelB});
    }
  }
  return counter.histogram(pulse_count);
}

CoincidenceHistogram correlate_stream(const TagStream& stream, const CorrelateOptions& options) {
  CoincidenceCounter counter(stream.header.clock, options);
  counter.push(stream.tags);
  return counter.histogram(stream.header.pulse_count);
}

CoincidenceHistogram correlate_partitioned(std::span<const TimeTag> tags_a,
                                           std::span<const TimeTag> tags_b, const PulseClock& clock,
                                           const CorrelateOptions& options,
                                           std::uint64_t pulse_count,
                                           std::span<const std::int64_t> split_pulses,
                                           unsigned threads) {
  check_options(options);
  for (std::size_t k = 0; k < split_pulses.size(); ++k) {
    if (split_pulses[k] < 0 || static_cast<std::uint64_t>(split_pulses[k]) > pulse_count ||
        (k > 0 && split_pulses[k] < split_pulses[k - 1])) {
      throw ParameterError("split points must be nondecreasing within [0, pulse_count]");
    }
  }
  auto first_at_or_after = [&](std::span<const TimeTag> tags, std::int64_t pulse) {
    return static_cast<std::size_t>(
        std::partition_point(tags.begin(), tags.end(),
                             [&](const TimeTag& t) { return clock.pulse_index(t.timestamp_ps) < pulse; }) -
        tags.begin());
  };

  // Pulse range [lo, hi) per part; the outer parts are open-ended so tags
  // outside [0, pulse_count) are still counted once.
  struct Part {
    std::size_t a_begin, a_end, b_begin, b_end;
    std::uint64_t pulses;
  };
  std::vector<Part> parts;
  std::int64_t lo = 0;
  std::size_t a_begin = 0;
  for (std::size_t k = 0; k <= split_pulses.size(); ++k) {
    const bool last = k == split_pulses.size();
    const std::int64_t hi = last ? static_cast<std::int64_t>(pulse_count) : split_pulses[k];
    const std::size_t a_end = last ? tags_a.size() : first_at_or_after(tags_a, hi);
    const std::size_t b_begin = k == 0 ? 0 : first_at_or_after(tags_b, lo - options.max_slot);
    const std::size_t b_end = last ? tags_b.size() : first_at_or_after(tags_b, hi + options.max_slot);
    parts.push_back({a_begin, a_end, b_begin, b_end, static_cast<std::uint64_t>(hi - lo)});
    a_begin = a_end;
    lo = hi;
  }

  auto run = [&](const Part& p) {
    return cross_correlate(tags_a.subspan(p.a_begin, p.a_end - p.a_begin),
                           tags_b.subspan(p.b_begin, p.b_end - p.b_begin), clock, options, p.pulses);
  };

  auto total = CoincidenceHistogram::zeros(options.max_slot, clock.period_ps);
  threads = std::max(1u, threads);
  for (std::size_t start = 0; start < parts.size(); start += threads) {
    const std::size_t stop = std::min(parts.size(), start + threads);
    if (threads == 1) {
      total = histogram_merge(total, run(parts[start]));
      continue;
    }
    std::vector<std::future<CoincidenceHistogram>> pending;
    for (std::size_t k = start; k < stop; ++k) {
      pending.push_back(std::async(std::launch::async, run, std::cref(parts[k])));
    }
    for (auto& f : pending) total = histogram_merge(total, f.get());
  }
  return total;
}

CoincidenceHistogram correlate_partitioned(std::span<const TimeTag> tags_a,
                                           std::span<const TimeTag> tags_b, const PulseClock& clock,
                                           const CorrelateOptions& options,
                                           std::uint64_t pulse_count, std::size_t partitions,
                                           unsigned threads) {
  std::vector<std::int64_t> splits;
  for (std::size_t k = 1; k < std::max<std::size_t>(partitions, 1); ++k) {
    splits.push_back(static_cast<std::int64_t>(
        static_cast<unsigned __int128>(pulse_count) * k / partitions));
  }
  return correlate_partitioned(tags_a, tags_b, clock, options, pulse_count, splits, threads);
}

CoincidenceHistogram histogram_merge(const CoincidenceHistogram& lhs, const CoincidenceHistogram& rhs) {
  if (lhs.max_slot != rhs.max_slot || lhs.period_ps != rhs.period_ps ||
      lhs.counts.size() != rhs.counts.size()) {
    throw ShapeError("cannot merge histograms with different slot radius or period");
  }
  CoincidenceHistogram out = lhs;
  for (std::size_t i = 0; i < out.counts.size(); ++i) out.counts[i] += rhs.counts[i];
  out.pulse_count += rhs.pulse_count;
  return out;
}

CoincidenceRates extract_rates(const CoincidenceHistogram& h, std::int64_t guard) {
  if (h.pulse_count == 0) throw DegenerateError("histogram covers zero pulses");
  if (guard < 0) throw ParameterError("guard must be >= 0");
  if (h.counts.size() != static_cast<std::size_t>(2 * h.max_slot + 1)) {
    throw ShapeError("histogram counts length does not match its slot radius");
  }
  if (guard >= h.max_slot) throw DegenerateError("no off-zero slots remain after the guard");

  CoincidenceRates r;
  for (std::int64_t n = guard + 1; n <= h.max_slot; ++n) r.coinc_off_sum += h.at(n) + h.at(-n);
  r.off_slots = static_cast<std::uint64_t>(2 * (h.max_slot - guard));
  r.coinc_zero = h.at(0);

  const double pulses = static_cast<double>(h.pulse_count);
  const double slots = static_cast<double>(r.off_slots);
  const double off = static_cast<double>(r.coinc_off_sum);
  const double zero = static_cast<double>(r.coinc_zero);
  // Poisson errors with a one-count floor so empty bins still carry weight.
  const double zero_sigma = std::sqrt(std::max(zero, 1.0));
  const double off_sigma = std::sqrt(std::max(off, 1.0));

  r.c_r = off / (slots * pulses);
  r.c_r_err = off_sigma / (slots * pulses);
  r.c_s = zero / pulses - r.c_r;
  r.c_s_err = std::hypot(zero_sigma / pulses, r.c_r_err);
  if (r.c_r > 0.0) {
    r.car = r.c_s / r.c_r;
    // car = zero * slots / off - 1
    r.car_err = std::hypot(zero_sigma * slots / off, zero * slots * off_sigma / (off * off));
  }
  return r;
}

void write_histogram_tsv(std::ostream& out, const CoincidenceHistogram& h) {
  out << "slot\tdelay_ps\tcount\n";
  for (std::int64_t n = -h.max_slot; n <= h.max_slot; ++n) {
    out << n << '\t' << n * static_cast<std::int64_t>(h.period_ps) << '\t' << h.at(n) << '\n';
  }
}

}  // namespace pairchar
