#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pairchar/tag_model.hpp"

namespace pairchar {

/// Pulse-slotted A-B coincidence counts. Slot n counts pairs whose B tag sits
/// n pulses after the A tag, for n in [-max_slot, +max_slot].
struct CoincidenceHistogram {
  std::int64_t max_slot = 0;
  std::vector<std::uint64_t> counts;  // counts[n + max_slot]
  std::uint64_t pulse_count = 0;
  std::uint64_t period_ps = 0;

  static CoincidenceHistogram zeros(std::int64_t max_slot, std::uint64_t period_ps,
                                    std::uint64_t pulse_count = 0);

  std::uint64_t at(std::int64_t slot) const { return counts.at(static_cast<std::size_t>(slot + max_slot)); }
  std::uint64_t& at(std::int64_t slot) { return counts.at(static_cast<std::size_t>(slot + max_slot)); }
  std::uint64_t total() const noexcept;

  friend bool operator==(const CoincidenceHistogram&, const CoincidenceHistogram&) = default;
};

struct CorrelateOptions {
  std::int64_t max_slot = 50;
  /// Optional intra-slot acceptance: a pair in slot n counts only if
  /// |dt - n * period| <= window / 2. Unset means the full period.
  std::optional<std::uint64_t> slot_window_ps;
};

/// Streaming correlator. Tags must be pushed in nondecreasing time order
/// across both channels (a merged stream). Each A-B pair is counted once,
/// when its later member arrives, against the earlier members of the other
/// channel still inside the slot window.
class CoincidenceCounter {
 public:
  CoincidenceCounter(const PulseClock& clock, const CorrelateOptions& options);

  void push(const TimeTag& tag);
  void push(std::span<const TimeTag> tags);

  std::uint64_t singles_a() const noexcept { return singles_[0]; }
  std::uint64_t singles_b() const noexcept { return singles_[1]; }

  /// Snapshot of the counts so far, stamped with pulse_count.
  CoincidenceHistogram histogram(std::uint64_t pulse_count) const;

 private:
  struct Entry {
    std::int64_t pulse;
    std::uint64_t timestamp_ps;
  };
  // FIFO of recent tags of one channel; pops from the front are amortized
  // by compacting once half the storage is dead.
  struct Window {
    std::vector<Entry> items;
    std::size_t head = 0;

    void evict_before(std::int64_t pulse);
    void push(const Entry& e) { items.push_back(e); }
  };

  void count_against(const Window& other, const Entry& current, bool current_is_b);

  PulseClock clock_;
  CorrelateOptions options_;
  std::vector<std::uint64_t> counts_;
  std::array<Window, 2> windows_;
  std::array<std::uint64_t, 2> singles_{};
  std::optional<std::uint64_t> last_;
};

/// Single forward sweep over two time-sorted sequences. Throws OrderingError
/// on unsorted input and ParameterError when max_slot < 1.
CoincidenceHistogram cross_correlate(std::span<const TimeTag> tags_a, std::span<const TimeTag> tags_b,
                                     const PulseClock& clock, const CorrelateOptions& options,
                                     std::uint64_t pulse_count);

/// Correlates a merged stream (channels 0 and 1) using its header clock and
/// pulse count.
CoincidenceHistogram correlate_stream(const TagStream& stream, const CorrelateOptions& options);

/// Splits the A sequence at the given pulse indices, correlates each part
/// against the B tags within max_slot pulses of its range (overlap replay),
/// and merges. Equal to cross_correlate on the whole input. Split points
/// must be nondecreasing and inside [0, pulse_count].
CoincidenceHistogram correlate_partitioned(std::span<const TimeTag> tags_a,
                                           std::span<const TimeTag> tags_b, const PulseClock& clock,
                                           const CorrelateOptions& options,
                                           std::uint64_t pulse_count,
                                           std::span<const std::int64_t> split_pulses,
                                           unsigned threads = 1);

/// Even split into `partitions` pulse ranges.
CoincidenceHistogram correlate_partitioned(std::span<const TimeTag> tags_a,
                                           std::span<const TimeTag> tags_b, const PulseClock& clock,
                                           const CorrelateOptions& options,
                                           std::uint64_t pulse_count, std::size_t partitions,
                                           unsigned threads = 1);

/// Elementwise sum; pulse counts add. Throws ShapeError unless max_slot and
/// period agree.
CoincidenceHistogram histogram_merge(const CoincidenceHistogram& lhs, const CoincidenceHistogram& rhs);

/// Per-pulse coincidence rates. c_r is the mean off-zero slot, c_s the slot-0
/// excess over it. car is absent whenever c_r is zero.
struct CoincidenceRates {
  double c_s = 0.0;
  double c_r = 0.0;
  std::optional<double> car;
  double c_s_err = 0.0;
  double c_r_err = 0.0;
  std::optional<double> car_err;
  std::uint64_t off_slots = 0;
  std::uint64_t coinc_zero = 0;
  std::uint64_t coinc_off_sum = 0;
};

CoincidenceRates extract_rates(const CoincidenceHistogram& histogram, std::int64_t guard = 0);

/// TSV with columns slot, delay_ps, count.
void write_histogram_tsv(std::ostream& out, const CoincidenceHistogram& histogram);

}  // namespace pairchar
