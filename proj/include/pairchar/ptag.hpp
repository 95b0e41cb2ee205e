#pragma once

// PTAG: little-endian two-channel time-tag container.
//
//   offset  size  field
//   0       4     magic "PTAG"
//   4       2     version (1)
//   6       2     channel count
//   8       8     pulse period, ps
//   16      8     pulse origin, ps
//   24      8     pulse count
//   32      8     resolution, ps
//   40      16*N  records: u64 timestamp ps, u8 channel, 7 zero bytes

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pairchar/tag_model.hpp"

namespace pairchar::ptag {

inline constexpr std::size_t kHeaderBytes = 40;
inline constexpr std::size_t kRecordBytes = 16;
inline constexpr std::array<char, 4> kMagic = {'P', 'T', 'A', 'G'};
inline constexpr std::uint16_t kVersion = 1;

constexpr std::uint64_t encoded_size(std::size_t tag_count) noexcept {
  return kHeaderBytes + kRecordBytes * static_cast<std::uint64_t>(tag_count);
}

/// Incremental encoder. Records must arrive in nondecreasing timestamp order.
class TagWriter {
 public:
  TagWriter(std::ostream& sink, const TagStreamHeader& header);

  void append(const TimeTag& tag);
  void append(std::span<const TimeTag> tags);
  /// Pushes buffered records to the sink. append(span) flushes on return;
  /// single-record appends need an explicit flush before the sink is closed.
  void flush();
  std::uint64_t bytes_written() const noexcept { return bytes_ + buffer_.size(); }
  std::uint64_t records_written() const noexcept { return records_; }

 private:
  std::ostream* sink_;
  TagStreamHeader header_;
  std::optional<std::uint64_t> bound_;
  std::optional<std::uint64_t> last_;
  std::vector<char> buffer_;
  std::uint64_t bytes_ = 0;
  std::uint64_t records_ = 0;
};

/// Streaming decoder; memory use does not depend on stream length.
class TagReader {
 public:
  explicit TagReader(std::istream& source);

  const TagStreamHeader& header() const noexcept { return header_; }
  std::optional<TimeTag> next();
  /// Byte offset of the next unread record.
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  bool refill();

  std::istream* source_;
  TagStreamHeader header_;
  std::optional<std::uint64_t> bound_;
  std::optional<std::uint64_t> last_;
  std::vector<unsigned char> buffer_;
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
  std::uint64_t offset_ = kHeaderBytes;
};

std::uint64_t encode_stream(const TagStreamHeader& header, std::span<const TimeTag> tags,
                            std::ostream& sink);

TagStream decode_stream(std::istream& source);

}  // namespace pairchar::ptag
