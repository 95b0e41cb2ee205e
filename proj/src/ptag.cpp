#include "pairchar/ptag.hpp"

#include <algorithm>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "pairchar/errors.hpp"

namespace pairchar::ptag {
namespace {

constexpr std::size_t kBufferRecords = 4096;

template <typename T>
void put_le(char* dst, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i) & 0xFF);
  }
}

template <typename T>
T get_le(const unsigned char* src) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  return static_cast<T>(v);
}

void check_header(const TagStreamHeader& h) {
  if (h.version != kVersion) throw FormatError("unsupported PTAG version " + std::to_string(h.version));
  if (h.channel_count != kChannelCount) {
    throw FormatError("channel count must be 2, got " + std::to_string(h.channel_count));
  }
  if (h.clock.period_ps == 0) throw FormatError("pulse period must be > 0");
  if (h.resolution_ps == 0) throw FormatError("resolution must be > 0");
}

}  // namespace

TagWriter::TagWriter(std::ostream& sink, const TagStreamHeader& header)
    : sink_(&sink), header_(header), bound_(header.timestamp_bound()) {
  check_header(header_);
  if (!bound_) throw RangeError("pulse count * period overflows 64-bit picoseconds");

  std::array<char, kHeaderBytes> raw{};
  std::memcpy(raw.data(), kMagic.data(), kMagic.size());
  put_le<std::uint16_t>(raw.data() + 4, header_.version);
  put_le<std::uint16_t>(raw.data() + 6, header_.channel_count);
  put_le<std::uint64_t>(raw.data() + 8, header_.clock.period_ps);
  put_le<std::uint64_t>(raw.data() + 16, header_.clock.origin_ps);
  put_le<std::uint64_t>(raw.data() + 24, header_.pulse_count);
  put_le<std::uint64_t>(raw.data() + 32, header_.resolution_ps);
  sink_->write(raw.data(), raw.size());
  if (!*sink_) throw IoError("failed writing PTAG header");
  bytes_ = kHeaderBytes;
  buffer_.reserve(kBufferRecords * kRecordBytes);
}

void TagWriter::append(const TimeTag& tag) {
  if (last_ && tag.timestamp_ps < *last_) {
    throw OrderingError("tag " + std::to_string(records_) + " precedes its predecessor");
  }
  if (tag.timestamp_ps >= *bound_) {
    throw RangeError("tag " + std::to_string(records_) + " timestamp " +
                     std::to_string(tag.timestamp_ps) + " ps beyond the pulse span");
  }
  if (tag.channel >= header_.channel_count) {
    throw RangeError("tag " + std::to_string(records_) + " channel " +
                     std::to_string(tag.channel) + " out of range");
  }
  last_ = tag.timestamp_ps;

  const std::size_t at = buffer_.size();
  buffer_.resize(at + kRecordBytes, 0);
  put_le<std::uint64_t>(buffer_.data() + at, tag.timestamp_ps);
  buffer_[at + 8] = static_cast<char>(tag.channel);
  ++records_;
  if (buffer_.size() >= kBufferRecords * kRecordBytes) flush();
}

void TagWriter::append(std::span<const TimeTag> tags) {
  for (const auto& t : tags) append(t);
  flush();
}

void TagWriter::flush() {
  if (buffer_.empty()) return;
  sink_->write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!*sink_) throw IoError("failed writing PTAG records");
  bytes_ += buffer_.size();
  buffer_.clear();
}

TagReader::TagReader(std::istream& source) : source_(&source) {
  std::array<unsigned char, kHeaderBytes> raw{};
  source_->read(reinterpret_cast<char*>(raw.data()), raw.size());
  const auto got = static_cast<std::uint64_t>(source_->gcount());
  if (got >= 4 && std::memcmp(raw.data(), kMagic.data(), kMagic.size()) != 0) {
    throw FormatError("bad magic, expected \"PTAG\"", 0);
  }
  if (got < kHeaderBytes) throw TruncationError("truncated PTAG header", got);

  header_.version = get_le<std::uint16_t>(raw.data() + 4);
  header_.channel_count = get_le<std::uint16_t>(raw.data() + 6);
  header_.clock.period_ps = get_le<std::uint64_t>(raw.data() + 8);
  header_.clock.origin_ps = get_le<std::uint64_t>(raw.data() + 16);
  header_.pulse_count = get_le<std::uint64_t>(raw.data() + 24);
  header_.resolution_ps = get_le<std::uint64_t>(raw.data() + 32);
  if (header_.version != kVersion) {
    throw FormatError("unsupported PTAG version " + std::to_string(header_.version), 4);
  }
  if (header_.channel_count != kChannelCount) {
    throw FormatError("channel count must be 2, got " + std::to_string(header_.channel_count), 6);
  }
  if (header_.clock.period_ps == 0) throw FormatError("pulse period must be > 0", 8);
  if (header_.resolution_ps == 0) throw FormatError("resolution must be > 0", 32);
  bound_ = header_.timestamp_bound();
  if (!bound_) throw RangeError("pulse count * period overflows 64-bit picoseconds", 24);
  buffer_.resize(kBufferRecords * kRecordBytes);
}

bool TagReader::refill() {
  // Keep a partial trailing record at the front of the buffer.
  const std::size_t tail = len_ - pos_;
  if (tail > 0) std::memmove(buffer_.data(), buffer_.data() + pos_, tail);
  pos_ = 0;
  len_ = tail;
  source_->read(reinterpret_cast<char*>(buffer_.data() + len_),
                static_cast<std::streamsize>(buffer_.size() - len_));
  len_ += static_cast<std::size_t>(source_->gcount());
  return len_ > tail;
}

std::optional<TimeTag> TagReader::next() {
  if (len_ - pos_ < kRecordBytes) {
    refill();
    if (len_ - pos_ == 0) return std::nullopt;
    if (len_ - pos_ < kRecordBytes) {
      throw TruncationError("truncated record", offset_);
    }
  }
  const unsigned char* rec = buffer_.data() + pos_;
  TimeTag tag{get_le<std::uint64_t>(rec), rec[8]};
  if (tag.channel >= header_.channel_count) {
    throw FormatError("channel " + std::to_string(tag.channel) + " out of range at byte " +
                          std::to_string(offset_ + 8),
                      offset_ + 8);
  }
  for (std::size_t i = 9; i < kRecordBytes; ++i) {
    if (rec[i] != 0) {
      throw FormatError("nonzero padding at byte " + std::to_string(offset_ + i), offset_ + i);
    }
  }
  if (last_ && tag.timestamp_ps < *last_) {
    throw OrderingError("timestamp decreases at byte " + std::to_string(offset_), offset_);
  }
  if (tag.timestamp_ps >= *bound_) {
    throw RangeError("timestamp beyond the pulse span at byte " + std::to_string(offset_),
                     offset_);
  }
  last_ = tag.timestamp_ps;
  pos_ += kRecordBytes;
  offset_ += kRecordBytes;
  return tag;
}

std::uint64_t encode_stream(const TagStreamHeader& header, std::span<const TimeTag> tags,
                            std::ostream& sink) {
  TagWriter writer(sink, header);
  writer.append(tags);
  return writer.bytes_written();
}

TagStream decode_stream(std::istream& source) {
  TagReader reader(source);
  TagStream out{reader.header(), {}};
  while (auto tag = reader.next()) out.tags.push_back(*tag);
  return out;
}

}  // namespace pairchar::ptag
