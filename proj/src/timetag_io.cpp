#include "qdent/timetag_io.hpp"

#include <cstring>

#include "qdent/error.hpp"

namespace qdent {

namespace {

void put_le(std::uint8_t* p, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le(const std::uint8_t* p, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::array<std::uint8_t, TimeTagHeader::kSize> encode_header(const TimeTagHeader& h) {
  std::array<std::uint8_t, TimeTagHeader::kSize> b{};
  std::memcpy(b.data(), TimeTagHeader::kMagic.data(), 4);
  put_le(b.data() + 4, h.version, 2);
  put_le(b.data() + 6, h.rep_period_ps, 8);
  b[14] = h.channel_count;
  b[15] = 0;
  return b;
}

std::array<std::uint8_t, TimeTagHeader::kRecordSize> encode_record(const DetectionRecord& r) {
  std::array<std::uint8_t, TimeTagHeader::kRecordSize> b{};
  b[0] = r.channel;
  put_le(b.data() + 8, r.timestamp, 8);
  return b;
}

TimeTagHeader decode_header(const std::uint8_t* b, std::size_t available) {
  if (available < TimeTagHeader::kSize) {
    if (available < 4 || std::memcmp(b, TimeTagHeader::kMagic.data(), 4) != 0) {
      throw ParseError("bad magic", 0);
    }
    throw ParseError("truncated header", available);
  }
  if (std::memcmp(b, TimeTagHeader::kMagic.data(), 4) != 0) throw ParseError("bad magic", 0);
  TimeTagHeader h;
  h.version = static_cast<std::uint16_t>(get_le(b + 4, 2));
  if (h.version != TimeTagHeader::kVersion) {
    throw ParseError("unsupported version " + std::to_string(h.version), 4);
  }
  h.rep_period_ps = get_le(b + 6, 8);
  h.channel_count = b[14];
  if (h.channel_count == 0) throw ParseError("channel_count is zero", 14);
  return h;
}

// Shared per-record checks of reader and decoder.
DetectionRecord decode_record(const std::uint8_t* b, std::uint64_t offset, const TimeTagHeader& h,
                              std::array<std::uint64_t, 256>& last, std::array<bool, 256>& seen) {
  DetectionRecord r{b[0], get_le(b + 8, 8)};
  if (r.channel >= h.channel_count) {
    throw ParseError("channel " + std::to_string(r.channel) + " out of range", offset);
  }
  if (seen[r.channel] && r.timestamp < last[r.channel]) {
    throw ParseError("timestamps decrease on channel " + std::to_string(r.channel), offset + 8);
  }
  seen[r.channel] = true;
  last[r.channel] = r.timestamp;
  return r;
}

}  // namespace

TimeTagWriter::TimeTagWriter(const std::string& path, const TimeTagHeader& header)
    : path_(path), out_(path, std::ios::binary | std::ios::trunc), header_(header) {
  if (!out_) throw IoError("cannot open time-tag file for writing", path);
  if (header.channel_count == 0) throw ValidationError("channel_count must be > 0");
  const auto h = encode_header(header);
  out_.write(reinterpret_cast<const char*>(h.data()), h.size());
  if (!out_) throw IoError("write failed", path_);
}

TimeTagWriter::~TimeTagWriter() {
  if (out_.is_open()) out_.close();
}

void TimeTagWriter::write(const DetectionRecord& r) {
  if (r.channel >= header_.channel_count) throw ValidationError("record channel out of range");
  if (seen_[r.channel] && r.timestamp < last_[r.channel]) {
    throw ValidationError("timestamps must be non-decreasing per channel");
  }
  seen_[r.channel] = true;
  last_[r.channel] = r.timestamp;
  const auto b = encode_record(r);
  out_.write(reinterpret_cast<const char*>(b.data()), b.size());
  if (!out_) throw IoError("write failed", path_);
}

void TimeTagWriter::close() {
  out_.flush();
  if (!out_) throw IoError("write failed", path_);
  out_.close();
}

TimeTagReader::TimeTagReader(const std::string& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError("cannot open time-tag file", path);
  std::array<std::uint8_t, TimeTagHeader::kSize> b{};
  in_.read(reinterpret_cast<char*>(b.data()), b.size());
  header_ = decode_header(b.data(), static_cast<std::size_t>(in_.gcount()));
  offset_ = TimeTagHeader::kSize;
}

bool TimeTagReader::next(DetectionRecord& r) {
  std::array<std::uint8_t, TimeTagHeader::kRecordSize> b{};
  in_.read(reinterpret_cast<char*>(b.data()), b.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return false;
  if (got < b.size()) throw ParseError("truncated record", offset_);
  r = decode_record(b.data(), offset_, header_, last_, seen_);
  offset_ += b.size();
  return true;
}

void write_timetags(const std::string& path, const TimeTagHeader& header,
                    std::span<const DetectionRecord> records) {
  TimeTagWriter w(path, header);
  for (const auto& r : records) w.write(r);
  w.close();
}

TimeTagFile read_timetags(const std::string& path) {
  TimeTagReader reader(path);
  TimeTagFile f;
  f.header = reader.header();
  DetectionRecord r;
  while (reader.next(r)) f.records.push_back(r);
  return f;
}

std::vector<std::uint8_t> encode_timetags(const TimeTagHeader& header,
                                          std::span<const DetectionRecord> records) {
  std::vector<std::uint8_t> out;
  out.reserve(TimeTagHeader::kSize + records.size() * TimeTagHeader::kRecordSize);
  const auto h = encode_header(header);
  out.insert(out.end(), h.begin(), h.end());
  for (const auto& r : records) {
    const auto b = encode_record(r);
    out.insert(out.end(), b.begin(), b.end());
  }
  return out;
}

TimeTagFile decode_timetags(std::span<const std::uint8_t> bytes) {
  TimeTagFile f;
  f.header = decode_header(bytes.data(), bytes.size());
  std::array<std::uint64_t, 256> last{};
  std::array<bool, 256> seen{};
  std::uint64_t off = TimeTagHeader::kSize;
  while (off < bytes.size()) {
    if (bytes.size() - off < TimeTagHeader::kRecordSize) throw ParseError("truncated record", off);
    f.records.push_back(decode_record(bytes.data() + off, off, f.header, last, seen));
    off += TimeTagHeader::kRecordSize;
  }
  return f;
}

}  // namespace qdent
