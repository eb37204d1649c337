#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "qdent/detection_chain.hpp"

namespace qdent {

// Binary time-tag file, little-endian:
//   header (16 bytes): "QTT1", u16 version, u64 rep_period_ps,
//                      u8 channel_count, u8 reserved (0)
//   record (16 bytes): u8 channel, 7 zero pad bytes, u64 timestamp_ps
struct TimeTagHeader {
  static constexpr std::array<char, 4> kMagic{'Q', 'T', 'T', '1'};
  static constexpr std::uint16_t kVersion = 1;
  static constexpr std::size_t kSize = 16;
  static constexpr std::size_t kRecordSize = 16;

  std::uint16_t version = kVersion;
  std::uint64_t rep_period_ps = 0;
  std::uint8_t channel_count = 2;

  friend bool operator==(const TimeTagHeader&, const TimeTagHeader&) = default;
};

struct TimeTagFile {
  TimeTagHeader header;
  std::vector<DetectionRecord> records;
};

// Append-only writer. Records are checked against the header channel count
// and the per-channel ordering before they are written.
class TimeTagWriter {
 public:
  TimeTagWriter(const std::string& path, const TimeTagHeader& header);
  ~TimeTagWriter();
  TimeTagWriter(const TimeTagWriter&) = delete;
  TimeTagWriter& operator=(const TimeTagWriter&) = delete;

  void write(const DetectionRecord& r);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
  TimeTagHeader header_;
  std::array<std::uint64_t, 256> last_{};
  std::array<bool, 256> seen_{};
};

// Streaming reader in constant memory. Parse failures throw ParseError with
// the byte offset of the offending field.
class TimeTagReader {
 public:
  explicit TimeTagReader(const std::string& path);

  const TimeTagHeader& header() const { return header_; }
  // False at a clean end of file.
  bool next(DetectionRecord& r);

 private:
  std::string path_;
  std::ifstream in_;
  TimeTagHeader header_;
  std::uint64_t offset_ = 0;
  std::array<std::uint64_t, 256> last_{};
  std::array<bool, 256> seen_{};
};

void write_timetags(const std::string& path, const TimeTagHeader& header,
                    std::span<const DetectionRecord> records);
TimeTagFile read_timetags(const std::string& path);

// In-memory codec used by the file classes.
std::vector<std::uint8_t> encode_timetags(const TimeTagHeader& header,
                                          std::span<const DetectionRecord> records);
TimeTagFile decode_timetags(std::span<const std::uint8_t> bytes);

}  // namespace qdent
