#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qdent/cascade_sim.hpp"

namespace qdent {

// Intermediate emission-event spill file: headerless packed 25-byte
// little-endian records (u64 pulse_index, u64 t_xx ps, u64 t_x ps, u8 flags).
struct EventRecord {
  static constexpr std::size_t kSize = 25;
  static constexpr std::uint8_t kFlagReexcitation = 0x01;

  std::uint64_t pulse_index = 0;
  std::uint64_t t_xx = 0;
  std::uint64_t t_x = 0;
  std::uint8_t flags = 0;

  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Rounds emission times to whole picoseconds.
EventRecord to_event_record(const EmissionEvent& ev);

void write_events(const std::string& path, std::span<const EventRecord> events);
// Throws ParseError on a trailing partial record.
std::vector<EventRecord> read_events(const std::string& path);

}  // namespace qdent
