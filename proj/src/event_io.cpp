#include "qdent/event_io.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include "qdent/error.hpp"

namespace qdent {

namespace {

void put_le(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint64_t round_ps(double t) { return t > 0 ? static_cast<std::uint64_t>(std::llround(t)) : 0; }

}  // namespace

EventRecord to_event_record(const EmissionEvent& ev) {
  return {ev.pulse_index, round_ps(ev.t_xx()), round_ps(ev.t_x()),
          static_cast<std::uint8_t>(ev.reexcitation ? EventRecord::kFlagReexcitation : 0)};
}

void write_events(const std::string& path, std::span<const EventRecord> events) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open event file for writing", path);
  std::array<std::uint8_t, EventRecord::kSize> b{};
  for (const auto& e : events) {
    put_le(b.data(), e.pulse_index);
    put_le(b.data() + 8, e.t_xx);
    put_le(b.data() + 16, e.t_x);
    b[24] = e.flags;
    out.write(reinterpret_cast<const char*>(b.data()), b.size());
  }
  out.flush();
  if (!out) throw IoError("write failed", path);
}

std::vector<EventRecord> read_events(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open event file", path);
  std::vector<EventRecord> out;
  std::array<std::uint8_t, EventRecord::kSize> b{};
  std::uint64_t offset = 0;
  for (;;) {
    in.read(reinterpret_cast<char*>(b.data()), b.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got < b.size()) throw ParseError("truncated event record", offset);
    out.push_back({get_le(b.data()), get_le(b.data() + 8), get_le(b.data() + 16), b[24]});
    offset += b.size();
  }
  return out;
}

}  // namespace qdent
