#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>

namespace cle {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;
using Clock = std::function<Timestamp()>;

inline Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

inline std::int64_t to_epoch_ms(Timestamp t) { return t.time_since_epoch().count(); }
inline Timestamp from_epoch_ms(std::int64_t ms) { return Timestamp(std::chrono::milliseconds(ms)); }

/// RFC 3339 UTC with millisecond precision, e.g. 2024-05-01T12:00:00.000Z.
std::string to_iso8601(Timestamp t);

}  // namespace cle
