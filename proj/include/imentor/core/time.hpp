#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "imentor/core/error.hpp"

namespace imentor {

using Timestamp = std::chrono::sys_seconds;

inline constexpr std::chrono::seconds kSecondsPerDay{86400};

namespace detail {

inline int parse_digits(std::string_view s, std::size_t pos, std::size_t count, std::string_view whole) {
  if (pos + count > s.size()) {
    throw DataError("truncated timestamp: '" + std::string(whole) + "'");
  }
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data() + pos, s.data() + pos + count, value);
  if (ec != std::errc{} || ptr != s.data() + pos + count) {
    throw DataError("bad timestamp: '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace detail

/// Parses `YYYY-MM-DD` (midnight UTC) or `YYYY-MM-DDTHH:MM:SS[.fff](Z|±HH:MM)`.
/// Fractional seconds are truncated.
inline Timestamp parse_timestamp(std::string_view text) {
  using namespace std::chrono;
  const int y = detail::parse_digits(text, 0, 4, text);
  if (text.size() < 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("bad timestamp: '" + std::string(text) + "'");
  }
  const int mo = detail::parse_digits(text, 5, 2, text);
  const int d = detail::parse_digits(text, 8, 2, text);
  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) {
    throw DataError("invalid calendar date: '" + std::string(text) + "'");
  }
  Timestamp ts = sys_days{ymd};
  if (text.size() == 10) {
    return ts;
  }
  if ((text[10] != 'T' && text[10] != ' ') || text.size() < 19 || text[13] != ':' || text[16] != ':') {
    throw DataError("bad timestamp: '" + std::string(text) + "'");
  }
  const int hh = detail::parse_digits(text, 11, 2, text);
  const int mm = detail::parse_digits(text, 14, 2, text);
  const int ss = detail::parse_digits(text, 17, 2, text);
  if (hh > 23 || mm > 59 || ss > 60) {
    throw DataError("time out of range: '" + std::string(text) + "'");
  }
  ts += hours{hh} + minutes{mm} + seconds{ss};

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      ++pos;
    }
  }
  if (pos == text.size()) {
    return ts;  // no zone designator: already UTC
  }
  if (text[pos] == 'Z' && pos + 1 == text.size()) {
    return ts;
  }
  if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
    const int oh = detail::parse_digits(text, pos + 1, 2, text);
    const int om = detail::parse_digits(text, pos + 4, 2, text);
    const auto offset = hours{oh} + minutes{om};
    return text[pos] == '+' ? ts - offset : ts + offset;
  }
  throw DataError("bad zone designator: '" + std::string(text) + "'");
}

inline std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day_point = floor<days>(ts);
  const year_month_day ymd{day_point};
  const hh_mm_ss tod{ts - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                static_cast<int>(tod.seconds().count()));
  return buf;
}

inline double to_days(std::chrono::seconds s) {
  return static_cast<double>(s.count()) / static_cast<double>(kSecondsPerDay.count());
}

}  // namespace imentor
