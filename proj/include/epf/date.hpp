#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "epf/error.hpp"

namespace epf {

/// Calendar date with day resolution; arithmetic is in whole days.
using Date = std::chrono::sys_days;

inline constexpr Date make_date(int y, unsigned m, unsigned d) {
  return Date{std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}};
}

inline constexpr Date add_days(Date d, long n) { return d + std::chrono::days{n}; }

inline constexpr long days_between(Date from, Date to) { return (to - from).count(); }

/// Parses `YYYY-MM-DD`. Throws InputError on anything else.
inline Date parse_date(std::string_view s) {
  auto fail = [&]() -> Date { throw InputError("invalid date '" + std::string(s) + "'"); };
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return fail();
  int y = 0;
  unsigned m = 0, d = 0;
  auto num = [&](std::string_view part, auto& out) {
    auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
    return ec == std::errc{} && p == part.data() + part.size();
  };
  if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d)) return fail();
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) return fail();
  return Date{ymd};
}

inline std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

/// Inclusive date interval.
struct DateRange {
  Date first;
  Date last;

  [[nodiscard]] long size() const { return days_between(first, last) + 1; }
  [[nodiscard]] bool contains(Date d) const { return d >= first && d <= last; }
  friend bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace epf
