#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "epf/csv.hpp"
#include "epf/date.hpp"

namespace epf {

enum class Weekday { Mon = 0, Tue, Wed, Thu, Fri, Sat, Sun };

inline constexpr std::array<const char*, 7> kWeekdayNames{"mon", "tue", "wed", "thu",
                                                          "fri", "sat", "sun"};

using HolidaySet = std::set<Date>;

inline Weekday calendar_weekday(Date d) {
  return static_cast<Weekday>(std::chrono::weekday{d}.iso_encoding() - 1);
}

inline bool is_weekend(Date d) {
  auto w = calendar_weekday(d);
  return w == Weekday::Sat || w == Weekday::Sun;
}

/// Weekday with public holidays folded onto Sunday.
inline Weekday effective_dow(Date d, const HolidaySet& holidays) {
  return holidays.contains(d) ? Weekday::Sun : calendar_weekday(d);
}

/// One-hot Mon..Sun indicator of effective_dow.
inline std::array<double, 7> dow_dummies(Date d, const HolidaySet& holidays) {
  std::array<double, 7> out{};
  out[static_cast<int>(effective_dow(d, holidays))] = 1.0;
  return out;
}

inline int day_of_year(Date d) {
  std::chrono::year_month_day ymd{d};
  return static_cast<int>(days_between(Date{ymd.year() / 1 / 1}, d)) + 1;
}

inline int days_in_year(Date d) {
  return std::chrono::year_month_day{d}.year().is_leap() ? 366 : 365;
}

struct CalendarDay {
  Date date;
  Weekday effective_dow;
  bool is_holiday;
  int day_of_year;
};

inline CalendarDay make_calendar_day(Date d, const HolidaySet& holidays) {
  return {d, effective_dow(d, holidays), holidays.contains(d), day_of_year(d)};
}

/**
 * Four periodic cubic B-spline season curves (winter, spring, summer, autumn).
 *
 * Knots sit equidistantly on a circle of one year (365.25 days); the winter
 * knot is at mid-January. Dates map onto the circle by fraction of their
 * calendar year, so Feb 29 introduces no discontinuity. Each curve is the
 * uniform cubic B-spline centred at its knot, scaled so its peak is 1.
 */
struct SeasonBasis {
  static constexpr double kPeriod = 365.25;
  static constexpr double kSpacing = kPeriod / 4.0;
  static constexpr double kWinterKnot = 14.0 / 365.0 * kPeriod;
  static constexpr std::array<const char*, 4> kNames{"winter", "spring", "summer", "autumn"};

  static constexpr double knot(int k) { return kWinterKnot + k * kSpacing; }

  /// Position of a date on the season circle, in [0, kPeriod).
  static double position(Date d) {
    return static_cast<double>(day_of_year(d) - 1) / days_in_year(d) * kPeriod;
  }

  /// Peak-normalized uniform cubic B-spline of a signed offset in knot spacings.
  static double bump(double u) {
    u = std::abs(u);
    double b = 0.0;
    if (u < 1.0)
      b = 2.0 / 3.0 - u * u + 0.5 * u * u * u;
    else if (u < 2.0)
      b = (2.0 - u) * (2.0 - u) * (2.0 - u) / 6.0;
    return 1.5 * b;
  }

  static std::array<double, 4> at_position(double t) {
    std::array<double, 4> out{};
    for (int k = 0; k < 4; ++k) {
      double delta = std::remainder(t - knot(k), kPeriod);
      out[k] = bump(delta / kSpacing);
    }
    return out;
  }

  static std::array<double, 4> values(Date d) { return at_position(position(d)); }
};

inline std::array<double, 4> season_values(Date d) { return SeasonBasis::values(d); }

/// Trading days are weekdays that are not in the holiday set.
class ExchangeCalendar {
 public:
  ExchangeCalendar() = default;
  explicit ExchangeCalendar(HolidaySet holidays) : holidays_(std::move(holidays)) {}

  [[nodiscard]] bool is_trading_day(Date d) const {
    return !is_weekend(d) && !holidays_.contains(d);
  }

  /// Latest trading day <= d.
  [[nodiscard]] Date last_trading_day_on_or_before(Date d) const {
    while (!is_trading_day(d)) d = add_days(d, -1);
    return d;
  }

  [[nodiscard]] const HolidaySet& holidays() const { return holidays_; }

 private:
  HolidaySet holidays_;
};

inline HolidaySet load_holidays(const std::string& path) {
  auto table = csv::read(path, {"date"});
  HolidaySet out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    try {
      out.insert(parse_date(table.rows[i][0]));
    } catch (const InputError& e) {
      throw InputError(table.where(i) + ": " + e.what());
    }
  }
  return out;
}

inline std::string holidays_csv(const HolidaySet& holidays) {
  std::string s = "date\n";
  for (auto d : holidays) s += format_date(d) + "\n";
  return s;
}

inline void save_holidays(const std::string& path, const HolidaySet& holidays) {
  csv::write_file(path, holidays_csv(holidays));
}

}  // namespace epf
