#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "epf/calendar_features.hpp"
#include "support.hpp"

using namespace epf;

namespace {

bool leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int ordinal_day(int y, int m, int d) {
  static const int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int n = d;
  for (int i = 1; i < m; ++i) n += len[i - 1] + (i == 2 && leap(y) ? 1 : 0);
  return n;
}

// Cox-de Boor recursion for the cubic B-spline on the uniform knots t0 + i*s, i = 0..4.
double cox_de_boor(double x, double t0, double s) {
  double knots[5];
  for (int i = 0; i < 5; ++i) knots[i] = t0 + i * s;
  double N[4];
  for (int i = 0; i < 4; ++i) N[i] = (x >= knots[i] && x < knots[i + 1]) ? 1.0 : 0.0;
  for (int p = 1; p <= 3; ++p)
    for (int i = 0; i < 4 - p; ++i) {
      double left = (x - knots[i]) / (knots[i + p] - knots[i]);
      double right = (knots[i + p + 1] - x) / (knots[i + p + 1] - knots[i + 1]);
      N[i] = left * N[i] + right * N[i + 1];
    }
  return N[0];
}

double season_oracle(double t, int k) {
  const double period = 365.25, s = period / 4.0;
  double knot = 14.0 / 365.0 * period + k * s;
  // move t into [knot - 2s, knot + 2s)
  double x = t;
  while (x < knot - 2 * s) x += period;
  while (x >= knot + 2 * s) x -= period;
  double peak = cox_de_boor(knot, knot - 2 * s, s);
  return cox_de_boor(x, knot - 2 * s, s) / peak;
}

}  // namespace

TEST_CASE("weekday examples", "[calendar]") {
  CHECK(calendar_weekday(make_date(2016, 7, 29)) == Weekday::Fri);
  CHECK(calendar_weekday(make_date(2016, 10, 22)) == Weekday::Sat);
  HolidaySet unity{make_date(2016, 10, 3)};
  CHECK(calendar_weekday(make_date(2016, 10, 3)) == Weekday::Mon);
  CHECK(effective_dow(make_date(2016, 10, 3), unity) == Weekday::Sun);
  CHECK(effective_dow(make_date(2016, 10, 4), unity) == Weekday::Tue);
}

TEST_CASE("friday dummies", "[calendar]") {
  auto v = dow_dummies(make_date(2016, 7, 29), {});
  std::array<double, 7> expected{0, 0, 0, 0, 1, 0, 0};
  CHECK(v == expected);
  auto h = dow_dummies(make_date(2016, 10, 3), {make_date(2016, 10, 3)});
  CHECK(h[6] == 1.0);
  CHECK(h[0] == 0.0);
}

TEST_CASE("weekday, ordinal and one-hot dummies agree with oracles 1900-2100", "[calendar]") {
  HolidaySet holidays;
  for (int y = 1900; y <= 2100; ++y) holidays.insert(make_date(y, 12, 25));
  for (auto d = make_date(1900, 1, 1); d <= make_date(2100, 12, 31); d = add_days(d, 1)) {
    std::chrono::year_month_day ymd{d};
    int y = static_cast<int>(ymd.year());
    int m = static_cast<int>(static_cast<unsigned>(ymd.month()));
    int dd = static_cast<int>(static_cast<unsigned>(ymd.day()));
    int w = testing::weekday_oracle(y, m, dd);
    REQUIRE(static_cast<int>(calendar_weekday(d)) == w);
    REQUIRE(day_of_year(d) == ordinal_day(y, m, dd));
    auto dummies = dow_dummies(d, holidays);
    double sum = 0.0;
    for (double x : dummies) {
      REQUIRE((x == 0.0 || x == 1.0));
      sum += x;
    }
    REQUIRE(sum == 1.0);
    int expected = holidays.contains(d) ? 6 : w;
    REQUIRE(dummies[static_cast<std::size_t>(expected)] == 1.0);
  }
}

TEST_CASE("season curves match a Cox-de Boor oracle", "[calendar]") {
  for (double t = 0.0; t < SeasonBasis::kPeriod; t += 0.37) {
    auto v = SeasonBasis::at_position(t);
    for (int k = 0; k < 4; ++k) REQUIRE(v[static_cast<std::size_t>(k)] == Catch::Approx(season_oracle(t, k)).margin(1e-12));
  }
}

TEST_CASE("winter curve peaks on January 15", "[calendar]") {
  auto v = season_values(make_date(2015, 1, 15));
  CHECK(v[0] == Catch::Approx(1.0).margin(1e-12));
  // cubic basis at a knot: neighbours carry 1/4 of the peak, the opposite curve 0
  CHECK(v[1] == Catch::Approx(0.25).margin(1e-12));
  CHECK(v[3] == Catch::Approx(0.25).margin(1e-12));
  CHECK(v[2] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("season curves: range, periodicity, continuity and peak normalization", "[calendar]") {
  for (auto d = make_date(2000, 1, 1); d <= make_date(2030, 12, 31); d = add_days(d, 1)) {
    auto a = season_values(d);
    auto next = season_values(add_days(d, 1));
    auto year_later = season_values(add_days(d, 365));
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) {
      auto i = static_cast<std::size_t>(k);
      REQUIRE(a[i] >= 0.0);
      REQUIRE(a[i] <= 1.0);
      REQUIRE(std::abs(a[i] - next[i]) < 0.05);
      REQUIRE(std::abs(a[i] - year_later[i]) < 0.02);
      sum += a[i];
    }
    REQUIRE(sum > 0.0);
  }
  std::array<double, 4> peak{};
  for (int i = 0; i <= 365250; ++i) {
    auto v = SeasonBasis::at_position(i * 1e-3);
    for (std::size_t k = 0; k < 4; ++k) peak[k] = std::max(peak[k], v[k]);
  }
  for (int k = 0; k < 4; ++k) {
    auto at_knot = SeasonBasis::at_position(SeasonBasis::knot(k));
    peak[static_cast<std::size_t>(k)] = std::max(peak[static_cast<std::size_t>(k)], at_knot[static_cast<std::size_t>(k)]);
    CHECK(peak[static_cast<std::size_t>(k)] == Catch::Approx(1.0).margin(1e-9));
  }
}

TEST_CASE("exchange calendar skips weekends and holidays", "[calendar]") {
  ExchangeCalendar cal({make_date(2016, 10, 3)});
  CHECK_FALSE(cal.is_trading_day(make_date(2016, 10, 1)));
  CHECK_FALSE(cal.is_trading_day(make_date(2016, 10, 3)));
  CHECK(cal.is_trading_day(make_date(2016, 10, 4)));
  CHECK(cal.last_trading_day_on_or_before(make_date(2016, 10, 3)) == make_date(2016, 9, 30));
}
