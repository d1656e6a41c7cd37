#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "epf/calendar_features.hpp"
#include "epf/error.hpp"
#include "epf/feature_builder.hpp"
#include "epf/market_data.hpp"
#include "epf/rng.hpp"

namespace epf::synth {

struct SynthConfig {
  Date start = make_date(2015, 1, 1);
  int num_days = 730;
  std::uint64_t seed = 1;
  double base_level = 40.0;
  double daily_amplitude = 8.0;   // hour-of-day shape
  double weekly_amplitude = 6.0;  // weekday shape
  double annual_amplitude = 6.0;
  double ar_coefficient = 0.7;    // latent daily factor
  double latent_sd = 4.0;         // innovation sd of the latent factor
  double noise_sd = 3.0;          // iid hourly noise
  double futures_signal_strength = 0.9;
  double futures_noise_sd = 1.0;
  bool holidays = true;  // Jan 1, May 1, Oct 3, Dec 25, Dec 26

  void validate() const {
    if (num_days < 400) throw DomainError("synth: num_days must be >= 400");
    if (daily_amplitude < 0 || weekly_amplitude < 0 || annual_amplitude < 0)
      throw DomainError("synth: amplitudes must be >= 0");
    if (!(ar_coefficient > -1.0 && ar_coefficient < 1.0))
      throw DomainError("synth: ar coefficient must lie in (-1, 1)");
    if (futures_signal_strength < 0.0 || futures_signal_strength > 1.0)
      throw DomainError("synth: futures_signal_strength must lie in [0, 1]");
    if (noise_sd < 0 || latent_sd < 0 || futures_noise_sd < 0)
      throw DomainError("synth: standard deviations must be >= 0");
  }
};

struct SynthData {
  PricePanel panel;
  FuturesBook book;
  HolidaySet holidays;
};

/// Mean-zero hour-of-day shape (night trough, midday and evening peaks).
inline double hourly_shape(int hour) {
  double x = 2.0 * std::numbers::pi * (hour - 1) / 24.0;
  return -std::cos(x - 2.0 * std::numbers::pi * 3.0 / 24.0) + 0.4 * std::sin(2.0 * x);
}

/// Mean-zero weekday shape, Mon..Sun.
inline constexpr std::array<double, 7> kWeeklyShape{0.3, 0.5, 0.5, 0.4, 0.2, -0.6, -1.3};

inline double annual_shape(Date d) {
  return std::cos(2.0 * std::numbers::pi * (SeasonBasis::position(d) - 14.0) / SeasonBasis::kPeriod);
}

/// Deterministic part of Y(d, h): level + annual + weekly + hourly.
inline double expected_price(const SynthConfig& c, Date d, int hour, const HolidaySet& holidays) {
  return c.base_level + c.annual_amplitude * annual_shape(d) +
         c.weekly_amplitude * kWeeklyShape[static_cast<int>(effective_dow(d, holidays))] +
         c.daily_amplitude * hourly_shape(hour);
}

inline HolidaySet fixed_holidays(Date first, Date last) {
  HolidaySet out;
  int y0 = static_cast<int>(std::chrono::year_month_day{first}.year());
  int y1 = static_cast<int>(std::chrono::year_month_day{last}.year());
  for (int y = y0; y <= y1; ++y)
    for (auto [m, d] : {std::pair{1u, 1u}, {5u, 1u}, {10u, 3u}, {12u, 25u}, {12u, 26u}}) {
      Date h = make_date(y, m, d);
      if (h >= first && h <= last) out.insert(h);
    }
  return out;
}

/**
 * Prices are level + annual sinusoid + weekday shape + hour shape + an AR(1)
 * daily latent factor + iid hourly noise. Futures settle on every trading
 * day at signal_strength times the realized mean over the contract's delivery
 * period (base: all hours, peak: hours 9..20) plus independent noise.
 */
inline SynthData generate(const SynthConfig& c) {
  c.validate();
  constexpr int kLead = 70;  // simulated beyond the panel so late quotes have deliveries
  const int total = c.num_days + kLead;
  Date last_emitted = add_days(c.start, c.num_days - 1);
  SynthData out;
  out.holidays = c.holidays ? fixed_holidays(c.start, add_days(c.start, total - 1)) : HolidaySet{};

  Rng rng(c.seed);
  std::vector<DayPrices> prices(static_cast<std::size_t>(total));
  double latent = c.latent_sd * rng.normal() / std::sqrt(1.0 - c.ar_coefficient * c.ar_coefficient);
  for (int i = 0; i < total; ++i) {
    if (i > 0) latent = c.ar_coefficient * latent + c.latent_sd * rng.normal();
    Date d = add_days(c.start, i);
    for (int h = 1; h <= kHours; ++h)
      prices[static_cast<std::size_t>(i)][h - 1] =
          expected_price(c, d, h, out.holidays) + latent + c.noise_sd * rng.normal();
  }

  auto delivery_mean = [&](Date from, int days, Variant v) {
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < days; ++k) {
      const auto& day = prices[static_cast<std::size_t>(days_between(c.start, add_days(from, k)))];
      for (int h = 1; h <= kHours; ++h) {
        if (v == Variant::Peak && (h < 9 || h > 20)) continue;
        sum += day[h - 1];
        ++count;
      }
    }
    return sum / count;
  };

  FeatureSpec spec;
  ExchangeCalendar calendar(out.holidays);
  Rng futures_rng = Rng::substream(c.seed, 1);
  for (auto t = c.start; t <= last_emitted; t = add_days(t, 1)) {
    if (!calendar.is_trading_day(t)) continue;
    auto quote = [&](Product p, Variant v, int maturity, Date from, int days) {
      double q = c.futures_signal_strength * delivery_mean(from, days, v) + c.futures_noise_sd * futures_rng.normal();
      out.book.insert(t, {p, v, maturity}, q);
    };
    std::chrono::year_month_day ymd{t};
    Date next_month{(ymd.year() / ymd.month() / 1) + std::chrono::months{1}};
    int month_days = static_cast<int>(
        days_between(next_month, Date{std::chrono::year_month_day{next_month} + std::chrono::months{1}}));
    for (auto v : {Variant::Base, Variant::Peak}) {
      for (int m : spec.day_maturities) quote(Product::Day, v, m, add_days(t, m), 1);
      for (int m : spec.week_maturities) quote(Product::Week, v, m, add_days(t, m), 7);
      for (int m : spec.maturities(Product::Weekend, v)) quote(Product::Weekend, v, m, add_days(t, m), 2);
      quote(Product::Month, v, spec.month_maturity_label, next_month, month_days);
    }
  }

  prices.resize(static_cast<std::size_t>(c.num_days));
  out.panel = PricePanel(c.start, std::move(prices));
  HolidaySet emitted;
  for (auto d : out.holidays)
    if (d <= last_emitted) emitted.insert(d);
  out.holidays = std::move(emitted);
  return out;
}

}  // namespace epf::synth
