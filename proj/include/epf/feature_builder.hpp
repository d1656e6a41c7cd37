#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epf/calendar_features.hpp"
#include "epf/date.hpp"
#include "epf/error.hpp"
#include "epf/market_data.hpp"

namespace epf {

enum class ColumnKind { Ar, Future, Dummy, Spline };

/// One regressor. Fields not meaningful for a kind are left at -1.
struct FeatureColumn {
  std::string name;
  ColumnKind kind;
  int hour = -1;  // ar: source hour 1..24
  int lag = -1;   // ar: days back 1..7; futures: k
  Product product = Product::Day;
  Variant variant = Variant::Base;
  int maturity = -1;
  int index = -1;  // dummy: weekday 0..6; spline: season 0..3
};

/**
 * Regressor layout of the futures-augmented AR24-X model.
 *
 * Columns: ar block (hour-major, lag-minor), then futures blocks day/week/
 * weekend/month for base, then the same for peak, then weekday dummies
 * Mon..Sun, then season curves winter..autumn. Inside a futures block
 * columns are maturity-major, lag-minor.
 */
struct FeatureSpec {
  int price_lags = 7;  // K_Y
  int day_lags = 7;    // K_day
  int week_lags = 3;   // K_week
  int weekend_lags = 1;
  std::vector<int> day_maturities{2, 3, 4, 5, 6};
  std::vector<int> week_maturities{3, 10, 17, 24};
  std::vector<int> weekend_maturities{1, 2, 3, 4, 5, 8, 9, 10, 11, 12};
  std::vector<int> weekend_peak_maturities{1, 2, 3, 4, 5};
  int month_maturity_label = 1;

  [[nodiscard]] int ar_count() const { return kHours * price_lags; }

  [[nodiscard]] int block_size(Product p, Variant v) const {
    switch (p) {
      case Product::Day: return (1 + day_lags) * static_cast<int>(day_maturities.size());
      case Product::Week: return (1 + week_lags) * static_cast<int>(week_maturities.size());
      case Product::Weekend:
        return (1 + weekend_lags) *
               static_cast<int>((v == Variant::Base ? weekend_maturities : weekend_peak_maturities).size());
      case Product::Month: return 1;
    }
    return 0;
  }

  [[nodiscard]] int futures_count() const {
    int n = 0;
    for (auto v : {Variant::Base, Variant::Peak})
      for (auto p : {Product::Day, Product::Week, Product::Weekend, Product::Month}) n += block_size(p, v);
    return n;
  }

  [[nodiscard]] int futures_offset() const { return ar_count(); }
  [[nodiscard]] int dummy_offset() const { return ar_count() + futures_count(); }
  [[nodiscard]] int spline_offset() const { return dummy_offset() + 7; }
  [[nodiscard]] int total_count() const { return spline_offset() + 4; }

  [[nodiscard]] const std::vector<int>& maturities(Product p, Variant v) const {
    static const std::vector<int> month{1};
    switch (p) {
      case Product::Day: return day_maturities;
      case Product::Week: return week_maturities;
      case Product::Weekend: return v == Variant::Base ? weekend_maturities : weekend_peak_maturities;
      case Product::Month: return month;
    }
    return month;
  }

  [[nodiscard]] int lags(Product p) const {
    switch (p) {
      case Product::Day: return day_lags;
      case Product::Week: return week_lags;
      case Product::Weekend: return weekend_lags;
      case Product::Month: return 0;
    }
    return 0;
  }

  [[nodiscard]] std::vector<FeatureColumn> columns() const {
    std::vector<FeatureColumn> out;
    out.reserve(static_cast<std::size_t>(total_count()));
    char buf[64];
    for (int j = 1; j <= kHours; ++j)
      for (int k = 1; k <= price_lags; ++k) {
        std::snprintf(buf, sizeof buf, "ar.h%02d.l%d", j, k);
        out.push_back({buf, ColumnKind::Ar, j, k});
      }
    for (auto v : {Variant::Base, Variant::Peak})
      for (auto p : {Product::Day, Product::Week, Product::Weekend, Product::Month})
        for (int m : maturities(p, v))
          for (int k = 0; k <= lags(p); ++k) {
            int label = p == Product::Month ? month_maturity_label : m;
            std::snprintf(buf, sizeof buf, "fut.%s.%s.m%d.l%d", to_string(p), to_string(v), label, k);
            out.push_back({buf, ColumnKind::Future, -1, k, p, v, label});
          }
    for (int i = 0; i < 7; ++i)
      out.push_back({std::string("dow.") + kWeekdayNames[i], ColumnKind::Dummy, -1, -1,
                     Product::Day, Variant::Base, -1, i});
    for (int i = 0; i < 4; ++i)
      out.push_back({std::string("season.") + SeasonBasis::kNames[i], ColumnKind::Spline, -1, -1,
                     Product::Day, Variant::Base, -1, i});
    return out;
  }
};

/// A single aligned futures cell. A cell without trade date is a structural
/// zero (weekend product on a weekday, Saturday maturity 1).
struct FuturesCell {
  double value = 0.0;
  std::optional<Date> trade_date;   // nominal date by the alignment rule
  std::optional<Date> source_date;  // date the settlement was actually observed
  bool missing = false;
};

using FuturesCells = std::vector<FuturesCell>;

namespace detail {

inline FuturesCell lookup(const FilledFuturesBook& book, Date trade_date, FuturesKey key) {
  FuturesCell cell;
  cell.trade_date = trade_date;
  if (const auto* q = book.find(trade_date, key)) {
    cell.value = q->price;
    cell.source_date = q->source_date;
  } else {
    cell.missing = true;
  }
  return cell;
}

inline Date monday_of_week(Date d) {
  return add_days(d, -static_cast<long>(calendar_weekday(d)));
}

}  // namespace detail

/// Day futures: cell (m, k) is maturity m settled on target - 2 - k.
inline FuturesCells align_day_futures(const FilledFuturesBook& book, Date target, Variant variant,
                                      const FeatureSpec& spec = {}) {
  FuturesCells out;
  for (int m : spec.day_maturities)
    for (int k = 0; k <= spec.day_lags; ++k)
      out.push_back(detail::lookup(book, add_days(target, -2 - k), {Product::Day, variant, m}));
  return out;
}

/// Settlement date feeding the week block: the last trading day on or before
/// the Friday preceding the target's Monday-to-Sunday week.
inline Date week_base_trade_date(Date target, const ExchangeCalendar& calendar) {
  return calendar.last_trading_day_on_or_before(add_days(detail::monday_of_week(target), -3));
}

inline FuturesCells align_week_futures(const FilledFuturesBook& book, const ExchangeCalendar& calendar,
                                       Date target, Variant variant, const FeatureSpec& spec = {}) {
  Date base = week_base_trade_date(target, calendar);
  FuturesCells out;
  for (int m : spec.week_maturities)
    for (int k = 0; k <= spec.week_lags; ++k)
      out.push_back(detail::lookup(book, add_days(base, -7L * k), {Product::Week, variant, m}));
  return out;
}

/**
 * Weekend futures. Weekday targets get all zeros. For a Saturday or Sunday
 * target with weekend Saturday S, cell (m, k) is maturity m settled on
 * S - m - 7k. Saturday's maturity-1 cells stay zero: that Friday settlement
 * comes after the Saturday auction has closed.
 */
inline FuturesCells align_weekend_futures(const FilledFuturesBook& book, Date target, Variant variant,
                                          const FeatureSpec& spec = {}) {
  const auto& maturities = spec.maturities(Product::Weekend, variant);
  FuturesCells out(maturities.size() * static_cast<std::size_t>(1 + spec.weekend_lags));
  auto dow = calendar_weekday(target);
  if (dow != Weekday::Sat && dow != Weekday::Sun) return out;
  Date saturday = dow == Weekday::Sat ? target : add_days(target, -1);
  std::size_t i = 0;
  for (int m : maturities)
    for (int k = 0; k <= spec.weekend_lags; ++k, ++i) {
      if (dow == Weekday::Sat && m == 1) continue;
      out[i] = detail::lookup(book, add_days(saturday, -m - 7L * k), {Product::Weekend, variant, m});
    }
  return out;
}

/// Last trading day of the month before the target's month.
inline Date month_trade_date(Date target, const ExchangeCalendar& calendar) {
  std::chrono::year_month_day ymd{target};
  Date first_of_month{ymd.year() / ymd.month() / 1};
  return calendar.last_trading_day_on_or_before(add_days(first_of_month, -1));
}

inline FuturesCells align_month_future(const FilledFuturesBook& book, const ExchangeCalendar& calendar,
                                       Date target, Variant variant, const FeatureSpec& spec = {}) {
  return {detail::lookup(book, month_trade_date(target, calendar),
                         {Product::Month, variant, spec.month_maturity_label})};
}

/// All 144 futures cells for a target, in column order.
inline FuturesCells align_futures(const FilledFuturesBook& book, const ExchangeCalendar& calendar,
                                  Date target, const FeatureSpec& spec = {}) {
  FuturesCells out;
  out.reserve(static_cast<std::size_t>(spec.futures_count()));
  auto append = [&](FuturesCells cells) { out.insert(out.end(), cells.begin(), cells.end()); };
  for (auto v : {Variant::Base, Variant::Peak}) {
    append(align_day_futures(book, target, v, spec));
    append(align_week_futures(book, calendar, target, v, spec));
    append(align_weekend_futures(book, target, v, spec));
    append(align_month_future(book, calendar, target, v, spec));
  }
  return out;
}

/// Price lags shared by all 24 hour-models: entry (j, k) is Y(target - k, j).
struct ArBlock {
  std::vector<double> values;
  std::vector<Date> price_dates;
};

inline ArBlock ar_block(const PricePanel& panel, Date target, const FeatureSpec& spec = {}) {
  Date earliest = add_days(target, -spec.price_lags);
  if (!panel.contains(earliest) || !panel.contains(add_days(target, -1)))
    throw DomainError("insufficient price history for " + format_date(target) + ": need " +
                      format_date(earliest) + " .. " + format_date(add_days(target, -1)));
  ArBlock out;
  out.values.reserve(static_cast<std::size_t>(spec.ar_count()));
  for (int j = 1; j <= kHours; ++j)
    for (int k = 1; k <= spec.price_lags; ++k) {
      Date d = add_days(target, -k);
      out.values.push_back(panel.at(d, j));
      out.price_dates.push_back(d);
    }
  return out;
}

/// Full regressor row for one target day.
struct AlignedRow {
  Date target_date{};
  std::vector<double> values;
  std::vector<std::optional<Date>> trade_dates;   // futures columns only
  std::vector<std::optional<Date>> source_dates;  // futures columns only
  std::vector<std::uint8_t> missing;
};

/// Writes dummies and season curves into `values` at the spec's offsets.
inline void fill_calendar_columns(std::vector<double>& values, Date target, const HolidaySet& holidays,
                                  const FeatureSpec& spec) {
  auto dow = dow_dummies(target, holidays);
  auto season = season_values(target);
  for (int i = 0; i < 7; ++i) values[static_cast<std::size_t>(spec.dummy_offset() + i)] = dow[i];
  for (int i = 0; i < 4; ++i) values[static_cast<std::size_t>(spec.spline_offset() + i)] = season[i];
}

/// Row with futures and calendar columns filled and the ar block left at zero.
inline AlignedRow align_exogenous(const FilledFuturesBook& book, const ExchangeCalendar& calendar,
                                  Date target, const FeatureSpec& spec = {}) {
  auto p = static_cast<std::size_t>(spec.total_count());
  AlignedRow row{target, std::vector<double>(p, 0.0), std::vector<std::optional<Date>>(p),
                 std::vector<std::optional<Date>>(p), std::vector<std::uint8_t>(p, 0)};
  auto cells = align_futures(book, calendar, target, spec);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto c = static_cast<std::size_t>(spec.futures_offset()) + i;
    row.values[c] = cells[i].value;
    row.trade_dates[c] = cells[i].trade_date;
    row.source_dates[c] = cells[i].source_date;
    row.missing[c] = cells[i].missing;
  }
  fill_calendar_columns(row.values, target, calendar.holidays(), spec);
  return row;
}

inline AlignedRow align_row(const PricePanel& panel, const FilledFuturesBook& book,
                            const ExchangeCalendar& calendar, Date target, const FeatureSpec& spec = {}) {
  auto row = align_exogenous(book, calendar, target, spec);
  auto ar = ar_block(panel, target, spec);
  std::copy(ar.values.begin(), ar.values.end(), row.values.begin());
  return row;
}

/// Per-hour regression panel: one aligned row per target date plus Y(date, hour).
struct DesignMatrix {
  int hour = 1;
  std::vector<AlignedRow> rows;
  std::vector<double> response;

  [[nodiscard]] Eigen::MatrixXd values() const {
    if (rows.empty()) return {};
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].values.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (std::size_t c = 0; c < rows[r].values.size(); ++c)
        X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r].values[c];
    return X;
  }
  [[nodiscard]] Eigen::VectorXd response_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(response.data(), static_cast<Eigen::Index>(response.size()));
  }
};

inline DesignMatrix build_matrix(const PricePanel& panel, const FilledFuturesBook& book,
                                 const HolidaySet& holidays, int hour, DateRange range,
                                 const FeatureSpec& spec = {}) {
  if (hour < 1 || hour > kHours) throw DomainError("hour must be in 1..24");
  ExchangeCalendar calendar(holidays);
  DesignMatrix m;
  m.hour = hour;
  for (auto d = range.first; d <= range.last; d = add_days(d, 1)) {
    m.rows.push_back(align_row(panel, book, calendar, d, spec));
    m.response.push_back(panel.at(d, hour));
  }
  return m;
}

/// A column is observable for a row when it is not a futures column, or its
/// futures cell is a structural zero, or its nominal trade date <= origin.
inline bool observable(const AlignedRow& row, std::size_t column, Date origin) {
  const auto& t = row.trade_dates[column];
  return !t || *t <= origin;
}

inline std::vector<std::vector<std::uint8_t>> observability_mask(const DesignMatrix& m, Date origin) {
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(m.rows.size());
  for (const auto& row : m.rows) {
    std::vector<std::uint8_t> mask(row.values.size());
    for (std::size_t c = 0; c < mask.size(); ++c) mask[c] = observable(row, c, origin);
    out.push_back(std::move(mask));
  }
  return out;
}

/**
 * Futures columns usable by the horizon-c model of a forecast made at
 * `origin`: observable and present at every target origin+1 .. origin+c.
 * Returns one flag per futures column (length spec.futures_count()), so the
 * set shrinks monotonically as c grows.
 */
inline std::vector<std::vector<std::uint8_t>> horizon_futures_masks(const FilledFuturesBook& book,
                                                                    const ExchangeCalendar& calendar,
                                                                    Date origin, int horizon_days,
                                                                    const FeatureSpec& spec = {}) {
  auto nf = static_cast<std::size_t>(spec.futures_count());
  std::vector<std::vector<std::uint8_t>> out;
  std::vector<std::uint8_t> keep(nf, 1);
  for (int c = 1; c <= horizon_days; ++c) {
    auto cells = align_futures(book, calendar, add_days(origin, c), spec);
    for (std::size_t i = 0; i < nf; ++i) {
      const auto& cell = cells[i];
      if (cell.trade_date && (*cell.trade_date > origin || cell.missing)) keep[i] = 0;
    }
    out.push_back(keep);
  }
  return out;
}

}  // namespace epf
