#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epf/calendar_features.hpp"
#include "epf/csv.hpp"
#include "epf/date.hpp"
#include "epf/error.hpp"

namespace epf {

inline constexpr int kHours = 24;

using DayPrices = std::array<double, kHours>;

/// Hourly day-ahead prices on a contiguous run of dates; hours are 1..24.
class PricePanel {
 public:
  PricePanel() = default;
  PricePanel(Date first, std::vector<DayPrices> rows) : first_(first), rows_(std::move(rows)) {}

  [[nodiscard]] bool empty() const { return rows_.empty(); }
  [[nodiscard]] std::size_t num_days() const { return rows_.size(); }
  [[nodiscard]] Date first_date() const { return first_; }
  [[nodiscard]] Date last_date() const { return add_days(first_, static_cast<long>(rows_.size()) - 1); }
  [[nodiscard]] DateRange extent() const { return {first_date(), last_date()}; }
  [[nodiscard]] bool contains(Date d) const { return !empty() && extent().contains(d); }

  [[nodiscard]] const DayPrices& day(Date d) const {
    if (!contains(d)) throw DomainError("price panel has no data for " + format_date(d));
    return rows_[static_cast<std::size_t>(days_between(first_, d))];
  }
  [[nodiscard]] double at(Date d, int hour) const { return day(d)[static_cast<std::size_t>(hour - 1)]; }

  [[nodiscard]] const std::vector<DayPrices>& rows() const { return rows_; }

  /// Hourly series flattened day-major: index 24*(day)+(hour-1).
  [[nodiscard]] std::vector<double> hourly(DateRange r) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(r.size()) * kHours);
    for (auto d = r.first; d <= r.last; d = add_days(d, 1))
      for (double v : day(d)) out.push_back(v);
    return out;
  }

  /// Sub-panel restricted to r (must be inside the extent).
  [[nodiscard]] PricePanel slice(DateRange r) const {
    std::vector<DayPrices> rows;
    for (auto d = r.first; d <= r.last; d = add_days(d, 1)) rows.push_back(day(d));
    return {r.first, std::move(rows)};
  }

 private:
  Date first_{};
  std::vector<DayPrices> rows_;
};

struct PriceLoadReport {
  Date first{};
  Date last{};
  std::size_t repaired_duplicates = 0;
};

inline PricePanel load_prices(const std::string& path, PriceLoadReport* report = nullptr) {
  auto table = csv::read(path, {"date", "hour", "price"});
  if (table.rows.empty()) throw InputError(path + ": no price rows");
  std::map<Date, std::array<std::optional<double>, kHours>> cells;
  std::size_t repaired = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    auto where = table.where(i);
    Date d{};
    try {
      d = parse_date(row[0]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    long hour = csv::parse_int(row[1], where);
    if (hour < 1 || hour > kHours)
      throw InputError(where + ": hour " + std::to_string(hour) + " outside 1..24");
    double price = csv::parse_double(row[2], where);
    auto& slot = cells[d][static_cast<std::size_t>(hour - 1)];
    if (slot) {
      if (*slot != price)
        throw InputError(where + ": conflicting duplicate for (" + format_date(d) + ", " +
                         std::to_string(hour) + ")");
      ++repaired;
    }
    slot = price;
  }
  Date first = cells.begin()->first;
  Date last = cells.rbegin()->first;
  std::string missing_dates;
  std::size_t missing_count = 0;
  for (auto d = first; d <= last; d = add_days(d, 1)) {
    if (!cells.contains(d)) {
      if (missing_count++ < 20) missing_dates += (missing_dates.empty() ? "" : ", ") + format_date(d);
    }
  }
  if (missing_count > 0)
    throw InputError(path + ": " + std::to_string(missing_count) +
                     " missing date(s) in price panel: " + missing_dates);
  std::vector<DayPrices> rows;
  rows.reserve(cells.size());
  for (const auto& [d, hours] : cells) {
    DayPrices day{};
    for (int h = 0; h < kHours; ++h) {
      if (!hours[h])
        throw InputError(path + ": missing price for (" + format_date(d) + ", " +
                         std::to_string(h + 1) + ")");
      day[h] = *hours[h];
    }
    rows.push_back(day);
  }
  if (report) *report = {first, last, repaired};
  return {first, std::move(rows)};
}

inline std::string prices_csv(const PricePanel& panel) {
  std::string s = "date,hour,price\n";
  for (std::size_t i = 0; i < panel.num_days(); ++i) {
    auto date = format_date(add_days(panel.first_date(), static_cast<long>(i)));
    for (int h = 0; h < kHours; ++h)
      s += date + "," + std::to_string(h + 1) + "," + csv::fmt(panel.rows()[i][h]) + "\n";
  }
  return s;
}

inline void save_prices(const std::string& path, const PricePanel& panel) {
  csv::write_file(path, prices_csv(panel));
}

// ---------------------------------------------------------------------------
// Futures

enum class Product { Day, Week, Weekend, Month };
enum class Variant { Base, Peak };

inline constexpr std::array<const char*, 4> kProductNames{"day", "week", "weekend", "month"};
inline constexpr std::array<const char*, 2> kVariantNames{"base", "peak"};

inline const char* to_string(Product p) { return kProductNames[static_cast<int>(p)]; }
inline const char* to_string(Variant v) { return kVariantNames[static_cast<int>(v)]; }

inline std::optional<Product> parse_product(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (s == kProductNames[i]) return static_cast<Product>(i);
  return std::nullopt;
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (int i = 0; i < 2; ++i)
    if (s == kVariantNames[i]) return static_cast<Variant>(i);
  return std::nullopt;
}

/// Contract identity in Musiela form: maturity is days from trade date to
/// delivery start (for month futures, 1 labels the front month).
struct FuturesKey {
  Product product;
  Variant variant;
  int maturity;
  auto operator<=>(const FuturesKey&) const = default;
};

/// Observed end-of-day settlements keyed by trade date and contract.
class FuturesBook {
 public:
  using DayQuotes = std::map<FuturesKey, double>;

  /// Inserts a quote; an identical duplicate is a no-op, a conflicting one throws.
  void insert(Date trade_date, FuturesKey key, double price) {
    if (key.maturity < 1)
      throw InputError("maturity must be >= 1 (got " + std::to_string(key.maturity) + ")");
    auto [it, inserted] = quotes_[trade_date].emplace(key, price);
    if (!inserted && it->second != price)
      throw InputError("conflicting duplicate quote on " + format_date(trade_date) + " for " +
                       to_string(key.product) + "/" + to_string(key.variant) + "/m" +
                       std::to_string(key.maturity));
  }

  [[nodiscard]] std::optional<double> find(Date trade_date, const FuturesKey& key) const {
    auto day = quotes_.find(trade_date);
    if (day == quotes_.end()) return std::nullopt;
    auto it = day->second.find(key);
    if (it == day->second.end()) return std::nullopt;
    return it->second;
  }

  [[nodiscard]] bool empty() const { return quotes_.empty(); }
  [[nodiscard]] std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [d, q] : quotes_) n += q.size();
    return n;
  }
  [[nodiscard]] const std::map<Date, DayQuotes>& by_date() const { return quotes_; }

 private:
  std::map<Date, DayQuotes> quotes_;
};

inline FuturesBook load_futures(const std::string& path) {
  auto table = csv::read(path, {"trade_date", "product", "variant", "maturity", "price"});
  FuturesBook book;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    auto where = table.where(i);
    try {
      Date d = parse_date(row[0]);
      auto product = parse_product(row[1]);
      if (!product) throw InputError("unknown product '" + row[1] + "'");
      auto variant = parse_variant(row[2]);
      if (!variant) throw InputError("unknown variant '" + row[2] + "'");
      long maturity = csv::parse_int(row[3], where);
      if (maturity < 1) throw InputError("maturity must be >= 1 (got " + row[3] + ")");
      double price = csv::parse_double(row[4], where);
      book.insert(d, {*product, *variant, static_cast<int>(maturity)}, price);
    } catch (const InputError& e) {
      std::string msg = e.what();
      if (msg.rfind(table.path, 0) == 0) throw;
      throw InputError(where + ": " + msg);
    }
  }
  return book;
}

inline std::string futures_csv(const FuturesBook& book) {
  std::string s = "trade_date,product,variant,maturity,price\n";
  for (const auto& [d, quotes] : book.by_date()) {
    auto date = format_date(d);
    for (const auto& [k, price] : quotes)
      s += date + "," + to_string(k.product) + "," + to_string(k.variant) + "," +
           std::to_string(k.maturity) + "," + csv::fmt(price) + "\n";
  }
  return s;
}

inline void save_futures(const std::string& path, const FuturesBook& book) {
  csv::write_file(path, futures_csv(book));
}

/// A settlement plus where it came from: observed on its own date, or carried
/// forward from `source_date`.
struct FilledQuote {
  double price;
  Date source_date;
  bool observed;
};

class FilledFuturesBook {
 public:
  using DayQuotes = std::map<FuturesKey, FilledQuote>;

  FilledFuturesBook() = default;

  /// Every observed quote, no fills.
  explicit FilledFuturesBook(const FuturesBook& book) {
    for (const auto& [d, quotes] : book.by_date())
      for (const auto& [k, price] : quotes) quotes_[d].emplace(k, FilledQuote{price, d, true});
  }

  [[nodiscard]] const FilledQuote* find(Date trade_date, const FuturesKey& key) const {
    auto day = quotes_.find(trade_date);
    if (day == quotes_.end()) return nullptr;
    auto it = day->second.find(key);
    return it == day->second.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const std::map<Date, DayQuotes>& by_date() const { return quotes_; }
  [[nodiscard]] std::map<Date, DayQuotes>& by_date() { return quotes_; }

  [[nodiscard]] std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [d, q] : quotes_) n += q.size();
    return n;
  }

  friend bool operator==(const FilledFuturesBook& a, const FilledFuturesBook& b) {
    if (a.quotes_.size() != b.quotes_.size()) return false;
    auto ia = a.quotes_.begin();
    for (auto ib = b.quotes_.begin(); ib != b.quotes_.end(); ++ia, ++ib) {
      if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
      auto qa = ia->second.begin();
      for (auto qb = ib->second.begin(); qb != ib->second.end(); ++qa, ++qb)
        if (qa->first != qb->first || qa->second.price != qb->second.price ||
            qa->second.source_date != qb->second.source_date ||
            qa->second.observed != qb->second.observed)
          return false;
    }
    return true;
  }

 private:
  std::map<Date, DayQuotes> quotes_;
};

inline constexpr int kDefaultMaxFillDays = 7;

/**
 * Carries quotes over non-trading days. For each non-trading date between the
 * first and last trade date, every contract seen before it that has no entry
 * on that date receives the most recent entry's price, provided the original
 * observation is at most `max_fill_days` old. Existing entries are never
 * replaced, and fill distance is measured from the original observation, so
 * refilling a filled book is a no-op.
 */
inline FilledFuturesBook forward_fill(FilledFuturesBook book, const ExchangeCalendar& calendar,
                                      int max_fill_days = kDefaultMaxFillDays) {
  auto& quotes = book.by_date();
  if (quotes.empty()) return book;
  Date first = quotes.begin()->first;
  Date last = quotes.rbegin()->first;
  std::map<FuturesKey, FilledQuote> latest;
  for (auto d = first; d <= last; d = add_days(d, 1)) {
    auto day = quotes.find(d);
    if (!calendar.is_trading_day(d)) {
      for (const auto& [key, q] : latest) {
        if (days_between(q.source_date, d) > max_fill_days) continue;
        if (day != quotes.end() && day->second.contains(key)) continue;
        if (day == quotes.end()) day = quotes.emplace(d, FilledFuturesBook::DayQuotes{}).first;
        day->second.emplace(key, FilledQuote{q.price, q.source_date, false});
      }
    }
    if (day != quotes.end())
      for (const auto& [key, q] : day->second) latest.insert_or_assign(key, q);
  }
  return book;
}

inline FilledFuturesBook forward_fill(const FuturesBook& book, const ExchangeCalendar& calendar,
                                      int max_fill_days = kDefaultMaxFillDays) {
  return forward_fill(FilledFuturesBook(book), calendar, max_fill_days);
}

}  // namespace epf
