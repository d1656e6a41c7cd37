#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "epf/calendar_features.hpp"
#include "epf/error.hpp"
#include "epf/market_data.hpp"
#include "epf/models.hpp"
#include "epf/parallel.hpp"

namespace epf {

struct BacktestConfig {
  int window_length = 365;
  int num_windows = 365;
  int horizon_days = 28;  // c_max
  std::optional<Date> first_origin;  // D; defaults to the earliest feasible day

  void validate() const {
    if (window_length < 8) throw DomainError("window_length must be >= 8");
    if (horizon_days < 1) throw DomainError("horizon must be >= 1");
    if (num_windows < 1) throw DomainError("num_windows must be >= 1");
  }
};

/// Rolling window n (1-based): trains on train, forecasts eval from origin.
struct Window {
  int index = 1;
  DateRange train{};
  Date origin{};
  DateRange eval{};
};

/// Days of data needed before the first training day: price lags plus the
/// oldest futures settlement any regressor reaches back to.
inline constexpr int kDefaultWarmupDays = 35;

/// Window n trains on [D - L + n, D - 1 + n] and forecasts D + n .. D - 1 + n + c_max.
inline std::vector<Window> schedule_windows(const BacktestConfig& config, DateRange data_extent,
                                            int warmup_days = kDefaultWarmupDays) {
  config.validate();
  Date earliest_origin = add_days(data_extent.first, warmup_days + config.window_length - 1);
  Date D = config.first_origin.value_or(earliest_origin);
  Date first_train = add_days(D, -config.window_length + 1);
  if (first_train < add_days(data_extent.first, warmup_days))
    throw DomainError("data too short: first training day " + format_date(first_train) + " needs " +
                      std::to_string(days_between(first_train, add_days(data_extent.first, warmup_days))) +
                      " more day(s) of history before it");
  Date last_eval = add_days(D, config.num_windows - 1 + config.horizon_days);
  if (last_eval > data_extent.last)
    throw DomainError("data too short: last evaluation day " + format_date(last_eval) + " is " +
                      std::to_string(days_between(data_extent.last, last_eval)) + " day(s) past the data end " +
                      format_date(data_extent.last));
  std::vector<Window> out;
  for (int n = 1; n <= config.num_windows; ++n) {
    Date origin = add_days(D, n - 1);
    out.push_back({n, {add_days(origin, -config.window_length + 1), origin}, origin,
                   {add_days(origin, 1), add_days(origin, config.horizon_days)}});
  }
  return out;
}

/// Forecast errors (forecast - actual) indexed by horizon day c, hour h, window n (all 1-based).
class ErrorTensor {
 public:
  ErrorTensor() = default;
  ErrorTensor(int horizon_days, int num_windows)
      : c_max_(horizon_days), n_(num_windows),
        v_(static_cast<std::size_t>(horizon_days) * kHours * static_cast<std::size_t>(num_windows),
           std::numeric_limits<double>::quiet_NaN()) {}

  [[nodiscard]] int horizon_days() const { return c_max_; }
  [[nodiscard]] int num_windows() const { return n_; }

  double& at(int c, int h, int n) { return v_[index(c, h, n)]; }
  [[nodiscard]] double at(int c, int h, int n) const { return v_[index(c, h, n)]; }

  [[nodiscard]] std::size_t nan_count() const {
    return static_cast<std::size_t>(std::count_if(v_.begin(), v_.end(), [](double x) { return std::isnan(x); }));
  }

  friend bool operator==(const ErrorTensor& a, const ErrorTensor& b) {
    if (a.c_max_ != b.c_max_ || a.n_ != b.n_) return false;
    for (std::size_t i = 0; i < a.v_.size(); ++i) {
      bool na = std::isnan(a.v_[i]), nb = std::isnan(b.v_[i]);
      if (na != nb || (!na && a.v_[i] != b.v_[i])) return false;
    }
    return true;
  }

 private:
  [[nodiscard]] std::size_t index(int c, int h, int n) const {
    return ((static_cast<std::size_t>(c - 1) * kHours + static_cast<std::size_t>(h - 1)) *
            static_cast<std::size_t>(n_)) + static_cast<std::size_t>(n - 1);
  }
  int c_max_ = 0;
  int n_ = 0;
  std::vector<double> v_;
};

// ---------------------------------------------------------------------------
// Metrics

/// MAE_{c,h} = mean_n |e|, laid out [c-1][h-1]; NaN cells are skipped.
inline std::vector<double> mae_ch(const ErrorTensor& t, std::size_t* excluded = nullptr) {
  std::vector<double> out;
  std::size_t skipped = 0;
  for (int c = 1; c <= t.horizon_days(); ++c)
    for (int h = 1; h <= kHours; ++h) {
      double s = 0.0;
      int count = 0;
      for (int n = 1; n <= t.num_windows(); ++n) {
        double e = t.at(c, h, n);
        if (std::isnan(e)) {
          ++skipped;
          continue;
        }
        s += std::abs(e);
        ++count;
      }
      out.push_back(count ? s / count : std::numeric_limits<double>::quiet_NaN());
    }
  if (excluded) *excluded = skipped;
  return out;
}

/// MAE_k for k = 24(c-1) + h, returned 0-based ([k-1]).
inline std::vector<double> mae_k(const ErrorTensor& t) { return mae_ch(t); }

/// Flattened index k for (c, h).
inline constexpr int flat_index(int c, int h) { return kHours * (c - 1) + h; }

/// MMAE_K = mean of MAE_1..MAE_K.
inline double mmae(const ErrorTensor& t, int K) {
  if (K < 1 || K > t.horizon_days() * kHours)
    throw DomainError("MMAE horizon K=" + std::to_string(K) + " outside 1.." +
                      std::to_string(t.horizon_days() * kHours));
  auto mk = mae_k(t);
  double s = 0.0;
  for (int k = 0; k < K; ++k) s += mk[static_cast<std::size_t>(k)];
  return s / K;
}

/// MMAE_K for every K.
inline std::vector<double> mmae_curve(const ErrorTensor& t) {
  auto mk = mae_k(t);
  std::vector<double> out;
  double s = 0.0;
  for (std::size_t k = 0; k < mk.size(); ++k) {
    s += mk[k];
    out.push_back(s / static_cast<double>(k + 1));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diebold-Mariano on daily L1 losses

struct DmResult {
  int horizon_day = 0;
  double mean_difference = 0.0;
  double standard_error = 0.0;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double p_two_sided = 1.0;
  double p_one_sided = 0.5;  // H1: A has the smaller loss
  bool degenerate = false;
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// DM test from loss differences; shared by the tensor form and calibration checks.
inline DmResult dm_from_differences(std::span<const double> delta, int horizon_day = 0) {
  if (delta.size() < 2) throw DomainError("DM test needs at least 2 windows");
  DmResult r;
  r.horizon_day = horizon_day;
  const auto n = static_cast<double>(delta.size());
  double mean = 0.0;
  for (double d : delta) mean += d;
  mean /= n;
  r.mean_difference = mean;
  bool identical = std::all_of(delta.begin(), delta.end(), [&](double d) { return d == delta[0]; });
  if (identical) {
    r.degenerate = true;
    return r;
  }
  double ss = 0.0;
  for (double d : delta) ss += (d - mean) * (d - mean);
  r.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  r.statistic = mean / r.standard_error;
  r.p_two_sided = 2.0 * normal_cdf(-std::abs(r.statistic));
  r.p_one_sided = normal_cdf(r.statistic);
  return r;
}

/// Daily loss differences L^A - L^B with L = sum_h |e|; windows with NaN are skipped.
inline std::vector<double> loss_differences(const ErrorTensor& a, const ErrorTensor& b, int c) {
  std::vector<double> delta;
  for (int n = 1; n <= a.num_windows(); ++n) {
    double la = 0.0, lb = 0.0;
    for (int h = 1; h <= kHours; ++h) {
      la += std::abs(a.at(c, h, n));
      lb += std::abs(b.at(c, h, n));
    }
    if (std::isnan(la) || std::isnan(lb)) continue;
    delta.push_back(la - lb);
  }
  return delta;
}

inline DmResult dm_test(const ErrorTensor& a, const ErrorTensor& b, int c) {
  if (a.horizon_days() != b.horizon_days() || a.num_windows() != b.num_windows())
    throw DomainError("DM test: tensors differ in shape");
  if (c < 1 || c > a.horizon_days()) throw DomainError("DM test: horizon day out of range");
  return dm_from_differences(loss_differences(a, b, c), c);
}

// ---------------------------------------------------------------------------
// Runner

struct BacktestData {
  PricePanel panel;
  FilledFuturesBook book;
  HolidaySet holidays;
};

/// Coefficient summary of one fitted hour-model, for reports.
struct SlotSummary {
  int horizon_day;
  int hour;
  double lambda;
  int df;
  double bic;
  std::vector<std::pair<int, double>> nonzero;  // (column index, raw coefficient)
};

struct ForecastOutput {
  std::vector<DayPrices> forecast;  // horizon_days rows
  std::vector<SlotSummary> slots;   // empty for models without lasso slots
};

/// Shared, read-only context for forecasters: data plus a feature table
/// covering every training day of the schedule.
struct BacktestContext {
  const BacktestData* data;
  ExchangeCalendar calendar;
  FeatureTable table;
  ModelConfig model_config;
};

using Forecaster = std::function<ForecastOutput(const BacktestContext&, const Window&, int horizon_days)>;

inline std::vector<SlotSummary> summarize(const LassoPanelModel& m) {
  std::vector<SlotSummary> out;
  for (int c = 1; c <= m.horizon_days; ++c)
    for (int h = 1; h <= kHours; ++h) {
      const auto& s = m.slot(h, c);
      SlotSummary sum{c, h, s.lambda, s.df, s.bic, {}};
      for (int j : s.nonzero) sum.nonzero.emplace_back(j, s.beta(j));
      out.push_back(std::move(sum));
    }
  return out;
}

inline Forecaster future_forecaster() {
  return [](const BacktestContext& ctx, const Window& w, int horizon) {
    auto m = fit_future_model(ctx.table, ctx.data->book, ctx.calendar, w.train, w.origin, horizon, ctx.model_config);
    return ForecastOutput{forecast_panel_model(m, ctx.data->panel, ctx.data->book, ctx.calendar), summarize(m)};
  };
}

inline Forecaster ar24_forecaster() {
  return [](const BacktestContext& ctx, const Window& w, int horizon) {
    auto m = fit_ar24(ctx.table, w.train, horizon, ctx.model_config);
    return ForecastOutput{forecast_panel_model(m, ctx.data->panel, FilledFuturesBook{}, ctx.calendar), summarize(m)};
  };
}

inline Forecaster how_forecaster() {
  return [](const BacktestContext& ctx, const Window& w, int horizon) {
    auto m = fit_how(ctx.data->panel.slice(w.train), ctx.data->holidays);
    return ForecastOutput{forecast_how_days(m, ctx.data->panel, ctx.data->holidays, w.train, horizon), {}};
  };
}

inline Forecaster forecaster_by_name(const std::string& name) {
  if (name == "future") return future_forecaster();
  if (name == "ar24") return ar24_forecaster();
  if (name == "ar_how") return how_forecaster();
  throw InputError("unknown model '" + name + "' (expected future, ar24, ar_how)");
}

/// Per-model reduction of slot summaries across windows.
struct InclusionReport {
  std::vector<double> counts;  // [hour-1][column], fraction after finalize
  int fits_per_hour = 0;
  std::vector<SlotSummary> last_window;  // horizon-1 slots of the final window
};

struct BacktestResult {
  std::vector<Window> windows;
  std::vector<std::string> model_names;
  std::map<std::string, ErrorTensor> errors;
  std::map<std::string, InclusionReport> inclusion;
  std::vector<std::string> skipped;  // "model window n: reason"
};

/// Runs every model on every window. A failing window is skipped and
/// reported; more than 5% skipped windows for a model fails the run.
inline BacktestResult run_backtest(const BacktestConfig& config, const BacktestData& data,
                                   const std::vector<std::pair<std::string, Forecaster>>& models,
                                   std::size_t jobs = 1, const ModelConfig& model_config = {},
                                   int warmup_days = kDefaultWarmupDays) {
  BacktestResult result;
  result.windows = schedule_windows(config, data.panel.extent(), warmup_days);
  const auto& windows = result.windows;
  BacktestContext ctx{&data, ExchangeCalendar(data.holidays), {}, model_config};
  ctx.model_config.jobs = 1;
  ctx.table = build_feature_table(data.panel, data.book, ctx.calendar,
                                  {windows.front().train.first, windows.back().train.last});
  const auto p = static_cast<std::size_t>(FeatureSpec{}.total_count());
  for (const auto& [name, f] : models) {
    result.model_names.push_back(name);
    result.errors.emplace(name, ErrorTensor(config.horizon_days, config.num_windows));
  }
  std::vector<std::vector<std::optional<std::vector<DayPrices>>>> forecasts(
      models.size(), std::vector<std::optional<std::vector<DayPrices>>>(windows.size()));
  std::vector<std::vector<std::string>> failures(models.size(), std::vector<std::string>(windows.size()));
  std::mutex reduce_mutex;

  parallel_for(windows.size() * models.size(), jobs, [&](std::size_t job) {
    auto w = job / models.size();
    auto m = job % models.size();
    ForecastOutput out;
    try {
      out = models[m].second(ctx, windows[w], config.horizon_days);
      if (out.forecast.size() != static_cast<std::size_t>(config.horizon_days))
        throw DomainError("forecaster returned wrong horizon");
    } catch (const std::exception& e) {
      failures[m][w] = e.what();
      return;
    }
    forecasts[m][w] = std::move(out.forecast);
    if (out.slots.empty()) return;
    // Counts are small integers, so the sum is exact in any order.
    std::lock_guard lock(reduce_mutex);
    auto& incl = result.inclusion[models[m].first];
    if (incl.counts.empty()) incl.counts.assign(kHours * p, 0.0);
    for (const auto& s : out.slots)
      for (const auto& [j, beta] : s.nonzero)
        incl.counts[static_cast<std::size_t>(s.hour - 1) * p + static_cast<std::size_t>(j)] += 1.0;
    incl.fits_per_hour += config.horizon_days;
    if (w + 1 == windows.size())
      for (auto& s : out.slots)
        if (s.horizon_day == 1) incl.last_window.push_back(std::move(s));
  });

  for (std::size_t m = 0; m < models.size(); ++m) {
    const auto& name = models[m].first;
    auto& tensor = result.errors.at(name);
    std::size_t skipped = 0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
      if (!forecasts[m][w]) {
        ++skipped;
        result.skipped.push_back(name + " window " + std::to_string(w + 1) + " (origin " +
                                 format_date(windows[w].origin) + "): " + failures[m][w]);
        continue;
      }
      const auto& fc = *forecasts[m][w];
      for (int c = 1; c <= config.horizon_days; ++c) {
        Date target = add_days(windows[w].origin, c);
        for (int h = 1; h <= kHours; ++h) {
          double actual = data.panel.contains(target) ? data.panel.at(target, h)
                                                      : std::numeric_limits<double>::quiet_NaN();
          tensor.at(c, h, static_cast<int>(w + 1)) =
              fc[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(h - 1)] - actual;
        }
      }
    }
    auto it = result.inclusion.find(name);
    if (it != result.inclusion.end() && it->second.fits_per_hour > 0)
      for (auto& v : it->second.counts) v /= it->second.fits_per_hour;
    if (static_cast<double>(skipped) > 0.05 * static_cast<double>(windows.size()))
      throw DomainError("model '" + name + "' failed on " + std::to_string(skipped) + " of " +
                        std::to_string(windows.size()) + " windows; first: " +
                        result.skipped[result.skipped.size() - skipped]);
  }
  return result;
}

}  // namespace epf
