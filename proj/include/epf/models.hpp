#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "epf/calendar_features.hpp"
#include "epf/feature_builder.hpp"
#include "epf/lasso.hpp"
#include "epf/market_data.hpp"
#include "epf/parallel.hpp"

namespace epf {

/// Hour-independent regressors and the 24 responses over a run of target dates.
struct FeatureTable {
  DateRange range{};
  Eigen::MatrixXd X;               // rows x spec.total_count()
  Eigen::MatrixXd Y;               // rows x 24
  std::vector<std::uint8_t> missing;  // rows x futures columns, row-major

  [[nodiscard]] Eigen::Index row_of(Date d) const { return days_between(range.first, d); }
};

inline FeatureTable build_feature_table(const PricePanel& panel, const FilledFuturesBook& book,
                                        const ExchangeCalendar& calendar, DateRange range,
                                        const FeatureSpec& spec = {}) {
  FeatureTable t;
  t.range = range;
  const auto n = range.size();
  const auto p = spec.total_count();
  const auto nf = static_cast<std::size_t>(spec.futures_count());
  t.X.resize(n, p);
  t.Y.resize(n, kHours);
  t.missing.assign(static_cast<std::size_t>(n) * nf, 0);
  Eigen::Index r = 0;
  for (auto d = range.first; d <= range.last; d = add_days(d, 1), ++r) {
    auto row = align_row(panel, book, calendar, d, spec);
    for (int c = 0; c < p; ++c) t.X(r, c) = row.values[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < nf; ++i)
      t.missing[static_cast<std::size_t>(r) * nf + i] = row.missing[static_cast<std::size_t>(spec.futures_offset()) + i];
    for (int h = 0; h < kHours; ++h) t.Y(r, h) = panel.at(d, h + 1);
  }
  return t;
}

/// Fitted hour-model in raw units: y ~ intercept + beta'x.
struct HourSlot {
  Eigen::VectorXd beta;
  double intercept = 0.0;
  double lambda = 0.0;
  int df = 0;
  double bic = 0.0;
  bool converged = true;
  std::vector<int> nonzero;
};

/// Models sharing one column set; horizons with identical sets share fits.
struct SlotGroup {
  std::vector<std::uint8_t> columns;
  std::array<HourSlot, kHours> hours;
};

/**
 * 24 hour-models per forecast horizon day, each a BIC-selected lasso over a
 * column subset of the full regressor layout.
 */
struct LassoPanelModel {
  FeatureSpec spec;
  DateRange train{};
  Date origin{};
  int horizon_days = 0;
  std::vector<SlotGroup> groups;
  std::vector<int> group_of_horizon;  // horizon c -> groups index at [c-1]
  Eigen::MatrixXd residuals;          // training rows x 24, from the horizon-1 models

  [[nodiscard]] const SlotGroup& group(int c) const {
    return groups[static_cast<std::size_t>(group_of_horizon[static_cast<std::size_t>(c - 1)])];
  }
  [[nodiscard]] const HourSlot& slot(int hour, int c) const {
    return group(c).hours[static_cast<std::size_t>(hour - 1)];
  }
  [[nodiscard]] const std::vector<std::uint8_t>& columns(int c) const { return group(c).columns; }
};

struct FutureModel : LassoPanelModel {};
struct AR24Model : LassoPanelModel {};

struct ModelConfig {
  lasso::Config lasso;
  std::size_t jobs = 1;
};

namespace detail {

/// Core fitting: one standardization and Gram matrix for the training rows,
/// then one lasso path per (distinct column set, hour).
inline LassoPanelModel fit_panel(const FeatureTable& table, DateRange train, Date origin,
                                 const std::vector<std::vector<std::uint8_t>>& horizon_columns,
                                 const ModelConfig& config, const FeatureSpec& spec) {
  if (!table.range.contains(train.first) || !table.range.contains(train.last))
    throw DomainError("feature table does not cover training range " + format_date(train.first) + " .. " +
                      format_date(train.last));
  const auto r0 = table.row_of(train.first);
  const auto n = train.size();
  const auto p = static_cast<std::size_t>(spec.total_count());
  const auto nf = static_cast<std::size_t>(spec.futures_count());
  const auto foff = static_cast<std::size_t>(spec.futures_offset());

  Eigen::MatrixXd X = table.X.middleRows(r0, n);
  auto moments = lasso::column_moments(X);
  Eigen::MatrixXd Z = lasso::scale_columns(X, moments);
  auto gram = lasso::GramProblem::gram_of(Z);

  std::vector<std::uint8_t> usable(p, 1);
  for (std::size_t j = 0; j < p; ++j) usable[j] = !moments.dropped[j];
  for (Eigen::Index r = r0; r < r0 + n; ++r)
    for (std::size_t i = 0; i < nf; ++i)
      if (table.missing[static_cast<std::size_t>(r) * nf + i]) usable[foff + i] = 0;

  LassoPanelModel m;
  m.spec = spec;
  m.train = train;
  m.origin = origin;
  m.horizon_days = static_cast<int>(horizon_columns.size());
  for (const auto& cols : horizon_columns) {
    std::vector<std::uint8_t> effective(p);
    for (std::size_t j = 0; j < p; ++j) effective[j] = cols[j] && usable[j];
    int found = -1;
    for (std::size_t g = 0; g < m.groups.size(); ++g)
      if (m.groups[g].columns == effective) found = static_cast<int>(g);
    if (found < 0) {
      found = static_cast<int>(m.groups.size());
      m.groups.push_back({std::move(effective), {}});
    }
    m.group_of_horizon.push_back(found);
  }

  std::vector<lasso::GramProblem> problems(kHours);
  std::vector<lasso::ScalingParams> scalings(kHours, moments);
  for (int h = 0; h < kHours; ++h) {
    Eigen::VectorXd y = table.Y.block(r0, h, n, 1);
    lasso::response_moments(y, scalings[static_cast<std::size_t>(h)]);
    const auto& s = scalings[static_cast<std::size_t>(h)];
    Eigen::VectorXd ys = (y.array() - s.y_mean) / s.y_sd;
    problems[static_cast<std::size_t>(h)] = lasso::GramProblem::with_response(gram, Z, ys);
  }

  const std::size_t jobs_total = m.groups.size() * kHours;
  parallel_for(jobs_total, config.jobs, [&](std::size_t job) {
    auto& group = m.groups[job / kHours];
    auto h = job % kHours;
    auto path = lasso::fit_path(problems[h], config.lasso, group.columns);
    auto fit = path.selected();
    lasso::descale(fit, scalings[h]);
    auto& slot = group.hours[h];
    slot.beta = std::move(fit.beta_original);
    slot.intercept = fit.intercept;
    slot.lambda = fit.lambda;
    slot.df = fit.df;
    slot.bic = path.bic[path.selected_index];
    slot.converged = fit.converged;
    for (Eigen::Index j = 0; j < slot.beta.size(); ++j)
      if (slot.beta(j) != 0.0) slot.nonzero.push_back(static_cast<int>(j));
  });

  m.residuals.resize(n, kHours);
  const auto& g1 = m.group(1);
  for (int h = 0; h < kHours; ++h) {
    const auto& slot = g1.hours[static_cast<std::size_t>(h)];
    m.residuals.col(h) = table.Y.block(r0, h, n, 1) - (X * slot.beta).array().matrix() -
                         Eigen::VectorXd::Constant(n, slot.intercept);
  }
  return m;
}

inline std::vector<std::uint8_t> block_mask(const FeatureSpec& spec, bool ar, bool dummies, bool splines) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(spec.total_count()), 0);
  for (int j = 0; j < spec.ar_count(); ++j) mask[static_cast<std::size_t>(j)] = ar;
  for (int j = 0; j < 7; ++j) mask[static_cast<std::size_t>(spec.dummy_offset() + j)] = dummies;
  for (int j = 0; j < 4; ++j) mask[static_cast<std::size_t>(spec.spline_offset() + j)] = splines;
  return mask;
}

inline void check_window(const PricePanel& panel, DateRange train, Date origin, const FeatureSpec& spec) {
  if (origin != train.last) throw DomainError("origin must be the last training day");
  if (train.size() < spec.price_lags + 1) throw DomainError("training window too short");
  if (!panel.contains(add_days(train.first, -spec.price_lags)) || !panel.contains(train.last))
    throw DomainError("insufficient history: training window " + format_date(train.first) + " .. " +
                      format_date(train.last) + " needs prices from " +
                      format_date(add_days(train.first, -spec.price_lags)));
}

}  // namespace detail

/// Column set per horizon day for the futures-augmented model.
inline std::vector<std::vector<std::uint8_t>> future_model_columns(const FilledFuturesBook& book,
                                                                   const ExchangeCalendar& calendar, Date origin,
                                                                   int horizon_days, const FeatureSpec& spec = {}) {
  auto futures = horizon_futures_masks(book, calendar, origin, horizon_days, spec);
  std::vector<std::vector<std::uint8_t>> out;
  for (const auto& f : futures) {
    auto mask = detail::block_mask(spec, true, true, true);
    std::copy(f.begin(), f.end(), mask.begin() + spec.futures_offset());
    out.push_back(std::move(mask));
  }
  return out;
}

/// Fits the futures-augmented model at `origin` using a prebuilt feature table.
inline FutureModel fit_future_model(const FeatureTable& table, const FilledFuturesBook& book,
                                    const ExchangeCalendar& calendar, DateRange train, Date origin,
                                    int horizon_days, const ModelConfig& config = {}, const FeatureSpec& spec = {}) {
  if (horizon_days < 1) throw DomainError("horizon must be >= 1");
  if (origin != train.last) throw DomainError("origin must be the last training day");
  auto columns = future_model_columns(book, calendar, origin, horizon_days, spec);
  return {detail::fit_panel(table, train, origin, columns, config, spec)};
}

inline FutureModel fit_future_model(const PricePanel& panel, const FilledFuturesBook& book,
                                    const HolidaySet& holidays, DateRange train, Date origin, int horizon_days,
                                    const ModelConfig& config = {}, const FeatureSpec& spec = {}) {
  detail::check_window(panel, train, origin, spec);
  ExchangeCalendar calendar(holidays);
  auto table = build_feature_table(panel, book, calendar, train, spec);
  return fit_future_model(table, book, calendar, train, origin, horizon_days, config, spec);
}

/// AR24 benchmark: price lags and weekday dummies only; one fit serves every horizon.
inline AR24Model fit_ar24(const FeatureTable& table, DateRange train, int horizon_days,
                          const ModelConfig& config = {}, const FeatureSpec& spec = {}) {
  std::vector<std::vector<std::uint8_t>> columns(static_cast<std::size_t>(horizon_days),
                                                 detail::block_mask(spec, true, true, false));
  return {detail::fit_panel(table, train, train.last, columns, config, spec)};
}

inline AR24Model fit_ar24(const PricePanel& panel, const HolidaySet& holidays, DateRange train, int horizon_days,
                          const ModelConfig& config = {}, const FeatureSpec& spec = {}) {
  detail::check_window(panel, train, train.last, spec);
  ExchangeCalendar calendar(holidays);
  auto table = build_feature_table(panel, FilledFuturesBook{}, calendar, train, spec);
  return fit_ar24(table, train, horizon_days, config, spec);
}

/**
 * Day-by-day forecast recursion of a LassoPanelModel. Price lags come from
 * observed prices up to the origin and from the supplied path afterwards;
 * futures inputs are restricted to settlements dated on or before the origin.
 */
class ForecastRecursion {
 public:
  ForecastRecursion(const LassoPanelModel& model, const PricePanel& panel, const FilledFuturesBook& book,
                    const ExchangeCalendar& calendar)
      : model_(&model), panel_(&panel) {
    const auto& spec = model.spec;
    for (int c = 1; c <= model.horizon_days; ++c) {
      auto row = align_exogenous(book, calendar, add_days(model.origin, c), spec);
      for (std::size_t j = 0; j < row.values.size(); ++j)
        if (row.missing[j] || !observable(row, j, model.origin)) row.values[j] = 0.0;
      exogenous_.push_back(std::move(row.values));
    }
    if (!panel.contains(add_days(model.origin, -spec.price_lags + 1)) || !panel.contains(model.origin))
      throw DomainError("price panel does not cover the lags of origin " + format_date(model.origin));
  }

  [[nodiscard]] int horizon_days() const { return model_->horizon_days; }

  /// Mean forecast of day origin+c given days origin+1 .. origin+c-1 in `path`.
  [[nodiscard]] DayPrices mean_day(int c, std::span<const DayPrices> path) const {
    const auto& spec = model_->spec;
    std::vector<double> x = exogenous_[static_cast<std::size_t>(c - 1)];
    Date target = add_days(model_->origin, c);
    for (int k = 1; k <= spec.price_lags; ++k) {
      Date d = add_days(target, -k);
      const DayPrices& src =
          d <= model_->origin ? panel_->day(d) : path[static_cast<std::size_t>(c - k - 1)];
      for (int j = 1; j <= kHours; ++j)
        x[static_cast<std::size_t>((j - 1) * spec.price_lags + (k - 1))] = src[static_cast<std::size_t>(j - 1)];
    }
    DayPrices out{};
    const auto& group = model_->group(c);
    for (int h = 0; h < kHours; ++h) {
      const auto& slot = group.hours[static_cast<std::size_t>(h)];
      double v = slot.intercept;
      for (int j : slot.nonzero) v += slot.beta(j) * x[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(h)] = v;
    }
    return out;
  }

 private:
  const LassoPanelModel* model_;
  const PricePanel* panel_;
  std::vector<std::vector<double>> exogenous_;
};

/// Mean forecast for origin+1 .. origin+horizon_days.
inline std::vector<DayPrices> forecast_panel_model(const LassoPanelModel& model, const PricePanel& panel,
                                                   const FilledFuturesBook& book, const ExchangeCalendar& calendar) {
  ForecastRecursion rec(model, panel, book, calendar);
  std::vector<DayPrices> path;
  for (int c = 1; c <= model.horizon_days; ++c) path.push_back(rec.mean_day(c, path));
  return path;
}

inline std::vector<DayPrices> forecast_future_model(const FutureModel& model, const PricePanel& panel,
                                                    const FilledFuturesBook& book, const HolidaySet& holidays) {
  return forecast_panel_model(model, panel, book, ExchangeCalendar(holidays));
}

inline std::vector<DayPrices> forecast_ar24(const AR24Model& model, const PricePanel& panel,
                                            const HolidaySet& holidays) {
  return forecast_panel_model(model, panel, FilledFuturesBook{}, ExchangeCalendar(holidays));
}

// ---------------------------------------------------------------------------
// AR-HoW: hour-of-week means plus an AIC-selected Yule-Walker AR on the rest.

inline constexpr int kHoursPerWeek = 168;

inline int how_slot(Date d, int hour, const HolidaySet& holidays) {
  return static_cast<int>(effective_dow(d, holidays)) * kHours + (hour - 1);
}

struct YuleWalkerFit {
  std::vector<std::vector<double>> coefficients;  // [p-1] -> phi_1..phi_p
  std::vector<double> sigma2;                     // [p-1] -> innovation variance
};

/// Biased sample autocovariances gamma(0..max_lag) of a series around its mean.
inline std::vector<double> autocovariance(std::span<const double> x, int max_lag) {
  const auto n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> g(static_cast<std::size_t>(max_lag) + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(k); t < n; ++t) s += (x[t] - mean) * (x[t - k] - mean);
    g[static_cast<std::size_t>(k)] = s / static_cast<double>(n);
  }
  return g;
}

/// Levinson-Durbin solution of the Yule-Walker equations for orders 1..max_order.
inline YuleWalkerFit yule_walker(std::span<const double> gamma, int max_order) {
  YuleWalkerFit out;
  std::vector<double> phi;
  double v = gamma[0];
  for (int p = 1; p <= max_order; ++p) {
    double acc = gamma[static_cast<std::size_t>(p)];
    for (int j = 1; j < p; ++j) acc -= phi[static_cast<std::size_t>(j - 1)] * gamma[static_cast<std::size_t>(p - j)];
    double kappa = v > 0.0 ? acc / v : 0.0;
    std::vector<double> next(static_cast<std::size_t>(p));
    for (int j = 1; j < p; ++j)
      next[static_cast<std::size_t>(j - 1)] =
          phi[static_cast<std::size_t>(j - 1)] - kappa * phi[static_cast<std::size_t>(p - j - 1)];
    next[static_cast<std::size_t>(p - 1)] = kappa;
    v *= (1.0 - kappa * kappa);
    phi = std::move(next);
    out.coefficients.push_back(phi);
    out.sigma2.push_back(v);
  }
  return out;
}

struct HoWModel {
  std::array<double, kHoursPerWeek> gamma{};
  std::vector<double> phi;
  int order = 0;
  double sigma2 = 0.0;
  std::vector<double> aic;  // [p-1] for p = 1..p_max
};

/**
 * Two-step fit: slot means (the least-squares solution for one-hot hour-of-
 * week regressors), then Yule-Walker AR(p) on the residuals for p = 1..p_max
 * with p chosen by minimum n ln(sigma2_p) + 2p.
 */
inline HoWModel fit_how(std::span<const double> series, std::span<const int> slots, int p_max = kHoursPerWeek) {
  if (series.size() != slots.size()) throw DomainError("fit_how: series/slot length mismatch");
  const auto n = series.size();
  p_max = std::min<int>(p_max, static_cast<int>(n) - 1);
  if (p_max < 1) throw DomainError("fit_how: series too short");
  HoWModel m;
  std::array<int, kHoursPerWeek> count{};
  for (std::size_t t = 0; t < n; ++t) {
    m.gamma[static_cast<std::size_t>(slots[t])] += series[t];
    ++count[static_cast<std::size_t>(slots[t])];
  }
  for (int i = 0; i < kHoursPerWeek; ++i) {
    if (count[static_cast<std::size_t>(i)] == 0)
      throw DomainError("fit_how: hour-of-week slot " + std::to_string(i + 1) + " has no observations");
    m.gamma[static_cast<std::size_t>(i)] /= count[static_cast<std::size_t>(i)];
  }
  std::vector<double> resid(n);
  for (std::size_t t = 0; t < n; ++t) resid[t] = series[t] - m.gamma[static_cast<std::size_t>(slots[t])];
  auto yw = yule_walker(autocovariance(resid, p_max), p_max);
  double best = std::numeric_limits<double>::infinity();
  for (int p = 1; p <= p_max; ++p) {
    double s2 = std::max(yw.sigma2[static_cast<std::size_t>(p - 1)], std::numeric_limits<double>::min());
    double aic = static_cast<double>(n) * std::log(s2) + 2.0 * p;
    m.aic.push_back(aic);
    if (aic < best) {
      best = aic;
      m.order = p;
    }
  }
  m.phi = yw.coefficients[static_cast<std::size_t>(m.order - 1)];
  m.sigma2 = yw.sigma2[static_cast<std::size_t>(m.order - 1)];
  return m;
}

/// Hourly slots of a panel range, day-major.
inline std::vector<int> how_slots(DateRange r, const HolidaySet& holidays) {
  std::vector<int> out;
  for (auto d = r.first; d <= r.last; d = add_days(d, 1))
    for (int h = 1; h <= kHours; ++h) out.push_back(how_slot(d, h, holidays));
  return out;
}

inline HoWModel fit_how(const PricePanel& train, const HolidaySet& holidays, int p_max = kHoursPerWeek) {
  auto series = train.hourly(train.extent());
  auto slots = how_slots(train.extent(), holidays);
  return fit_how(series, slots, p_max);
}

/// y(t+k) = gamma(slot) + sum_j phi_j (y(t+k-j) - gamma(slot of t+k-j)), forecasts fed back in.
inline std::vector<double> forecast_how(const HoWModel& m, std::span<const double> history,
                                        std::span<const int> history_slots, std::span<const int> future_slots) {
  const auto p = static_cast<std::size_t>(m.order);
  if (history.size() < p) throw DomainError("forecast_how: history shorter than model order");
  std::vector<double> dev;
  dev.reserve(p + future_slots.size());
  for (std::size_t i = history.size() - p; i < history.size(); ++i)
    dev.push_back(history[i] - m.gamma[static_cast<std::size_t>(history_slots[i])]);
  std::vector<double> out;
  out.reserve(future_slots.size());
  for (int slot : future_slots) {
    double d = 0.0;
    for (std::size_t j = 1; j <= p; ++j) d += m.phi[j - 1] * dev[dev.size() - j];
    dev.push_back(d);
    out.push_back(m.gamma[static_cast<std::size_t>(slot)] + d);
  }
  return out;
}

/// Daily-shaped AR-HoW forecast for origin+1 .. origin+horizon_days.
inline std::vector<DayPrices> forecast_how_days(const HoWModel& m, const PricePanel& panel,
                                                const HolidaySet& holidays, DateRange history, int horizon_days) {
  auto values = panel.hourly(history);
  auto slots = how_slots(history, holidays);
  auto future = how_slots({add_days(history.last, 1), add_days(history.last, horizon_days)}, holidays);
  auto flat = forecast_how(m, values, slots, future);
  std::vector<DayPrices> out(static_cast<std::size_t>(horizon_days));
  for (std::size_t i = 0; i < flat.size(); ++i) out[i / kHours][i % kHours] = flat[i];
  return out;
}

}  // namespace epf
