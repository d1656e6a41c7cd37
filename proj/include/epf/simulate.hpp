#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "epf/error.hpp"
#include "epf/models.hpp"
#include "epf/parallel.hpp"
#include "epf/rng.hpp"

namespace epf {

enum class ResidualSampling { DayBlock, IndependentPerHour };

inline const char* to_string(ResidualSampling s) {
  return s == ResidualSampling::DayBlock ? "day_block" : "independent_per_hour";
}

inline ResidualSampling parse_sampling(const std::string& s) {
  if (s == "day_block") return ResidualSampling::DayBlock;
  if (s == "independent_per_hour") return ResidualSampling::IndependentPerHour;
  throw InputError("unknown residual sampling '" + s + "' (expected day_block, independent_per_hour)");
}

struct SimulationConfig {
  int num_paths = 1000;
  int horizon_days = 28;
  std::uint64_t seed = 42;
  ResidualSampling residual_sampling = ResidualSampling::DayBlock;
};

/// Simulated prices laid out [path][day][hour].
struct PathSet {
  int num_paths = 0;
  int horizon_days = 0;
  std::vector<double> values;

  [[nodiscard]] double at(int path, int day, int hour) const { return values[index(path, day, hour)]; }
  double& at(int path, int day, int hour) { return values[index(path, day, hour)]; }

  [[nodiscard]] std::size_t index(int path, int day, int hour) const {
    return (static_cast<std::size_t>(path) * static_cast<std::size_t>(horizon_days) +
            static_cast<std::size_t>(day - 1)) * kHours + static_cast<std::size_t>(hour - 1);
  }
};

/**
 * Residual-bootstrap paths. Each simulated day is the model's mean forecast
 * given the path's own earlier days plus an in-sample residual drawn from the
 * horizon-1 fits: one training day's 24-hour residual vector (day_block), or
 * an independent training day per hour. Path i draws from its own substream
 * of (seed, i), so results do not depend on the number of threads.
 */
inline PathSet simulate_paths(const LassoPanelModel& model, const PricePanel& panel, const FilledFuturesBook& book,
                              const HolidaySet& holidays, const SimulationConfig& config, std::size_t jobs = 1) {
  if (config.num_paths < 1) throw DomainError("num_paths must be >= 1");
  if (config.horizon_days < 1 || config.horizon_days > model.horizon_days)
    throw DomainError("simulation horizon exceeds the fitted horizon (" + std::to_string(model.horizon_days) + ")");
  const auto pool = static_cast<std::uint64_t>(model.residuals.rows());
  if (pool == 0) throw DomainError("empty residual pool");
  ForecastRecursion rec(model, panel, book, ExchangeCalendar(holidays));
  PathSet out{config.num_paths, config.horizon_days,
              std::vector<double>(static_cast<std::size_t>(config.num_paths) *
                                  static_cast<std::size_t>(config.horizon_days) * kHours)};
  parallel_for(static_cast<std::size_t>(config.num_paths), jobs, [&](std::size_t i) {
    Rng rng = Rng::substream(config.seed, i);
    std::vector<DayPrices> path;
    path.reserve(static_cast<std::size_t>(config.horizon_days));
    for (int c = 1; c <= config.horizon_days; ++c) {
      DayPrices day = rec.mean_day(c, path);
      if (config.residual_sampling == ResidualSampling::DayBlock) {
        auto r = static_cast<Eigen::Index>(rng.below(pool));
        for (int h = 0; h < kHours; ++h) day[static_cast<std::size_t>(h)] += model.residuals(r, h);
      } else {
        for (int h = 0; h < kHours; ++h)
          day[static_cast<std::size_t>(h)] += model.residuals(static_cast<Eigen::Index>(rng.below(pool)), h);
      }
      for (int h = 1; h <= kHours; ++h) out.at(static_cast<int>(i), c, h) = day[static_cast<std::size_t>(h - 1)];
      path.push_back(day);
    }
  });
  return out;
}

/// Linear interpolation between order statistics at position (n-1) q.
inline double sorted_quantile(const std::vector<double>& sorted, double q) {
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

/// Empirical quantiles per (day, hour), laid out [level][day][hour].
inline std::vector<double> quantile_fan(const PathSet& paths, const std::vector<double>& levels) {
  if (paths.num_paths < 1) throw DomainError("quantile_fan: no paths");
  for (double q : levels)
    if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level " + std::to_string(q) + " outside (0, 1)");
  const auto cells = static_cast<std::size_t>(paths.horizon_days) * kHours;
  std::vector<double> out(levels.size() * cells);
  std::vector<double> column(static_cast<std::size_t>(paths.num_paths));
  for (int c = 1; c <= paths.horizon_days; ++c)
    for (int h = 1; h <= kHours; ++h) {
      for (int i = 0; i < paths.num_paths; ++i) column[static_cast<std::size_t>(i)] = paths.at(i, c, h);
      std::sort(column.begin(), column.end());
      auto cell = static_cast<std::size_t>(c - 1) * kHours + static_cast<std::size_t>(h - 1);
      for (std::size_t l = 0; l < levels.size(); ++l) out[l * cells + cell] = sorted_quantile(column, levels[l]);
    }
  return out;
}

/// 0.01, 0.02, ..., 0.99
inline std::vector<double> percentile_levels() {
  std::vector<double> out;
  for (int i = 1; i <= 99; ++i) out.push_back(i / 100.0);
  return out;
}

}  // namespace epf
