#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "epf/backtest.hpp"
#include "epf/calendar_features.hpp"
#include "epf/csv.hpp"
#include "epf/error.hpp"
#include "epf/feature_builder.hpp"
#include "epf/market_data.hpp"
#include "epf/models.hpp"
#include "epf/parallel.hpp"
#include "epf/rng.hpp"
#include "epf/simulate.hpp"
#include "epf/synth.hpp"

namespace epf::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct DataPaths {
  std::string prices;
  std::string futures;
  std::string holidays;
};

struct SimulateSettings {
  SimulationConfig sim;
  std::optional<Date> origin;  // defaults to the last price date
  int window_length = 365;
  std::string model = "future";
  std::vector<double> levels = percentile_levels();
  bool raw_paths = false;
};

struct RunConfig {
  DataPaths data;
  std::string out = ".";
  std::size_t jobs = default_jobs();
  BacktestConfig backtest{365, 365, 28, std::nullopt};
  std::vector<std::string> models{"future", "ar24", "ar_how"};
  lasso::Config lasso;
  SimulateSettings simulate;
  synth::SynthConfig synth;
  std::optional<Date> features_from;
  std::optional<Date> features_to;
};

// ---------------------------------------------------------------------------
// JSON config

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!j.is_object()) throw InputError("config: '" + section + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InputError("config: unknown key '" + key + "' in " + section);
  }
}

template <class T>
void take(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError(std::string("config: key '") + key + "' has the wrong type");
  }
}

inline void take_date(const Json& j, const char* key, std::optional<Date>& out) {
  std::string s;
  take(j, key, s);
  if (!s.empty()) out = parse_date(s);
}

inline std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (base / p).lexically_normal().string();
}

}  // namespace detail

/// Applies a JSON config file on top of `cfg`. Relative data paths are taken
/// relative to the config file's directory.
inline void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  using detail::take;
  detail::check_keys(j, {"prices", "futures", "holidays", "out", "jobs", "seed", "backtest", "lasso", "simulate",
                         "synth", "features"},
                     "config");
  fs::path base = fs::path(path).parent_path();
  for (auto [key, target] : {std::pair{"prices", &cfg.data.prices}, {"futures", &cfg.data.futures},
                             {"holidays", &cfg.data.holidays}, {"out", &cfg.out}}) {
    std::string v;
    take(j, key, v);
    if (!v.empty()) *target = detail::resolve(base, v);
  }
  if (j.contains("jobs")) {
    int jobs = 0;
    take(j, "jobs", jobs);
    if (jobs < 1) throw InputError("config: jobs must be >= 1");
    cfg.jobs = static_cast<std::size_t>(jobs);
  }
  if (j.contains("seed")) {
    std::uint64_t seed = 0;
    take(j, "seed", seed);
    cfg.simulate.sim.seed = seed;
    cfg.synth.seed = seed;
  }
  if (j.contains("backtest")) {
    const auto& b = j["backtest"];
    detail::check_keys(b, {"window_length", "num_windows", "horizon", "first_origin", "models"}, "backtest");
    take(b, "window_length", cfg.backtest.window_length);
    take(b, "num_windows", cfg.backtest.num_windows);
    take(b, "horizon", cfg.backtest.horizon_days);
    detail::take_date(b, "first_origin", cfg.backtest.first_origin);
    take(b, "models", cfg.models);
  }
  if (j.contains("lasso")) {
    const auto& l = j["lasso"];
    detail::check_keys(l, {"tol", "max_iter", "grid_size", "span_exponent", "bic_patience"}, "lasso");
    take(l, "tol", cfg.lasso.tol);
    take(l, "max_iter", cfg.lasso.max_iter);
    take(l, "grid_size", cfg.lasso.grid_size);
    take(l, "span_exponent", cfg.lasso.span_exponent);
    take(l, "bic_patience", cfg.lasso.bic_patience);
  }
  if (j.contains("simulate")) {
    const auto& s = j["simulate"];
    detail::check_keys(s, {"paths", "horizon", "residual_sampling", "levels", "origin", "window_length", "model",
                           "raw_paths"},
                       "simulate");
    take(s, "paths", cfg.simulate.sim.num_paths);
    take(s, "horizon", cfg.simulate.sim.horizon_days);
    std::string sampling;
    take(s, "residual_sampling", sampling);
    if (!sampling.empty()) cfg.simulate.sim.residual_sampling = parse_sampling(sampling);
    take(s, "levels", cfg.simulate.levels);
    detail::take_date(s, "origin", cfg.simulate.origin);
    take(s, "window_length", cfg.simulate.window_length);
    take(s, "model", cfg.simulate.model);
    take(s, "raw_paths", cfg.simulate.raw_paths);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    detail::check_keys(s, {"start", "days", "base_level", "daily_amplitude", "weekly_amplitude", "annual_amplitude",
                           "ar_coefficient", "latent_sd", "noise_sd", "futures_signal_strength", "futures_noise_sd",
                           "holidays"},
                       "synth");
    std::optional<Date> start;
    detail::take_date(s, "start", start);
    if (start) cfg.synth.start = *start;
    take(s, "days", cfg.synth.num_days);
    take(s, "base_level", cfg.synth.base_level);
    take(s, "daily_amplitude", cfg.synth.daily_amplitude);
    take(s, "weekly_amplitude", cfg.synth.weekly_amplitude);
    take(s, "annual_amplitude", cfg.synth.annual_amplitude);
    take(s, "ar_coefficient", cfg.synth.ar_coefficient);
    take(s, "latent_sd", cfg.synth.latent_sd);
    take(s, "noise_sd", cfg.synth.noise_sd);
    take(s, "futures_signal_strength", cfg.synth.futures_signal_strength);
    take(s, "futures_noise_sd", cfg.synth.futures_noise_sd);
    take(s, "holidays", cfg.synth.holidays);
  }
  if (j.contains("features")) {
    const auto& f = j["features"];
    detail::check_keys(f, {"from", "to"}, "features");
    detail::take_date(f, "from", cfg.features_from);
    detail::take_date(f, "to", cfg.features_to);
  }
}

// ---------------------------------------------------------------------------
// Shared helpers

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (auto part : csv::split(s)) {
    auto t = csv::trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw InputError(std::string(what) + " file '" + path + "' does not exist");
}

inline fs::path prepare_out(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw InputError("cannot create output directory '" + out + "'");
  return fs::path(out);
}

inline std::string write_json(const Json& j) { return j.dump(2) + "\n"; }

/// Prices (required), holidays and futures (when given), futures forward-filled.
inline BacktestData load_data(const DataPaths& paths, bool need_futures) {
  require_file(paths.prices, "prices");
  if (need_futures) require_file(paths.futures, "futures");
  if (!paths.holidays.empty()) require_file(paths.holidays, "holidays");
  if (!paths.futures.empty()) require_file(paths.futures, "futures");
  BacktestData data;
  data.panel = load_prices(paths.prices);
  if (!paths.holidays.empty()) data.holidays = load_holidays(paths.holidays);
  if (!paths.futures.empty()) data.book = forward_fill(load_futures(paths.futures), ExchangeCalendar(data.holidays));
  return data;
}

inline ModelConfig model_config(const RunConfig& cfg) { return {cfg.lasso, cfg.jobs}; }

// ---------------------------------------------------------------------------
// validate

struct CoverageLine {
  FuturesKey key;
  std::size_t quoted = 0;
  std::size_t trading_days = 0;
  [[nodiscard]] double ratio() const { return trading_days ? double(quoted) / double(trading_days) : 0.0; }
};

/// Share of trading days (within the book's date span) carrying a raw quote,
/// per contract key and per product/variant (any maturity quoted).
inline std::pair<std::vector<CoverageLine>, std::vector<CoverageLine>> futures_coverage(
    const FuturesBook& book, const ExchangeCalendar& calendar, const FeatureSpec& spec = {}) {
  std::vector<CoverageLine> keys, products;
  if (book.empty()) return {keys, products};
  Date first = book.by_date().begin()->first;
  Date last = book.by_date().rbegin()->first;
  std::size_t trading = 0;
  for (auto d = first; d <= last; d = add_days(d, 1)) trading += calendar.is_trading_day(d);
  std::map<FuturesKey, std::size_t> per_key;
  std::map<std::pair<Product, Variant>, std::size_t> per_product;
  for (const auto& [d, quotes] : book.by_date()) {
    if (!calendar.is_trading_day(d)) continue;
    std::set<std::pair<Product, Variant>> seen;
    for (const auto& [key, price] : quotes) {
      ++per_key[key];
      seen.insert({key.product, key.variant});
    }
    for (const auto& pv : seen) ++per_product[pv];
  }
  for (auto v : {Variant::Base, Variant::Peak})
    for (auto p : {Product::Day, Product::Week, Product::Weekend, Product::Month}) {
      std::set<int> mats;
      for (int m : spec.maturities(p, v)) mats.insert(p == Product::Month ? spec.month_maturity_label : m);
      for (const auto& [key, n] : per_key)
        if (key.product == p && key.variant == v) mats.insert(key.maturity);
      for (int m : mats) {
        FuturesKey key{p, v, m};
        auto it = per_key.find(key);
        keys.push_back({key, it == per_key.end() ? 0 : it->second, trading});
      }
      auto it = per_product.find({p, v});
      products.push_back({{p, v, 0}, it == per_product.end() ? 0 : it->second, trading});
    }
  return {keys, products};
}

inline std::string percent(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * r);
  return buf;
}

inline int cmd_validate(const RunConfig& cfg, bool write_report) {
  require_file(cfg.data.prices, "prices");
  PriceLoadReport report;
  auto panel = load_prices(cfg.data.prices, &report);
  HolidaySet holidays;
  if (!cfg.data.holidays.empty()) {
    require_file(cfg.data.holidays, "holidays");
    holidays = load_holidays(cfg.data.holidays);
  }
  ExchangeCalendar calendar(holidays);
  std::ostringstream os;
  os << "prices: " << format_date(panel.first_date()) << " .. " << format_date(panel.last_date()) << " ("
     << panel.num_days() << " days), repaired duplicates: " << report.repaired_duplicates << "\n";
  os << "holidays: " << holidays.size() << "\n";
  Json j;
  j["prices"] = {{"first", format_date(panel.first_date())},
                 {"last", format_date(panel.last_date())},
                 {"days", panel.num_days()},
                 {"repaired_duplicates", report.repaired_duplicates}};
  j["holidays"] = holidays.size();
  std::vector<std::string> warnings;
  if (!cfg.data.futures.empty()) {
    require_file(cfg.data.futures, "futures");
    auto book = load_futures(cfg.data.futures);
    os << "futures: " << book.size() << " quotes";
    if (!book.empty())
      os << ", " << format_date(book.by_date().begin()->first) << " .. "
         << format_date(book.by_date().rbegin()->first);
    os << "\n";
    auto [keys, products] = futures_coverage(book, calendar);
    os << "coverage per contract (share of trading days quoted):\n";
    Json jk = Json::array();
    for (const auto& line : keys) {
      os << "  " << to_string(line.key.product) << " " << to_string(line.key.variant) << " m" << line.key.maturity
         << ": " << percent(line.ratio()) << "\n";
      jk.push_back({{"product", to_string(line.key.product)},
                    {"variant", to_string(line.key.variant)},
                    {"maturity", line.key.maturity},
                    {"quoted_days", line.quoted},
                    {"trading_days", line.trading_days}});
      if (line.ratio() < 0.75)
        warnings.push_back(std::string(to_string(line.key.product)) + " " + to_string(line.key.variant) + " m" +
                           std::to_string(line.key.maturity) + " traded on " + percent(line.ratio()) +
                           " of trading days (below 75%)");
    }
    os << "trading ratio per product:\n";
    Json jp = Json::array();
    for (const auto& line : products) {
      os << "  " << to_string(line.key.product) << " " << to_string(line.key.variant) << ": "
         << percent(line.ratio()) << "\n";
      jp.push_back({{"product", to_string(line.key.product)},
                    {"variant", to_string(line.key.variant)},
                    {"quoted_days", line.quoted},
                    {"trading_days", line.trading_days}});
    }
    j["futures"] = {{"quotes", book.size()}, {"contracts", jk}, {"products", jp}};
  }
  for (const auto& w : warnings) os << "WARNING: " << w << "\n";
  j["warnings"] = warnings;
  std::cout << os.str();
  if (write_report) csv::write_file((prepare_out(cfg.out) / "validation.json").string(), write_json(j));
  return 0;
}

// ---------------------------------------------------------------------------
// backtest and dm

inline std::string errors_csv(const BacktestResult& r) {
  std::string s = "model,window,origin,horizon_day,hour,error\n";
  for (const auto& name : r.model_names) {
    const auto& t = r.errors.at(name);
    for (int n = 1; n <= t.num_windows(); ++n) {
      auto origin = format_date(r.windows[static_cast<std::size_t>(n - 1)].origin);
      for (int c = 1; c <= t.horizon_days(); ++c)
        for (int h = 1; h <= kHours; ++h) {
          double e = t.at(c, h, n);
          if (std::isnan(e)) continue;
          s += name + "," + std::to_string(n) + "," + origin + "," + std::to_string(c) + "," + std::to_string(h) +
               "," + csv::fmt(e) + "\n";
        }
    }
  }
  return s;
}

inline Json metrics_json(const std::vector<std::string>& names, const std::map<std::string, ErrorTensor>& errors) {
  Json j = Json::object();
  for (const auto& name : names) {
    const auto& t = errors.at(name);
    std::size_t excluded = 0;
    auto grid = mae_ch(t, &excluded);
    Json rows = Json::array();
    for (int c = 0; c < t.horizon_days(); ++c) {
      Json row = Json::array();
      for (int h = 0; h < kHours; ++h) row.push_back(grid[static_cast<std::size_t>(c * kHours + h)]);
      rows.push_back(row);
    }
    j[name] = {{"horizon_days", t.horizon_days()},
               {"num_windows", t.num_windows()},
               {"excluded_cells", excluded},
               {"mae_ch", rows},
               {"mmae", mmae_curve(t)}};
  }
  return j;
}

inline std::string dm_csv(const std::vector<std::tuple<std::string, std::string, std::vector<DmResult>>>& rows) {
  std::string s = "modelA,modelB,horizon_day,dm,p_two_sided,p_one_sided,degenerate\n";
  for (const auto& [a, b, results] : rows)
    for (const auto& r : results)
      s += a + "," + b + "," + std::to_string(r.horizon_day) + "," + csv::fmt(r.statistic) + "," +
           csv::fmt(r.p_two_sided) + "," + csv::fmt(r.p_one_sided) + "," + (r.degenerate ? "1" : "0") + "\n";
  return s;
}

inline std::vector<DmResult> dm_all_days(const ErrorTensor& a, const ErrorTensor& b) {
  std::vector<DmResult> out;
  for (int c = 1; c <= a.horizon_days(); ++c) out.push_back(dm_test(a, b, c));
  return out;
}

inline std::string mmae_table(const std::vector<std::string>& names, const std::map<std::string, ErrorTensor>& errors) {
  if (names.empty()) return "";
  int cmax = errors.at(names.front()).horizon_days();
  std::vector<int> ks;
  for (int k : {24, 168, 672})
    if (k <= cmax * kHours) ks.push_back(k);
  if (ks.empty() || ks.back() != cmax * kHours) ks.push_back(cmax * kHours);
  std::ostringstream os;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-10s", "model");
  os << buf;
  for (int k : ks) {
    std::snprintf(buf, sizeof buf, " %12s", ("MMAE_" + std::to_string(k)).c_str());
    os << buf;
  }
  os << "\n";
  for (const auto& name : names) {
    std::snprintf(buf, sizeof buf, "%-10s", name.c_str());
    os << buf;
    for (int k : ks) {
      std::snprintf(buf, sizeof buf, " %12.4f", mmae(errors.at(name), k));
      os << buf;
    }
    os << "\n";
  }
  return os.str();
}

inline void write_model_reports(const fs::path& out, const std::string& name, const InclusionReport& incl,
                                const Window& last) {
  const FeatureSpec spec;
  auto columns = spec.columns();
  const auto p = columns.size();
  std::string s = "column";
  for (int h = 1; h <= kHours; ++h) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ",h%02d", h);
    s += buf;
  }
  s += "\n";
  for (std::size_t j = 0; j < p; ++j) {
    s += columns[j].name;
    for (int h = 0; h < kHours; ++h) s += "," + csv::fmt(incl.counts[static_cast<std::size_t>(h) * p + j]);
    s += "\n";
  }
  csv::write_file((out / ("inclusion_" + name + ".csv")).string(), s);

  fs::create_directories(out / "coefficients");
  Json model;
  model["model"] = name;
  model["origin"] = format_date(last.origin);
  model["train_first"] = format_date(last.train.first);
  model["train_last"] = format_date(last.train.last);
  model["horizon_day"] = 1;
  Json hours = Json::array();
  for (const auto& slot : incl.last_window) {
    std::vector<double> beta(p, 0.0);
    Json nz = Json::object();
    for (const auto& [j, b] : slot.nonzero) {
      beta[static_cast<std::size_t>(j)] = b;
      nz[columns[static_cast<std::size_t>(j)].name] = b;
    }
    std::string c = "column,beta,selected_lambda,bic\n";
    for (std::size_t j = 0; j < p; ++j)
      c += columns[j].name + "," + csv::fmt(beta[j]) + "," + csv::fmt(slot.lambda) + "," + csv::fmt(slot.bic) + "\n";
    char file[64];
    std::snprintf(file, sizeof file, "%s_h%02d.csv", name.c_str(), slot.hour);
    csv::write_file((out / "coefficients" / file).string(), c);
    hours.push_back({{"hour", slot.hour}, {"lambda", slot.lambda}, {"df", slot.df}, {"bic", slot.bic}, {"nonzero", nz}});
  }
  model["hours"] = hours;
  csv::write_file((out / ("model_" + name + ".json")).string(), write_json(model));
}

inline int cmd_backtest(const RunConfig& cfg) {
  if (cfg.models.empty()) throw InputError("no models selected");
  std::set<std::string> unique(cfg.models.begin(), cfg.models.end());
  if (unique.size() != cfg.models.size()) throw InputError("duplicate model in selection");
  std::vector<std::pair<std::string, Forecaster>> models;
  for (const auto& m : cfg.models) models.emplace_back(m, forecaster_by_name(m));
  bool need_futures = unique.contains("future");
  auto out = prepare_out(cfg.out);
  auto data = load_data(cfg.data, need_futures);
  auto result = run_backtest(cfg.backtest, data, models, cfg.jobs, model_config(cfg));

  csv::write_file((out / "errors.csv").string(), errors_csv(result));
  Json metrics;
  metrics["models"] = metrics_json(result.model_names, result.errors);
  metrics["skipped"] = result.skipped;
  csv::write_file((out / "metrics.json").string(), write_json(metrics));
  if (models.size() >= 2) {
    std::vector<std::tuple<std::string, std::string, std::vector<DmResult>>> rows;
    for (std::size_t a = 0; a < models.size(); ++a)
      for (std::size_t b = a + 1; b < models.size(); ++b)
        rows.emplace_back(models[a].first, models[b].first,
                          dm_all_days(result.errors.at(models[a].first), result.errors.at(models[b].first)));
    csv::write_file((out / "dm.csv").string(), dm_csv(rows));
  }
  for (const auto& [name, incl] : result.inclusion) write_model_reports(out, name, incl, result.windows.back());
  for (const auto& s : result.skipped) std::cerr << "skipped: " << s << "\n";
  std::cout << mmae_table(result.model_names, result.errors);
  return 0;
}

struct ErrorFile {
  std::vector<std::string> models;
  std::map<std::string, std::map<std::tuple<int, int, int>, double>> cells;  // (window, c, h)
};

inline ErrorFile read_errors(const std::string& path) {
  require_file(path, "errors");
  auto table = csv::read(path, {"model", "window", "origin", "horizon_day", "hour", "error"});
  ErrorFile f;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    auto where = table.where(i);
    const auto& model = row[0];
    if (!f.cells.contains(model)) f.models.push_back(model);
    auto n = static_cast<int>(csv::parse_int(row[1], where));
    parse_date(row[2]);
    auto c = static_cast<int>(csv::parse_int(row[3], where));
    auto h = static_cast<int>(csv::parse_int(row[4], where));
    if (n < 1 || c < 1 || h < 1 || h > kHours) throw InputError(where + ": index out of range");
    if (!f.cells[model].emplace(std::tuple{n, c, h}, csv::parse_double(row[5], where)).second)
      throw InputError(where + ": duplicate key");
  }
  if (f.models.empty()) throw InputError(path + ": no error rows");
  return f;
}

inline ErrorTensor to_tensor(const std::map<std::tuple<int, int, int>, double>& cells) {
  int N = 0, C = 0;
  for (const auto& [key, e] : cells) {
    N = std::max(N, std::get<0>(key));
    C = std::max(C, std::get<1>(key));
  }
  ErrorTensor t(C, N);
  for (const auto& [key, e] : cells) t.at(std::get<1>(key), std::get<2>(key), std::get<0>(key)) = e;
  return t;
}

inline std::string key_text(const std::tuple<int, int, int>& k) {
  return "window " + std::to_string(std::get<0>(k)) + ", horizon_day " + std::to_string(std::get<1>(k)) + ", hour " +
         std::to_string(std::get<2>(k));
}

/// Throws naming the first key present in one set but not the other.
inline void check_same_keys(const std::map<std::tuple<int, int, int>, double>& a,
                            const std::map<std::tuple<int, int, int>, double>& b, const std::string& la,
                            const std::string& lb) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first))
      throw InputError("key mismatch: " + key_text(ia->first) + " present in " + la + " but not in " + lb);
    if (ia == a.end() || ib->first < ia->first)
      throw InputError("key mismatch: " + key_text(ib->first) + " present in " + lb + " but not in " + la);
    ++ia;
    ++ib;
  }
}

inline int cmd_dm(const RunConfig& cfg, const std::vector<std::string>& files, const std::string& model_a,
                  const std::string& model_b) {
  if (files.empty() || files.size() > 2) throw InputError("dm expects one or two errors files");
  auto out = prepare_out(cfg.out);
  struct Side {
    std::string label;
    const std::map<std::tuple<int, int, int>, double>* cells;
  };
  std::vector<ErrorFile> loaded;
  for (const auto& f : files) loaded.push_back(read_errors(f));
  auto pick = [&](const ErrorFile& f, const std::string& want, const std::string& file) -> Side {
    if (!want.empty()) {
      auto it = f.cells.find(want);
      if (it == f.cells.end()) throw InputError(file + ": no model '" + want + "'");
      return {want, &it->second};
    }
    if (f.models.size() != 1) throw InputError(file + ": several models; choose one with --model-a/--model-b");
    return {f.models.front(), &f.cells.at(f.models.front())};
  };
  std::vector<std::pair<Side, Side>> pairs;
  if (files.size() == 2) {
    pairs.emplace_back(pick(loaded[0], model_a, files[0]), pick(loaded[1], model_b, files[1]));
  } else if (!model_a.empty() || !model_b.empty()) {
    pairs.emplace_back(pick(loaded[0], model_a, files[0]), pick(loaded[0], model_b, files[0]));
  } else {
    const auto& f = loaded[0];
    if (f.models.size() < 2) throw InputError(files[0] + ": needs at least two models");
    for (std::size_t a = 0; a < f.models.size(); ++a)
      for (std::size_t b = a + 1; b < f.models.size(); ++b)
        pairs.emplace_back(Side{f.models[a], &f.cells.at(f.models[a])}, Side{f.models[b], &f.cells.at(f.models[b])});
  }
  std::vector<std::tuple<std::string, std::string, std::vector<DmResult>>> rows;
  for (const auto& [a, b] : pairs) {
    check_same_keys(*a.cells, *b.cells, a.label, b.label);
    auto ta = to_tensor(*a.cells);
    auto tb = to_tensor(*b.cells);
    if (ta.nan_count() > 0) throw InputError("errors for '" + a.label + "' do not fill a complete grid");
    rows.emplace_back(a.label, b.label, dm_all_days(ta, tb));
  }
  csv::write_file((out / "dm.csv").string(), dm_csv(rows));
  std::cout << "wrote " << (out / "dm.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const RunConfig& cfg) {
  const auto& s = cfg.simulate;
  if (s.model != "future" && s.model != "ar24")
    throw InputError("simulate supports models future and ar24, not '" + s.model + "'");
  if (s.sim.num_paths < 1) throw InputError("paths must be >= 1");
  if (s.sim.horizon_days < 1) throw InputError("horizon must be >= 1");
  if (s.window_length < 8) throw InputError("window_length must be >= 8");
  if (s.levels.empty()) throw InputError("no quantile levels");
  for (double q : s.levels)
    if (!(q > 0.0 && q < 1.0)) throw InputError("quantile level " + csv::fmt(q) + " outside (0, 1)");
  auto out = prepare_out(cfg.out);
  auto data = load_data(cfg.data, s.model == "future");
  Date origin = s.origin.value_or(data.panel.last_date());
  DateRange train{add_days(origin, -s.window_length + 1), origin};
  auto mc = model_config(cfg);
  LassoPanelModel model = s.model == "future"
                              ? LassoPanelModel(fit_future_model(data.panel, data.book, data.holidays, train, origin,
                                                                 s.sim.horizon_days, mc))
                              : LassoPanelModel(fit_ar24(data.panel, data.holidays, train, s.sim.horizon_days, mc));
  const auto& book = s.model == "future" ? data.book : FilledFuturesBook{};
  auto paths = simulate_paths(model, data.panel, book, data.holidays, s.sim, cfg.jobs);
  auto fan = quantile_fan(paths, s.levels);

  std::string q = "date,hour,level,value\n";
  const auto cells = static_cast<std::size_t>(paths.horizon_days) * kHours;
  for (int c = 1; c <= paths.horizon_days; ++c) {
    auto date = format_date(add_days(origin, c));
    for (int h = 1; h <= kHours; ++h)
      for (std::size_t l = 0; l < s.levels.size(); ++l)
        q += date + "," + std::to_string(h) + "," + csv::fmt(s.levels[l]) + "," +
             csv::fmt(fan[l * cells + static_cast<std::size_t>(c - 1) * kHours + static_cast<std::size_t>(h - 1)]) +
             "\n";
  }
  csv::write_file((out / "quantiles.csv").string(), q);

  Json meta;
  meta["seed"] = s.sim.seed;
  meta["rng"] = Rng::kAlgorithm;
  meta["model"] = s.model;
  meta["origin"] = format_date(origin);
  meta["train_first"] = format_date(train.first);
  meta["train_last"] = format_date(train.last);
  meta["num_paths"] = s.sim.num_paths;
  meta["horizon_days"] = s.sim.horizon_days;
  meta["residual_sampling"] = to_string(s.sim.residual_sampling);
  meta["levels"] = s.levels;
  meta["lasso"] = {{"tol", cfg.lasso.tol},
                   {"max_iter", cfg.lasso.max_iter},
                   {"grid_size", cfg.lasso.grid_size},
                   {"span_exponent", cfg.lasso.span_exponent},
                   {"bic_patience", cfg.lasso.bic_patience}};
  if (s.raw_paths) meta["raw_paths"] = "paths.bin: uint64 header (num_paths, horizon_days, 24), then float64 values";
  csv::write_file((out / "simulation.json").string(), write_json(meta));

  if (s.raw_paths) {
    std::ofstream bin(out / "paths.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw InputError("cannot write paths.bin");
    std::uint64_t header[3] = {static_cast<std::uint64_t>(paths.num_paths),
                               static_cast<std::uint64_t>(paths.horizon_days), kHours};
    bin.write(reinterpret_cast<const char*>(header), sizeof header);
    bin.write(reinterpret_cast<const char*>(paths.values.data()),
              static_cast<std::streamsize>(paths.values.size() * sizeof(double)));
  }
  std::cout << "simulated " << s.sim.num_paths << " paths x " << s.sim.horizon_days << " days from "
            << format_date(origin) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth and dump-features

inline int cmd_synth(const RunConfig& cfg) {
  auto out = prepare_out(cfg.out);
  auto data = synth::generate(cfg.synth);
  save_prices((out / "prices.csv").string(), data.panel);
  save_futures((out / "futures.csv").string(), data.book);
  save_holidays((out / "holidays.csv").string(), data.holidays);
  std::cout << "wrote " << data.panel.num_days() << " days of prices and " << data.book.size()
            << " futures quotes to " << out.string() << "\n";
  return 0;
}

inline int cmd_dump_features(const RunConfig& cfg) {
  auto out = prepare_out(cfg.out);
  auto data = load_data(cfg.data, false);
  const FeatureSpec spec;
  ExchangeCalendar calendar(data.holidays);
  Date from = cfg.features_from.value_or(add_days(data.panel.first_date(), spec.price_lags));
  Date to = cfg.features_to.value_or(data.panel.last_date());
  if (to < from) throw InputError("dump-features: empty date range");
  auto columns = spec.columns();
  std::string s = "date";
  for (const auto& c : columns) s += "," + c.name;
  for (int h = 1; h <= kHours; ++h) {
    char buf[16];
    std::snprintf(buf, sizeof buf, ",price.h%02d", h);
    s += buf;
  }
  s += ",missing_futures\n";
  for (auto d = from; d <= to; d = add_days(d, 1)) {
    auto row = align_row(data.panel, data.book, calendar, d, spec);
    s += format_date(d);
    for (double v : row.values) s += "," + csv::fmt(v);
    for (int h = 1; h <= kHours; ++h) s += "," + csv::fmt(data.panel.at(d, h));
    int missing = 0;
    for (auto m : row.missing) missing += m;
    s += "," + std::to_string(missing) + "\n";
  }
  csv::write_file((out / "features.csv").string(), s);
  std::cout << "wrote " << (days_between(from, to) + 1) << " feature rows\n";
  return 0;
}

// ---------------------------------------------------------------------------
// Entry point

/// Parses `args` (argv[0] included), runs the command and returns the exit code:
/// 0 success, 1 domain error, 2 input or schema error.
inline int run(std::vector<std::string> args) {
  CLI::App app{"Day-ahead electricity price forecasting with futures regressors"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out, "output directory");
  app.add_option("--jobs", jobs, "worker threads (default: logical cores)");
  app.add_option("--seed", seed, "random seed for simulate and synth");

  std::optional<std::string> prices, futures, holidays;
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--prices", prices, "hourly prices CSV (date,hour,price)");
    sub->add_option("--futures", futures, "futures CSV (trade_date,product,variant,maturity,price)");
    sub->add_option("--holidays", holidays, "holidays CSV (date)");
  };

  auto* validate = app.add_subcommand("validate", "check input files and report futures coverage");
  data_flags(validate);

  auto* backtest = app.add_subcommand("backtest", "rolling-window out-of-sample study");
  data_flags(backtest);
  std::optional<std::string> models;
  std::optional<int> windows, window_length, horizon;
  std::optional<std::string> first_origin;
  backtest->add_option("--models", models, "comma list of future, ar24, ar_how");
  backtest->add_option("--windows", windows, "number of rolling windows N");
  backtest->add_option("--window-length", window_length, "training days per window");
  backtest->add_option("--horizon", horizon, "forecast horizon in days");
  backtest->add_option("--first-origin", first_origin, "origin of the first window (YYYY-MM-DD)");

  auto* dm = app.add_subcommand("dm", "Diebold-Mariano comparison of error files");
  std::vector<std::string> dm_files;
  std::string model_a, model_b;
  dm->add_option("files", dm_files, "errors CSV file(s)")->required();
  dm->add_option("--model-a", model_a, "model taken from the first file");
  dm->add_option("--model-b", model_b, "model taken from the second file");

  auto* simulate = app.add_subcommand("simulate", "residual-bootstrap paths and quantile fan");
  data_flags(simulate);
  std::optional<int> paths, sim_horizon, sim_window;
  std::optional<std::string> levels, sampling, sim_origin, sim_model;
  bool raw_paths = false;
  simulate->add_option("--paths", paths, "number of paths");
  simulate->add_option("--horizon", sim_horizon, "days to simulate");
  simulate->add_option("--levels", levels, "comma list of quantile levels (default 0.01..0.99)");
  simulate->add_option("--sampling", sampling, "day_block or independent_per_hour");
  simulate->add_option("--origin", sim_origin, "forecast origin (default: last price date)");
  simulate->add_option("--window-length", sim_window, "training days");
  simulate->add_option("--model", sim_model, "future or ar24");
  simulate->add_flag("--raw-paths", raw_paths, "also write paths.bin");

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic data set");
  std::optional<int> days;
  std::optional<double> signal;
  std::optional<std::string> start;
  synth_cmd->add_option("--days", days, "number of days");
  synth_cmd->add_option("--start", start, "first date");
  synth_cmd->add_option("--signal", signal, "futures signal strength in [0, 1]");

  auto* dump = app.add_subcommand("dump-features", "write aligned regressor rows");
  data_flags(dump);
  std::optional<std::string> from, to;
  dump->add_option("--from", from, "first target date");
  dump->add_option("--to", to, "last target date");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(config_path, cfg);
    if (out) cfg.out = *out;
    if (jobs) {
      if (*jobs < 1) throw InputError("--jobs must be >= 1");
      cfg.jobs = static_cast<std::size_t>(*jobs);
    }
    if (seed) cfg.simulate.sim.seed = cfg.synth.seed = *seed;
    if (prices) cfg.data.prices = *prices;
    if (futures) cfg.data.futures = *futures;
    if (holidays) cfg.data.holidays = *holidays;
    if (models) cfg.models = split_list(*models);
    if (windows) cfg.backtest.num_windows = *windows;
    if (window_length) cfg.backtest.window_length = *window_length;
    if (horizon) cfg.backtest.horizon_days = *horizon;
    if (first_origin) cfg.backtest.first_origin = parse_date(*first_origin);
    if (paths) cfg.simulate.sim.num_paths = *paths;
    if (sim_horizon) cfg.simulate.sim.horizon_days = *sim_horizon;
    if (sim_window) cfg.simulate.window_length = *sim_window;
    if (sampling) cfg.simulate.sim.residual_sampling = parse_sampling(*sampling);
    if (sim_origin) cfg.simulate.origin = parse_date(*sim_origin);
    if (sim_model) cfg.simulate.model = *sim_model;
    if (raw_paths) cfg.simulate.raw_paths = true;
    if (levels) {
      cfg.simulate.levels.clear();
      for (const auto& l : split_list(*levels)) cfg.simulate.levels.push_back(csv::parse_double(l, "--levels"));
    }
    if (days) cfg.synth.num_days = *days;
    if (start) cfg.synth.start = parse_date(*start);
    if (signal) cfg.synth.futures_signal_strength = *signal;
    if (from) cfg.features_from = parse_date(*from);
    if (to) cfg.features_to = parse_date(*to);

    if (*validate) return cmd_validate(cfg, out.has_value() || !config_path.empty());
    if (*backtest) {
      try {
        cfg.backtest.validate();
      } catch (const DomainError& e) {
        throw InputError(e.what());
      }
      return cmd_backtest(cfg);
    }
    if (*dm) return cmd_dm(cfg, dm_files, model_a, model_b);
    if (*simulate) return cmd_simulate(cfg);
    if (*synth_cmd) {
      try {
        cfg.synth.validate();
      } catch (const DomainError& e) {
        throw InputError(e.what());
      }
      return cmd_synth(cfg);
    }
    if (*dump) return cmd_dump_features(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace epf::cli
