#pragma once

// Ingestion of raw meter and mobility data into per-day interval series, and
// turning day series into regression samples and folds.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tenet/errors.hpp"
#include "tenet/metrics.hpp"
#include "tenet/model.hpp"
#include "tenet/numerics.hpp"
#include "tenet/sample.hpp"
#include "tenet/text.hpp"

namespace tenet {

inline constexpr std::size_t kIntervalsPerDay = 48;
inline constexpr double kEarthRadiusKm = 6371.0;

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

struct Timestamp {
  std::chrono::sys_days day{};
  int second = 0;  // seconds since local midnight

  int minute() const noexcept { return second / 60; }
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

inline std::string format_date(std::chrono::sys_days day) {
  const std::chrono::year_month_day ymd{day};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline std::optional<std::chrono::sys_days> make_day(int y, int m, int d) {
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (m < 1 || m > 12 || d < 1 || d > 31 || !ymd.ok()) return std::nullopt;
  return std::chrono::sys_days{ymd};
}

/// "hh:mm" or "hh:mm:ss" -> seconds since midnight.
inline std::optional<int> parse_clock(std::string_view s) {
  const auto parts = text::split(s, ':');
  if (parts.size() < 2 || parts.size() > 3) return std::nullopt;
  const auto h = text::parse_int<int>(parts[0]);
  const auto m = text::parse_int<int>(parts[1]);
  const auto sec = parts.size() == 3 ? text::parse_int<int>(parts[2]) : std::optional<int>(0);
  if (!h || !m || !sec || *h < 0 || *h > 23 || *m < 0 || *m > 59 || *sec < 0 || *sec > 59) return std::nullopt;
  return *h * 3600 + *m * 60 + *sec;
}

/// "YYYY-MM-DDThh:mm[:ss]" (a space is accepted in place of 'T').
inline std::optional<Timestamp> parse_iso8601(std::string_view s) {
  s = text::trim(s);
  if (s.size() < 16 || (s[10] != 'T' && s[10] != ' ')) return std::nullopt;
  const auto date = text::split(s.substr(0, 10), '-');
  if (date.size() != 3) return std::nullopt;
  const auto y = text::parse_int<int>(date[0]);
  const auto m = text::parse_int<int>(date[1]);
  const auto d = text::parse_int<int>(date[2]);
  if (!y || !m || !d) return std::nullopt;
  const auto day = make_day(*y, *m, *d);
  const auto clock = parse_clock(s.substr(11));
  if (!day || !clock) return std::nullopt;
  return Timestamp{*day, *clock};
}

// ---------------------------------------------------------------------------
// Meter records
// ---------------------------------------------------------------------------

struct MeterRecord {
  std::string source;
  Timestamp time;
  std::optional<double> value;  // nullopt marks a missing reading
};

struct MeterParseResult {
  std::vector<MeterRecord> records;
  std::size_t rows = 0;      // data rows read (header excluded)
  std::size_t missing = 0;   // rows carrying the missing-value sentinel
  std::size_t rejected = 0;  // rows dropped (e.g. negative readings)
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;
};

/// UCI "individual household electric power consumption" file:
/// `Date;Time;Global_active_power;...`, Date d/m/yyyy, Time hh:mm:ss,
/// `?` for a missing reading. Values are minute-averaged kW.
inline MeterParseResult parse_hpc_fr(std::istream& in, const std::string& source = "hpc-fr") {
  MeterParseResult out;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("hpc-fr: empty file", 1);
  const auto header = text::split(text::trim(line), ';');
  if (header.size() < 3 || header[0] != "Date" || header[1] != "Time" || header[2] != "Global_active_power")
    throw FormatError("hpc-fr: expected header 'Date;Time;Global_active_power;...'", 1);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = text::trim(line);
    if (row.empty()) continue;
    const auto cols = text::split(row, ';');
    if (cols.size() < 3) throw FormatError("hpc-fr: too few columns", line_no);
    const auto dmy = text::split(cols[0], '/');
    if (dmy.size() != 3) throw FormatError("hpc-fr: bad date", line_no);
    const auto d = text::parse_int<int>(dmy[0]);
    const auto m = text::parse_int<int>(dmy[1]);
    const auto y = text::parse_int<int>(dmy[2]);
    const auto day = (d && m && y) ? make_day(*y, *m, *d) : std::nullopt;
    if (!day) throw FormatError("hpc-fr: bad date", line_no);
    const auto clock = parse_clock(cols[1]);
    if (!clock) throw FormatError("hpc-fr: bad time", line_no);

    MeterRecord rec{source, Timestamp{*day, *clock}, std::nullopt};
    const auto raw = text::trim(cols[2]);
    if (raw == "?") {
      ++out.missing;
    } else {
      const auto v = text::parse_double(raw);
      if (!v || !std::isfinite(*v)) throw FormatError("hpc-fr: bad Global_active_power", line_no);
      if (*v < 0.0) {
        ++out.rejected;
        ++out.rows;
        continue;
      }
      rec.value = *v;
    }
    ++out.rows;
    out.records.push_back(std::move(rec));
  }
  return out;
}

/// Normalized interval-meter CSV: `meter_id,iso8601_timestamp,kwh`, optional
/// header. Negative readings are rejected and counted; a repeated
/// (meter, timestamp) keeps the last row and records a warning.
inline MeterParseResult parse_meter_csv(std::istream& in) {
  MeterParseResult out;
  std::map<std::tuple<std::string, Timestamp>, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = text::trim(line);
    if (row.empty()) continue;
    if (line_no == 1 && row.rfind("meter_id", 0) == 0) continue;
    const auto cols = text::split(row, ',');
    if (cols.size() != 3) throw FormatError("meter-csv: expected 3 columns", line_no);
    const std::string meter(text::trim(cols[0]));
    if (meter.empty()) throw FormatError("meter-csv: empty meter_id", line_no);
    const auto ts = parse_iso8601(cols[1]);
    if (!ts) throw FormatError("meter-csv: bad timestamp", line_no);
    const auto v = text::parse_double(cols[2]);
    if (!v || !std::isfinite(*v)) throw FormatError("meter-csv: bad kwh", line_no);
    ++out.rows;
    if (*v < 0.0) {
      ++out.rejected;
      out.warnings.push_back("line " + std::to_string(line_no) + ": negative kwh rejected");
      continue;
    }
    const auto key = std::make_tuple(meter, *ts);
    if (auto it = seen.find(key); it != seen.end()) {
      ++out.duplicates;
      out.warnings.push_back("line " + std::to_string(line_no) + ": duplicate timestamp for meter " + meter +
                             ", keeping the last reading");
      out.records[it->second].value = *v;
      continue;
    }
    seen.emplace(key, out.records.size());
    out.records.push_back({meter, *ts, *v});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Day series
// ---------------------------------------------------------------------------

struct DaySeries {
  std::string source;
  std::string date;  // YYYY-MM-DD
  RealVec values;
  double completeness = 1.0;
  bool flagged = false;  // e.g. a mobility day with fewer than two fixes
};

enum class ReadingKind {
  minute_power,     // minute-averaged kW; interval value is kWh
  interval_energy,  // energy per reading (kWh); summed within an interval
};

struct AggregateOptions {
  ReadingKind kind = ReadingKind::minute_power;
  int interval_minutes = 30;
  double min_completeness = 0.95;
};

struct AggregateResult {
  std::vector<DaySeries> days;
  std::size_t dropped = 0;
};

/// Bins records into per-interval totals for each (source, day). An interval
/// counts as covered when it holds at least one non-missing reading; days
/// whose covered fraction is below min_completeness are dropped. Missing
/// readings inside a kept day contribute zero.
inline AggregateResult aggregate_days(const std::vector<MeterRecord>& records, const AggregateOptions& opt = {}) {
  if (opt.interval_minutes <= 0 || 1440 % opt.interval_minutes != 0)
    throw std::invalid_argument("aggregate_days: interval must divide a day");
  const std::size_t per_day = static_cast<std::size_t>(1440 / opt.interval_minutes);
  struct Acc {
    RealVec values;
    std::vector<bool> covered;
  };
  std::map<std::pair<std::string, std::chrono::sys_days>, Acc> days;
  for (const auto& r : records) {
    auto& acc = days[{r.source, r.time.day}];
    if (acc.values.empty()) {
      acc.values.assign(per_day, 0.0);
      acc.covered.assign(per_day, false);
    }
    if (!r.value) continue;
    const auto slot = static_cast<std::size_t>(r.time.minute() / opt.interval_minutes);
    acc.covered[slot] = true;
    acc.values[slot] += opt.kind == ReadingKind::minute_power ? *r.value / 60.0 : *r.value;
  }
  AggregateResult out;
  for (auto& [key, acc] : days) {
    const auto covered = static_cast<double>(std::count(acc.covered.begin(), acc.covered.end(), true));
    const double completeness = covered / static_cast<double>(per_day);
    if (completeness < opt.min_completeness) {
      ++out.dropped;
      continue;
    }
    out.days.push_back({key.first, format_date(key.second), std::move(acc.values), completeness, false});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mobility traces
// ---------------------------------------------------------------------------

struct PositionFix {
  std::string user;
  Timestamp time;
  double lat = 0.0;
  double lon = 0.0;
};

inline double haversine_km(double lat1, double lon1, double lat2, double lon2) {
  constexpr double kDeg = 3.14159265358979323846 / 180.0;
  const double dlat = (lat2 - lat1) * kDeg;
  const double dlon = (lon2 - lon1) * kDeg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(lat1 * kDeg) * std::cos(lat2 * kDeg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

inline double haversine_km(const PositionFix& a, const PositionFix& b) {
  return haversine_km(a.lat, a.lon, b.lat, b.lon);
}

/// Trace CSV: `user,iso8601_timestamp,lat,lon`, optional header.
inline std::vector<PositionFix> parse_traces(std::istream& in) {
  std::vector<PositionFix> fixes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = text::trim(line);
    if (row.empty()) continue;
    if (line_no == 1 && row.rfind("user", 0) == 0) continue;
    const auto cols = text::split(row, ',');
    if (cols.size() != 4) throw FormatError("traces: expected 4 columns", line_no);
    const auto ts = parse_iso8601(cols[1]);
    const auto lat = text::parse_double(cols[2]);
    const auto lon = text::parse_double(cols[3]);
    if (!ts) throw FormatError("traces: bad timestamp", line_no);
    if (!lat || !lon || std::abs(*lat) > 90.0 || std::abs(*lon) > 180.0)
      throw FormatError("traces: bad coordinates", line_no);
    fixes.push_back({std::string(text::trim(cols[0])), *ts, *lat, *lon});
  }
  return fixes;
}

enum class MobilityMode { distance, time };

/// Travel above this within one five-minute window counts the window as travelling.
inline constexpr double kTravelThresholdKm = 0.5;

/// Daily 48-interval series for one user. Distance mode sums haversine hops
/// between consecutive same-day fixes into the interval of the later fix
/// (km). Time mode adds 5 minutes to an interval for each five-minute window
/// whose first-to-last displacement exceeds 0.5 km. Days with fewer than two
/// fixes come back zero-valued and flagged.
inline std::vector<DaySeries> mobility_day_series(std::vector<PositionFix> fixes, MobilityMode mode) {
  std::stable_sort(fixes.begin(), fixes.end(),
                   [](const PositionFix& a, const PositionFix& b) { return a.time < b.time; });
  std::vector<DaySeries> out;
  std::size_t i = 0;
  while (i < fixes.size()) {
    std::size_t end = i;
    while (end < fixes.size() && fixes[end].time.day == fixes[i].time.day) ++end;
    DaySeries day{fixes[i].user, format_date(fixes[i].time.day), RealVec(kIntervalsPerDay, 0.0), 0.0, false};
    std::vector<bool> covered(kIntervalsPerDay, false);
    for (std::size_t k = i; k < end; ++k) covered[static_cast<std::size_t>(fixes[k].time.second / 1800)] = true;
    day.completeness = static_cast<double>(std::count(covered.begin(), covered.end(), true)) / kIntervalsPerDay;

    if (end - i < 2) {
      day.flagged = true;
    } else if (mode == MobilityMode::distance) {
      for (std::size_t k = i + 1; k < end; ++k)
        day.values[static_cast<std::size_t>(fixes[k].time.second / 1800)] += haversine_km(fixes[k - 1], fixes[k]);
    } else {
      std::size_t w = i;
      while (w < end) {
        const int window = fixes[w].time.second / 300;
        std::size_t last = w;
        while (last + 1 < end && fixes[last + 1].time.second / 300 == window) ++last;
        if (haversine_km(fixes[w], fixes[last]) > kTravelThresholdKm)
          day.values[static_cast<std::size_t>(window / 6)] += 5.0;
        w = last + 1;
      }
    }
    out.push_back(std::move(day));
    i = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical day-series CSV: source_id,date,v1,...,vN
// ---------------------------------------------------------------------------

inline void write_day_series_csv(std::ostream& os, const std::vector<DaySeries>& days) {
  const std::size_t n = days.empty() ? kIntervalsPerDay : days.front().values.size();
  os << "source_id,date";
  for (std::size_t j = 1; j <= n; ++j) os << ",v" << j;
  os << '\n';
  for (const auto& d : days) {
    if (d.values.size() != n) throw std::length_error("write_day_series_csv: ragged series");
    os << d.source << ',' << d.date;
    for (double v : d.values) os << ',' << text::format_double(v);
    os << '\n';
  }
}

inline std::vector<DaySeries> read_day_series_csv(std::istream& in) {
  std::vector<DaySeries> days;
  std::string line;
  if (!std::getline(in, line)) return days;
  const auto header = text::split(text::trim(line), ',');
  if (header.size() < 3 || header[0] != "source_id" || header[1] != "date")
    throw FormatError("day-series: expected header 'source_id,date,v1,...'", 1);
  const std::size_t n = header.size() - 2;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = text::trim(line);
    if (row.empty()) continue;
    const auto cols = text::split(row, ',');
    if (cols.size() != n + 2) throw FormatError("day-series: wrong column count", line_no);
    DaySeries d{std::string(cols[0]), std::string(cols[1]), RealVec(n), 1.0, false};
    for (std::size_t j = 0; j < n; ++j) {
      const auto v = text::parse_double(cols[j + 2]);
      if (!v || !std::isfinite(*v)) throw FormatError("day-series: bad value", line_no);
      d.values[j] = *v;
    }
    days.push_back(std::move(d));
  }
  return days;
}

/// Distinct source ids in first-appearance order.
inline std::vector<std::string> sources_of(const std::vector<DaySeries>& days) {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& d : days)
    if (seen.insert(d.source).second) ids.push_back(d.source);
  return ids;
}

inline std::vector<DaySeries> filter_source(const std::vector<DaySeries>& days, const std::string& source) {
  std::vector<DaySeries> out;
  for (const auto& d : days)
    if (d.source == source) out.push_back(d);
  return out;
}

// ---------------------------------------------------------------------------
// Samples and folds
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMinUsableDays = 150;

/// Head segment of length d_prime paired with the whole-day total. Throws
/// InsufficientData when the individual has fewer than `min_days` days.
inline SampleSet make_samples(const std::vector<DaySeries>& days, std::size_t d_prime = 28,
                              std::size_t min_days = kMinUsableDays) {
  if (d_prime == 0 || d_prime > kIntervalsPerDay)
    throw std::invalid_argument("make_samples: d_prime must be in [1, 48]");
  if (days.size() < min_days)
    throw InsufficientData("make_samples: " + std::to_string(days.size()) + " usable days, at least " +
                           std::to_string(min_days) + " required");
  SampleSet out;
  out.reserve(days.size());
  for (const auto& d : days) {
    if (d.values.size() != kIntervalsPerDay)
      throw std::length_error("make_samples: day series must have 48 intervals");
    out.push_back({RealVec(d.values.begin(), d.values.begin() + static_cast<std::ptrdiff_t>(d_prime)),
                   sum(d.values), d.source, d.date, -1});
  }
  return out;
}

/// Random equal thirds; the remainder goes to the training fold.
inline Folds split_folds(const SampleSet& samples, std::uint64_t seed) {
  if (samples.size() < 3) throw std::invalid_argument("split_folds: need at least 3 samples");
  std::vector<std::size_t> order(samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SeededRng rng(seed);
  rng.shuffle(order);
  const std::size_t third = samples.size() / 3;
  const std::size_t n_train = samples.size() - 2 * third;
  Folds f;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Sample& s = samples[order[k]];
    if (k < n_train) f.train.push_back(s);
    else if (k < n_train + third) f.val.push_back(s);
    else f.test.push_back(s);
  }
  return f;
}

/// Splits for seeds seed, seed+1, ..., seed+repeats-1.
inline std::vector<Folds> repeat_splits(const SampleSet& samples, std::uint64_t seed, std::size_t repeats = 5) {
  std::vector<Folds> out;
  for (std::size_t r = 0; r < repeats; ++r) out.push_back(split_folds(samples, seed + r));
  return out;
}

// ---------------------------------------------------------------------------
// Optional preprocessing
// ---------------------------------------------------------------------------

inline RealVec shift_series(std::span<const double> x, long long offset) {
  RealVec out(x.size(), 0.0);
  const auto n = static_cast<long long>(x.size());
  for (long long j = 0; j < n; ++j) {
    const long long src = j - offset;
    if (src >= 0 && src < n) out[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(src)];
  }
  return out;
}

/// Denoising applies to every fold; shift augmentation (for each s in
/// [1, shift_window], one right and one left zero-padded shift with the
/// original target) only when `training` is set.
inline SampleSet preprocess(const SampleSet& set, const PreprocessConfig& cfg, bool training) {
  SampleSet out;
  for (const auto& s : set) {
    Sample t = s;
    if (cfg.highpass) {
      const RealVec smooth = moving_average(t.x, 5);
      for (std::size_t j = 0; j < t.x.size(); ++j) t.x[j] -= smooth[j];
    }
    if (cfg.clamp_below > 0.0)
      for (auto& v : t.x)
        if (v < cfg.clamp_below) v = 0.0;
    out.push_back(t);
  }
  if (!training || cfg.shift_window == 0) return out;
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t s = 1; s <= cfg.shift_window; ++s) {
      Sample right = out[i];
      right.x = shift_series(out[i].x, static_cast<long long>(s));
      Sample left = out[i];
      left.x = shift_series(out[i].x, -static_cast<long long>(s));
      out.push_back(std::move(right));
      out.push_back(std::move(left));
    }
  }
  return out;
}

inline Folds preprocess(const Folds& folds, const PreprocessConfig& cfg) {
  return {preprocess(folds.train, cfg, true), preprocess(folds.val, cfg, false), preprocess(folds.test, cfg, false)};
}

}  // namespace tenet
