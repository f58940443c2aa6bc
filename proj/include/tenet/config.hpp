#pragma once

// Run configuration files: one `key = value` per line, `#` starts a comment.
// Every model field has a default; keys left out are reported as notices.
// The grid keys (d_te, n_f, d_f, n3, lambda, learning_rate) accept a
// comma-separated list, which only grid search may use.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "tenet/datasets.hpp"
#include "tenet/errors.hpp"
#include "tenet/harness.hpp"
#include "tenet/model.hpp"
#include "tenet/text.hpp"

namespace tenet {

struct RunConfig {
  TeNetConfig model;
  CandidateSets grid;
  std::string data;
  std::string out;
  std::string source;  // empty: use every source in the data file
  std::size_t repetitions = 5;
  std::size_t min_days = kMinUsableDays;
  std::size_t jobs = 1;
  std::set<std::string> list_keys;  // grid keys given with more than one value
  std::vector<std::string> notices;
};

namespace detail {

inline std::string config_error(std::size_t line, const std::string& msg) {
  return "config line " + std::to_string(line) + ": " + msg;
}

template <class T>
T parse_scalar(std::string_view v, std::size_t line, const std::string& key) {
  if constexpr (std::is_same_v<T, double>) {
    const auto d = text::parse_double(v);
    if (!d || !std::isfinite(*d)) throw ConfigError(config_error(line, key + ": expected a number, got '" + std::string(v) + "'"));
    return *d;
  } else {
    const auto i = text::parse_int<T>(v);
    if (!i) throw ConfigError(config_error(line, key + ": expected a non-negative integer, got '" + std::string(v) + "'"));
    return *i;
  }
}

template <class T>
std::vector<T> parse_list(std::string_view v, std::size_t line, const std::string& key) {
  std::vector<T> out;
  for (auto part : text::split(v, ',')) out.push_back(parse_scalar<T>(text::trim(part), line, key));
  return out;
}

inline bool parse_bool(std::string_view v, std::size_t line, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(config_error(line, key + ": expected true or false, got '" + std::string(v) + "'"));
}

}  // namespace detail

/// Keys accepted in a run configuration, in canonical order.
inline const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys{
      "d_prime",     "d_te",        "n_f",          "d_f",         "n3",          "lambda",
      "learning_rate", "epochs",    "patience",     "seed",        "te_mode",     "te_init",
      "target_scale", "input_scale", "highpass",    "clamp_below", "shift_window", "data",
      "out",         "source",      "repetitions",  "min_days",    "jobs"};
  return keys;
}

/// Writes `rc` in the format parse_run_config reads. Grid keys given as
/// lists are written as lists.
inline void write_run_config(std::ostream& os, const RunConfig& rc) {
  const TeNetConfig& m = rc.model;
  auto list = [&](const char* key, const auto& values, auto scalar) {
    os << key << " = ";
    if (rc.list_keys.count(key) && values.size() > 1) {
      for (std::size_t i = 0; i < values.size(); ++i) os << (i ? ", " : "") << text::format_double(static_cast<double>(values[i]));
    } else {
      os << text::format_double(static_cast<double>(scalar));
    }
    os << '\n';
  };
  os << "d_prime = " << m.d_prime << '\n';
  list("d_te", rc.grid.d_te, m.d_te);
  list("n_f", rc.grid.n_f, m.n_f);
  list("d_f", rc.grid.d_f, m.d_f);
  list("n3", rc.grid.n3, m.n3);
  list("lambda", rc.grid.lambda, m.lambda);
  list("learning_rate", rc.grid.learning_rate, m.learning_rate);
  os << "epochs = " << m.epochs << '\n';
  os << "patience = " << m.patience << '\n';
  os << "seed = " << m.seed << '\n';
  os << "te_mode = " << to_string(m.te_mode) << '\n';
  os << "te_init = " << to_string(m.te_init) << '\n';
  os << "target_scale = " << to_string(m.target_scale) << '\n';
  os << "input_scale = " << to_string(m.input_scale) << '\n';
  os << "highpass = " << (m.preprocess.highpass ? "true" : "false") << '\n';
  os << "clamp_below = " << text::format_double(m.preprocess.clamp_below) << '\n';
  os << "shift_window = " << m.preprocess.shift_window << '\n';
  if (!rc.data.empty()) os << "data = " << rc.data << '\n';
  if (!rc.out.empty()) os << "out = " << rc.out << '\n';
  if (!rc.source.empty()) os << "source = " << rc.source << '\n';
  os << "repetitions = " << rc.repetitions << '\n';
  os << "min_days = " << rc.min_days << '\n';
  os << "jobs = " << rc.jobs << '\n';
}

inline RunConfig parse_run_config(std::istream& in) {
  RunConfig rc;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(detail::config_error(line_no, "expected 'key = value'"));
    const std::string key(text::trim(line.substr(0, eq)));
    const std::string_view value = text::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(detail::config_error(line_no, "missing key"));
    if (value.empty()) throw ConfigError(detail::config_error(line_no, key + ": missing value"));
    const auto& known = run_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(detail::config_error(line_no, "unknown key '" + key + "'"));
    if (!seen.insert(key).second) throw ConfigError(detail::config_error(line_no, "duplicate key '" + key + "'"));

    auto grid_key = [&](auto& target, auto& candidates) {
      using T = typename std::decay_t<decltype(candidates)>::value_type;
      candidates = detail::parse_list<T>(value, line_no, key);
      target = candidates.front();
      if (candidates.size() > 1) rc.list_keys.insert(key);
    };
    auto scalar_only = [&] {
      if (value.find(',') != std::string_view::npos)
        throw ConfigError(detail::config_error(line_no, key + ": list values are only allowed for grid keys"));
    };

    TeNetConfig& m = rc.model;
    if (key == "d_te") grid_key(m.d_te, rc.grid.d_te);
    else if (key == "n_f") grid_key(m.n_f, rc.grid.n_f);
    else if (key == "d_f") grid_key(m.d_f, rc.grid.d_f);
    else if (key == "n3") grid_key(m.n3, rc.grid.n3);
    else if (key == "lambda") grid_key(m.lambda, rc.grid.lambda);
    else if (key == "learning_rate") grid_key(m.learning_rate, rc.grid.learning_rate);
    else {
      scalar_only();
      if (key == "d_prime") m.d_prime = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "epochs") m.epochs = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "patience") m.patience = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "seed") m.seed = detail::parse_scalar<std::uint64_t>(value, line_no, key);
      else if (key == "te_mode") {
        if (value == "trainable") m.te_mode = TeMode::trainable;
        else if (value == "frozen_identity") m.te_mode = TeMode::frozen_identity;
        else throw ConfigError(detail::config_error(line_no, "te_mode: expected trainable or frozen_identity"));
      } else if (key == "te_init") {
        if (value == "neighbor_sum") m.te_init = TeInit::neighbor_sum;
        else if (value == "identity") m.te_init = TeInit::identity;
        else throw ConfigError(detail::config_error(line_no, "te_init: expected neighbor_sum or identity"));
      } else if (key == "target_scale") {
        if (value == "max_abs") m.target_scale = TargetScale::max_abs;
        else if (value == "none") m.target_scale = TargetScale::none;
        else throw ConfigError(detail::config_error(line_no, "target_scale: expected max_abs or none"));
      } else if (key == "input_scale") {
        if (value == "zscore") m.input_scale = InputScale::zscore;
        else if (value == "none") m.input_scale = InputScale::none;
        else throw ConfigError(detail::config_error(line_no, "input_scale: expected zscore or none"));
      } else if (key == "highpass") m.preprocess.highpass = detail::parse_bool(value, line_no, key);
      else if (key == "clamp_below") m.preprocess.clamp_below = detail::parse_scalar<double>(value, line_no, key);
      else if (key == "shift_window") m.preprocess.shift_window = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "data") rc.data = std::string(value);
      else if (key == "out") rc.out = std::string(value);
      else if (key == "source") rc.source = std::string(value);
      else if (key == "repetitions") rc.repetitions = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "min_days") rc.min_days = detail::parse_scalar<std::size_t>(value, line_no, key);
      else if (key == "jobs") rc.jobs = detail::parse_scalar<std::size_t>(value, line_no, key);
    }
  }
  if (seen.size() < run_config_keys().size()) {
    std::ostringstream defaults;
    write_run_config(defaults, RunConfig{});
    std::istringstream lines(defaults.str());
    std::string entry;
    while (std::getline(lines, entry)) {
      const auto eq = entry.find(" = ");
      const std::string key = entry.substr(0, eq);
      if (!seen.count(key))
        rc.notices.push_back("config: '" + key + "' not set, using default " + entry.substr(eq + 3));
    }
  }
  try {
    rc.model.validate();
    for (const auto& c : rc.grid.expand(rc.model)) c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (rc.repetitions == 0) throw ConfigError("config: repetitions must be positive");
  if (rc.jobs == 0) throw ConfigError("config: jobs must be positive");
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  return parse_run_config(in);
}

}  // namespace tenet
