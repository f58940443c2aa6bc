#pragma once

// Command-line front end. Exit codes: 0 ok, 2 input, 3 config, 4 numeric.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tenet/ablation.hpp"
#include "tenet/casestudy.hpp"
#include "tenet/config.hpp"
#include "tenet/datasets.hpp"
#include "tenet/errors.hpp"
#include "tenet/harness.hpp"
#include "tenet/model.hpp"
#include "tenet/synthetic.hpp"
#include "tenet/text.hpp"

namespace tenet::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kConfigError = 3, kNumericError = 4 };

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot write '" + path.string() + "'");
  return os;
}

/// File-name-safe form of a source id.
inline std::string safe_name(const std::string& s) {
  std::string out = s.empty() ? "default" : s;
  for (auto& c : out)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return out;
}

/// Seed override from TENET_SEED, if set.
inline void apply_seed_override(RunConfig& rc, std::ostream& err) {
  const char* env = std::getenv("TENET_SEED");
  if (!env) return;
  const auto seed = text::parse_int<std::uint64_t>(text::trim(env));
  if (!seed) throw ConfigError(std::string("TENET_SEED: expected a non-negative integer, got '") + env + "'");
  rc.model.seed = *seed;
  err << "seed " << *seed << " from TENET_SEED\n";
}

inline RunConfig load_config(const std::string& path, const std::string& data, const std::string& out,
                             std::ostream& err) {
  RunConfig rc = load_run_config(path);
  for (const auto& n : rc.notices) err << n << '\n';
  if (!data.empty()) rc.data = data;
  if (!out.empty()) rc.out = out;
  if (rc.data.empty()) throw ConfigError("no data path (set 'data' or pass --data)");
  if (rc.out.empty()) throw ConfigError("no output directory (set 'out' or pass --out)");
  apply_seed_override(rc, err);
  return rc;
}

/// Usable sample sets per source; sources with too few days are skipped.
inline std::vector<std::pair<std::string, SampleSet>> load_datasets(const RunConfig& rc, std::ostream& err) {
  auto in = open_input(rc.data);
  const auto days = read_day_series_csv(in);
  std::vector<std::string> sources = rc.source.empty() ? sources_of(days) : std::vector<std::string>{rc.source};
  std::vector<std::pair<std::string, SampleSet>> out;
  for (const auto& src : sources) {
    try {
      out.emplace_back(src, make_samples(filter_source(days, src), rc.model.d_prime, rc.min_days));
    } catch (const InsufficientData& e) {
      err << "skipping source '" << src << "': " << e.what() << '\n';
    }
  }
  if (out.empty()) throw InsufficientData("no source in '" + rc.data + "' has enough usable days");
  return out;
}

inline void write_config_copy(const std::filesystem::path& dir, const RunConfig& rc) {
  auto os = open_output(dir / "config.txt");
  write_run_config(os, rc);
}

inline void write_models(const std::filesystem::path& dir, const std::string& source,
                         const std::vector<TeNetModel>& models, const std::vector<TrainTrace>& traces) {
  const std::string stem = safe_name(source);
  for (std::size_t k = 0; k < models.size(); ++k) {
    const std::string tag = stem + ".rep" + std::to_string(k + 1);
    {
      auto os = open_output(dir / "models" / (tag + ".model"));
      save_model(os, models[k]);
    }
    {
      auto os = open_output(dir / "snippets" / (tag + ".csv"));
      export_snippets(os, models[k]);
    }
    auto os = open_output(dir / "traces" / (tag + ".csv"));
    write_trace_csv(os, traces[k]);
  }
}

inline void write_reports(const std::filesystem::path& dir, const std::vector<EvalReport>& reports, std::ostream& out) {
  auto os = open_output(dir / "report.csv");
  write_report_csv(os, reports);
  write_report_table(out, reports);
}

inline RealVec read_series(const std::string& path) {
  auto in = open_input(path);
  RealVec v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line)
      if (c == ',' || c == ';') c = ' ';
    for (auto tok : text::split_ws(line)) {
      const auto d = text::parse_double(tok);
      if (!d || !std::isfinite(*d)) throw FormatError("series: bad value '" + std::string(tok) + "'", line_no);
      v.push_back(*d);
    }
  }
  if (v.empty()) throw FormatError("series: '" + path + "' holds no values");
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string format;
  std::string in;
  std::string out;
  std::string mode = "distance";
  std::optional<double> min_completeness;
};

inline int cmd_ingest(const IngestArgs& a, Streams io) {
  auto in = detail::open_input(a.in);
  std::vector<DaySeries> days;
  std::size_t dropped = 0;
  if (a.format == "traces") {
    const auto fixes = parse_traces(in);
    io.out << "rows: " << fixes.size() << '\n';
    std::vector<std::string> users;
    for (const auto& f : fixes)
      if (std::find(users.begin(), users.end(), f.user) == users.end()) users.push_back(f.user);
    const MobilityMode mode = a.mode == "time" ? MobilityMode::time : MobilityMode::distance;
    const double min_c = a.min_completeness.value_or(0.0);
    for (const auto& u : users) {
      std::vector<PositionFix> mine;
      for (const auto& f : fixes)
        if (f.user == u) mine.push_back(f);
      bool any_movement = false;
      for (auto& d : mobility_day_series(std::move(mine), mode)) {
        if (d.flagged) io.err << "warning: " << u << " " << d.date << ": fewer than two fixes, day is zero\n";
        if (d.completeness < min_c) {
          ++dropped;
          continue;
        }
        any_movement = any_movement || sum(d.values) > 0.0;
        days.push_back(std::move(d));
      }
      if (!any_movement) io.err << "warning: " << u << ": every day is zero (no movement recorded)\n";
    }
  } else {
    MeterParseResult parsed;
    AggregateOptions opt;
    if (a.format == "hpc-fr") {
      parsed = parse_hpc_fr(in);
      opt.kind = ReadingKind::minute_power;
    } else {
      parsed = parse_meter_csv(in);
      opt.kind = ReadingKind::interval_energy;
    }
    if (a.min_completeness) opt.min_completeness = *a.min_completeness;
    for (const auto& w : parsed.warnings) io.err << "warning: " << w << '\n';
    io.out << "rows: " << parsed.rows << '\n';
    io.out << "missing: " << parsed.missing << '\n';
    io.out << "rejected: " << parsed.rejected << '\n';
    io.out << "duplicates: " << parsed.duplicates << '\n';
    auto agg = aggregate_days(parsed.records, opt);
    days = std::move(agg.days);
    dropped = agg.dropped;
  }
  io.out << "days kept: " << days.size() << '\n';
  io.out << "days dropped: " << dropped << '\n';
  auto os = detail::open_output(a.out);
  write_day_series_csv(os, days);
  return kOk;
}

struct RunArgs {
  std::string config;
  std::string data;
  std::string out;
  bool ablation_cnn = false;
  bool with_cnn = false;  // eval only: add frozen-embedding rows
  std::size_t jobs = 0;   // gridsearch only: 0 keeps the config value
};

/// Cross-validated training; writes models, traces, snippets and the report.
inline int cmd_train(const RunArgs& a, Streams io, bool keep_models) {
  RunConfig rc = detail::load_config(a.config, a.data, a.out, io.err);
  if (!rc.list_keys.empty()) throw ConfigError("list values are only allowed for gridsearch");
  if (a.ablation_cnn) rc.model.te_mode = TeMode::frozen_identity;
  const std::filesystem::path dir = rc.out;
  std::vector<EvalReport> reports;
  for (const auto& [source, samples] : detail::load_datasets(rc, io.err)) {
    const auto splits = make_splits(samples, rc.model.seed, rc.repetitions);
    std::vector<TeNetModel> models;
    std::vector<TrainTrace> traces;
    reports.push_back(cross_validate(splits, rc.model, source, &models, &traces));
    if (keep_models) detail::write_models(dir, source, models, traces);
    if (a.with_cnn) reports.push_back(ablation_cnn(splits, rc.model, source + "/cnn"));
  }
  detail::write_config_copy(dir, rc);
  detail::write_reports(dir, reports, io.out);
  return kOk;
}

inline int cmd_gridsearch(const RunArgs& a, Streams io) {
  RunConfig rc = detail::load_config(a.config, a.data, a.out, io.err);
  if (a.ablation_cnn) rc.model.te_mode = TeMode::frozen_identity;
  if (a.jobs) rc.jobs = a.jobs;
  const std::filesystem::path dir = rc.out;
  std::vector<EvalReport> reports;
  for (const auto& [source, samples] : detail::load_datasets(rc, io.err)) {
    const auto splits = make_splits(samples, rc.model.seed, rc.repetitions);
    GridSearchOptions opt;
    opt.jobs = rc.jobs;
    opt.dataset = source;
    opt.progress = [&, src = source](std::size_t done, std::size_t total) {
      if (done == total || done % 16 == 0) io.err << src << ": " << done << "/" << total << " candidates\n";
    };
    GridSearchResult g = grid_search(rc.grid, rc.model, splits, opt);
    {
      auto os = detail::open_output(dir / ("candidates_" + detail::safe_name(source) + ".csv"));
      os << "d_te,n_f,d_f,n3,lambda,learning_rate,val_MRE,val_HR20\n";
      for (const auto& c : g.candidates)
        os << c.config.d_te << ',' << c.config.n_f << ',' << c.config.d_f << ',' << c.config.n3 << ','
           << text::format_double(c.config.lambda) << ',' << text::format_double(c.config.learning_rate) << ','
           << text::format_fixed(c.val_mre, 6) << ',' << text::format_fixed(c.val_hr20, 2) << '\n';
    }
    {
      RunConfig best = rc;
      best.model = g.best;
      best.grid = CandidateSets{{g.best.d_te}, {g.best.n_f}, {g.best.d_f}, {g.best.n3}, {g.best.lambda}, {g.best.learning_rate}};
      auto os = detail::open_output(dir / ("best_" + detail::safe_name(source) + ".txt"));
      write_run_config(os, best);
    }
    detail::write_models(dir, source, g.models, g.traces);
    io.out << source << ": best " << describe(g.best) << '\n';
    reports.push_back(std::move(g.report));
  }
  detail::write_config_copy(dir, rc);
  detail::write_reports(dir, reports, io.out);
  return kOk;
}

inline int cmd_gradcheck(double tolerance, std::size_t seeds, Streams io) {
  GradCheckOptions opt;
  opt.tolerance = tolerance;
  opt.seeds = seeds;
  const GradCheckReport r = grad_check(gradcheck_config(), opt);
  for (const auto& g : r.groups) {
    std::string name = g.name;
    name.resize(std::max<std::size_t>(name.size(), 16), ' ');
    io.out << name << ' ' << text::format_double(g.max_rel_error) << '\n';
  }
  io.out << "max relative error: " << text::format_double(r.max_rel_error) << " (tolerance "
         << text::format_double(r.tolerance) << ", " << r.seeds << " seeds)\n";
  io.out << (r.pass ? "PASS" : "FAIL") << '\n';
  return r.pass ? kOk : kNumericError;
}

inline int cmd_casestudy(const std::string& v_path, const std::string& u_path, const std::string& csv, Streams io) {
  const RealVec v = v_path.empty() ? kCaseStudyV : detail::read_series(v_path);
  const RealVec u = u_path.empty() ? kCaseStudyU : detail::read_series(u_path);
  if (v.size() != u.size()) throw FormatError("casestudy: v and u differ in length");
  const CaseStudyTable t = table2_report(v, u);
  write_casestudy_text(io.out, t);
  if (!csv.empty()) {
    auto os = detail::open_output(csv);
    write_casestudy_csv(os, t);
  }
  return kOk;
}

struct SynthArgs {
  std::string exemplars;
  bool cluster = false;
  std::string data;  // days to cluster; generated when empty
  std::size_t generate = 300;
  std::uint64_t seed = 1;
  std::size_t ops = 2;
  std::size_t segment = 4;
  std::size_t max_shift = 2;
  std::size_t per_exemplar = 30;
  std::size_t d_prime = 28;
  std::size_t top = 10;
  std::string out;
  bool ablation = false;
  bool sweep = false;
  std::size_t runs = 5;
  std::string config;
};

inline int cmd_synth(const SynthArgs& a, Streams io) {
  if (a.exemplars.empty() == !a.cluster) throw ConfigError("synth: give exactly one of --exemplars or --cluster");
  DistortionSpec spec;
  spec.ops = a.ops;
  spec.segment = a.segment;
  spec.max_shift = a.max_shift;
  spec.seed = a.seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::filesystem::path dir = a.out;
  std::vector<DaySeries> exemplars;
  std::string origin;
  if (a.cluster) {
    std::vector<DaySeries> days;
    if (a.data.empty()) {
      days = generate_household_days(a.generate, a.seed);
      origin = "generated:" + std::to_string(a.generate) + ":seed=" + std::to_string(a.seed);
    } else {
      auto in = detail::open_input(a.data);
      days = read_day_series_csv(in);
      origin = a.data;
    }
    APParams ap;
    ap.max_exemplars = a.top;
    const ExemplarSelection sel = select_exemplars(days, ap);
    io.out << "points: " << days.size() << '\n';
    io.out << "ap iterations: " << sel.clustering.iterations << (sel.clustering.converged ? " (converged)" : " (not converged)") << '\n';
    io.out << "exemplars: " << sel.exemplars.size() << '\n';
    for (std::size_t k = 0; k < sel.exemplars.size(); ++k)
      io.out << "  " << sel.exemplars[k].source << ' ' << sel.exemplars[k].date << " cluster size "
             << sel.clustering.cluster_size[k] << " total " << text::format_fixed(sum(sel.exemplars[k].values), 3) << '\n';
    exemplars = sel.exemplars;
  } else {
    auto in = detail::open_input(a.exemplars);
    exemplars = read_day_series_csv(in);
    origin = a.exemplars;
    io.out << "exemplars: " << exemplars.size() << '\n';
  }
  {
    auto os = detail::open_output(dir / "exemplars.csv");
    write_day_series_csv(os, exemplars);
  }
  const auto values = values_of(exemplars);
  {
    auto os = detail::open_output(dir / "samples.csv");
    write_samples_csv(os, gen_ablation_set(values, spec, a.per_exemplar, a.d_prime));
  }
  {
    std::vector<std::string> ids;
    for (const auto& e : exemplars) ids.push_back(e.source + "/" + e.date);
    auto os = detail::open_output(dir / "manifest.txt");
    write_synth_manifest(os, spec, a.per_exemplar, a.d_prime, origin, ids);
  }
  if (a.ablation || a.sweep) {
    TeNetConfig cfg;
    if (!a.config.empty()) {
      RunConfig rc = load_run_config(a.config);
      for (const auto& n : rc.notices) io.err << n << '\n';
      if (!rc.list_keys.empty()) throw ConfigError("list values are only allowed for gridsearch");
      detail::apply_seed_override(rc, io.err);
      cfg = rc.model;
    }
    cfg.d_prime = a.d_prime;
    cfg.validate();
    if (a.ablation) {
      const AblationResult r = synthetic_ablation(values, cfg, spec, a.runs, a.per_exemplar);
      std::vector<EvalReport> all = r.tenet;
      all.insert(all.end(), r.cnn.begin(), r.cnn.end());
      auto os = detail::open_output(dir / "ablation_report.csv");
      write_report_csv(os, all);
      auto summary = detail::open_output(dir / "ablation.csv");
      write_ablation_summary(summary, r);
      write_ablation_summary(io.out, r);
    }
    if (a.sweep) {
      const auto sw = d_sweep(values, cfg, spec, {8, 16, 24, 28, 36, 44}, a.runs, a.per_exemplar);
      auto os = detail::open_output(dir / "sweep.csv");
      write_sweep_csv(os, sw);
      write_sweep_csv(io.out, sw);
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, Streams io) {
  CLI::App app{"TeNet: temporal-embedding convolutional regression for periodical time series", "tenet"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Convert raw readings or position traces to day-series CSV");
  c_ingest->add_option("--format", ingest.format, "Input format")
      ->required()
      ->check(CLI::IsMember({"hpc-fr", "meter-csv", "traces"}));
  c_ingest->add_option("--in", ingest.in, "Input file")->required();
  c_ingest->add_option("--out", ingest.out, "Output day-series CSV")->required();
  c_ingest->add_option("--mode", ingest.mode, "Traces: accumulate travel distance or travel time")
      ->check(CLI::IsMember({"distance", "time"}))
      ->capture_default_str();
  c_ingest->add_option("--min-completeness", ingest.min_completeness,
                       "Drop days with a smaller fraction of covered intervals (default 0.95 for meters, 0 for traces)")
      ->check(CLI::Range(0.0, 1.0));

  RunArgs train, eval, grid;
  auto add_run = [](CLI::App* c, RunArgs& r) {
    c->add_option("--config", r.config, "Run configuration file")->required();
    c->add_option("--data", r.data, "Day-series CSV (overrides 'data')");
    c->add_option("--out", r.out, "Output directory (overrides 'out')");
    c->add_flag("--ablation-cnn", r.ablation_cnn, "Freeze the embedding to the identity (plain CNN)");
  };
  auto* c_train = app.add_subcommand("train", "Cross-validated training; writes models, traces, snippets, report");
  add_run(c_train, train);
  auto* c_eval = app.add_subcommand("eval", "Cross-validated evaluation; writes the report only");
  add_run(c_eval, eval);
  c_eval->add_flag("--with-cnn", eval.with_cnn, "Also report the frozen-embedding CNN on the same splits");
  auto* c_grid = app.add_subcommand("gridsearch", "Hyperparameter search on validation folds, then test scoring");
  add_run(c_grid, grid);
  c_grid->add_option("--jobs", grid.jobs, "Candidates trained in parallel (overrides 'jobs')")->check(CLI::PositiveNumber);

  double tolerance = 1e-4;
  std::size_t gc_seeds = 20;
  auto* c_gc = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  c_gc->add_option("--tolerance", tolerance, "Maximum relative error")->capture_default_str();
  c_gc->add_option("--seeds", gc_seeds, "Random instances")->capture_default_str();

  std::string cs_v, cs_u, cs_csv;
  auto* c_cs = app.add_subcommand("casestudy", "Temporal embedding versus moving average on two series");
  c_cs->add_option("--v", cs_v, "Dominant series file (numbers separated by commas or whitespace)");
  c_cs->add_option("--u", cs_u, "Distorted series file");
  c_cs->add_option("--csv", cs_csv, "Also write the table as CSV");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Exemplar selection and distorted synthetic samples");
  c_synth->add_option("--exemplars", synth.exemplars, "Exemplar day-series CSV");
  c_synth->add_flag("--cluster", synth.cluster, "Select exemplars by affinity propagation");
  c_synth->add_option("--data", synth.data, "Day-series CSV to cluster (default: generated household days)");
  c_synth->add_option("--generate", synth.generate, "Generated days when --data is absent")->capture_default_str();
  c_synth->add_option("--top", synth.top, "Exemplars kept (largest clusters)")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Generation and distortion seed")->capture_default_str();
  c_synth->add_option("--ops", synth.ops, "Distortion operations per copy")->capture_default_str();
  c_synth->add_option("--segment", synth.segment, "Swap segment length")->capture_default_str();
  c_synth->add_option("--max-shift", synth.max_shift, "Largest shift")->capture_default_str();
  c_synth->add_option("--per-exemplar", synth.per_exemplar, "Distorted copies per exemplar")->capture_default_str();
  c_synth->add_option("--d-prime", synth.d_prime, "Head length")->capture_default_str();
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_flag("--ablation", synth.ablation, "Train TeNet and the frozen-embedding CNN on the set");
  c_synth->add_flag("--sweep", synth.sweep, "TeNet error for head lengths 8..44");
  c_synth->add_option("--runs", synth.runs, "Distortion seeds for --ablation/--sweep")->capture_default_str();
  c_synth->add_option("--config", synth.config, "Run configuration for --ablation/--sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, er;
    const int code = app.exit(e, o, er);
    io.out << o.str();
    io.err << er.str();
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*c_ingest) return cmd_ingest(ingest, io);
    if (*c_train) return cmd_train(train, io, true);
    if (*c_eval) return cmd_train(eval, io, false);
    if (*c_grid) return cmd_gridsearch(grid, io);
    if (*c_gc) return cmd_gradcheck(tolerance, gc_seeds, io);
    if (*c_cs) return cmd_casestudy(cs_v, cs_u, cs_csv, io);
    if (*c_synth) return cmd_synth(synth, io);
  } catch (const ConfigError& e) {
    io.err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericError& e) {
    io.err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const FormatError& e) {
    io.err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const InsufficientData& e) {
    io.err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::filesystem::filesystem_error& e) {
    io.err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const UndefinedMetric& e) {
    io.err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::invalid_argument& e) {
    io.err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::logic_error& e) {
    io.err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kOk;
}

}  // namespace tenet::cli
