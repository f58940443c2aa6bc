#pragma once

// Cross-validation, grid search and report writing. Test-fold targets sit
// behind GuardedFold and are only released for final scoring.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "tenet/datasets.hpp"
#include "tenet/metrics.hpp"
#include "tenet/model.hpp"
#include "tenet/sample.hpp"
#include "tenet/text.hpp"

namespace tenet {

/// A held-out fold. Every release() is counted and reported to an optional
/// observer so tests can audit when targets were read.
class GuardedFold {
 public:
  GuardedFold() = default;
  explicit GuardedFold(SampleSet samples) : samples_(std::move(samples)) {}

  const SampleSet& release() const {
    ++releases_;
    if (on_release_) on_release_();
    return samples_;
  }
  std::size_t releases() const noexcept { return releases_; }
  std::size_t size() const noexcept { return samples_.size(); }
  void set_observer(std::function<void()> f) { on_release_ = std::move(f); }

 private:
  SampleSet samples_;
  mutable std::size_t releases_ = 0;
  std::function<void()> on_release_;
};

struct Split {
  SampleSet train;
  SampleSet val;
  GuardedFold test;
};

inline Split guard(Folds f) { return {std::move(f.train), std::move(f.val), GuardedFold(std::move(f.test))}; }

inline std::vector<Split> make_splits(const SampleSet& samples, std::uint64_t seed, std::size_t repeats = 5) {
  std::vector<Split> out;
  for (auto& f : repeat_splits(samples, seed, repeats)) out.push_back(guard(std::move(f)));
  return out;
}

struct EvalReport {
  std::string dataset;
  TeNetConfig config;
  std::vector<MetricSummary> repetitions;
  MetricSummary mean;
};

inline MetricSummary average(const std::vector<MetricSummary>& runs) {
  MetricSummary m;
  if (runs.empty()) return m;
  for (const auto& r : runs) {
    m.hr20 += r.hr20;
    m.hr30 += r.hr30;
    m.mre += r.mre;
    m.mse += r.mse;
    m.n += r.n;
    m.excluded += r.excluded;
  }
  const double k = static_cast<double>(runs.size());
  m.hr20 /= k;
  m.hr30 /= k;
  m.mre /= k;
  m.mse /= k;
  m.n /= runs.size();
  m.excluded /= runs.size();
  return m;
}

/// Outcome of training one config on one split, before any test access.
struct FitResult {
  TeNetModel model;
  TrainTrace trace;
  double val_mre = 0.0;
  double val_hr20 = 0.0;
};

/// Seed used for repetition `rep` of candidate `index`; independent of
/// te_mode so TeNet and its frozen-embedding ablation share initial draws.
inline std::uint64_t run_seed(std::uint64_t base, std::size_t index, std::size_t rep) {
  return derive_seed(derive_seed(base, index), rep);
}

inline FitResult fit_split(const TeNetConfig& config, const Split& split) {
  const SampleSet train = preprocess(split.train, config.preprocess, true);
  const SampleSet val = preprocess(split.val, config.preprocess, false);
  FitResult r{TeNetModel(config), {}, 0.0, 0.0};
  r.trace = sgd_train(r.model, train, val);
  const RealVec preds = r.model.predict(val);
  const RealVec ys = targets_of(val);
  r.val_mre = validation_score(r.model, val);
  r.val_hr20 = count_relative_targets(ys) ? hit_rate(preds, ys, 0.2) : 0.0;
  return r;
}

inline MetricSummary score_test(const TeNetModel& model, const Split& split, const PreprocessConfig& pre) {
  const SampleSet test = preprocess(split.test.release(), pre, false);
  return summarize(model.predict(test), targets_of(test));
}

/// Trains on each split's training fold, early-stops on its validation fold
/// and scores its test fold; metrics are averaged over the splits.
/// `models` and `traces`, when given, receive one entry per split.
inline EvalReport cross_validate(const std::vector<Split>& splits, const TeNetConfig& config,
                                 const std::string& dataset = "dataset", std::vector<TeNetModel>* models = nullptr,
                                 std::vector<TrainTrace>* traces = nullptr, std::size_t candidate_index = 0) {
  if (splits.empty()) throw std::invalid_argument("cross_validate: no splits");
  EvalReport report{dataset, config, {}, {}};
  for (std::size_t r = 0; r < splits.size(); ++r) {
    TeNetConfig cfg = config;
    cfg.seed = run_seed(config.seed, candidate_index, r);
    FitResult fit = fit_split(cfg, splits[r]);
    report.repetitions.push_back(score_test(fit.model, splits[r], cfg.preprocess));
    if (models) models->push_back(std::move(fit.model));
    if (traces) traces->push_back(std::move(fit.trace));
  }
  report.mean = average(report.repetitions);
  return report;
}

inline EvalReport cross_validate(const SampleSet& samples, const TeNetConfig& config, std::size_t repetitions = 5,
                                 const std::string& dataset = "dataset") {
  return cross_validate(make_splits(samples, config.seed, repetitions), config, dataset);
}

/// The same pipeline with the embedding fixed to the identity map.
inline EvalReport ablation_cnn(const std::vector<Split>& splits, TeNetConfig config,
                               const std::string& dataset = "dataset") {
  config.te_mode = TeMode::frozen_identity;
  return cross_validate(splits, config, dataset);
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

/// Hyperparameter candidate sets; the defaults form the 288-config grid.
struct CandidateSets {
  std::vector<std::size_t> d_te{1, 2};
  std::vector<std::size_t> n_f{20, 30, 40, 60};
  std::vector<std::size_t> d_f{3, 5, 7};
  std::vector<std::size_t> n3{12, 16};
  std::vector<double> lambda{0.1, 0.01, 0.001};
  std::vector<double> learning_rate{0.01, 0.02};

  std::size_t size() const {
    return d_te.size() * n_f.size() * d_f.size() * n3.size() * lambda.size() * learning_rate.size();
  }

  std::vector<TeNetConfig> expand(const TeNetConfig& base) const {
    std::vector<TeNetConfig> out;
    for (auto te : d_te)
      for (auto nf : n_f)
        for (auto df : d_f)
          for (auto h : n3)
            for (auto lam : lambda)
              for (auto lr : learning_rate) {
                TeNetConfig c = base;
                c.d_te = te;
                c.n_f = nf;
                c.d_f = df;
                c.n3 = h;
                c.lambda = lam;
                c.learning_rate = lr;
                out.push_back(c);
              }
    return out;
  }
};

inline auto config_key(const TeNetConfig& c) {
  return std::make_tuple(c.d_te, c.n_f, c.d_f, c.n3, c.lambda, c.learning_rate);
}

struct CandidateScore {
  TeNetConfig config;
  double val_mre = 0.0;   // mean over splits
  double val_hr20 = 0.0;  // mean over splits
};

/// Lowest validation MRE; ties go to higher validation HR@20, then to the
/// lexicographically smallest config.
inline std::size_t select_best(const std::vector<CandidateScore>& scores) {
  if (scores.empty()) throw std::invalid_argument("select_best: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    const auto& a = scores[i];
    const auto& b = scores[best];
    if (a.val_mre < b.val_mre ||
        (a.val_mre == b.val_mre &&
         (a.val_hr20 > b.val_hr20 || (a.val_hr20 == b.val_hr20 && config_key(a.config) < config_key(b.config)))))
      best = i;
  }
  return best;
}

struct GridSearchResult {
  TeNetConfig best;
  std::size_t best_index = 0;
  std::vector<CandidateScore> candidates;
  EvalReport report;
  std::vector<TeNetModel> models;  // best config, one per split
  std::vector<TrainTrace> traces;
};

struct GridSearchOptions {
  std::size_t jobs = 1;
  std::string dataset = "dataset";
  /// Called after each candidate finishes (from worker threads when jobs > 1).
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Exhaustive search. Each candidate is trained on every split's training
/// fold and scored on the validation folds; the winner (select_best) is the
/// only config scored on the test folds, after every candidate has finished.
inline GridSearchResult grid_search(const CandidateSets& sets, const TeNetConfig& base,
                                    const std::vector<Split>& splits, const GridSearchOptions& opt = {}) {
  if (sets.size() == 0) throw std::invalid_argument("grid_search: empty candidate set");
  if (splits.empty()) throw std::invalid_argument("grid_search: no data splits");
  const std::vector<TeNetConfig> configs = sets.expand(base);
  std::vector<CandidateScore> scores(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0}, done{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        CandidateScore s{configs[i], 0.0, 0.0};
        for (std::size_t r = 0; r < splits.size(); ++r) {
          TeNetConfig cfg = configs[i];
          cfg.seed = run_seed(base.seed, i, r);
          const FitResult fit = fit_split(cfg, splits[r]);
          s.val_mre += fit.val_mre;
          s.val_hr20 += fit.val_hr20;
        }
        s.val_mre /= static_cast<double>(splits.size());
        s.val_hr20 /= static_cast<double>(splits.size());
        scores[i] = s;
      } catch (...) {
        errors[i] = std::current_exception();
      }
      const std::size_t d = ++done;
      if (opt.progress) opt.progress(d, configs.size());
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(opt.jobs, configs.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::size_t best = select_best(scores);

  GridSearchResult out;
  out.best = configs[best];
  out.best_index = best;
  out.candidates = std::move(scores);
  // Retraining with the same derived seeds reproduces the selected models.
  TeNetConfig winner = configs[best];
  winner.seed = base.seed;
  out.report = cross_validate(splits, winner, opt.dataset, &out.models, &out.traces, best);
  out.report.config = configs[best];
  return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline std::string describe(const TeNetConfig& c) {
  return "d_prime=" + std::to_string(c.d_prime) + " d_te=" + std::to_string(c.d_te) +
         " n_f=" + std::to_string(c.n_f) + " d_f=" + std::to_string(c.d_f) + " n3=" + std::to_string(c.n3) +
         " lambda=" + text::format_double(c.lambda) + " learning_rate=" + text::format_double(c.learning_rate) +
         " epochs=" + std::to_string(c.epochs) + " patience=" + std::to_string(c.patience) +
         " seed=" + std::to_string(c.seed) + " te_mode=" + to_string(c.te_mode) + " te_init=" + to_string(c.te_init) +
         " target_scale=" + to_string(c.target_scale) + " input_scale=" + to_string(c.input_scale) +
         " highpass=" + (c.preprocess.highpass ? "true" : "false") +
         " clamp_below=" + text::format_double(c.preprocess.clamp_below) +
         " shift_window=" + std::to_string(c.preprocess.shift_window);
}

/// CSV with one row per repetition (`<dataset>/rep<k>`) and a final mean row
/// (`<dataset>`); the first line is a `#` comment with the config.
inline void write_report_csv(std::ostream& os, const std::vector<EvalReport>& reports) {
  for (const auto& r : reports) os << "# " << r.dataset << ": " << describe(r.config) << '\n';
  os << "dataset,n,HR20,HR30,MRE,MSE\n";
  auto row = [&](const std::string& name, const MetricSummary& m) {
    os << name << ',' << m.n << ',' << text::format_fixed(m.hr20, 2) << ',' << text::format_fixed(m.hr30, 2) << ','
       << text::format_fixed(m.mre, 4) << ',' << text::format_fixed(m.mse, 4) << '\n';
  };
  for (const auto& r : reports) {
    for (std::size_t k = 0; k < r.repetitions.size(); ++k)
      row(r.dataset + "/rep" + std::to_string(k + 1), r.repetitions[k]);
    row(r.dataset, r.mean);
  }
}

/// Aligned text table of the mean rows.
inline void write_report_table(std::ostream& os, const std::vector<EvalReport>& reports) {
  std::size_t width = 7;
  for (const auto& r : reports) width = std::max(width, r.dataset.size());
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.insert(0, w - s.size(), ' ');
    return s;
  };
  os << pad("dataset", width) << pad("n", 8) << pad("HR20", 9) << pad("HR30", 9) << pad("MRE", 10) << pad("MSE", 12)
     << '\n';
  for (const auto& r : reports)
    os << pad(r.dataset, width) << pad(std::to_string(r.mean.n), 8) << pad(text::format_fixed(r.mean.hr20, 1), 9)
       << pad(text::format_fixed(r.mean.hr30, 1), 9) << pad(text::format_fixed(r.mean.mre, 3), 10)
       << pad(text::format_fixed(r.mean.mse, 3), 12) << '\n';
}

}  // namespace tenet
