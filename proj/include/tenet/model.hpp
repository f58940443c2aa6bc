#pragma once

// TeNet: temporal embedding -> conv/max-pool/tanh -> sigmoid -> l1 least
// squares. Training is plain per-sample SGD with early stopping on
// validation MRE.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "tenet/errors.hpp"
#include "tenet/layers.hpp"
#include "tenet/metrics.hpp"
#include "tenet/numerics.hpp"
#include "tenet/sample.hpp"
#include "tenet/text.hpp"

namespace tenet {

enum class TeMode { trainable, frozen_identity };
enum class TeInit { neighbor_sum, identity };
enum class TargetScale { max_abs, none };
enum class InputScale { zscore, none };

inline const char* to_string(TeMode m) { return m == TeMode::trainable ? "trainable" : "frozen_identity"; }
inline const char* to_string(TeInit m) { return m == TeInit::neighbor_sum ? "neighbor_sum" : "identity"; }
inline const char* to_string(TargetScale m) { return m == TargetScale::max_abs ? "max_abs" : "none"; }
inline const char* to_string(InputScale m) { return m == InputScale::zscore ? "zscore" : "none"; }

struct PreprocessConfig {
  bool highpass = false;       // subtract a width-5 centered moving average
  double clamp_below = 0.0;    // values below this are set to 0; 0 disables
  std::size_t shift_window = 0;  // zero-padded shift augmentation, training fold only
};

struct TeNetConfig {
  std::size_t d_prime = 28;
  std::size_t d_te = 1;
  std::size_t n_f = 20;
  std::size_t d_f = 5;
  std::size_t n3 = 12;
  double lambda = 0.01;
  double learning_rate = 0.01;
  std::size_t epochs = 200;
  std::size_t patience = 20;
  std::uint64_t seed = 1;
  TeMode te_mode = TeMode::trainable;
  TeInit te_init = TeInit::neighbor_sum;
  TargetScale target_scale = TargetScale::max_abs;
  InputScale input_scale = InputScale::zscore;
  PreprocessConfig preprocess;

  std::size_t pooled() const { return pooled_length(d_prime, d_f); }

  void validate() const {
    if (d_prime == 0) throw ConfigError("d_prime must be positive");
    if (d_f == 0 || d_f > d_prime) throw ConfigError("d_f must be in [1, d_prime]");
    if (n_f > 0 && pooled() == 0) throw ConfigError("d_prime - d_f + 1 must be at least the pool width");
    if (n3 == 0) throw ConfigError("n3 must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be >= 0");
    if (!(learning_rate >= 0.0)) throw ConfigError("learning_rate must be >= 0");
  }
};

/// Trainable parameter count, masked temporal-embedding entries included.
inline std::size_t param_count(const TeNetConfig& c) {
  const std::size_t te = (2 * c.d_te + 1) * c.d_prime + c.d_prime;
  const std::size_t conv = c.n_f * c.d_f + c.n_f;
  const std::size_t sig = c.n_f * c.pooled() * c.n3 + c.n3;
  const std::size_t out = c.n3 + 1;
  return te + conv + sig + out;
}

struct TeNetGradients {
  TemporalEmbeddingGrad te;  // empty when the embedding is frozen
  ConvPoolGrad conv;
  SigmoidGrad sigmoid;
  OutputGrad output;
};

/// Intermediate values of one forward pass in standardized units.
struct TeNetActivations {
  RealVec input;
  RealVec embedded;
  ConvPoolForward conv;
  RealVec hidden;
  double prediction = 0.0;
};

class TeNetModel {
 public:
  TeNetModel() = default;

  /// Fresh model; random draws come from a generator seeded with config.seed.
  explicit TeNetModel(const TeNetConfig& config) : config_(config) {
    config_.validate();
    SeededRng rng(derive_seed(config_.seed, 0x1417));
    const bool identity = config_.te_mode == TeMode::frozen_identity || config_.te_init == TeInit::identity;
    te_ = identity ? TemporalEmbeddingLayer::identity(config_.d_prime, config_.d_te)
                   : TemporalEmbeddingLayer::neighbor_sum(config_.d_prime, config_.d_te);
    conv_ = ConvPoolLayer::random(config_.n_f, config_.d_f, rng);
    sigmoid_ = SigmoidLayer::random(config_.n_f * config_.pooled(), config_.n3, rng);
    output_ = L1OutputLayer(config_.n3, config_.lambda);
    const double r = std::sqrt(6.0 / static_cast<double>(config_.n3 + 1));
    for (auto& w : output_.weights()) w = rng.uniform(-r, r);
    mean_.assign(config_.d_prime, 0.0);
    stddev_.assign(config_.d_prime, 1.0);
  }

  const TeNetConfig& config() const noexcept { return config_; }
  TemporalEmbeddingLayer& embedding() noexcept { return te_; }
  const TemporalEmbeddingLayer& embedding() const noexcept { return te_; }
  ConvPoolLayer& conv() noexcept { return conv_; }
  const ConvPoolLayer& conv() const noexcept { return conv_; }
  SigmoidLayer& sigmoid() noexcept { return sigmoid_; }
  const SigmoidLayer& sigmoid() const noexcept { return sigmoid_; }
  L1OutputLayer& output() noexcept { return output_; }
  const L1OutputLayer& output() const noexcept { return output_; }

  bool scaled() const noexcept { return scaled_; }
  const RealVec& input_mean() const noexcept { return mean_; }
  const RealVec& input_stddev() const noexcept { return stddev_; }
  double target_scale() const noexcept { return target_scale_; }

  void set_scaling(RealVec mean, RealVec stddev, double target_scale) {
    detail::require_same_length(mean.size(), config_.d_prime, "set_scaling");
    detail::require_same_length(stddev.size(), config_.d_prime, "set_scaling");
    if (!(target_scale > 0.0)) throw std::invalid_argument("set_scaling: target scale must be positive");
    mean_ = std::move(mean);
    stddev_ = std::move(stddev);
    target_scale_ = target_scale;
    scaled_ = true;
  }

  /// Per-dimension z-score and max-|y| target scale from the training fold.
  void fit_scaling(const SampleSet& train) {
    if (train.empty()) throw std::invalid_argument("fit_scaling: empty training set");
    const std::size_t d = config_.d_prime;
    RealVec mean(d, 0.0), sd(d, 0.0);
    double max_abs = 0.0;
    for (const auto& s : train) {
      detail::require_same_length(s.x.size(), d, "fit_scaling");
      for (std::size_t j = 0; j < d; ++j) mean[j] += s.x[j];
      max_abs = std::max(max_abs, std::abs(s.y));
    }
    const double n = static_cast<double>(train.size());
    for (auto& m : mean) m /= n;
    for (const auto& s : train)
      for (std::size_t j = 0; j < d; ++j) sd[j] += (s.x[j] - mean[j]) * (s.x[j] - mean[j]);
    for (auto& v : sd) {
      v = std::sqrt(v / n);
      if (v < 1e-12) v = 1.0;
    }
    if (config_.input_scale == InputScale::none) {
      std::fill(mean.begin(), mean.end(), 0.0);
      std::fill(sd.begin(), sd.end(), 1.0);
    }
    const double ts = config_.target_scale == TargetScale::max_abs && max_abs > 0.0 ? max_abs : 1.0;
    set_scaling(std::move(mean), std::move(sd), ts);
  }

  RealVec standardize(std::span<const double> x) const {
    detail::require_same_length(x.size(), config_.d_prime, "TeNetModel::standardize");
    RealVec a(x.size());
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = (x[j] - mean_[j]) / stddev_[j];
    return a;
  }

  double scale_target(double y) const { return y / target_scale_; }

  /// Prediction in data units.
  double predict(std::span<const double> x) const {
    if (!scaled_) throw std::logic_error("TeNetModel::predict: scaling state not set");
    return forward_scaled(standardize(x)).prediction * target_scale_;
  }

  RealVec predict(const SampleSet& samples) const {
    RealVec out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(predict(s.x));
    return out;
  }

  TeNetActivations forward_scaled(std::span<const double> a) const {
    TeNetActivations act;
    act.input.assign(a.begin(), a.end());
    act.embedded = te_.forward(a);
    act.conv = conv_.forward(act.embedded);
    act.hidden = sigmoid_.forward(act.conv.output);
    act.prediction = output_.forward(act.hidden);
    return act;
  }

  /// J = 0.5 (y_hat - y)^2 + lambda |W4|_1 in standardized units.
  double cost_scaled(std::span<const double> a, double y) const {
    return output_.cost(forward_scaled(a).prediction, y);
  }

  TeNetGradients gradients(const TeNetActivations& act, double y) const {
    TeNetGradients g;
    g.output = output_.backward(act.hidden, y);
    g.sigmoid = sigmoid_.backward(act.conv.output, act.hidden, g.output.delta_in);
    g.conv = conv_.backward(act.embedded, act.conv, g.sigmoid.delta_in);
    if (config_.te_mode == TeMode::trainable) g.te = te_.backward(act.input, g.conv.delta_in);
    return g;
  }

  TeNetGradients gradients(std::span<const double> a, double y) const { return gradients(forward_scaled(a), y); }

  void step(const TeNetGradients& g, double learning_rate) {
    output_.step(g.output, learning_rate);
    sigmoid_.step(g.sigmoid, learning_rate);
    conv_.step(g.conv, learning_rate);
    if (config_.te_mode == TeMode::trainable) te_.step(g.te, learning_rate);
  }

  /// Writable handles to every trainable scalar, grouped; masked
  /// temporal-embedding entries and frozen layers are left out.
  struct ParameterGroup {
    std::string name;
    std::vector<double*> values;
  };
  std::vector<ParameterGroup> parameter_groups() {
    std::vector<ParameterGroup> groups;
    if (config_.te_mode == TeMode::trainable) {
      ParameterGroup w{"te.weights", {}};
      for (int o = -te_.half(); o <= te_.half(); ++o)
        for (std::size_t j = 0; j < te_.dim(); ++j)
          if (te_.in_range(j, o)) w.values.push_back(&te_.offset(o)[j]);
      groups.push_back(std::move(w));
      groups.push_back({"te.bias", pointers(te_.bias())});
    }
    groups.push_back({"conv.filters", pointers(conv_.filters().values())});
    groups.push_back({"conv.bias", pointers(conv_.bias())});
    groups.push_back({"sigmoid.weights", pointers(sigmoid_.weights().values())});
    groups.push_back({"sigmoid.bias", pointers(sigmoid_.bias())});
    groups.push_back({"output.weights", pointers(output_.weights())});
    groups.push_back({"output.bias", {&output_.bias()}});
    return groups;
  }

  /// Gradient values in the same order as parameter_groups().
  std::vector<RealVec> flatten(const TeNetGradients& g) const {
    std::vector<RealVec> out;
    if (config_.te_mode == TeMode::trainable) {
      RealVec w;
      for (int o = -te_.half(); o <= te_.half(); ++o)
        for (std::size_t j = 0; j < te_.dim(); ++j)
          if (te_.in_range(j, o)) w.push_back(g.te.weights[static_cast<std::size_t>(o + te_.half())][j]);
      out.push_back(std::move(w));
      out.push_back(g.te.bias);
    }
    out.push_back(g.conv.filters.values());
    out.push_back(g.conv.bias);
    out.push_back(g.sigmoid.weights.values());
    out.push_back(g.sigmoid.bias);
    out.push_back(g.output.weights);
    out.push_back({g.output.bias});
    return out;
  }

 private:
  static std::vector<double*> pointers(RealVec& v) {
    std::vector<double*> p;
    p.reserve(v.size());
    for (auto& x : v) p.push_back(&x);
    return p;
  }

  TeNetConfig config_;
  TemporalEmbeddingLayer te_;
  ConvPoolLayer conv_;
  SigmoidLayer sigmoid_;
  L1OutputLayer output_;
  RealVec mean_;
  RealVec stddev_;
  double target_scale_ = 1.0;
  bool scaled_ = false;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainTrace {
  RealVec train_cost;  // mean J per epoch, standardized units
  RealVec val_score;   // validation MRE (MSE when every validation target is zero)
  std::size_t best_epoch = 0;
};

inline RealVec targets_of(const SampleSet& samples) {
  RealVec ys;
  ys.reserve(samples.size());
  for (const auto& s : samples) ys.push_back(s.y);
  return ys;
}

/// Score used for early stopping and model selection.
inline double validation_score(const TeNetModel& model, const SampleSet& val) {
  const RealVec preds = model.predict(val);
  const RealVec ys = targets_of(val);
  if (count_relative_targets(ys) == 0) return mse(preds, ys);
  return mre(preds, ys);
}

/// Per-sample SGD in a freshly shuffled order each epoch. Fits the input and
/// target scaling on `train`, stops once the validation score has not
/// improved for `patience` epochs, and leaves the model at its best epoch.
inline TrainTrace sgd_train(TeNetModel& model, const SampleSet& train, const SampleSet& val) {
  if (train.empty()) throw std::invalid_argument("sgd_train: empty training set");
  if (val.empty()) throw std::invalid_argument("sgd_train: empty validation set");
  const TeNetConfig& cfg = model.config();
  model.fit_scaling(train);

  std::vector<RealVec> inputs;
  RealVec targets;
  for (const auto& s : train) {
    inputs.push_back(model.standardize(s.x));
    targets.push_back(model.scale_target(s.y));
  }

  SeededRng rng(derive_seed(cfg.seed, 0x5eed));
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainTrace trace;
  TeNetModel best = model;
  double best_score = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double cost = 0.0;
    for (std::size_t idx : order) {
      const TeNetActivations act = model.forward_scaled(inputs[idx]);
      const double j = model.output().cost(act.prediction, targets[idx]);
      if (!std::isfinite(j)) throw NumericError("sgd_train: non-finite cost at epoch " + std::to_string(epoch));
      cost += j;
      model.step(model.gradients(act, targets[idx]), cfg.learning_rate);
    }
    trace.train_cost.push_back(cost / static_cast<double>(order.size()));

    const double score = validation_score(model, val);
    if (!std::isfinite(score)) throw NumericError("sgd_train: non-finite validation score");
    trace.val_score.push_back(score);
    if (score < best_score) {
      best_score = score;
      best = model;
      trace.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (!trace.train_cost.empty()) model = std::move(best);
  return trace;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct GradCheckGroup {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckGroup> groups;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t seeds = 0;
  bool pass = false;
};

struct GradCheckOptions {
  double tolerance = 1e-4;
  double step = 1e-5;
  std::size_t seeds = 20;
  std::uint64_t base_seed = 1;
  /// Entries where both gradients are below this magnitude count as agreeing.
  double floor = 1e-7;
  /// Applied to the analytic gradient before comparison; used to verify the
  /// check can fail.
  std::function<void(TeNetGradients&)> corrupt;
};

/// Small network used by the gradient check.
inline TeNetConfig gradcheck_config() {
  TeNetConfig c;
  c.d_prime = 8;
  c.d_te = 1;
  c.n_f = 2;
  c.d_f = 3;
  c.n3 = 3;
  c.lambda = 0.0;
  return c;
}

/// Compares analytic gradients against central finite differences of J on
/// random instances (random input, target, and all parameters including the
/// embedding and biases). Relative error per entry is
/// |analytic - numeric| / max(|analytic|, |numeric|).
inline GradCheckReport grad_check(const TeNetConfig& base, const GradCheckOptions& opt = {}) {
  GradCheckReport report;
  report.tolerance = opt.tolerance;
  report.seeds = opt.seeds;
  std::map<std::string, double> worst;
  std::vector<std::string> order;

  for (std::size_t s = 0; s < opt.seeds; ++s) {
    TeNetConfig cfg = base;
    cfg.seed = derive_seed(opt.base_seed, s);
    TeNetModel model(cfg);
    SeededRng rng(derive_seed(cfg.seed, 0x9c));
    for (auto& group : model.parameter_groups())
      for (double* p : group.values) *p = rng.uniform(-1.0, 1.0);
    RealVec a(cfg.d_prime);
    for (auto& v : a) v = rng.normal();
    const double y = rng.uniform(-1.0, 1.0);

    TeNetGradients g = model.gradients(a, y);
    if (opt.corrupt) opt.corrupt(g);
    const std::vector<RealVec> analytic = model.flatten(g);
    auto groups = model.parameter_groups();
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      auto& group = groups[gi];
      if (!worst.count(group.name)) {
        worst[group.name] = 0.0;
        order.push_back(group.name);
      }
      for (std::size_t k = 0; k < group.values.size(); ++k) {
        double* p = group.values[k];
        const double saved = *p;
        *p = saved + opt.step;
        const double up = model.cost_scaled(a, y);
        *p = saved - opt.step;
        const double down = model.cost_scaled(a, y);
        *p = saved;
        const double numeric = (up - down) / (2.0 * opt.step);
        const double an = analytic[gi][k];
        const double denom = std::max(std::abs(an), std::abs(numeric));
        const double rel = denom < opt.floor ? 0.0 : std::abs(an - numeric) / denom;
        worst[group.name] = std::max(worst[group.name], rel);
      }
    }
  }
  for (const auto& name : order) {
    report.groups.push_back({name, worst[name]});
    report.max_rel_error = std::max(report.max_rel_error, worst[name]);
  }
  report.pass = report.max_rel_error <= opt.tolerance;
  return report;
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

inline constexpr const char* kModelHeader = "tenet-model v1";

namespace detail {
inline void write_group(std::ostream& os, const std::string& name, const std::string& shape,
                        const RealVec& values) {
  os << name << ' ' << shape;
  for (double v : values) os << ' ' << text::format_double(v);
  os << '\n';
}
}  // namespace detail

inline void save_model(std::ostream& os, const TeNetModel& m) {
  const TeNetConfig& c = m.config();
  os << kModelHeader << '\n';
  os << "config d_prime=" << c.d_prime << " d_te=" << c.d_te << " n_f=" << c.n_f << " d_f=" << c.d_f
     << " n3=" << c.n3 << " lambda=" << text::format_double(c.lambda)
     << " learning_rate=" << text::format_double(c.learning_rate) << " seed=" << c.seed
     << " te_mode=" << to_string(c.te_mode) << '\n';
  const std::string d = std::to_string(c.d_prime);
  for (int o = -m.embedding().half(); o <= m.embedding().half(); ++o)
    detail::write_group(os, "te.offset[" + std::to_string(o) + "]", d, m.embedding().offset(o));
  detail::write_group(os, "te.bias", d, m.embedding().bias());
  const auto& f = m.conv().filters();
  detail::write_group(os, "conv.filters", std::to_string(f.rows()) + "x" + std::to_string(f.cols()), f.values());
  detail::write_group(os, "conv.bias", std::to_string(c.n_f), m.conv().bias());
  const auto& w = m.sigmoid().weights();
  detail::write_group(os, "sigmoid.weights", std::to_string(w.rows()) + "x" + std::to_string(w.cols()),
                      w.values());
  detail::write_group(os, "sigmoid.bias", std::to_string(c.n3), m.sigmoid().bias());
  detail::write_group(os, "output.weights", std::to_string(c.n3), m.output().weights());
  detail::write_group(os, "output.bias", "1", {m.output().bias()});
  detail::write_group(os, "scaling.mean", d, m.input_mean());
  detail::write_group(os, "scaling.stddev", d, m.input_stddev());
  detail::write_group(os, "scaling.target", "1", {m.target_scale()});
}

inline TeNetModel load_model(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line) || text::trim(line) != kModelHeader)
    throw FormatError("load_model: missing '" + std::string(kModelHeader) + "' header", 1);

  TeNetConfig cfg;
  std::map<std::string, RealVec> groups;
  bool have_config = false;
  while (std::getline(is, line)) {
    ++line_no;
    const auto parts = text::split_ws(line);
    if (parts.empty()) continue;
    if (parts[0] == "config") {
      for (std::size_t i = 1; i < parts.size(); ++i) {
        const auto kv = text::split(parts[i], '=');
        if (kv.size() != 2) throw FormatError("load_model: bad config entry", line_no);
        const std::string key(kv[0]);
        const auto num = text::parse_double(kv[1]);
        if (key == "te_mode") {
          if (kv[1] == "trainable") cfg.te_mode = TeMode::trainable;
          else if (kv[1] == "frozen_identity") cfg.te_mode = TeMode::frozen_identity;
          else throw FormatError("load_model: unknown te_mode", line_no);
          continue;
        }
        if (key == "seed") {
          const auto seed = text::parse_int<std::uint64_t>(kv[1]);
          if (!seed) throw FormatError("load_model: bad seed", line_no);
          cfg.seed = *seed;
          continue;
        }
        if (!num) throw FormatError("load_model: bad value for " + key, line_no);
        if (key == "d_prime") cfg.d_prime = static_cast<std::size_t>(*num);
        else if (key == "d_te") cfg.d_te = static_cast<std::size_t>(*num);
        else if (key == "n_f") cfg.n_f = static_cast<std::size_t>(*num);
        else if (key == "d_f") cfg.d_f = static_cast<std::size_t>(*num);
        else if (key == "n3") cfg.n3 = static_cast<std::size_t>(*num);
        else if (key == "lambda") cfg.lambda = *num;
        else if (key == "learning_rate") cfg.learning_rate = *num;
        else throw FormatError("load_model: unknown config key " + key, line_no);
      }
      have_config = true;
      continue;
    }
    if (parts.size() < 2) throw FormatError("load_model: group without shape", line_no);
    std::size_t expected = 1;
    for (auto dim : text::split(parts[1], 'x')) {
      const auto n = text::parse_int<std::size_t>(dim);
      if (!n) throw FormatError("load_model: bad shape", line_no);
      expected *= *n;
    }
    if (parts.size() - 2 != expected) throw FormatError("load_model: value count does not match shape", line_no);
    RealVec values;
    values.reserve(expected);
    for (std::size_t i = 2; i < parts.size(); ++i) {
      const auto v = text::parse_double(parts[i]);
      if (!v) throw FormatError("load_model: bad number", line_no);
      values.push_back(*v);
    }
    groups[std::string(parts[0])] = std::move(values);
  }
  if (!have_config) throw FormatError("load_model: missing config line");

  TeNetModel m(cfg);
  auto take = [&](const std::string& name, std::size_t n) -> RealVec {
    auto it = groups.find(name);
    if (it == groups.end()) throw FormatError("load_model: missing group " + name);
    if (it->second.size() != n) throw FormatError("load_model: wrong size for " + name);
    return it->second;
  };
  for (int o = -m.embedding().half(); o <= m.embedding().half(); ++o)
    m.embedding().offset(o) = take("te.offset[" + std::to_string(o) + "]", cfg.d_prime);
  m.embedding().bias() = take("te.bias", cfg.d_prime);
  m.conv().filters().values() = take("conv.filters", cfg.n_f * cfg.d_f);
  m.conv().bias() = take("conv.bias", cfg.n_f);
  m.sigmoid().weights().values() = take("sigmoid.weights", cfg.n_f * cfg.pooled() * cfg.n3);
  m.sigmoid().bias() = take("sigmoid.bias", cfg.n3);
  m.output().weights() = take("output.weights", cfg.n3);
  m.output().bias() = take("output.bias", 1)[0];
  m.set_scaling(take("scaling.mean", cfg.d_prime), take("scaling.stddev", cfg.d_prime),
                take("scaling.target", 1)[0]);
  return m;
}

/// Convolution filters ("snippets"), one CSV row per filter.
inline void export_snippets(std::ostream& os, const TeNetModel& m) {
  const auto& f = m.conv().filters();
  os << "filter";
  for (std::size_t p = 0; p < f.cols(); ++p) os << ",w" << (p + 1);
  os << '\n';
  for (std::size_t i = 0; i < f.rows(); ++i) {
    os << i;
    for (double v : f.row(i)) os << ',' << text::format_double(v);
    os << '\n';
  }
}

inline void write_trace_csv(std::ostream& os, const TrainTrace& t) {
  os << "epoch,train_cost,val_score,best\n";
  for (std::size_t e = 0; e < t.train_cost.size(); ++e)
    os << e << ',' << text::format_double(t.train_cost[e]) << ',' << text::format_double(t.val_score[e]) << ','
       << (e == t.best_epoch ? 1 : 0) << '\n';
}

}  // namespace tenet
