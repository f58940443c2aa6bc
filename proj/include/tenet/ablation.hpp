#pragma once

// Synthetic experiments: exemplar selection by affinity propagation,
// TeNet against the frozen-embedding CNN on distorted copies, and the
// head-length sweep.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "tenet/datasets.hpp"
#include "tenet/harness.hpp"
#include "tenet/model.hpp"
#include "tenet/synthetic.hpp"
#include "tenet/text.hpp"

namespace tenet {

struct ExemplarSelection {
  std::vector<DaySeries> exemplars;  // largest cluster first
  APResult clustering;
};

inline ExemplarSelection select_exemplars(const std::vector<DaySeries>& days, const APParams& params = {}) {
  if (days.empty()) throw std::invalid_argument("select_exemplars: no days");
  std::vector<RealVec> points;
  points.reserve(days.size());
  for (const auto& d : days) points.push_back(d.values);
  ExemplarSelection sel{{}, affinity_propagation(points, params)};
  for (auto e : sel.clustering.exemplars) sel.exemplars.push_back(days[e]);
  return sel;
}

inline std::vector<RealVec> values_of(const std::vector<DaySeries>& days) {
  std::vector<RealVec> out;
  out.reserve(days.size());
  for (const auto& d : days) out.push_back(d.values);
  return out;
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median: empty input");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct AblationResult {
  std::vector<EvalReport> tenet;  // one per distortion seed
  std::vector<EvalReport> cnn;
  double tenet_mre = 0.0;  // medians over seeds
  double cnn_mre = 0.0;
  double tenet_hr20 = 0.0;
  double cnn_hr20 = 0.0;
};

/// Distortion seed for run `k` of an experiment based on `spec`.
inline DistortionSpec seeded_spec(DistortionSpec spec, std::size_t k) {
  spec.seed = derive_seed(spec.seed, k);
  return spec;
}

/// For each of `runs` distortion seeds, builds the ablation set and trains
/// TeNet and the frozen-identity CNN from identical initial draws.
inline AblationResult synthetic_ablation(const std::vector<RealVec>& exemplars, const TeNetConfig& config,
                                         const DistortionSpec& spec, std::size_t runs = 5,
                                         std::size_t per_exemplar = 30) {
  if (runs == 0) throw std::invalid_argument("synthetic_ablation: runs must be positive");
  AblationResult r;
  std::vector<double> tm, cm, th, ch;
  for (std::size_t k = 0; k < runs; ++k) {
    std::vector<Split> splits;
    splits.push_back(guard(gen_ablation_set(exemplars, seeded_spec(spec, k), per_exemplar, config.d_prime)));
    const std::string name = "run" + std::to_string(k + 1);
    TeNetConfig te = config;
    te.te_mode = TeMode::trainable;
    r.tenet.push_back(cross_validate(splits, te, "tenet/" + name));
    r.cnn.push_back(ablation_cnn(splits, config, "cnn/" + name));
    tm.push_back(r.tenet.back().mean.mre);
    cm.push_back(r.cnn.back().mean.mre);
    th.push_back(r.tenet.back().mean.hr20);
    ch.push_back(r.cnn.back().mean.hr20);
  }
  r.tenet_mre = median(tm);
  r.cnn_mre = median(cm);
  r.tenet_hr20 = median(th);
  r.cnn_hr20 = median(ch);
  return r;
}

struct SweepPoint {
  std::size_t d_prime = 0;
  double mre = 0.0;   // median over runs
  double hr20 = 0.0;  // median over runs
};

/// TeNet on the ablation set for each head length in `dims`.
inline std::vector<SweepPoint> d_sweep(const std::vector<RealVec>& exemplars, const TeNetConfig& config,
                                       const DistortionSpec& spec, const std::vector<std::size_t>& dims,
                                       std::size_t runs = 5, std::size_t per_exemplar = 30) {
  std::vector<SweepPoint> out;
  for (auto d : dims) {
    TeNetConfig c = config;
    c.d_prime = d;
    std::vector<double> m, h;
    for (std::size_t k = 0; k < runs; ++k) {
      std::vector<Split> splits;
      splits.push_back(guard(gen_ablation_set(exemplars, seeded_spec(spec, k), per_exemplar, d)));
      const EvalReport rep = cross_validate(splits, c, "d" + std::to_string(d));
      m.push_back(rep.mean.mre);
      h.push_back(rep.mean.hr20);
    }
    out.push_back({d, median(m), median(h)});
  }
  return out;
}

/// Number of adjacent pairs in the sweep where MRE does not decrease.
inline std::size_t sweep_violations(const std::vector<SweepPoint>& sweep) {
  std::size_t v = 0;
  for (std::size_t i = 1; i < sweep.size(); ++i)
    if (!(sweep[i].mre < sweep[i - 1].mre)) ++v;
  return v;
}

inline void write_ablation_summary(std::ostream& os, const AblationResult& r) {
  os << "model,median_MRE,median_HR20\n";
  os << "tenet," << text::format_fixed(r.tenet_mre, 4) << ',' << text::format_fixed(r.tenet_hr20, 2) << '\n';
  os << "cnn," << text::format_fixed(r.cnn_mre, 4) << ',' << text::format_fixed(r.cnn_hr20, 2) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& sweep) {
  os << "d_prime,median_MRE,median_HR20\n";
  for (const auto& p : sweep)
    os << p.d_prime << ',' << text::format_fixed(p.mre, 4) << ',' << text::format_fixed(p.hr20, 2) << '\n';
}

/// Samples as CSV: `fold,group,source,date,y,x1..xd`.
inline void write_samples_csv(std::ostream& os, const Folds& folds) {
  const std::size_t d = !folds.train.empty() ? folds.train.front().x.size() : 0;
  os << "fold,group,source,date,y";
  for (std::size_t j = 1; j <= d; ++j) os << ",x" << j;
  os << '\n';
  auto rows = [&](const char* fold, const SampleSet& set) {
    for (const auto& s : set) {
      os << fold << ',' << s.group << ',' << s.source << ',' << s.date << ',' << text::format_double(s.y);
      for (double v : s.x) os << ',' << text::format_double(v);
      os << '\n';
    }
  };
  rows("train", folds.train);
  rows("val", folds.val);
  rows("test", folds.test);
}

}  // namespace tenet
