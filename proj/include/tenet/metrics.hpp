#pragma once

// Regression metrics and the series-similarity measures used by the
// temporal-embedding case study.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include "tenet/errors.hpp"
#include "tenet/numerics.hpp"

namespace tenet {

/// Targets with |y| at or below this are excluded from relative metrics.
inline constexpr double kTargetEpsilon = 1e-9;

namespace detail {
inline void require_paired(std::span<const double> preds, std::span<const double> ys, const char* what) {
  require_same_length(preds.size(), ys.size(), what);
  if (preds.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
}
}  // namespace detail

inline std::size_t count_relative_targets(std::span<const double> ys) {
  return static_cast<std::size_t>(
      std::count_if(ys.begin(), ys.end(), [](double y) { return std::abs(y) > kTargetEpsilon; }));
}

/// Percentage of samples with |pred - y| <= p * |y|, over samples with |y| > epsilon.
inline double hit_rate(std::span<const double> preds, std::span<const double> ys, double p) {
  detail::require_paired(preds, ys, "hit_rate");
  std::size_t hits = 0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (std::abs(ys[i]) <= kTargetEpsilon) continue;
    ++counted;
    if (std::abs(preds[i] - ys[i]) <= p * std::abs(ys[i])) ++hits;
  }
  if (counted == 0) throw UndefinedMetric("hit_rate: every target is zero");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(counted);
}

/// Mean absolute relative error over samples with |y| > epsilon.
inline double mre(std::span<const double> preds, std::span<const double> ys) {
  detail::require_paired(preds, ys, "mre");
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (std::abs(ys[i]) <= kTargetEpsilon) continue;
    acc += std::abs(preds[i] - ys[i]) / std::abs(ys[i]);
    ++counted;
  }
  if (counted == 0) throw UndefinedMetric("mre: every target is zero");
  return acc / static_cast<double>(counted);
}

inline double mse(std::span<const double> preds, std::span<const double> ys) {
  detail::require_paired(preds, ys, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double r = preds[i] - ys[i];
    acc += r * r;
  }
  return acc / static_cast<double>(ys.size());
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  detail::require_paired(a, b, "pearson");
  const double n = static_cast<double>(a.size());
  const double ma = sum(a) / n;
  const double mb = sum(b) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0.0 || vb <= 0.0) throw UndefinedMetric("pearson: zero variance");
  return cov / std::sqrt(va * vb);
}

/// Sum of elementwise minima.
inline double intersection(std::span<const double> a, std::span<const double> b) {
  detail::require_paired(a, b, "intersection");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::min(a[i], b[i]);
  return acc;
}

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
  detail::require_paired(a, b, "l2_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc);
}

/// Centered moving average; windows are truncated at the edges.
inline RealVec moving_average(std::span<const double> series, std::size_t window = 3) {
  if (series.empty()) throw std::invalid_argument("moving_average: empty series");
  if (window == 0 || window % 2 == 0) throw std::invalid_argument("moving_average: window must be odd");
  const std::size_t half = window / 2;
  RealVec out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(series.size() - 1, i + half);
    double acc = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) acc += series[k];
    out[i] = acc / static_cast<double>(hi - lo + 1);
  }
  return out;
}

/// The four scores reported for a prediction run.
struct MetricSummary {
  double hr20 = 0.0;
  double hr30 = 0.0;
  double mre = 0.0;
  double mse = 0.0;
  std::size_t n = 0;
  std::size_t excluded = 0;  // zero-target samples left out of HR and MRE
};

inline MetricSummary summarize(std::span<const double> preds, std::span<const double> ys) {
  MetricSummary s;
  s.n = ys.size();
  s.excluded = ys.size() - count_relative_targets(ys);
  s.hr20 = hit_rate(preds, ys, 0.2);
  s.hr30 = hit_rate(preds, ys, 0.3);
  s.mre = mre(preds, ys);
  s.mse = mse(preds, ys);
  return s;
}

}  // namespace tenet
