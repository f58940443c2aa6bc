#pragma once

// Distortion benchmark: exemplar discovery by affinity propagation, random
// swap/shift distortions, and the stratified synthetic sample set.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tenet/datasets.hpp"
#include "tenet/numerics.hpp"
#include "tenet/sample.hpp"
#include "tenet/text.hpp"

namespace tenet {

// ---------------------------------------------------------------------------
// Affinity propagation
// ---------------------------------------------------------------------------

struct APParams {
  double damping = 0.9;
  /// Self-similarity; NaN selects the median of the off-diagonal similarities.
  double preference = std::numeric_limits<double>::quiet_NaN();
  std::size_t max_iterations = 1000;
  std::size_t convergence_window = 100;
  /// Keep at most this many exemplars (largest clusters first); 0 keeps all.
  std::size_t max_exemplars = 10;
};

struct APResult {
  std::vector<std::size_t> exemplars;    // point indices, largest cluster first
  std::vector<std::size_t> assignment;   // per point, the index of its exemplar point
  std::vector<std::size_t> cluster_size; // parallel to exemplars
  std::size_t iterations = 0;
  bool converged = false;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "squared_distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

/// Sum over points of the squared distance to the nearest listed exemplar.
inline double medoid_cost(const std::vector<RealVec>& points, const std::vector<std::size_t>& exemplars) {
  double total = 0.0;
  for (const auto& p : points) {
    double best = std::numeric_limits<double>::infinity();
    for (auto e : exemplars) best = std::min(best, squared_distance(p, points[e]));
    total += best;
  }
  return total;
}

namespace detail {
inline std::vector<std::size_t> assign_to(const std::vector<RealVec>& points,
                                          const std::vector<std::size_t>& exemplars) {
  std::vector<std::size_t> assignment(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::size_t best = exemplars.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (auto e : exemplars) {
      const double d = e == i ? -1.0 : squared_distance(points[i], points[e]);
      if (d < best_d) {
        best_d = d;
        best = e;
      }
    }
    assignment[i] = best;
  }
  return assignment;
}

/// Moves each exemplar to the medoid of its cluster (ties: lowest index).
inline std::vector<std::size_t> refine_exemplars(const std::vector<RealVec>& points,
                                                 const std::vector<std::size_t>& exemplars) {
  const auto assignment = assign_to(points, exemplars);
  std::vector<std::size_t> out;
  for (auto e : exemplars) {
    std::size_t best = e;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < points.size(); ++m) {
      if (assignment[m] != e) continue;
      double cost = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i)
        if (assignment[i] == e) cost += squared_distance(points[i], points[m]);
      if (cost < best_cost) {
        best_cost = cost;
        best = m;
      }
    }
    out.push_back(best);
  }
  return out;
}
}  // namespace detail

/// Frey-Dueck message passing with similarity -|x_i - x_k|^2, followed by
/// one medoid refinement of each cluster. If the iteration limit is hit the
/// current exemplars are returned with converged = false.
inline APResult affinity_propagation(const std::vector<RealVec>& points, const APParams& params = {}) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("affinity_propagation: no points");
  if (!(params.damping >= 0.5 && params.damping < 1.0))
    throw std::invalid_argument("affinity_propagation: damping must be in [0.5, 1)");
  APResult result;
  if (n == 1) {
    result.exemplars = {0};
    result.assignment = {0};
    result.cluster_size = {1};
    result.converged = true;
    return result;
  }

  RealMat s(n, n);
  std::vector<double> off_diagonal;
  off_diagonal.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (i != k) {
        s(i, k) = -squared_distance(points[i], points[k]);
        off_diagonal.push_back(s(i, k));
      }
  double pref = params.preference;
  if (std::isnan(pref)) {
    std::sort(off_diagonal.begin(), off_diagonal.end());
    const std::size_t m = off_diagonal.size();
    pref = m % 2 ? off_diagonal[m / 2] : 0.5 * (off_diagonal[m / 2 - 1] + off_diagonal[m / 2]);
  }
  for (std::size_t k = 0; k < n; ++k) s(k, k) = pref;
  // Tiny fixed-seed jitter breaks exact ties between symmetric candidates.
  SeededRng jitter(0);
  for (auto& v : s.values())
    v += (std::numeric_limits<double>::epsilon() * v + std::numeric_limits<double>::min() * 100.0) * jitter.normal();

  RealMat r(n, n), a(n, n);
  const double lam = params.damping;
  std::vector<bool> current(n, false), previous(n, false);
  std::size_t stable = 0;
  for (std::size_t it = 0; it < params.max_iterations; ++it) {
    result.iterations = it + 1;
    // responsibilities
    for (std::size_t i = 0; i < n; ++i) {
      double first = -std::numeric_limits<double>::infinity(), second = first;
      std::size_t first_k = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const double v = a(i, k) + s(i, k);
        if (v > first) {
          second = first;
          first = v;
          first_k = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (std::size_t k = 0; k < n; ++k) {
        const double fresh = s(i, k) - (k == first_k ? second : first);
        r(i, k) = lam * r(i, k) + (1.0 - lam) * fresh;
      }
    }
    // availabilities
    for (std::size_t k = 0; k < n; ++k) {
      double pos_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (i != k) pos_sum += std::max(0.0, r(i, k));
      for (std::size_t i = 0; i < n; ++i) {
        double fresh;
        if (i == k) {
          fresh = pos_sum;
        } else {
          fresh = std::min(0.0, r(k, k) + pos_sum - std::max(0.0, r(i, k)));
        }
        a(i, k) = lam * a(i, k) + (1.0 - lam) * fresh;
      }
    }
    bool any = false;
    for (std::size_t k = 0; k < n; ++k) {
      current[k] = a(k, k) + r(k, k) > 0.0;
      any = any || current[k];
    }
    stable = (any && current == previous) ? stable + 1 : 0;
    previous = current;
    if (stable >= params.convergence_window) {
      result.converged = true;
      break;
    }
  }

  std::vector<std::size_t> exemplars;
  for (std::size_t k = 0; k < n; ++k) {
    if (!current[k]) continue;
    // identical points are one exemplar; keep the lowest index
    const bool duplicate = std::any_of(exemplars.begin(), exemplars.end(),
                                       [&](std::size_t e) { return squared_distance(points[e], points[k]) == 0.0; });
    if (!duplicate) exemplars.push_back(k);
  }
  if (exemplars.empty()) {
    // Degenerate similarities (e.g. all points identical): fall back to the single medoid.
    std::size_t best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
      const double c = medoid_cost(points, {k});
      if (c < best_cost) {
        best_cost = c;
        best = k;
      }
    }
    exemplars.push_back(best);
  }

  exemplars = detail::refine_exemplars(points, exemplars);
  auto assignment = detail::assign_to(points, exemplars);
  std::map<std::size_t, std::size_t> sizes;
  for (auto e : assignment) ++sizes[e];
  const auto by_size = [&](std::size_t x, std::size_t y) {
    return sizes[x] != sizes[y] ? sizes[x] > sizes[y] : x < y;
  };
  std::sort(exemplars.begin(), exemplars.end(), by_size);
  if (params.max_exemplars && exemplars.size() > params.max_exemplars) {
    exemplars.resize(params.max_exemplars);
    exemplars = detail::refine_exemplars(points, exemplars);
    assignment = detail::assign_to(points, exemplars);
    sizes.clear();
    for (auto e : assignment) ++sizes[e];
    std::sort(exemplars.begin(), exemplars.end(), by_size);
  }
  result.exemplars = exemplars;
  result.assignment = std::move(assignment);
  for (auto e : result.exemplars) result.cluster_size.push_back(sizes[e]);
  return result;
}

// ---------------------------------------------------------------------------
// Distortions
// ---------------------------------------------------------------------------

struct DistortionSpec {
  std::size_t ops = 2;
  std::size_t segment = 4;  // L, swap segment length
  std::size_t max_shift = 2;
  std::uint64_t seed = 1;

  void validate() const {
    if (ops < 1) throw std::invalid_argument("DistortionSpec: ops must be >= 1");
    if (segment < 1) throw std::invalid_argument("DistortionSpec: segment must be >= 1");
  }
};

/// Exchanges [pos, pos+len) with [pos+len, pos+2len).
inline RealVec swap_segments(std::span<const double> x, std::size_t pos, std::size_t len) {
  if (pos + 2 * len > x.size()) throw std::out_of_range("swap_segments: segments exceed series");
  RealVec out(x.begin(), x.end());
  std::swap_ranges(out.begin() + static_cast<std::ptrdiff_t>(pos),
                   out.begin() + static_cast<std::ptrdiff_t>(pos + len),
                   out.begin() + static_cast<std::ptrdiff_t>(pos + len));
  return out;
}

/// Applies spec.ops operations, each a fair coin between a swap of two
/// adjacent length-L segments at a uniform position and a zero-filled shift
/// by a uniform s in [1, max_shift] in a uniform direction. A swap that does
/// not fit the series is skipped; max_shift = 0 makes shifts no-ops.
inline RealVec distort(std::span<const double> series, const DistortionSpec& spec, SeededRng& rng) {
  spec.validate();
  RealVec x(series.begin(), series.end());
  for (std::size_t op = 0; op < spec.ops; ++op) {
    if (rng.below(2) == 0) {
      if (x.size() < 2 * spec.segment) continue;
      const auto pos = static_cast<std::size_t>(rng.below(x.size() - 2 * spec.segment + 1));
      x = swap_segments(x, pos, spec.segment);
    } else {
      if (spec.max_shift == 0) continue;
      const auto s = static_cast<long long>(1 + rng.below(spec.max_shift));
      x = shift_series(x, rng.below(2) == 0 ? s : -s);
    }
  }
  return x;
}

/// Samples per exemplar: x' = head of a distorted copy, y = total of the
/// clean exemplar. Each exemplar's copies are split evenly into
/// train/val/test (remainder to train). Sample::group holds the exemplar index.
inline Folds gen_ablation_set(const std::vector<RealVec>& exemplars, const DistortionSpec& spec,
                              std::size_t per_exemplar = 30, std::size_t d_prime = 28) {
  spec.validate();
  if (exemplars.empty()) throw std::invalid_argument("gen_ablation_set: no exemplars");
  if (per_exemplar < 3) throw std::invalid_argument("gen_ablation_set: need at least 3 samples per exemplar");
  SeededRng rng(spec.seed);
  Folds folds;
  const std::size_t third = per_exemplar / 3;
  const std::size_t n_train = per_exemplar - 2 * third;
  for (std::size_t e = 0; e < exemplars.size(); ++e) {
    const RealVec& ex = exemplars[e];
    if (ex.size() != kIntervalsPerDay)
      throw std::length_error("gen_ablation_set: exemplar " + std::to_string(e) + " is not 48 long");
    if (d_prime == 0 || d_prime > ex.size()) throw std::invalid_argument("gen_ablation_set: bad d_prime");
    const double y = sum(ex);
    for (std::size_t k = 0; k < per_exemplar; ++k) {
      const RealVec full = distort(ex, spec, rng);
      Sample s{RealVec(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(d_prime)), y, "synth",
               "e" + std::to_string(e) + "-" + std::to_string(k), static_cast<int>(e)};
      if (k < n_train) folds.train.push_back(std::move(s));
      else if (k < n_train + third) folds.val.push_back(std::move(s));
      else folds.test.push_back(std::move(s));
    }
  }
  return folds;
}

// ---------------------------------------------------------------------------
// Household-like day generator (stand-in for real exemplar sources)
// ---------------------------------------------------------------------------

struct Routine {
  double base = 0.0;  // overnight load per interval
  std::vector<std::array<double, 3>> bumps;  // center interval, width (intervals), height
};

/// A fixed catalogue of daily routines with distinct timing and volume.
inline std::vector<Routine> household_routines() {
  return {
      {0.15, {{14, 1.5, 1.2}, {38, 3.0, 2.0}}},
      {0.15, {{12, 1.5, 1.0}, {36, 2.0, 2.6}, {42, 1.5, 0.8}}},
      {0.20, {{16, 2.0, 1.6}, {26, 2.0, 1.2}, {39, 2.5, 1.4}}},
      {0.10, {{18, 3.0, 0.8}, {34, 2.0, 1.0}}},
      {0.25, {{14, 1.0, 2.2}, {24, 4.0, 0.9}, {40, 2.0, 1.8}}},
      {0.10, {{10, 1.5, 0.9}, {30, 1.5, 1.8}, {44, 1.5, 1.0}}},
      {0.30, {{20, 5.0, 1.0}, {37, 2.5, 2.4}}},
      {0.12, {{15, 1.2, 1.4}, {21, 1.2, 1.4}, {35, 1.5, 1.1}}},
      {0.18, {{13, 2.0, 0.7}, {27, 3.0, 2.0}, {41, 2.0, 0.9}}},
      {0.08, {{16, 1.0, 0.6}, {33, 3.5, 1.5}}},
      {0.22, {{11, 1.5, 1.8}, {17, 1.5, 1.0}, {38, 1.5, 2.0}, {45, 1.0, 0.6}}},
      {0.14, {{19, 2.0, 2.0}, {31, 2.0, 0.8}, {40, 3.0, 1.2}}},
  };
}

/// `count` synthetic household days. Each day follows one routine (chosen
/// with unequal frequencies), with jittered bump heights, small timing
/// jitter and non-negative noise.
inline std::vector<DaySeries> generate_household_days(std::size_t count, std::uint64_t seed) {
  const auto routines = household_routines();
  std::vector<double> weight;
  double total = 0.0;
  for (std::size_t r = 0; r < routines.size(); ++r) {
    weight.push_back(1.0 + 0.15 * static_cast<double>(routines.size() - r));
    total += weight.back();
  }
  SeededRng rng(seed);
  std::vector<DaySeries> days;
  const auto start = std::chrono::sys_days{std::chrono::year{2013} / 1 / 1};
  for (std::size_t i = 0; i < count; ++i) {
    double pick = rng.uniform(0.0, total);
    std::size_t r = 0;
    while (r + 1 < routines.size() && pick >= weight[r]) pick -= weight[r++];
    const Routine& routine = routines[r];
    RealVec v(kIntervalsPerDay, routine.base);
    for (const auto& [center, width, height] : routine.bumps) {
      const double c = center + 0.5 * rng.normal();
      const double h = height * (1.0 + 0.1 * rng.normal());
      for (std::size_t j = 0; j < kIntervalsPerDay; ++j) {
        const double z = (static_cast<double>(j) - c) / width;
        v[j] += h * std::exp(-0.5 * z * z);
      }
    }
    for (auto& x : v) x = std::max(0.0, x + 0.05 * rng.normal());
    days.push_back({"household", format_date(start + std::chrono::days{static_cast<int>(i)}), std::move(v), 1.0,
                    false});
  }
  return days;
}

/// Writes the recipe needed to regenerate a synthetic set.
inline void write_synth_manifest(std::ostream& os, const DistortionSpec& spec, std::size_t per_exemplar,
                                 std::size_t d_prime, const std::string& exemplar_source,
                                 const std::vector<std::string>& exemplar_ids) {
  os << "tenet-synth v1\n";
  os << "seed = " << spec.seed << '\n';
  os << "ops = " << spec.ops << '\n';
  os << "segment = " << spec.segment << '\n';
  os << "max_shift = " << spec.max_shift << '\n';
  os << "per_exemplar = " << per_exemplar << '\n';
  os << "d_prime = " << d_prime << '\n';
  os << "exemplar_source = " << exemplar_source << '\n';
  for (std::size_t e = 0; e < exemplar_ids.size(); ++e) os << "exemplar." << e << " = " << exemplar_ids[e] << '\n';
}

}  // namespace tenet
