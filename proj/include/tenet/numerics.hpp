#pragma once

// Dense double-precision vector/matrix kernels and the deterministic RNG
// shared by the rest of the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tenet {

using RealVec = std::vector<double>;

/// Row-major dense matrix.
class RealMat {
 public:
  RealMat() = default;
  RealMat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static RealMat identity(std::size_t n) {
    RealMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  RealVec& values() noexcept { return data_; }
  const RealVec& values() const noexcept { return data_; }

  friend bool operator==(const RealMat&, const RealMat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  RealVec data_;
};

namespace detail {
inline void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::length_error(std::string(what) + ": length mismatch (" + std::to_string(a) +
                            " vs " + std::to_string(b) + ")");
  }
}
}  // namespace detail

/// Sliding inner product over every full window:
/// out[j] = sum_p weights[p] * signal[j + p], length n - k + 1.
inline RealVec correlate_valid(std::span<const double> signal, std::span<const double> weights) {
  const std::size_t n = signal.size();
  const std::size_t k = weights.size();
  if (k == 0) throw std::length_error("correlate_valid: empty kernel");
  if (k > n) throw std::length_error("correlate_valid: kernel longer than signal");
  RealVec out(n - k + 1, 0.0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) acc += weights[p] * signal[j + p];
    out[j] = acc;
  }
  return out;
}

/// Full cross-correlation with zero padding:
/// out[j] = sum_p weights[p] * signal[j + p - (k - 1)], length n + k - 1.
/// Equivalently the full convolution of `signal` with the reversed weights.
inline RealVec correlate_full(std::span<const double> signal, std::span<const double> weights) {
  const std::size_t n = signal.size();
  const std::size_t k = weights.size();
  if (n == 0 || k == 0) throw std::length_error("correlate_full: empty input");
  RealVec out(n + k - 1, 0.0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    double acc = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      // signal index j + p - (k - 1), skipped when outside [0, n)
      if (j + p < k - 1) continue;
      const std::size_t s = j + p - (k - 1);
      if (s >= n) break;
      acc += weights[p] * signal[s];
    }
    out[j] = acc;
  }
  return out;
}

/// Row vector times matrix: out[c] = sum_r a[r] * m(r, c).
inline RealVec mat_vec(std::span<const double> a, const RealMat& m) {
  detail::require_same_length(a.size(), m.rows(), "mat_vec");
  RealVec out(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += ar * row[c];
  }
  return out;
}

/// Matrix times column vector: out[r] = sum_c m(r, c) * b[c].
inline RealVec mat_times(const RealMat& m, std::span<const double> b) {
  detail::require_same_length(b.size(), m.cols(), "mat_times");
  RealVec out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += row[c] * b[c];
    out[r] = acc;
  }
  return out;
}

inline RealMat vec_outer(std::span<const double> a, std::span<const double> b) {
  RealMat m(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = a[r] * b[c];
  return m;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline RealVec add(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "add");
  RealVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline RealVec mul(std::span<const double> a, std::span<const double> b) {
  detail::require_same_length(a.size(), b.size(), "mul");
  RealVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

inline RealVec scale(std::span<const double> a, double s) {
  RealVec out(a.begin(), a.end());
  for (auto& v : out) v *= s;
  return out;
}

inline double logistic(double z) {
  // split by sign so exp never overflows
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline RealVec tanh(std::span<const double> a) {
  RealVec out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double v) { return std::tanh(v); });
  return out;
}

inline RealVec logistic(std::span<const double> a) {
  RealVec out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double v) { return logistic(v); });
  return out;
}

inline RealVec sign(std::span<const double> a) {
  RealVec out(a.size());
  std::transform(a.begin(), a.end(), out.begin(), [](double v) { return sign(v); });
  return out;
}

inline RealVec reversed(std::span<const double> a) { return RealVec(a.rbegin(), a.rend()); }

inline double sum(std::span<const double> a) {
  double acc = 0.0;
  for (double v : a) acc += v;
  return acc;
}

inline bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

/// SplitMix64 finalizer; used to derive independent seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
  return mix64(mix64(base) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

/// xoshiro256** seeded through SplitMix64. All derived draws (reals, bounded
/// integers, shuffles) are implemented here rather than through <random>
/// distributions, whose output differs between standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9E3779B97F4A7C15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("uniform: lo > hi");
    if (lo == hi) return lo;
    const double v = lo + (hi - lo) * next_unit();
    return v < hi ? v : lo;
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("below: zero bound");
    const std::uint64_t limit = (~std::uint64_t{0} / bound) * bound;
    std::uint64_t r = next_u64();
    while (r >= limit) r = next_u64();
    return r % bound;
  }

  double normal() {
    // Box-Muller; one value per call keeps the stream simple to reason about.
    double u1 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t state_[4]{};
};

inline RealVec rng_uniform(SeededRng& rng, double lo, double hi, std::size_t n) {
  if (lo > hi) throw std::invalid_argument("rng_uniform: lo > hi");
  RealVec out(n);
  for (auto& v : out) v = rng.uniform(lo, hi);
  return out;
}

}  // namespace tenet
