#pragma once

// The four TeNet layers: temporal embedding, convolution/max-pool/tanh,
// dense sigmoid, and the l1-regularized least-squares output. Forward passes
// are const; values backward needs are returned by forward, not cached.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "tenet/numerics.hpp"

namespace tenet {

// ---------------------------------------------------------------------------
// Temporal embedding
// ---------------------------------------------------------------------------

struct TemporalEmbeddingGrad {
  std::vector<RealVec> weights;  // indexed like TemporalEmbeddingLayer::weights
  RealVec bias;
};

/// z[j] = sum_o w[o][j] * a[j + o] + b[j] for o in [-half_window, half_window].
/// Entries of w[o] whose source index j + o falls outside the input are held
/// at zero: they start at zero and always receive a zero gradient.
class TemporalEmbeddingLayer {
 public:
  TemporalEmbeddingLayer() = default;
  TemporalEmbeddingLayer(std::size_t dim, std::size_t half_window)
      : dim_(dim),
        half_window_(half_window),
        weights_(2 * half_window + 1, RealVec(dim, 0.0)),
        bias_(dim, 0.0) {}

  /// Every in-range neighbor weight set to one (the constant-mask initialization).
  static TemporalEmbeddingLayer neighbor_sum(std::size_t dim, std::size_t half_window) {
    TemporalEmbeddingLayer layer(dim, half_window);
    for (int o = -layer.half(); o <= layer.half(); ++o)
      for (std::size_t j = 0; j < dim; ++j)
        if (layer.in_range(j, o)) layer.offset(o)[j] = 1.0;
    return layer;
  }

  /// Center weights one, neighbors zero: the identity map.
  static TemporalEmbeddingLayer identity(std::size_t dim, std::size_t half_window) {
    TemporalEmbeddingLayer layer(dim, half_window);
    std::fill(layer.offset(0).begin(), layer.offset(0).end(), 1.0);
    return layer;
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t half_window() const noexcept { return half_window_; }
  int half() const noexcept { return static_cast<int>(half_window_); }

  bool in_range(std::size_t j, int o) const noexcept {
    const auto src = static_cast<long long>(j) + o;
    return src >= 0 && src < static_cast<long long>(dim_);
  }

  RealVec& offset(int o) { return weights_.at(static_cast<std::size_t>(o + half())); }
  const RealVec& offset(int o) const { return weights_.at(static_cast<std::size_t>(o + half())); }

  std::vector<RealVec>& weights() noexcept { return weights_; }
  const std::vector<RealVec>& weights() const noexcept { return weights_; }
  RealVec& bias() noexcept { return bias_; }
  const RealVec& bias() const noexcept { return bias_; }

  RealVec forward(std::span<const double> a) const {
    detail::require_same_length(a.size(), dim_, "TemporalEmbeddingLayer::forward");
    RealVec z(bias_);
    for (int o = -half(); o <= half(); ++o) {
      const RealVec& w = offset(o);
      for (std::size_t j = 0; j < dim_; ++j)
        if (in_range(j, o)) z[j] += w[j] * a[static_cast<std::size_t>(static_cast<long long>(j) + o)];
    }
    return z;
  }

  /// `delta` is dJ/dz for this layer (activation is the identity).
  TemporalEmbeddingGrad backward(std::span<const double> a, std::span<const double> delta) const {
    detail::require_same_length(a.size(), dim_, "TemporalEmbeddingLayer::backward");
    detail::require_same_length(delta.size(), dim_, "TemporalEmbeddingLayer::backward");
    TemporalEmbeddingGrad g{std::vector<RealVec>(weights_.size(), RealVec(dim_, 0.0)),
                            RealVec(delta.begin(), delta.end())};
    for (int o = -half(); o <= half(); ++o) {
      RealVec& gw = g.weights[static_cast<std::size_t>(o + half())];
      for (std::size_t j = 0; j < dim_; ++j)
        if (in_range(j, o)) gw[j] = delta[j] * a[static_cast<std::size_t>(static_cast<long long>(j) + o)];
    }
    return g;
  }

  void step(const TemporalEmbeddingGrad& g, double learning_rate) {
    for (std::size_t k = 0; k < weights_.size(); ++k)
      for (std::size_t j = 0; j < dim_; ++j) weights_[k][j] -= learning_rate * g.weights[k][j];
    for (std::size_t j = 0; j < dim_; ++j) bias_[j] -= learning_rate * g.bias[j];
  }

  /// Stored weights per offset times dim plus bias, masked entries included.
  std::size_t parameter_count() const noexcept { return weights_.size() * dim_ + dim_; }

 private:
  std::size_t dim_ = 0;
  std::size_t half_window_ = 0;
  std::vector<RealVec> weights_;
  RealVec bias_;
};

// ---------------------------------------------------------------------------
// Convolution, max-pool (width 2), tanh
// ---------------------------------------------------------------------------

inline constexpr std::size_t kPoolWidth = 2;

inline std::size_t pooled_length(std::size_t input_dim, std::size_t filter_len) {
  if (filter_len == 0 || filter_len > input_dim) return 0;
  return (input_dim - filter_len + 1) / kPoolWidth;
}

struct ConvPoolForward {
  RealVec output;                   // n_f * pooled, filter-major
  std::vector<std::size_t> argmax;  // per output entry, index into that filter's conv output
};

struct ConvPoolGrad {
  RealMat filters;
  RealVec bias;
  RealVec delta_in;
};

class ConvPoolLayer {
 public:
  ConvPoolLayer() = default;
  ConvPoolLayer(std::size_t n_filters, std::size_t filter_len)
      : filters_(n_filters, filter_len), bias_(n_filters, 0.0) {}

  /// Filters drawn from U(-r, r), r = sqrt(6 / (filter_len + 1)); biases zero.
  static ConvPoolLayer random(std::size_t n_filters, std::size_t filter_len, SeededRng& rng) {
    ConvPoolLayer layer(n_filters, filter_len);
    const double r = std::sqrt(6.0 / static_cast<double>(filter_len + 1));
    for (auto& v : layer.filters_.values()) v = rng.uniform(-r, r);
    return layer;
  }

  std::size_t n_filters() const noexcept { return filters_.rows(); }
  std::size_t filter_len() const noexcept { return filters_.cols(); }
  RealMat& filters() noexcept { return filters_; }
  const RealMat& filters() const noexcept { return filters_; }
  RealVec& bias() noexcept { return bias_; }
  const RealVec& bias() const noexcept { return bias_; }

  std::size_t output_dim(std::size_t input_dim) const {
    return n_filters() * pooled_length(input_dim, filter_len());
  }

  ConvPoolForward forward(std::span<const double> a) const {
    if (a.size() < filter_len()) throw std::length_error("ConvPoolLayer::forward: input shorter than filter");
    const std::size_t pooled = pooled_length(a.size(), filter_len());
    ConvPoolForward out{RealVec(n_filters() * pooled), std::vector<std::size_t>(n_filters() * pooled)};
    for (std::size_t i = 0; i < n_filters(); ++i) {
      const RealVec conv = correlate_valid(a, filters_.row(i));
      for (std::size_t m = 0; m < pooled; ++m) {
        // trailing odd element is never pooled; ties go to the lower index
        std::size_t best = kPoolWidth * m;
        for (std::size_t q = 1; q < kPoolWidth; ++q)
          if (conv[kPoolWidth * m + q] > conv[best]) best = kPoolWidth * m + q;
        out.output[i * pooled + m] = std::tanh(conv[best] + bias_[i]);
        out.argmax[i * pooled + m] = best;
      }
    }
    return out;
  }

  ConvPoolGrad backward(std::span<const double> a, const ConvPoolForward& fwd,
                        std::span<const double> delta_out) const {
    const std::size_t pooled = pooled_length(a.size(), filter_len());
    const std::size_t expected = n_filters() * pooled;
    if (fwd.output.size() != expected || fwd.argmax.size() != expected)
      throw std::logic_error("ConvPoolLayer::backward: forward cache does not match input");
    detail::require_same_length(delta_out.size(), expected, "ConvPoolLayer::backward");

    const std::size_t conv_len = a.size() - filter_len() + 1;
    ConvPoolGrad g{RealMat(n_filters(), filter_len()), RealVec(n_filters(), 0.0), RealVec(a.size(), 0.0)};
    RealVec unpooled(conv_len);
    for (std::size_t i = 0; i < n_filters(); ++i) {
      std::fill(unpooled.begin(), unpooled.end(), 0.0);
      for (std::size_t m = 0; m < pooled; ++m) {
        const std::size_t k = i * pooled + m;
        const double t = fwd.output[k];
        unpooled[fwd.argmax[k]] += delta_out[k] * (1.0 - t * t);
      }
      const RealVec gf = correlate_valid(a, unpooled);
      std::copy(gf.begin(), gf.end(), g.filters.row(i).begin());
      g.bias[i] = sum(unpooled);
      const RealVec back = correlate_full(unpooled, reversed(filters_.row(i)));
      for (std::size_t t = 0; t < a.size(); ++t) g.delta_in[t] += back[t];
    }
    return g;
  }

  void step(const ConvPoolGrad& g, double learning_rate) {
    auto& w = filters_.values();
    const auto& gw = g.filters.values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * gw[k];
    for (std::size_t i = 0; i < bias_.size(); ++i) bias_[i] -= learning_rate * g.bias[i];
  }

 private:
  RealMat filters_;  // one filter per row
  RealVec bias_;
};

// ---------------------------------------------------------------------------
// Dense sigmoid
// ---------------------------------------------------------------------------

struct SigmoidGrad {
  RealMat weights;
  RealVec bias;
  RealVec delta_in;
};

class SigmoidLayer {
 public:
  SigmoidLayer() = default;
  SigmoidLayer(std::size_t in_dim, std::size_t out_dim) : weights_(in_dim, out_dim), bias_(out_dim, 0.0) {}

  /// Weights drawn from U(-r, r), r = sqrt(6 / (in + out)); biases zero.
  static SigmoidLayer random(std::size_t in_dim, std::size_t out_dim, SeededRng& rng) {
    SigmoidLayer layer(in_dim, out_dim);
    const double r = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
    for (auto& v : layer.weights_.values()) v = rng.uniform(-r, r);
    return layer;
  }

  std::size_t in_dim() const noexcept { return weights_.rows(); }
  std::size_t out_dim() const noexcept { return weights_.cols(); }
  RealMat& weights() noexcept { return weights_; }
  const RealMat& weights() const noexcept { return weights_; }
  RealVec& bias() noexcept { return bias_; }
  const RealVec& bias() const noexcept { return bias_; }

  RealVec forward(std::span<const double> a) const {
    RealVec z = mat_vec(a, weights_);
    for (std::size_t c = 0; c < z.size(); ++c) z[c] = logistic(z[c] + bias_[c]);
    return z;
  }

  /// `output` is the value forward() returned for `a`.
  SigmoidGrad backward(std::span<const double> a, std::span<const double> output,
                       std::span<const double> delta_out) const {
    detail::require_same_length(a.size(), in_dim(), "SigmoidLayer::backward");
    detail::require_same_length(output.size(), out_dim(), "SigmoidLayer::backward");
    detail::require_same_length(delta_out.size(), out_dim(), "SigmoidLayer::backward");
    RealVec dz(out_dim());
    for (std::size_t c = 0; c < dz.size(); ++c) dz[c] = delta_out[c] * output[c] * (1.0 - output[c]);
    return {vec_outer(a, dz), dz, mat_times(weights_, dz)};
  }

  void step(const SigmoidGrad& g, double learning_rate) {
    auto& w = weights_.values();
    const auto& gw = g.weights.values();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= learning_rate * gw[k];
    for (std::size_t c = 0; c < bias_.size(); ++c) bias_[c] -= learning_rate * g.bias[c];
  }

 private:
  RealMat weights_;
  RealVec bias_;
};

// ---------------------------------------------------------------------------
// l1-regularized least squares
// ---------------------------------------------------------------------------

struct OutputGrad {
  RealVec weights;
  double bias = 0.0;
  RealVec delta_in;
};

/// y_hat = a . w + b,  J = 0.5 (y_hat - y)^2 + lambda * |w|_1.
class L1OutputLayer {
 public:
  L1OutputLayer() = default;
  L1OutputLayer(std::size_t in_dim, double lambda) : weights_(in_dim, 0.0) { set_lambda(lambda); }

  std::size_t in_dim() const noexcept { return weights_.size(); }
  RealVec& weights() noexcept { return weights_; }
  const RealVec& weights() const noexcept { return weights_; }
  double& bias() noexcept { return bias_; }
  double bias() const noexcept { return bias_; }
  double lambda() const noexcept { return lambda_; }
  void set_lambda(double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("L1OutputLayer: lambda must be >= 0");
    lambda_ = lambda;
  }

  double forward(std::span<const double> a) const { return dot(a, weights_) + bias_; }

  double penalty() const {
    double l1 = 0.0;
    for (double w : weights_) l1 += std::abs(w);
    return lambda_ * l1;
  }

  double cost(double prediction, double target) const {
    const double r = prediction - target;
    return 0.5 * r * r + penalty();
  }

  /// Gradient of cost(); the l1 term contributes lambda * sign(w) with sign(0) = 0.
  OutputGrad backward(std::span<const double> a, double target) const {
    detail::require_same_length(a.size(), in_dim(), "L1OutputLayer::backward");
    const double residual = forward(a) - target;
    OutputGrad g{RealVec(in_dim()), residual, RealVec(in_dim())};
    for (std::size_t c = 0; c < in_dim(); ++c) {
      g.weights[c] = a[c] * residual + lambda_ * sign(weights_[c]);
      g.delta_in[c] = residual * weights_[c];
    }
    return g;
  }

  void step(const OutputGrad& g, double learning_rate) {
    for (std::size_t c = 0; c < weights_.size(); ++c) weights_[c] -= learning_rate * g.weights[c];
    bias_ -= learning_rate * g.bias;
  }

 private:
  RealVec weights_;
  double bias_ = 0.0;
  double lambda_ = 0.0;
};

}  // namespace tenet
