#pragma once

// Temporal embedding versus moving average on a dominant series v and a
// distorted day u: fit one shared embedding so that both map onto v, then
// compare both transforms with distance, intersection and correlation.

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tenet/layers.hpp"
#include "tenet/metrics.hpp"
#include "tenet/numerics.hpp"
#include "tenet/text.hpp"

namespace tenet {

inline const RealVec kCaseStudyV{0, 1, 2, 4, 1, 0};
inline const RealVec kCaseStudyU{1, 4, 2, 1, 0, 0};

/// |E(v) - v|^2 + |E(u) - v|^2 for the embedding E.
inline double embedding_objective(const TemporalEmbeddingLayer& layer, std::span<const double> v,
                                  std::span<const double> u) {
  const RealVec vt = layer.forward(v);
  const RealVec ut = layer.forward(u);
  double f = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) f += (vt[j] - v[j]) * (vt[j] - v[j]) + (ut[j] - v[j]) * (ut[j] - v[j]);
  return f;
}

inline TemporalEmbeddingGrad embedding_gradient(const TemporalEmbeddingLayer& layer, std::span<const double> v,
                                                std::span<const double> u) {
  const RealVec vt = layer.forward(v);
  const RealVec ut = layer.forward(u);
  RealVec rv(v.size()), ru(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    rv[j] = 2.0 * (vt[j] - v[j]);
    ru[j] = 2.0 * (ut[j] - v[j]);
  }
  TemporalEmbeddingGrad g = layer.backward(v, rv);
  const TemporalEmbeddingGrad gu = layer.backward(u, ru);
  for (std::size_t k = 0; k < g.weights.size(); ++k)
    for (std::size_t j = 0; j < g.weights[k].size(); ++j) g.weights[k][j] += gu.weights[k][j];
  for (std::size_t j = 0; j < g.bias.size(); ++j) g.bias[j] += gu.bias[j];
  return g;
}

struct EmbeddingFit {
  TemporalEmbeddingLayer layer;  // offsets -1, 0, +1 and bias
  double objective = 0.0;
  RealVec objective_trace;  // value after each accepted step
  RealVec vt;
  RealVec ut;
};

/// Full-batch gradient descent from the all-ones neighbor initialization.
/// A step that would raise the objective is rejected and the rate halved,
/// so accepted objectives never increase.
inline EmbeddingFit solve_embedding(std::span<const double> v, std::span<const double> u, double learning_rate = 0.05,
                                    std::size_t iterations = 20000) {
  detail::require_same_length(v.size(), u.size(), "solve_embedding");
  if (v.size() < 2) throw std::invalid_argument("solve_embedding: series must have at least 2 entries");
  EmbeddingFit fit{TemporalEmbeddingLayer::neighbor_sum(v.size(), 1), 0.0, {}, {}, {}};
  double f = embedding_objective(fit.layer, v, u);
  double lr = learning_rate;
  for (std::size_t it = 0; it < iterations && f > 0.0; ++it) {
    const TemporalEmbeddingGrad g = embedding_gradient(fit.layer, v, u);
    while (lr > 1e-300) {
      TemporalEmbeddingLayer trial = fit.layer;
      trial.step(g, lr);
      const double ft = embedding_objective(trial, v, u);
      if (ft <= f) {
        fit.layer = std::move(trial);
        f = ft;
        fit.objective_trace.push_back(f);
        break;
      }
      lr *= 0.5;
    }
    if (lr <= 1e-300) break;
  }
  fit.objective = f;
  fit.vt = fit.layer.forward(v);
  fit.ut = fit.layer.forward(u);
  return fit;
}

struct RelationRow {
  std::string label;
  double distance = 0.0;
  double intersection = 0.0;
  std::optional<double> pearson;  // empty when either series is constant
};

struct CaseStudyTable {
  RealVec v, u, vt, ut, vs, us;
  double objective = 0.0;
  std::vector<RelationRow> rows;
};

inline RelationRow relation(std::string label, std::span<const double> a, std::span<const double> b) {
  RelationRow row{std::move(label), l2_distance(a, b), intersection(a, b), std::nullopt};
  try {
    row.pearson = pearson(a, b);
  } catch (const UndefinedMetric&) {
  }
  return row;
}

/// The comparison rows (v,u), (v,v^t), (v^t,u^t), (v,v^s), (v^s,u^s), where
/// ^t is the fitted embedding and ^s a width-3 moving average.
inline CaseStudyTable table2_report(std::span<const double> v, std::span<const double> u,
                                    double learning_rate = 0.05, std::size_t iterations = 20000) {
  const EmbeddingFit fit = solve_embedding(v, u, learning_rate, iterations);
  CaseStudyTable t;
  t.v.assign(v.begin(), v.end());
  t.u.assign(u.begin(), u.end());
  t.vt = fit.vt;
  t.ut = fit.ut;
  t.vs = moving_average(v, 3);
  t.us = moving_average(u, 3);
  t.objective = fit.objective;
  t.rows.push_back(relation("v,u", t.v, t.u));
  t.rows.push_back(relation("v,v^t", t.v, t.vt));
  t.rows.push_back(relation("v^t,u^t", t.vt, t.ut));
  t.rows.push_back(relation("v,v^s", t.v, t.vs));
  t.rows.push_back(relation("v^s,u^s", t.vs, t.us));
  return t;
}

namespace detail {
inline std::string series_text(const RealVec& x) {
  std::string s = "<";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += text::format_fixed(std::abs(x[i]) < 5e-3 ? 0.0 : x[i], 2);
  }
  return s + ">";
}
}  // namespace detail

inline void write_casestudy_text(std::ostream& os, const CaseStudyTable& t) {
  os << "v    " << detail::series_text(t.v) << "    u    " << detail::series_text(t.u) << '\n';
  os << "v^t  " << detail::series_text(t.vt) << "    u^t  " << detail::series_text(t.ut) << '\n';
  os << "v^s  " << detail::series_text(t.vs) << "    u^s  " << detail::series_text(t.us) << '\n';
  os << "embedding objective " << text::format_fixed(t.objective, 8) << "\n\n";
  os << "pair         distance  intersection   pearson\n";
  for (const auto& r : t.rows) {
    std::string label = r.label;
    label.resize(10, ' ');
    std::string d = text::format_fixed(r.distance, 3), i = text::format_fixed(r.intersection, 3);
    std::string p = r.pearson ? text::format_fixed(*r.pearson, 3) : "undefined";
    os << label << std::string(11 - std::min<std::size_t>(11, d.size()), ' ') << d
       << std::string(14 - std::min<std::size_t>(14, i.size()), ' ') << i
       << std::string(10 - std::min<std::size_t>(10, p.size()), ' ') << p << '\n';
  }
}

inline void write_casestudy_csv(std::ostream& os, const CaseStudyTable& t) {
  os << "pair,distance,intersection,pearson\n";
  for (const auto& r : t.rows)
    os << '"' << r.label << "\"," << text::format_fixed(r.distance, 6) << ',' << text::format_fixed(r.intersection, 6)
       << ',' << (r.pearson ? text::format_fixed(*r.pearson, 6) : std::string("")) << '\n';
}

}  // namespace tenet
