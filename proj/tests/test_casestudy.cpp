#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tenet/casestudy.hpp"

using namespace tenet;

namespace {

const RealVec& kV = kCaseStudyV;
const RealVec& kU = kCaseStudyU;

const RelationRow& row(const CaseStudyTable& t, const std::string& label) {
  for (const auto& r : t.rows)
    if (r.label == label) return r;
  throw std::out_of_range(label);
}

}  // namespace

TEST(SolveEmbedding, EqualSeriesReachIdentity) {
  const EmbeddingFit fit = solve_embedding(kV, kV);
  EXPECT_LE(fit.objective, 1e-6);
  for (std::size_t j = 0; j < kV.size(); ++j) EXPECT_NEAR(fit.vt[j], kV[j], 1e-3);
}

TEST(SolveEmbedding, ConstantSeries) {
  const RealVec c(6, 2.5);
  const EmbeddingFit fit = solve_embedding(c, c);
  EXPECT_LE(fit.objective, 1e-6);
  for (double x : fit.vt) EXPECT_NEAR(x, 2.5, 1e-3);
}

TEST(SolveEmbedding, CaseStudyThresholds) {
  const EmbeddingFit fit = solve_embedding(kV, kU);
  EXPECT_LT(fit.objective, 0.01);
  EXPECT_LE(l2_distance(fit.vt, kV), 0.1);
  EXPECT_LE(l2_distance(fit.ut, kV), 0.1);
  EXPECT_GE(intersection(fit.vt, fit.ut), 7.9);
  EXPECT_GE(pearson(fit.vt, fit.ut), 0.99);
}

TEST(SolveEmbedding, ObjectiveNeverIncreases) {
  const EmbeddingFit fit = solve_embedding(kV, kU, 0.5, 2000);
  ASSERT_FALSE(fit.objective_trace.empty());
  EXPECT_LE(fit.objective_trace.front(), embedding_objective(TemporalEmbeddingLayer::neighbor_sum(6, 1), kV, kU));
  for (std::size_t i = 1; i < fit.objective_trace.size(); ++i)
    EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1]);
}

TEST(SolveEmbedding, GradientMatchesFiniteDifferences) {
  SeededRng rng(3);
  TemporalEmbeddingLayer layer = TemporalEmbeddingLayer::neighbor_sum(6, 1);
  for (int o = -1; o <= 1; ++o)
    for (std::size_t j = 0; j < 6; ++j)
      if (layer.in_range(j, o)) layer.offset(o)[j] = rng.uniform(-1, 1);
  for (auto& b : layer.bias()) b = rng.uniform(-1, 1);
  const auto g = embedding_gradient(layer, kV, kU);
  auto check = [&](double* p, double analytic) {
    const double keep = *p, h = 1e-6;
    *p = keep + h;
    const double up = embedding_objective(layer, kV, kU);
    *p = keep - h;
    const double down = embedding_objective(layer, kV, kU);
    *p = keep;
    const double numeric = (up - down) / (2 * h);
    EXPECT_LE(std::abs(numeric - analytic), 1e-5 * std::max({1.0, std::abs(numeric), std::abs(analytic)}));
  };
  for (int o = -1; o <= 1; ++o)
    for (std::size_t j = 0; j < 6; ++j)
      if (layer.in_range(j, o)) check(&layer.offset(o)[j], g.weights[static_cast<std::size_t>(o + 1)][j]);
  for (std::size_t j = 0; j < 6; ++j) check(&layer.bias()[j], g.bias[j]);
}

TEST(SolveEmbedding, RejectsBadInput) {
  EXPECT_THROW(solve_embedding(RealVec{1}, RealVec{1}), std::invalid_argument);
  EXPECT_THROW(solve_embedding(RealVec{1, 2}, RealVec{1, 2, 3}), std::length_error);
}

TEST(RelationTable, FiveRowsInOrder) {
  const CaseStudyTable t = table2_report(kV, kU);
  ASSERT_EQ(t.rows.size(), 5u);
  EXPECT_EQ(t.rows[0].label, "v,u");
  EXPECT_EQ(t.rows[4].label, "v^s,u^s");
}

TEST(RelationTable, MovingAverageRowsMatchReference) {
  const CaseStudyTable t = table2_report(kV, kU);
  const RealVec want_vs{0.5, 1, 2.33, 2.33, 1.67, 0.5}, want_us{2.5, 2.33, 2.33, 1, 0.33, 0};
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_NEAR(t.vs[i], want_vs[i], 0.01);
    EXPECT_NEAR(t.us[i], want_us[i], 0.01);
  }
  const auto& vu = row(t, "v,u");
  EXPECT_NEAR(vu.distance, 4.5, 0.05);
  EXPECT_NEAR(vu.intersection, 4.0, 0.05);
  EXPECT_NEAR(*vu.pearson, 0.11, 0.05);
  const auto& vvs = row(t, "v,v^s");
  EXPECT_NEAR(vvs.distance, 2.0, 0.05);
  EXPECT_NEAR(vvs.intersection, 6.3, 0.05);
  EXPECT_NEAR(*vvs.pearson, 0.87, 0.05);
  const auto& su = row(t, "v^s,u^s");
  EXPECT_NEAR(su.distance, 3.1, 0.05);
  EXPECT_NEAR(su.intersection, 5.2, 0.05);
  EXPECT_NEAR(*su.pearson, 0.02, 0.05);
}

TEST(RelationTable, RowsMatchOracles) {
  const CaseStudyTable t = table2_report(kV, kU);
  EXPECT_NEAR(row(t, "v^s,u^s").distance, std::sqrt(oracle::sqdist(t.vs, t.us)), 1e-12);
  EXPECT_NEAR(*row(t, "v^t,u^t").pearson, oracle::pearson(t.vt, t.ut), 1e-12);
}

TEST(RelationTable, EqualInputs) {
  const CaseStudyTable t = table2_report(kV, kV);
  EXPECT_EQ(row(t, "v,u").distance, 0.0);
  EXPECT_NEAR(*row(t, "v,u").pearson, 1.0, 1e-12);
  EXPECT_EQ(row(t, "v^s,u^s").distance, 0.0);
  EXPECT_NEAR(row(t, "v^t,u^t").distance, 0.0, 1e-9);
}

TEST(RelationTable, ConstantInputsLeavePearsonUndefined) {
  const CaseStudyTable t = table2_report(RealVec(6, 1.0), RealVec(6, 1.0));
  EXPECT_FALSE(row(t, "v,u").pearson.has_value());
  std::stringstream ss;
  write_casestudy_text(ss, t);
  EXPECT_NE(ss.str().find("undefined"), std::string::npos);
}

TEST(RelationTable, Deterministic) {
  std::stringstream a, b;
  write_casestudy_csv(a, table2_report(kV, kU));
  write_casestudy_csv(b, table2_report(kV, kU));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "pair,distance,intersection,pearson");
}
