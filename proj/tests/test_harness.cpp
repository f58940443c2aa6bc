#include <gtest/gtest.h>

#include <sstream>

#include "tenet/harness.hpp"

using namespace tenet;

namespace {

TeNetConfig quick_config() {
  TeNetConfig c;
  c.d_prime = 8;
  c.n_f = 2;
  c.d_f = 3;
  c.n3 = 4;
  c.epochs = 40;
  c.patience = 10;
  c.seed = 3;
  return c;
}

SampleSet linear_samples(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  SampleSet out;
  for (std::size_t i = 0; i < n; ++i) {
    RealVec x = rng_uniform(rng, 0.5, 2, 8);
    out.push_back({x, 2.0 * sum(x), "s", "d" + std::to_string(i), -1});
  }
  return out;
}

CandidateSets tiny_grid() {
  CandidateSets g;
  g.d_te = {1};
  g.n_f = {2, 3};
  g.d_f = {3};
  g.n3 = {4};
  g.lambda = {0.01};
  g.learning_rate = {0.01, 0.02};
  return g;
}

}  // namespace

TEST(GuardedFold, CountsReleases) {
  GuardedFold f(SampleSet(3));
  int seen = 0;
  f.set_observer([&] { ++seen; });
  EXPECT_EQ(f.releases(), 0u);
  EXPECT_EQ(f.release().size(), 3u);
  EXPECT_EQ(f.releases(), 1u);
  EXPECT_EQ(seen, 1);
}

TEST(CrossValidate, ReleasesEachTestFoldOnceAfterTraining) {
  auto splits = make_splits(linear_samples(30, 1), 7, 2);
  for (auto& s : splits) {
    auto* fold = &s.test;
    fold->set_observer([fold] { EXPECT_EQ(fold->releases(), 1u); });
  }
  const EvalReport r = cross_validate(splits, quick_config());
  EXPECT_EQ(r.repetitions.size(), 2u);
  for (const auto& s : splits) EXPECT_EQ(s.test.releases(), 1u);
}

TEST(CrossValidate, SingleRepetition) {
  const EvalReport r = cross_validate(linear_samples(30, 2), quick_config(), 1);
  ASSERT_EQ(r.repetitions.size(), 1u);
  EXPECT_EQ(r.mean.mre, r.repetitions[0].mre);
  EXPECT_EQ(r.mean.n, 10u);
}

TEST(CrossValidate, DeterministicGivenSeed) {
  const SampleSet data = linear_samples(30, 3);
  const EvalReport a = cross_validate(data, quick_config(), 2), b = cross_validate(data, quick_config(), 2);
  EXPECT_EQ(a.mean.mre, b.mean.mre);
  EXPECT_EQ(a.mean.mse, b.mean.mse);
  EXPECT_EQ(a.mean.hr20, b.mean.hr20);
}

TEST(CrossValidate, ConstantTargetReachesFloor) {
  SampleSet data = linear_samples(30, 4);
  for (auto& s : data) s.y = 5.0;
  TeNetConfig c = quick_config();
  c.learning_rate = 0.05;
  c.epochs = 400;
  c.patience = 400;
  const EvalReport r = cross_validate(data, c, 1);
  EXPECT_LT(r.mean.mre, 0.02);
  EXPECT_EQ(r.mean.hr20, 100.0);
}

TEST(CrossValidate, MetricsWithinRange) {
  const EvalReport r = cross_validate(linear_samples(30, 5), quick_config(), 2);
  for (const auto& m : r.repetitions) {
    EXPECT_GE(m.hr20, 0.0);
    EXPECT_LE(m.hr20, 100.0);
    EXPECT_LE(m.hr20, m.hr30);
    EXPECT_GE(m.mre, 0.0);
    EXPECT_GE(m.mse, 0.0);
  }
}

TEST(Ablation, ComparableOnSinglePattern) {
  SampleSet data;
  const RealVec pattern{0.2, 0.4, 1.0, 1.5, 0.8, 0.3, 0.2, 0.2};
  SeededRng rng(9);
  for (int i = 0; i < 45; ++i) {
    const double k = rng.uniform(0.8, 1.2);
    data.push_back({scale(pattern, k), 10.0 * k, "s", "", -1});
  }
  TeNetConfig c = quick_config();
  c.epochs = 200;
  c.patience = 20;
  const auto splits = make_splits(data, 1, 1);
  const double te = cross_validate(splits, c).mean.mre;
  const auto splits2 = make_splits(data, 1, 1);
  const double cnn = ablation_cnn(splits2, c).mean.mre;
  EXPECT_LE(te, 2.0 * cnn + 0.01);
  EXPECT_LE(cnn, 2.0 * te + 0.01);
}

TEST(GridSearch, FullGridSize) { EXPECT_EQ(CandidateSets{}.size(), 288u); }

TEST(GridSearch, NoTestAccessBeforeSelection) {
  auto splits = make_splits(linear_samples(30, 6), 2, 2);
  const CandidateSets grid = tiny_grid();
  std::size_t finished = 0;
  for (auto& s : splits) s.test.set_observer([&] { EXPECT_EQ(finished, grid.size()); });
  GridSearchOptions opt;
  opt.progress = [&](std::size_t done, std::size_t) { finished = done; };
  const GridSearchResult r = grid_search(grid, quick_config(), splits, opt);
  EXPECT_EQ(finished, grid.size());
  for (const auto& s : splits) EXPECT_EQ(s.test.releases(), 1u);
  EXPECT_EQ(r.candidates.size(), 4u);
  EXPECT_EQ(r.models.size(), 2u);
}

TEST(GridSearch, SelectsLowestValidationMre) {
  const auto splits = make_splits(linear_samples(30, 7), 2, 2);
  const GridSearchResult r = grid_search(tiny_grid(), quick_config(), splits);
  for (const auto& c : r.candidates) EXPECT_GE(c.val_mre, r.candidates[r.best_index].val_mre);
  EXPECT_EQ(config_key(r.best), config_key(r.candidates[r.best_index].config));
}

TEST(GridSearch, SingleCandidateEqualsCrossValidate) {
  CandidateSets one = tiny_grid();
  one.n_f = {2};
  one.learning_rate = {0.01};
  TeNetConfig base = quick_config();
  const auto splits = make_splits(linear_samples(30, 8), 4, 2);
  const GridSearchResult g = grid_search(one, base, splits);
  const auto splits2 = make_splits(linear_samples(30, 8), 4, 2);
  base.n_f = 2;
  base.learning_rate = 0.01;
  base.lambda = 0.01;
  const EvalReport cv = cross_validate(splits2, base);
  EXPECT_EQ(g.report.mean.mre, cv.mean.mre);
  EXPECT_EQ(g.report.mean.mse, cv.mean.mse);
}

TEST(GridSearch, TieBreaks) {
  TeNetConfig a, b, c;
  a.n_f = 30;
  b.n_f = 20;
  c.n_f = 40;
  EXPECT_EQ(select_best({{a, 0.2, 50}, {b, 0.1, 40}, {c, 0.3, 90}}), 1u);
  EXPECT_EQ(select_best({{a, 0.1, 50}, {b, 0.1, 40}, {c, 0.1, 60}}), 2u);
  EXPECT_EQ(select_best({{a, 0.1, 50}, {c, 0.1, 50}, {b, 0.1, 50}}), 2u);
  EXPECT_THROW(select_best({}), std::invalid_argument);
}

TEST(GridSearch, ParallelMatchesSequential) {
  const auto a_splits = make_splits(linear_samples(30, 10), 5, 2);
  const auto b_splits = make_splits(linear_samples(30, 10), 5, 2);
  GridSearchOptions par;
  par.jobs = 3;
  const GridSearchResult a = grid_search(tiny_grid(), quick_config(), a_splits);
  const GridSearchResult b = grid_search(tiny_grid(), quick_config(), b_splits, par);
  ASSERT_EQ(a.candidates.size(), b.candidates.size());
  for (std::size_t i = 0; i < a.candidates.size(); ++i) EXPECT_EQ(a.candidates[i].val_mre, b.candidates[i].val_mre);
  EXPECT_EQ(a.best_index, b.best_index);
  EXPECT_EQ(a.report.mean.mre, b.report.mean.mre);
}

TEST(Reports, CsvLayout) {
  EvalReport r{"hh", quick_config(), {MetricSummary{80, 90, 0.1, 2.0, 10, 0}, MetricSummary{60, 70, 0.3, 4.0, 10, 0}}, {}};
  r.mean = average(r.repetitions);
  std::stringstream ss;
  write_report_csv(ss, {r});
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line.rfind("# hh: d_prime=8", 0), 0u);
  std::getline(ss, line);
  EXPECT_EQ(line, "dataset,n,HR20,HR30,MRE,MSE");
  std::getline(ss, line);
  EXPECT_EQ(line, "hh/rep1,10,80.00,90.00,0.1000,2.0000");
  std::getline(ss, line);
  std::getline(ss, line);
  EXPECT_EQ(line, "hh,10,70.00,80.00,0.2000,3.0000");
  std::stringstream table;
  write_report_table(table, {r});
  EXPECT_NE(table.str().find("0.200"), std::string::npos);
}
