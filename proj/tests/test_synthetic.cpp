#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "tenet/ablation.hpp"
#include "tenet/synthetic.hpp"

using namespace tenet;

namespace {

const RealVec kV{0, 1, 2, 4, 1, 0};

/// Up to 8 points in 1-3 clusters spaced far apart relative to their spread.
std::vector<RealVec> separated_clusters(std::uint64_t seed) {
  SeededRng rng(seed);
  const std::size_t n = 2 + rng.below(7), clusters = 1 + rng.below(3);
  std::vector<RealVec> pts;
  for (std::size_t i = 0; i < n; ++i) {
    RealVec p{30.0 * static_cast<double>(i % clusters), 0.0, 0.0};
    for (auto& v : p) v += rng.uniform(-1, 1);
    pts.push_back(p);
  }
  return pts;
}

std::vector<RealVec> ten_exemplars() {
  std::vector<RealVec> out;
  for (std::size_t e = 0; e < 10; ++e) {
    RealVec x(kIntervalsPerDay, 0.1 * static_cast<double>(e + 1));
    x[4 * e] += 2.0;
    out.push_back(x);
  }
  return out;
}

}  // namespace

TEST(AffinityPropagation, SinglePoint) {
  const APResult r = affinity_propagation({{1.0, 2.0}});
  EXPECT_EQ(r.exemplars, std::vector<std::size_t>{0});
  EXPECT_EQ(r.assignment, std::vector<std::size_t>{0});
}

TEST(AffinityPropagation, IdenticalPointsShareOneExemplar) {
  const APResult r = affinity_propagation({{1.0, 2.0}, {1.0, 2.0}});
  ASSERT_EQ(r.exemplars.size(), 1u);
  EXPECT_EQ(r.assignment[0], r.assignment[1]);
  EXPECT_EQ(r.cluster_size[0], 2u);
}

TEST(AffinityPropagation, TwoTightClusters) {
  const std::vector<RealVec> pts{{0, 0}, {0.1, 0}, {0, 0.1}, {10, 10}, {10.1, 10}, {10, 10.1}};
  const APResult r = affinity_propagation(pts);
  ASSERT_EQ(r.exemplars.size(), 2u);
  std::set<bool> sides;
  for (auto e : r.exemplars) sides.insert(e >= 3);
  EXPECT_EQ(sides.size(), 2u);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(r.assignment[i] >= 3, i >= 3);
  EXPECT_TRUE(r.converged);
}

TEST(AffinityPropagation, MatchesBruteForceKMedoids) {
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto pts = separated_clusters(seed);
    const APResult r = affinity_propagation(pts);
    const double got = oracle::medoid_cost(pts, r.exemplars);
    const double best = oracle::best_kmedoids_cost(pts, r.exemplars.size());
    EXPECT_LE(got, 1.05 * best + 1e-12) << "seed " << seed;
  }
}

TEST(AffinityPropagation, ExemplarsAreMembersAndAssignmentsNearest) {
  SeededRng rng(5);
  std::vector<RealVec> pts;
  for (int i = 0; i < 40; ++i) pts.push_back(rng_uniform(rng, 0, 10, 4));
  const APResult r = affinity_propagation(pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NE(std::find(r.exemplars.begin(), r.exemplars.end(), r.assignment[i]), r.exemplars.end());
    for (auto e : r.exemplars)
      if (i != r.assignment[i]) {
        EXPECT_LE(squared_distance(pts[i], pts[r.assignment[i]]), squared_distance(pts[i], pts[e]));
      }
  }
  for (std::size_t k = 1; k < r.cluster_size.size(); ++k) EXPECT_GE(r.cluster_size[k - 1], r.cluster_size[k]);
}

TEST(AffinityPropagation, KeepsAtMostTenExemplars) {
  APParams p;
  p.preference = -1e-6;  // every point wants to be its own exemplar
  std::vector<RealVec> pts;
  for (int i = 0; i < 25; ++i) pts.push_back({static_cast<double>(i) * 10.0});
  const APResult r = affinity_propagation(pts, p);
  EXPECT_EQ(r.exemplars.size(), 10u);
  p.max_exemplars = 0;
  EXPECT_GT(affinity_propagation(pts, p).exemplars.size(), 10u);
}

TEST(AffinityPropagation, RejectsBadDamping) {
  APParams p;
  p.damping = 1.0;
  EXPECT_THROW(affinity_propagation({{0.0}, {1.0}}, p), std::invalid_argument);
}

TEST(AffinityPropagation, Deterministic) {
  const auto pts = separated_clusters(42);
  EXPECT_EQ(affinity_propagation(pts).exemplars, affinity_propagation(pts).exemplars);
}

TEST(Distort, ShiftRight) { EXPECT_EQ(shift_series(kV, 1), (RealVec{0, 0, 1, 2, 4, 1})); }

TEST(Distort, SwapAdjacentSegments) {
  EXPECT_EQ(swap_segments(kV, 1, 1), (RealVec{0, 2, 1, 4, 1, 0}));
  EXPECT_EQ(swap_segments(kV, 0, 3), (RealVec{4, 1, 0, 0, 1, 2}));
  EXPECT_THROW(swap_segments(kV, 1, 3), std::out_of_range);
}

TEST(Distort, IdentitySpec) {
  DistortionSpec spec;
  spec.segment = 4;  // too long for a 6-point series, so swaps are skipped
  spec.max_shift = 0;
  spec.ops = 5;
  SeededRng rng(1);
  EXPECT_EQ(distort(kV, spec, rng), kV);
}

TEST(Distort, PreservesLength) {
  SeededRng rng(2);
  const DistortionSpec spec;
  for (int t = 0; t < 50; ++t) EXPECT_EQ(distort(rng_uniform(rng, 0, 1, 48), spec, rng).size(), 48u);
}

TEST(Distort, SwapOnlyPreservesMultiset) {
  DistortionSpec spec;
  spec.max_shift = 0;
  spec.ops = 6;
  SeededRng rng(3);
  for (int t = 0; t < 50; ++t) {
    const RealVec x = rng_uniform(rng, 0, 1, 48);
    RealVec y = distort(x, spec, rng), xs = x;
    EXPECT_NEAR(sum(y), sum(x), 1e-12);
    std::sort(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    EXPECT_EQ(y, xs);
  }
}

TEST(Distort, RejectsInvalidSpec) {
  DistortionSpec spec;
  spec.ops = 0;
  SeededRng rng(1);
  EXPECT_THROW(distort(kV, spec, rng), std::invalid_argument);
}

TEST(AblationSet, ThreeHundredSamplesStratified) {
  const Folds f = gen_ablation_set(ten_exemplars(), DistortionSpec{});
  EXPECT_EQ(f.train.size(), 100u);
  EXPECT_EQ(f.val.size(), 100u);
  EXPECT_EQ(f.test.size(), 100u);
  for (const auto* fold : {&f.train, &f.val, &f.test}) {
    std::vector<int> per(10, 0);
    for (const auto& s : *fold) ++per[static_cast<std::size_t>(s.group)];
    for (int c : per) EXPECT_EQ(c, 10);
  }
  for (const auto& s : f.train) EXPECT_EQ(s.x.size(), 28u);
}

TEST(AblationSet, TargetsIgnoreDistortion) {
  const auto ex = ten_exemplars();
  DistortionSpec a, b;
  b.seed = 99;
  const Folds fa = gen_ablation_set(ex, a), fb = gen_ablation_set(ex, b);
  for (std::size_t i = 0; i < fa.test.size(); ++i) {
    EXPECT_EQ(fa.test[i].y, fb.test[i].y);
    EXPECT_DOUBLE_EQ(fa.test[i].y, sum(ex[static_cast<std::size_t>(fa.test[i].group)]));
  }
}

TEST(AblationSet, IdentitySpecCopiesIdentical) {
  DistortionSpec spec;
  spec.segment = 30;
  spec.max_shift = 0;
  const auto exemplars = ten_exemplars();
  const Folds f = gen_ablation_set(exemplars, spec);
  for (const auto& s : f.test) {
    const RealVec& ex = exemplars[static_cast<std::size_t>(s.group)];
    EXPECT_EQ(s.x, RealVec(ex.begin(), ex.begin() + 28));
  }
}

TEST(AblationSet, RejectsWrongExemplarLength) {
  EXPECT_THROW(gen_ablation_set({RealVec(30, 1.0)}, DistortionSpec{}), std::length_error);
}

TEST(HouseholdDays, DeterministicAndNonNegative) {
  const auto a = generate_household_days(20, 4), b = generate_household_days(20, 4);
  ASSERT_EQ(a.size(), 20u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].values, b[i].values);
    EXPECT_EQ(a[i].values.size(), kIntervalsPerDay);
    for (double v : a[i].values) EXPECT_GE(v, 0.0);
  }
}

TEST(HouseholdDays, ClusterIntoTenExemplars) {
  const ExemplarSelection sel = select_exemplars(generate_household_days(300, 1));
  EXPECT_EQ(sel.exemplars.size(), 10u);
  EXPECT_TRUE(sel.clustering.converged);
}

TEST(Ablation, Median) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), std::invalid_argument);
}

TEST(Ablation, SweepViolationsCountsNonDecreasingSteps) {
  const std::vector<SweepPoint> pts{{8, 0.5, 0}, {16, 0.6, 0}, {24, 0.4, 0}, {28, 0.3, 0}};
  EXPECT_EQ(sweep_violations(pts), 1u);
}

TEST(Ablation, SeededSpecsDiffer) {
  const DistortionSpec s;
  EXPECT_NE(seeded_spec(s, 0).seed, seeded_spec(s, 1).seed);
  EXPECT_EQ(seeded_spec(s, 2).seed, seeded_spec(s, 2).seed);
}

TEST(Manifest, RecordsSpec) {
  DistortionSpec spec;
  spec.seed = 17;
  std::stringstream ss;
  write_synth_manifest(ss, spec, 30, 28, "generated", {"2013-01-05"});
  EXPECT_NE(ss.str().find("seed = 17"), std::string::npos);
  EXPECT_NE(ss.str().find("segment = 4"), std::string::npos);
  EXPECT_NE(ss.str().find("exemplar.0 = 2013-01-05"), std::string::npos);
}
