#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "fixtures.hpp"
#include "transboost/experiments.hpp"
#include "transboost/metrics.hpp"
#include "transboost/transboost.hpp"

namespace transboost {
namespace {

struct Fixture {
  Dataset train;
  Dataset test;
};

Fixture fixture() {
  const Dataset ds = testing::shifted_dataset(400, 300, 5, 61);
  TargetSplit s = split_target(ds, 150, std::nullopt, 2);
  return {std::move(s.train), std::move(s.test)};
}

BoostConfig quick() {
  BoostConfig c;
  c.rounds = 8;
  c.max_depth = 3;
  return c;
}

TEST(Algorithms, NamesRoundTrip) {
  for (Algorithm a : {Algorithm::kTransBoost, Algorithm::kTargetOnly, Algorithm::kPooled, Algorithm::kKmmWeighted}) {
    EXPECT_EQ(parse_algorithm(to_string(a)), a);
  }
  EXPECT_FALSE(parse_algorithm("xgboost"));
}

TEST(Algorithms, PilotWeightsLeaveTargetRowsAtOne) {
  const Fixture f = fixture();
  const auto w = pilot_marginal_weights(f.train, quick());
  ASSERT_EQ(w.size(), f.train.n_rows());
  double source_sum = 0.0;
  for (std::size_t r = 0; r < w.size(); ++r) {
    EXPECT_GE(w[r], 0.0);
    if (f.train.domain(r) == Domain::kTarget) EXPECT_EQ(w[r], 1.0);
    else source_sum += w[r];
  }
  // Marginal weights without smoothing sum to N_S over leaves holding target rows.
  EXPECT_LE(source_sum, static_cast<double>(f.train.count(Domain::kSource)) * (1 + 1e-9));
}

TEST(Sweep, SingleCell) {
  const Fixture f = fixture();
  const SweepReport r = run_fraction_sweep(f.train, f.test, {{1.0}, {3}, {Algorithm::kTransBoost}, quick()});
  ASSERT_EQ(r.rows.size(), 1u);
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "fraction,seed,algorithm,auc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Sweep, EveryCellOnceAndRerunIsIdentical) {
  const Fixture f = fixture();
  const SweepSpec spec{{0.2, 0.6, 1.0},
                       {1, 2},
                       {Algorithm::kTransBoost, Algorithm::kTargetOnly, Algorithm::kPooled, Algorithm::kKmmWeighted},
                       quick()};
  const SweepReport a = run_fraction_sweep(f.train, f.test, spec);
  const SweepReport b = run_fraction_sweep(f.train, f.test, spec);
  EXPECT_EQ(a.to_csv(), b.to_csv());
  std::set<std::tuple<double, std::uint64_t, Algorithm>> cells;
  for (const auto& row : a.rows) {
    EXPECT_TRUE(row.error.empty()) << row.error;
    EXPECT_GE(row.auc, 0.0);
    EXPECT_LE(row.auc, 1.0);
    cells.insert({row.fraction, row.seed, row.algorithm});
  }
  EXPECT_EQ(cells.size(), 24u);
  EXPECT_EQ(a.rows.size(), 24u);
  const auto s = a.find(0.6, Algorithm::kPooled);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->cells, 2u);
}

TEST(Sweep, TargetOnlyAtFullFractionIsPlainGbdt) {
  const Fixture f = fixture();
  BoostConfig cfg = quick();
  const SweepReport r = run_fraction_sweep(f.train, f.test, {{1.0}, {5}, {Algorithm::kTargetOnly}, cfg});
  cfg.seed = 5;
  const Dataset target = f.train.with_domain(Domain::kTarget);
  const TransBoostModel plain = train_gbdt(target, std::vector<double>(target.n_rows(), 1.0), cfg);
  EXPECT_EQ(r.rows.at(0).auc, evaluate_auc(plain, f.test));
}

TEST(Sweep, FailedCellsAreRecorded) {
  const Fixture f = fixture();
  const SweepReport r = run_fraction_sweep(f.train, f.test, {{0.001, 1.0}, {1}, {Algorithm::kTransBoost}, quick()});
  ASSERT_EQ(r.rows.size(), 2u);
  const auto& bad = r.rows[0].fraction < 0.5 ? r.rows[0] : r.rows[1];
  EXPECT_FALSE(bad.error.empty());
  EXPECT_TRUE(std::isnan(bad.auc));
  EXPECT_NE(r.to_csv().find(",NA\n"), std::string::npos);
}

TEST(Sparsity, FullKeepMatchesUnperturbedRun) {
  const Fixture f = fixture();
  BoostConfig cfg = quick();
  const SparsityReport r = run_sparsity_bench(f.train, f.test, {1.0}, {4}, cfg);
  cfg.seed = 4;
  EXPECT_EQ(r.rows.at(0).auc, evaluate_auc(train(f.train, cfg), f.test));
}

TEST(Sparsity, ShapeAndLowKeepRateStillTrains) {
  const Fixture f = fixture();
  const SparsityReport r = run_sparsity_bench(f.train, f.test, {0.01, 0.25, 1.0}, {1, 2, 3}, quick());
  EXPECT_EQ(r.rows.size(), 9u);
  EXPECT_FALSE(std::isnan(r.mean_auc(0.01)));
  EXPECT_EQ(r.to_csv().substr(0, 18), "keep_rate,seed,auc");
}

TEST(Runtime, SizesAndRepeats) {
  const Dataset ds = testing::shifted_dataset(100, 50, 3, 1);
  BoostConfig cfg = quick();
  cfg.rounds = 2;
  const RuntimeReport r = run_runtime_bench(ds, {1.0, 2.0, 0.5}, 3, cfg);
  EXPECT_EQ(r.rows.size(), 9u);
  EXPECT_EQ(r.sizes(), (std::vector<std::size_t>{150, 300, 75}));
  EXPECT_GT(r.mean_seconds(300), 0.0);
  EXPECT_GT(r.median_seconds(150), 0.0);
  EXPECT_EQ(r.to_csv().substr(0, 17), "size,run,seconds\n");
}

TEST(Runtime, ResizeKeepsWholeCopies) {
  const Dataset ds = testing::shifted_dataset(10, 10, 2, 1);
  const Dataset big = resize_rows(ds, 2.5, 3);
  EXPECT_EQ(big.n_rows(), 50u);
  EXPECT_EQ(big.count(Domain::kSource) + big.count(Domain::kTarget), 50u);
  EXPECT_TRUE(resize_rows(ds, 1.0, 3) == ds);
}

TEST(Inclusion, TableHasOneRowPerRateAndAlgorithm) {
  const std::vector<std::uint8_t> y = {0, 1, 0, 0, 1, 0};
  const std::vector<ScoredAlgorithm> scored = {{Algorithm::kTransBoost, {0.1, 0.9, 0.2, 0.3, 0.8, 0.4}},
                                               {Algorithm::kPooled, {0.5, 0.1, 0.2, 0.3, 0.8, 0.4}}};
  const InclusionReport r = approval_table(y, scored, {0.0, 0.25});
  ASSERT_EQ(r.rows.size(), 4u);
  for (const auto& row : r.rows) {
    const auto& s = row.algorithm == Algorithm::kTransBoost ? scored[0].scores : scored[1].scores;
    EXPECT_EQ(row.approval_ratio, approval_ratio(y, s, row.rate));
  }
  EXPECT_EQ(r.to_csv().substr(0, 29), "rate,algorithm,approval_ratio");
}

}  // namespace
}  // namespace transboost
