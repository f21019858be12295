#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "transboost/error.hpp"
#include "transboost/experiments.hpp"
#include "transboost/kmm.hpp"
#include "transboost/metrics.hpp"
#include "transboost/transboost.hpp"

namespace transboost {
namespace {

BoostConfig raw_config() {
  BoostConfig c;
  c.eps_smooth = 0.0;
  c.clip_weights = false;
  return c;
}

double likelihood(std::uint8_t y, double p) { return y ? p : 1.0 - p; }

TEST(UpdateWeights, MarginalWeightsSumToSourceCount) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = testing::pool(testing::covered_instance(seed));
    const std::size_t n = p.pooled.n_rows();
    const std::vector<double> half(n, 0.5);
    const WeightUpdate u = update_weights(p.leaf_of_row, p.pooled.domains(), p.pooled.labels(), half, half,
                                          raw_config());
    double sum = 0.0;
    for (double b : u.marginal) sum += b;
    const double ns = static_cast<double>(p.pooled.count(Domain::kSource));
    ASSERT_NEAR(sum, ns, 1e-9 * ns) << "seed=" << seed;
  }
}

TEST(UpdateWeights, MarginalMatchesKmmQp) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const auto inst = testing::covered_instance(seed);
    const auto p = testing::pool(inst);
    const std::vector<double> half(p.pooled.n_rows(), 0.5);
    const WeightUpdate u = update_weights(p.leaf_of_row, p.pooled.domains(), p.pooled.labels(), half, half,
                                          raw_config());
    const auto qp = kmm::solve_kmm_qp(kmm::build_tree_kernel(inst.tree, inst.source, inst.target, false));
    ASSERT_TRUE(qp.converged);
    ASSERT_EQ(qp.beta.size(), u.marginal.size());
    for (std::size_t i = 0; i < qp.beta.size(); ++i) ASSERT_NEAR(u.marginal[i], qp.beta[i], 1e-6);
  }
}

TEST(UpdateWeights, EmpiricalLeafRatesReproduceJointQp) {
  for (std::uint64_t seed = 200; seed < 210; ++seed) {
    const auto inst = testing::covered_instance(seed);
    const auto p = testing::pool(inst);
    const auto rates = kmm::empirical_leaf_rates(inst.tree, inst.source, inst.target);
    // Source rows come first in the pooled dataset.
    std::vector<double> pt(p.pooled.n_rows(), 0.5), ps(p.pooled.n_rows(), 0.5);
    for (std::size_t i = 0; i < inst.source.n_rows(); ++i) {
      pt[i] = rates.target_positive[i];
      ps[i] = rates.source_positive[i];
    }
    BoostConfig cfg = raw_config();
    cfg.p_min = 0.0;
    const WeightUpdate u = update_weights(p.leaf_of_row, p.pooled.domains(), p.pooled.labels(), pt, ps, cfg);
    const auto qp = kmm::solve_kmm_qp(kmm::build_tree_kernel(inst.tree, inst.source, inst.target, true));
    ASSERT_TRUE(qp.converged);
    for (std::size_t i = 0; i < qp.beta.size(); ++i) ASSERT_NEAR(u.weights.beta[i], qp.beta[i], 1e-6);
  }
}

TEST(UpdateWeights, SmoothingAndClipping) {
  // One leaf holds 1 target and 3 source rows, the other 3 targets and 1 source.
  const std::vector<NodeId> leaf = {1, 1, 1, 2, 1, 2, 2, 2};
  const std::vector<Domain> dom = {Domain::kSource, Domain::kSource, Domain::kSource, Domain::kSource,
                                   Domain::kTarget, Domain::kTarget, Domain::kTarget, Domain::kTarget};
  const std::vector<std::uint8_t> y = {1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<double> p(8, 0.5);
  BoostConfig cfg;
  const WeightUpdate u = update_weights(leaf, dom, y, p, p, cfg);
  ASSERT_EQ(u.marginal.size(), 4u);
  EXPECT_DOUBLE_EQ(u.marginal[0], (1 + 1.0) * 4 / ((3 + 1.0) * 4));
  EXPECT_DOUBLE_EQ(u.marginal[3], (3 + 1.0) * 4 / ((1 + 1.0) * 4));
  for (double c : u.conditional) EXPECT_DOUBLE_EQ(c, 1.0);

  cfg.beta_max = 1.5;
  const WeightUpdate clipped = update_weights(leaf, dom, y, p, p, cfg);
  EXPECT_DOUBLE_EQ(clipped.weights.beta[3], 1.5);
  EXPECT_DOUBLE_EQ(clipped.marginal[3], 2.0);
}

TEST(UpdateWeights, ConditionalUsesClampedLikelihoods) {
  const std::vector<NodeId> leaf = {1, 1};
  const std::vector<Domain> dom = {Domain::kSource, Domain::kTarget};
  const std::vector<std::uint8_t> y = {1, 1};
  const std::vector<double> pm = {0.8, 0.5}, pa = {0.0, 0.5};
  BoostConfig cfg;
  cfg.clip_weights = false;
  const WeightUpdate u = update_weights(leaf, dom, y, pm, pa, cfg);
  EXPECT_DOUBLE_EQ(u.conditional[0], 0.8 / cfg.p_min);
}

TEST(Train, StoredWeightsAreClippedProductOfFactors) {
  const Dataset ds = testing::shifted_dataset(300, 100, 5, 31);
  BoostConfig cfg;
  cfg.rounds = 8;
  cfg.beta_max = 3.0;
  std::size_t checked = 0;
  TrainOptions opts;
  opts.observer = [&](const RoundState& s) {
    ASSERT_NE(s.update, nullptr);
    const WeightUpdate& u = *s.update;
    std::map<NodeId, double> n_t, m_s;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) (ds.domain(r) == Domain::kSource ? m_s : n_t)[s.leaf_of_row[r]] += 1;
    std::size_t i = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.domain(r) != Domain::kSource) continue;
      const NodeId l = s.leaf_of_row[r];
      const double marginal = (n_t[l] + 1.0) * 300.0 / ((m_s[l] + 1.0) * 100.0);
      const double pt = std::clamp(s.prob_main[r], 1e-6, 1 - 1e-6), ps = std::clamp(s.prob_anc[r], 1e-6, 1 - 1e-6);
      const double conditional = likelihood(ds.label(r), pt) / likelihood(ds.label(r), ps);
      ASSERT_NEAR(u.marginal[i], marginal, 1e-12 * marginal);
      ASSERT_NEAR(u.conditional[i], conditional, 1e-12 * conditional);
      ASSERT_DOUBLE_EQ(u.weights.beta[i], std::clamp(u.marginal[i] * u.conditional[i], 0.01, 3.0));
      ++i;
      ++checked;
    }
  };
  train(ds, cfg, opts);
  EXPECT_EQ(checked, 8u * 300u);
}

TEST(Train, SourceRowWeightsFollowPreviousRound) {
  const Dataset ds = testing::shifted_dataset(120, 60, 3, 5);
  BoostConfig cfg;
  cfg.rounds = 4;
  std::vector<double> prev;
  TrainOptions opts;
  opts.observer = [&](const RoundState& s) {
    std::size_t i = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r) {
      if (ds.domain(r) == Domain::kTarget) {
        ASSERT_EQ(s.row_weights[r], 1.0);
      } else {
        ASSERT_DOUBLE_EQ(s.row_weights[r], prev.empty() ? 1.0 : prev[i]);
        ++i;
      }
    }
    prev = s.update->weights.beta;
  };
  train(ds, cfg, opts);
}

TEST(Train, DecayShrinksBalanceTowardTargetOverRounds) {
  const Dataset ds = testing::shifted_dataset(400, 100, 4, 9);
  BoostConfig cfg;
  cfg.rounds = 10;
  cfg.decay = true;
  std::vector<RoundLog> log;
  TrainOptions opts;
  opts.log = &log;
  train(ds, cfg, opts);
  ASSERT_EQ(log.size(), 10u);
  for (std::size_t k = 1; k < log.size(); ++k) EXPECT_LT(log[k].lambda_effective, log[k - 1].lambda_effective);
  // After all rounds the total source weight scale has shrunk by N_T / N_S.
  EXPECT_NEAR(log.back().lambda_effective, 100.0 / 400.0, 1e-12);
}

TEST(Train, LogTracksRoundsAndBetaBounds) {
  const Dataset ds = testing::shifted_dataset(200, 80, 4, 13);
  BoostConfig cfg;
  cfg.rounds = 5;
  std::vector<RoundLog> log;
  TrainOptions opts;
  opts.log = &log;
  const TransBoostModel m = train(ds, cfg, opts);
  ASSERT_EQ(m.trees.size(), 5u);
  ASSERT_EQ(log.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(log[k].round, k + 1);
    EXPECT_GE(log[k].beta_min, cfg.beta_min);
    EXPECT_LE(log[k].beta_max, cfg.beta_max);
    EXPECT_LE(log[k].beta_min, log[k].beta_mean);
    EXPECT_LE(log[k].beta_mean, log[k].beta_max);
    EXPECT_LE(m.trees[k].depth(), cfg.max_depth);
  }
  EXPECT_LT(log.back().loss_target, log.front().loss_target);
}

TEST(Train, BaseScoresAreDomainLogOdds) {
  const Dataset ds = testing::shifted_dataset(200, 80, 3, 17);
  BoostConfig cfg;
  cfg.rounds = 1;
  const TransBoostModel m = train(ds, cfg);
  auto log_odds = [&](Domain d) {
    double pos = 0, n = 0;
    for (std::size_t r = 0; r < ds.n_rows(); ++r)
      if (ds.domain(r) == d) pos += ds.label(r), n += 1;
    return std::log(pos / (n - pos));
  };
  EXPECT_NEAR(m.base_score_main, log_odds(Domain::kTarget), 1e-12);
  EXPECT_NEAR(m.base_score_anc, log_odds(Domain::kSource), 1e-12);
}

TEST(Train, IsDeterministic) {
  const Dataset ds = testing::shifted_dataset(150, 60, 4, 3);
  BoostConfig cfg;
  cfg.rounds = 6;
  EXPECT_EQ(serialize_model(train(ds, cfg)), serialize_model(train(ds, cfg)));
}

TEST(Train, RequiresBothDomains) {
  const Dataset ds = testing::shifted_dataset(50, 50, 3, 1);
  try {
    train(ds.with_domain(Domain::kTarget), BoostConfig{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptySource);
  }
  try {
    train(ds.with_domain(Domain::kSource), BoostConfig{});
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyTarget);
  }
  BoostConfig bad;
  bad.max_depth = 0;
  bad.eta = 2.0;
  EXPECT_THROW(train(ds, bad), ConfigError);
}

TEST(Train, EmptySourceMatchesPlainBoostingBitForBit) {
  const Dataset target = testing::shifted_dataset(100, 120, 5, 8).with_domain(Domain::kTarget);
  BoostConfig cfg;
  cfg.rounds = 10;
  TrainOptions opts;
  opts.allow_empty_source = true;
  const TransBoostModel transfer = train(target, cfg, opts);
  const TransBoostModel plain = train_gbdt(target, std::vector<double>(target.n_rows(), 1.0), cfg);
  EXPECT_EQ(serialize_model(transfer), serialize_model(plain));
  EXPECT_EQ(serialize_model(train_target_only(target, cfg)), serialize_model(plain));
}

TEST(Train, CopiedSourceTracksPooledBaseline) {
  // Source rows are an exact copy of the target training rows, so every
  // marginal weight is close to one and transfer should neither help nor hurt.
  const Dataset full = testing::shifted_dataset(10, 1400, 6, 44);
  const TargetSplit split = split_target(full, 600, std::nullopt, 1);
  const Dataset tgt = split.train.with_domain(Domain::kTarget);
  const Dataset train_set = concat(testing::retag(tgt, Domain::kSource), tgt);
  BoostConfig cfg;
  cfg.rounds = 20;
  const double a_tb = evaluate_auc(train_algorithm(Algorithm::kTransBoost, train_set, cfg), split.test);
  const double a_pool = evaluate_auc(train_algorithm(Algorithm::kPooled, train_set, cfg), split.test);
  EXPECT_NEAR(a_tb, a_pool, 0.01);
}

}  // namespace
}  // namespace transboost
