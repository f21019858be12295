#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "transboost/dataset.hpp"
#include "transboost/model.hpp"
#include "transboost/tree.hpp"

namespace transboost {

// Per-source-instance weights, in the order source rows appear in the dataset.
struct SourceWeights {
  std::vector<double> beta;
  std::size_t round = 0;
};

// The two factors of a weight update alongside their clipped product.
struct WeightUpdate {
  std::vector<double> marginal;
  std::vector<double> conditional;
  SourceWeights weights;
};

// Closed-form source reweighting from one tree's leaf partition:
//
//   marginal    = (n_leaf + eps) * N_S / ((m_leaf + eps) * N_T)
//   conditional = P_main(y_i | x_i) / P_anc(y_i | x_i)
//   beta        = clip(marginal * conditional, beta_min, beta_max)
//
// n_leaf and m_leaf count target and source rows in the leaf. `prob_main` and
// `prob_anc` hold positive-class probabilities for every row; only source
// rows are read. Linear in the number of rows.
WeightUpdate update_weights(std::span<const NodeId> leaf_of_row, std::span<const Domain> domains,
                            std::span<const std::uint8_t> labels, std::span<const double> prob_main,
                            std::span<const double> prob_anc, const BoostConfig& config,
                            std::size_t round = 0);

struct RoundLog {
  std::size_t round = 0;
  double loss_target = 0.0;  // main model, target rows
  double loss_source = 0.0;  // ancillary model, source rows
  double beta_min = 0.0;
  double beta_mean = 0.0;
  double beta_max = 0.0;
  double lambda_effective = 0.0;
  std::size_t n_leaves = 0;
};

// Everything the training loop knows at the end of a round. Handed to the
// observer for diagnostics and tests.
struct RoundState {
  std::size_t round;
  const DualTree& tree;
  std::span<const NodeId> leaf_of_row;
  std::span<const double> row_weights;
  std::span<const double> prob_main;
  std::span<const double> prob_anc;
  const WeightUpdate* update;  // null when no weight update ran
};

struct TrainOptions {
  std::vector<RoundLog>* log = nullptr;
  std::function<void(const RoundState&)> observer;
  // Lets the transfer loop run on a dataset with no source rows. Only useful
  // for checking that it degenerates to plain boosting.
  bool allow_empty_source = false;
};

// Same-structure boosting of a main (target) and an ancillary (source) model
// with a source-weight update after every round. Requires both domains.
TransBoostModel train(const Dataset& ds, const BoostConfig& config, const TrainOptions& options = {});

// Plain single-model gradient boosting with fixed per-row weights. Domain
// tags are ignored; the base score is the weighted label prevalence.
TransBoostModel train_gbdt(const Dataset& ds, std::span<const double> row_weights, const BoostConfig& config,
                           const TrainOptions& options = {});

// Plain boosting on the target rows only.
TransBoostModel train_target_only(const Dataset& ds, const BoostConfig& config,
                                  const TrainOptions& options = {});

}  // namespace transboost
