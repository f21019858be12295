#include "transboost/transboost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "transboost/bins.hpp"
#include "transboost/error.hpp"

namespace transboost {
namespace {

double log_odds(double positives, double total, double p_min) {
  const double p = std::clamp(total > 0.0 ? positives / total : 0.5, p_min, 1.0 - p_min);
  return std::log(p / (1.0 - p));
}

double label_likelihood(std::uint8_t y, double p) { return y ? p : 1.0 - p; }

struct Summary {
  double min = 0.0, mean = 0.0, max = 0.0;
};

Summary summarize(std::span<const double> v) {
  if (v.empty()) return {};
  Summary s{std::numeric_limits<double>::infinity(), 0.0, -std::numeric_limits<double>::infinity()};
  for (double x : v) {
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    s.mean += x;
  }
  s.mean /= static_cast<double>(v.size());
  return s;
}

enum class Mode { kTransfer, kFixedWeights };

TransBoostModel boost(const Dataset& ds, const BoostConfig& config, Mode mode,
                      std::span<const double> fixed_weights, const TrainOptions& options) {
  config.validate();
  const std::size_t n = ds.n_rows();
  const auto labels = ds.labels();
  const bool transfer = mode == Mode::kTransfer;

  const std::size_t n_source = transfer ? ds.count(Domain::kSource) : 0;
  const std::size_t n_target = transfer ? ds.count(Domain::kTarget) : n;
  if (transfer) {
    if (n_target == 0) throw DataError(ErrorKind::kEmptyTarget, "transfer training needs target rows");
    if (n_source == 0 && !options.allow_empty_source) {
      throw DataError(ErrorKind::kEmptySource, "transfer training needs source rows");
    }
  } else {
    if (n == 0) throw DataError(ErrorKind::kEmptyTarget, "no training rows");
    if (fixed_weights.size() != n) throw DataError(ErrorKind::kLengthMismatch, "row weights do not match rows");
  }

  // Domains as seen by leaf-weight assignment: plain boosting has no ancillary side.
  std::vector<Domain> domains = transfer ? std::vector<Domain>(ds.domains().begin(), ds.domains().end())
                                         : std::vector<Domain>(n, Domain::kTarget);

  TransBoostModel model;
  model.eta = config.eta;
  model.n_features = ds.n_cols();
  model.config = config;
  {
    double pos_main = 0.0, tot_main = 0.0, pos_anc = 0.0, tot_anc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double w = transfer ? 1.0 : fixed_weights[r];
      if (domains[r] == Domain::kTarget) {
        pos_main += w * labels[r];
        tot_main += w;
      } else {
        pos_anc += labels[r];
        tot_anc += 1.0;
      }
    }
    model.base_score_main = log_odds(pos_main, tot_main, config.p_min);
    model.base_score_anc = n_source > 0 ? log_odds(pos_anc, tot_anc, config.p_min) : 0.0;
  }

  const BinMap bins = build_bins(ds, config.max_bins);
  const BinnedMatrix binned(ds, bins);
  const TreeParams params = config.tree_params();

  std::vector<double> margin_main(n, model.base_score_main);
  std::vector<double> margin_anc(n, model.base_score_anc);
  std::vector<double> prob_main(n), prob_anc(n);
  auto refresh_probs = [&] {
    for (std::size_t r = 0; r < n; ++r) {
      prob_main[r] = sigmoid(margin_main[r]);
      prob_anc[r] = sigmoid(margin_anc[r]);
    }
  };
  refresh_probs();

  std::vector<double> beta(n_source, 1.0);
  std::vector<double> row_weights(n, 1.0);
  if (!transfer) row_weights.assign(fixed_weights.begin(), fixed_weights.end());

  double alpha = 0.0;
  if (transfer && config.decay && n_source > 0) {
    alpha = std::log(static_cast<double>(n_source) / static_cast<double>(n_target)) /
            static_cast<double>(config.rounds);
  }

  for (std::size_t k = 1; k <= config.rounds; ++k) {
    const double lambda_k = config.lambda_balance * std::exp(-alpha * static_cast<double>(k));
    if (transfer) {
      std::size_t s = 0;
      for (std::size_t r = 0; r < n; ++r) {
        row_weights[r] = domains[r] == Domain::kSource ? lambda_k * beta[s++] : 1.0;
      }
    }

    const GradStats main_stats = grad_hess(labels, prob_main, config.p_min);
    const GradStats anc_stats = transfer ? grad_hess(labels, prob_anc, config.p_min) : GradStats{};

    GrownTree grown = grow_structure(binned, bins, main_stats, row_weights, params);
    assign_leaf_weights(grown.tree, grown.leaf_of_row, domains, main_stats, row_weights, anc_stats,
                        config.lambda_reg);

    for (std::size_t r = 0; r < n; ++r) {
      const TreeNode& leaf = grown.tree.node(grown.leaf_of_row[r]);
      margin_main[r] += config.eta * leaf.weight_main;
      margin_anc[r] += config.eta * leaf.weight_anc;
    }
    refresh_probs();

    WeightUpdate update;
    if (transfer) {
      update = update_weights(grown.leaf_of_row, domains, labels, prob_main, prob_anc, config, k);
      beta = update.weights.beta;
    }

    if (options.log) {
      RoundLog entry;
      entry.round = k;
      double lt = 0.0, ls = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        if (domains[r] == Domain::kTarget) lt += logistic_loss(labels[r], prob_main[r], config.p_min);
        else ls += logistic_loss(labels[r], prob_anc[r], config.p_min);
      }
      entry.loss_target = n_target ? lt / static_cast<double>(n_target) : 0.0;
      entry.loss_source = n_source ? ls / static_cast<double>(n_source) : 0.0;
      const Summary b = summarize(beta);
      entry.beta_min = b.min;
      entry.beta_mean = b.mean;
      entry.beta_max = b.max;
      entry.lambda_effective = transfer ? lambda_k : 0.0;
      entry.n_leaves = grown.tree.n_leaves();
      options.log->push_back(entry);
    }
    if (options.observer) {
      options.observer(RoundState{k, grown.tree, grown.leaf_of_row, row_weights, prob_main, prob_anc,
                                  transfer ? &update : nullptr});
    }
    model.trees.push_back(std::move(grown.tree));
  }
  return model;
}

}  // namespace

WeightUpdate update_weights(std::span<const NodeId> leaf_of_row, std::span<const Domain> domains,
                            std::span<const std::uint8_t> labels, std::span<const double> prob_main,
                            std::span<const double> prob_anc, const BoostConfig& config, std::size_t round) {
  const std::size_t n = leaf_of_row.size();
  if (domains.size() != n || labels.size() != n || prob_main.size() != n || prob_anc.size() != n) {
    throw DataError(ErrorKind::kLengthMismatch, "weight update inputs differ in length");
  }
  NodeId max_leaf = 0;
  for (NodeId id : leaf_of_row) max_leaf = std::max(max_leaf, id);
  std::vector<double> target_count(static_cast<std::size_t>(max_leaf) + 1, 0.0);
  std::vector<double> source_count(target_count.size(), 0.0);
  double n_source = 0.0, n_target = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    const auto leaf = static_cast<std::size_t>(leaf_of_row[r]);
    if (domains[r] == Domain::kSource) {
      source_count[leaf] += 1.0;
      n_source += 1.0;
    } else {
      target_count[leaf] += 1.0;
      n_target += 1.0;
    }
  }

  WeightUpdate out;
  out.weights.round = round;
  const double eps = config.eps_smooth;
  const double p_min = config.p_min;
  for (std::size_t r = 0; r < n; ++r) {
    if (domains[r] != Domain::kSource) continue;
    const auto leaf = static_cast<std::size_t>(leaf_of_row[r]);
    const double marginal = ((target_count[leaf] + eps) * n_source) / ((source_count[leaf] + eps) * n_target);
    const double pt = std::clamp(prob_main[r], p_min, 1.0 - p_min);
    const double ps = std::clamp(prob_anc[r], p_min, 1.0 - p_min);
    const double conditional = label_likelihood(labels[r], pt) / label_likelihood(labels[r], ps);
    double beta = marginal * conditional;
    if (config.clip_weights) beta = std::clamp(beta, config.beta_min, config.beta_max);
    out.marginal.push_back(marginal);
    out.conditional.push_back(conditional);
    out.weights.beta.push_back(beta);
  }
  return out;
}

TransBoostModel train(const Dataset& ds, const BoostConfig& config, const TrainOptions& options) {
  return boost(ds, config, Mode::kTransfer, {}, options);
}

TransBoostModel train_gbdt(const Dataset& ds, std::span<const double> row_weights, const BoostConfig& config,
                           const TrainOptions& options) {
  return boost(ds, config, Mode::kFixedWeights, row_weights, options);
}

TransBoostModel train_target_only(const Dataset& ds, const BoostConfig& config, const TrainOptions& options) {
  const Dataset target = ds.with_domain(Domain::kTarget);
  if (target.n_rows() == 0) throw DataError(ErrorKind::kEmptyTarget, "no target rows");
  const std::vector<double> ones(target.n_rows(), 1.0);
  return train_gbdt(target, ones, config, options);
}

}  // namespace transboost
