#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "transboost/dataset.hpp"
#include "transboost/tree.hpp"

namespace transboost {

// Hyperparameters of one training run. lambda_balance weighs the reweighted
// source loss against the target loss; lambda_reg is the L2 leaf regulariser.
struct BoostConfig {
  std::size_t rounds = 40;
  std::size_t max_depth = 4;
  double eta = 0.3;
  double lambda_balance = 1.0;
  double lambda_reg = 1.0;
  double gamma = 0.0;
  std::size_t min_leaf_size = 1;
  double min_gain = 0.0;
  std::size_t max_bins = 256;
  double eps_smooth = 1.0;
  double beta_min = 0.01;
  double beta_max = 100.0;
  bool clip_weights = true;
  double p_min = 1e-6;
  // Multiplies lambda_balance by exp(-alpha * k) with alpha = log(N_S / N_T) / rounds.
  bool decay = false;
  std::uint64_t seed = 0;

  // Throws ConfigError when a value is outside its documented range.
  void validate() const;

  TreeParams tree_params() const {
    return {max_depth, min_leaf_size, min_gain, lambda_reg, gamma};
  }

  // Ordered (key, value) pairs as written into model files.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  // Applies one key; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  friend bool operator==(const BoostConfig&, const BoostConfig&) = default;
};

// A trained pair of additive models over shared tree structures.
struct TransBoostModel {
  std::vector<DualTree> trees;
  double base_score_main = 0.0;
  double base_score_anc = 0.0;
  double eta = 0.3;
  std::size_t n_features = 0;
  BoostConfig config;
};

// Raw additive scores before the sigmoid.
double margin_main(const TransBoostModel& model, std::span<const double> row);
double margin_anc(const TransBoostModel& model, std::span<const double> row);

// Main-model probabilities, one per row of `rows`.
std::vector<double> predict(const TransBoostModel& model, const Dataset& rows);
// Ancillary (source) model probabilities.
std::vector<double> predict_ancillary(const TransBoostModel& model, const Dataset& rows);

struct FeatureGain {
  std::size_t feature;
  double gain;

  friend bool operator==(const FeatureGain&, const FeatureGain&) = default;
};

// Total realised split gain per feature, largest first (ties by feature id).
std::vector<FeatureGain> feature_importance(const TransBoostModel& model);

void save_model(const TransBoostModel& model, std::ostream& out);
std::string serialize_model(const TransBoostModel& model);
void save_model(const TransBoostModel& model, const std::string& path);
TransBoostModel parse_model(std::istream& in);
TransBoostModel load_model(const std::string& path);

}  // namespace transboost
