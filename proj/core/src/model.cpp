#include "transboost/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>

#include "transboost/error.hpp"
#include "transboost/text.hpp"

namespace transboost {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_flag(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError("'" + key + "' expects on/off, got '" + v + "'");
}

}  // namespace

void BoostConfig::validate() const {
  require(rounds >= 1, "rounds must be at least 1");
  require(max_depth >= 1 && max_depth <= 30, "max_depth must lie in [1, 30]");
  require(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
  require(lambda_balance >= 0.0 && std::isfinite(lambda_balance), "lambda_balance must be >= 0");
  require(lambda_reg >= 0.0 && std::isfinite(lambda_reg), "lambda_reg must be >= 0");
  require(gamma >= 0.0 && std::isfinite(gamma), "gamma must be >= 0");
  require(min_leaf_size >= 1, "min_leaf_size must be at least 1");
  require(min_gain >= 0.0 && std::isfinite(min_gain), "min_gain must be >= 0");
  require(max_bins >= 2 && max_bins <= 65534, "max_bins must lie in [2, 65534]");
  require(eps_smooth >= 0.0 && std::isfinite(eps_smooth), "eps_smooth must be >= 0");
  require(beta_min >= 0.0 && beta_min <= beta_max, "need 0 <= beta_min <= beta_max");
  require(p_min > 0.0 && p_min < 0.5, "p_min must lie in (0, 0.5)");
}

std::vector<std::pair<std::string, std::string>> BoostConfig::to_pairs() const {
  auto flag = [](bool b) { return std::string(b ? "on" : "off"); };
  return {
      {"rounds", std::to_string(rounds)},
      {"max_depth", std::to_string(max_depth)},
      {"eta", format_real(eta)},
      {"lambda_balance", format_real(lambda_balance)},
      {"lambda_reg", format_real(lambda_reg)},
      {"gamma", format_real(gamma)},
      {"min_leaf_size", std::to_string(min_leaf_size)},
      {"min_gain", format_real(min_gain)},
      {"max_bins", std::to_string(max_bins)},
      {"eps_smooth", format_real(eps_smooth)},
      {"beta_min", format_real(beta_min)},
      {"beta_max", format_real(beta_max)},
      {"clip_weights", flag(clip_weights)},
      {"p_min", format_real(p_min)},
      {"decay", flag(decay)},
      {"seed", std::to_string(seed)},
  };
}

void BoostConfig::set(const std::string& key, const std::string& value) {
  if (key == "rounds") rounds = to_count(key, value);
  else if (key == "max_depth") max_depth = to_count(key, value);
  else if (key == "eta") eta = to_real(key, value);
  else if (key == "lambda_balance") lambda_balance = to_real(key, value);
  else if (key == "lambda_reg") lambda_reg = to_real(key, value);
  else if (key == "gamma") gamma = to_real(key, value);
  else if (key == "min_leaf_size") min_leaf_size = to_count(key, value);
  else if (key == "min_gain") min_gain = to_real(key, value);
  else if (key == "max_bins") max_bins = to_count(key, value);
  else if (key == "eps_smooth") eps_smooth = to_real(key, value);
  else if (key == "beta_min") beta_min = to_real(key, value);
  else if (key == "beta_max") beta_max = to_real(key, value);
  else if (key == "clip_weights") clip_weights = to_flag(key, value);
  else if (key == "p_min") p_min = to_real(key, value);
  else if (key == "decay") decay = to_flag(key, value);
  else if (key == "seed") seed = to_count(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

double margin_main(const TransBoostModel& model, std::span<const double> row) {
  double s = 0.0;
  for (const auto& t : model.trees) s += t.node(t.route(row)).weight_main;
  return model.base_score_main + model.eta * s;
}

double margin_anc(const TransBoostModel& model, std::span<const double> row) {
  double s = 0.0;
  for (const auto& t : model.trees) s += t.node(t.route(row)).weight_anc;
  return model.base_score_anc + model.eta * s;
}

namespace {

template <typename Margin>
std::vector<double> predict_with(const TransBoostModel& model, const Dataset& rows, Margin margin) {
  if (rows.n_cols() != model.n_features) {
    throw DataError(ErrorKind::kFeatureCountMismatch,
                    "model expects " + std::to_string(model.n_features) + " features, data has " +
                        std::to_string(rows.n_cols()));
  }
  std::vector<double> out(rows.n_rows());
  std::vector<double> row;
  for (std::size_t r = 0; r < rows.n_rows(); ++r) {
    row = rows.row(r);
    out[r] = sigmoid(margin(model, row));
  }
  return out;
}

}  // namespace

std::vector<double> predict(const TransBoostModel& model, const Dataset& rows) {
  return predict_with(model, rows, margin_main);
}

std::vector<double> predict_ancillary(const TransBoostModel& model, const Dataset& rows) {
  return predict_with(model, rows, margin_anc);
}

std::vector<FeatureGain> feature_importance(const TransBoostModel& model) {
  std::map<std::size_t, double> totals;
  for (const auto& t : model.trees) {
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) totals[static_cast<std::size_t>(n.feature)] += n.gain;
    }
  }
  std::vector<FeatureGain> out;
  for (const auto& [f, g] : totals) out.push_back({f, g});
  std::stable_sort(out.begin(), out.end(), [](const FeatureGain& a, const FeatureGain& b) { return a.gain > b.gain; });
  return out;
}

}  // namespace transboost
