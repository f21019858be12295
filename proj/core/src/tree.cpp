#include "transboost/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "transboost/error.hpp"

namespace transboost {

double logistic_loss(std::uint8_t y, double p, double p_min) {
  p = std::clamp(p, p_min, 1.0 - p_min);
  return y ? -std::log(p) : -std::log1p(-p);
}

GradStats grad_hess(std::span<const std::uint8_t> labels, std::span<const double> probs, double p_min) {
  if (labels.size() != probs.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "labels and probabilities differ in length");
  }
  GradStats out;
  out.grad.resize(labels.size());
  out.hess.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probs[i], p_min, 1.0 - p_min);
    out.grad[i] = p - static_cast<double>(labels[i]);
    out.hess[i] = p * (1.0 - p);
  }
  return out;
}

// ---------------------------------------------------------------------------
// DualTree
// ---------------------------------------------------------------------------

std::vector<NodeId> DualTree::leaves() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf()) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

std::size_t DualTree::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::size_t DualTree::depth() const {
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.is_leaf()) continue;
    for (NodeId c : {n.left, n.right}) {
      d[static_cast<std::size_t>(c)] = d[i] + 1;
      deepest = std::max(deepest, d[i] + 1);
    }
  }
  return deepest;
}

NodeId DualTree::split(NodeId leaf, std::int32_t feature, double threshold, DefaultDirection dir,
                       double gain) {
  if (!node(leaf).is_leaf()) throw std::logic_error("split() called on an internal node");
  if (feature < 0) throw std::invalid_argument("split feature must be non-negative");
  const auto left = static_cast<NodeId>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  TreeNode& n = node(leaf);
  n.feature = feature;
  n.threshold = threshold;
  n.default_direction = dir;
  n.left = left;
  n.right = left + 1;
  n.gain = gain;
  n.weight_main = 0.0;
  n.weight_anc = 0.0;
  return left;
}

template <typename ValueAt>
NodeId DualTree::route_with(ValueAt&& value_at) const {
  NodeId id = 0;
  while (true) {
    const TreeNode& n = nodes_[static_cast<std::size_t>(id)];
    if (n.is_leaf()) return id;
    const double v = value_at(static_cast<std::size_t>(n.feature));
    bool go_left;
    if (is_missing(v)) {
      go_left = n.default_direction == DefaultDirection::kLeft;
    } else {
      go_left = v < n.threshold;
    }
    id = go_left ? n.left : n.right;
  }
}

NodeId DualTree::route(std::span<const double> row) const {
  return route_with([&](std::size_t f) {
    if (f >= row.size()) throw DataError(ErrorKind::kFeatureCountMismatch, "row is shorter than split feature");
    return row[f];
  });
}

NodeId DualTree::route(const Dataset& ds, std::size_t row) const {
  return route_with([&](std::size_t f) { return ds.value(row, f); });
}

DualTree DualTree::from_nodes(std::vector<TreeNode> nodes) {
  if (nodes.empty()) throw DataError(ErrorKind::kModelFormat, "tree has no nodes");
  std::vector<int> parents(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) continue;
    for (NodeId c : {n.left, n.right}) {
      if (c <= static_cast<NodeId>(i) || static_cast<std::size_t>(c) >= nodes.size()) {
        throw DataError(ErrorKind::kModelFormat, "node " + std::to_string(i) + " has invalid child " +
                                                     std::to_string(c));
      }
      ++parents[static_cast<std::size_t>(c)];
    }
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (parents[i] != 1) {
      throw DataError(ErrorKind::kModelFormat, "node " + std::to_string(i) + " is not reachable exactly once");
    }
  }
  DualTree t;
  t.nodes_ = std::move(nodes);
  return t;
}

// ---------------------------------------------------------------------------
// Split search
// ---------------------------------------------------------------------------

double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma) {
  const double g = g_left + g_right;
  const double h = h_left + h_right;
  return 0.5 * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda) -
                g * g / (h + lambda)) -
         gamma;
}

double leaf_weight(double g_sum, double h_sum, double lambda) {
  const double denom = h_sum + lambda;
  return denom > 0.0 ? -g_sum / denom : 0.0;
}

namespace {

struct BinStats {
  double g = 0.0;
  double h = 0.0;
  std::size_t count = 0;
};

struct SideStats {
  double g;
  double h;
  std::size_t count;
};

}  // namespace

SplitCandidate find_best_split(const BinnedMatrix& binned, const BinMap& bins, const GradStats& stats,
                               std::span<const double> weights, std::span<const std::size_t> rows,
                               const TreeParams& params) {
  SplitCandidate best;
  best.gain = params.min_gain;
  const std::size_t min_leaf = params.min_leaf_size;
  if (rows.size() < 2 * min_leaf) return best;

  double g_total = 0.0;
  double h_total = 0.0;
  for (std::size_t r : rows) {
    g_total += weights[r] * stats.grad[r];
    h_total += weights[r] * stats.hess[r];
  }
  const std::size_t n_total = rows.size();

  std::vector<BinStats> hist;
  for (std::size_t f = 0; f < bins.n_features(); ++f) {
    const std::size_t n_value_bins = bins.n_value_bins(f);
    if (n_value_bins < 2) continue;
    hist.assign(n_value_bins + 1, BinStats{});
    auto col = binned.column(f);
    for (std::size_t r : rows) {
      BinStats& b = hist[col[r]];
      b.g += weights[r] * stats.grad[r];
      b.h += weights[r] * stats.hess[r];
      ++b.count;
    }
    const BinStats& miss = hist[n_value_bins];

    auto consider = [&](SideStats left, std::size_t cut, DefaultDirection dir) {
      const SideStats right{g_total - left.g, h_total - left.h, n_total - left.count};
      if (left.count < min_leaf || right.count < min_leaf) return;
      if (left.count == 0 || right.count == 0) return;
      if (!(left.h + params.lambda_reg > 0.0) || !(right.h + params.lambda_reg > 0.0)) return;
      const double gain =
          split_gain(left.g, left.h, right.g, right.h, params.lambda_reg, params.gamma);
      if (!std::isfinite(gain) || !(gain > best.gain)) return;
      best.feature = static_cast<std::int32_t>(f);
      best.cut = cut;
      best.gain = gain;
      best.default_direction = dir;
    };

    SideStats acc{0.0, 0.0, 0};
    for (std::size_t cut = 0; cut + 1 < n_value_bins; ++cut) {
      acc.g += hist[cut].g;
      acc.h += hist[cut].h;
      acc.count += hist[cut].count;
      if (miss.count == 0) {
        // Nothing to route; send unseen missing values toward the heavier side.
        const bool left_heavier = acc.h >= h_total - acc.h;
        consider(acc, cut, left_heavier ? DefaultDirection::kLeft : DefaultDirection::kRight);
        continue;
      }
      // Missing-left is scored first, so an exact tie keeps it.
      consider({acc.g + miss.g, acc.h + miss.h, acc.count + miss.count}, cut, DefaultDirection::kLeft);
      consider(acc, cut, DefaultDirection::kRight);
    }
  }
  return best;
}

GrownTree grow_structure(const BinnedMatrix& binned, const BinMap& bins, const GradStats& stats,
                         std::span<const double> weights, const TreeParams& params) {
  const std::size_t n = binned.n_rows();
  if (stats.grad.size() != n || stats.hess.size() != n || weights.size() != n) {
    throw DataError(ErrorKind::kLengthMismatch, "gradient statistics, weights and rows differ in length");
  }
  if (params.min_leaf_size == 0) throw std::invalid_argument("min_leaf_size must be at least 1");

  GrownTree out;
  out.leaf_of_row.assign(n, 0);
  out.tree.node(0).n_train = n;

  struct Frontier {
    NodeId id;
    std::vector<std::size_t> rows;
  };
  std::vector<Frontier> level;
  {
    Frontier root{0, std::vector<std::size_t>(n)};
    for (std::size_t r = 0; r < n; ++r) root.rows[r] = r;
    level.push_back(std::move(root));
  }

  for (std::size_t depth = 0; depth < params.max_depth && !level.empty(); ++depth) {
    std::vector<Frontier> next;
    for (auto& node : level) {
      const SplitCandidate best = find_best_split(binned, bins, stats, weights, node.rows, params);
      if (!best.valid()) continue;

      const double threshold = bins.cuts(static_cast<std::size_t>(best.feature))[best.cut];
      const NodeId left = out.tree.split(node.id, best.feature, threshold, best.default_direction, best.gain);
      const NodeId right = left + 1;

      auto col = binned.column(static_cast<std::size_t>(best.feature));
      const BinIndex missing = bins.missing_bin(static_cast<std::size_t>(best.feature));
      const bool missing_left = best.default_direction == DefaultDirection::kLeft;
      Frontier l{left, {}};
      Frontier r{right, {}};
      for (std::size_t row : node.rows) {
        const BinIndex b = col[row];
        const bool go_left = b == missing ? missing_left : b <= best.cut;
        (go_left ? l.rows : r.rows).push_back(row);
      }
      out.tree.node(left).n_train = l.rows.size();
      out.tree.node(right).n_train = r.rows.size();
      for (std::size_t row : l.rows) out.leaf_of_row[row] = left;
      for (std::size_t row : r.rows) out.leaf_of_row[row] = right;
      next.push_back(std::move(l));
      next.push_back(std::move(r));
    }
    level = std::move(next);
  }
  return out;
}

GrownTree grow_structure(const Dataset& ds, const BinMap& bins, const GradStats& stats,
                         std::span<const double> weights, const TreeParams& params) {
  return grow_structure(BinnedMatrix(ds, bins), bins, stats, weights, params);
}

void assign_leaf_weights(DualTree& tree, std::span<const NodeId> leaf_of_row,
                         std::span<const Domain> domains, const GradStats& main_stats,
                         std::span<const double> main_weights, const GradStats& anc_stats,
                         double lambda_reg) {
  const std::size_t n = leaf_of_row.size();
  if (domains.size() != n || main_stats.size() != n || main_weights.size() != n) {
    throw DataError(ErrorKind::kLengthMismatch, "leaf assignment and statistics differ in length");
  }
  const bool have_anc = anc_stats.size() == n;
  struct Acc {
    double g_main = 0.0, h_main = 0.0, g_anc = 0.0, h_anc = 0.0;
    std::size_t n_source = 0;
  };
  std::vector<Acc> acc(tree.size());
  for (std::size_t r = 0; r < n; ++r) {
    Acc& a = acc[static_cast<std::size_t>(leaf_of_row[r])];
    a.g_main += main_weights[r] * main_stats.grad[r];
    a.h_main += main_weights[r] * main_stats.hess[r];
    if (domains[r] == Domain::kSource && have_anc) {
      a.g_anc += anc_stats.grad[r];
      a.h_anc += anc_stats.hess[r];
      ++a.n_source;
    }
  }
  for (NodeId id : tree.leaves()) {
    const Acc& a = acc[static_cast<std::size_t>(id)];
    TreeNode& leaf = tree.node(id);
    leaf.weight_main = leaf_weight(a.g_main, a.h_main, lambda_reg);
    leaf.weight_anc = a.n_source > 0 ? leaf_weight(a.g_anc, a.h_anc, lambda_reg) : 0.0;
  }
}

}  // namespace transboost
