#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "transboost/bins.hpp"
#include "transboost/dataset.hpp"

namespace transboost {

inline double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

// Cross-entropy of a single prediction, with p clamped to [p_min, 1 - p_min].
double logistic_loss(std::uint8_t y, double p, double p_min = 0.0);

// First and second derivatives of the logistic loss with respect to the margin.
struct GradStats {
  std::vector<double> grad;
  std::vector<double> hess;

  std::size_t size() const { return grad.size(); }
};

// g = p - y, h = p(1 - p), with p clamped to [p_min, 1 - p_min] first.
GradStats grad_hess(std::span<const std::uint8_t> labels, std::span<const double> probs,
                    double p_min = 1e-6);

enum class DefaultDirection : std::uint8_t { kLeft, kRight };

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

struct TreeNode {
  // Internal nodes: rows with value < threshold go left, missing values follow
  // default_direction. Leaves have feature == -1.
  std::int32_t feature = -1;
  double threshold = 0.0;
  DefaultDirection default_direction = DefaultDirection::kLeft;
  NodeId left = kNoNode;
  NodeId right = kNoNode;
  double gain = 0.0;

  double weight_main = 0.0;  // leaf weight of the target (main) model
  double weight_anc = 0.0;   // leaf weight of the source (ancillary) model

  // Training rows that reached this node during growth.
  std::size_t n_train = 0;

  bool is_leaf() const { return feature < 0; }
};

// One shared tree structure carrying two leaf-weight vectors. Node 0 is the
// root; children always have larger ids than their parent.
class DualTree {
 public:
  DualTree() : nodes_(1) {}

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  TreeNode& node(NodeId id) { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  std::vector<NodeId> leaves() const;
  std::size_t n_leaves() const;
  std::size_t depth() const;

  // Turns a leaf into an internal node with two fresh leaf children and
  // returns the id of the left child (the right child is left + 1).
  NodeId split(NodeId leaf, std::int32_t feature, double threshold, DefaultDirection dir,
               double gain = 0.0);

  // Leaf reached by a row; `row` holds one value per feature.
  NodeId route(std::span<const double> row) const;
  NodeId route(const Dataset& ds, std::size_t row) const;

  // Rebuilds a tree from raw nodes, checking that every child id is valid.
  static DualTree from_nodes(std::vector<TreeNode> nodes);

 private:
  template <typename ValueAt>
  NodeId route_with(ValueAt&& value_at) const;

  std::vector<TreeNode> nodes_;
};

struct TreeParams {
  std::size_t max_depth = 4;
  std::size_t min_leaf_size = 1;
  double min_gain = 0.0;
  double lambda_reg = 1.0;
  double gamma = 0.0;
};

struct SplitCandidate {
  std::int32_t feature = -1;
  std::size_t cut = 0;  // bins <= cut go left
  double gain = 0.0;
  DefaultDirection default_direction = DefaultDirection::kLeft;

  bool valid() const { return feature >= 0; }
};

struct GrownTree {
  DualTree tree;
  // Leaf id of every training row, as recorded during growth.
  std::vector<NodeId> leaf_of_row;
};

// Greedy level-wise growth on weighted second-order statistics. `weights`
// scales each row's gradient and hessian; row counts used for min_leaf_size
// are unweighted. Leaf weights are left at zero.
GrownTree grow_structure(const BinnedMatrix& binned, const BinMap& bins, const GradStats& stats,
                         std::span<const double> weights, const TreeParams& params);

GrownTree grow_structure(const Dataset& ds, const BinMap& bins, const GradStats& stats,
                         std::span<const double> weights, const TreeParams& params);

// Best split of one node given the rows it holds. Exposed for testing.
SplitCandidate find_best_split(const BinnedMatrix& binned, const BinMap& bins, const GradStats& stats,
                               std::span<const double> weights, std::span<const std::size_t> rows,
                               const TreeParams& params);

// Second-order split gain with leaf regulariser lambda and per-leaf penalty gamma.
double split_gain(double g_left, double h_left, double g_right, double h_right, double lambda,
                  double gamma);

// -G / (H + lambda), or 0 when the denominator vanishes.
double leaf_weight(double g_sum, double h_sum, double lambda);

// Fills both leaf-weight vectors. The main weight uses every row with its
// effective weight; the ancillary weight uses source rows only, unweighted.
// A leaf without source rows gets an ancillary weight of 0.
void assign_leaf_weights(DualTree& tree, std::span<const NodeId> leaf_of_row,
                         std::span<const Domain> domains, const GradStats& main_stats,
                         std::span<const double> main_weights, const GradStats& anc_stats,
                         double lambda_reg);

}  // namespace transboost
