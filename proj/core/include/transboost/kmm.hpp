#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "transboost/dataset.hpp"
#include "transboost/tree.hpp"

namespace transboost::kmm {

// Dense kernel-mean-matching system over source rows built from a tree's
// connection function K(x, y) = 1[q(x) = q(y)] (times 1[y_x = y_y] for the
// joint kernel). This is a verification path: it materialises the full
// N_S x N_S matrix and is capped at kMaxSourceRows.
struct KernelSystem {
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  bool joint = false;
  std::vector<double> K;  // row-major, n_source x n_source
  std::vector<double> k;  // k_i = (N_S / N_T) * sum_j K(x_i, x'_j)
  std::vector<NodeId> leaf;
  std::vector<std::uint8_t> label;

  double at(std::size_t i, std::size_t j) const { return K[i * n_source + j]; }
};

inline constexpr std::size_t kMaxSourceRows = 1000;

// Rows of `source` and `target` are taken as-is; their domain tags are ignored.
KernelSystem build_tree_kernel(const DualTree& tree, const Dataset& source, const Dataset& target, bool joint);

// 0.5 * beta' K beta - k' beta
double objective(const KernelSystem& sys, std::span<const double> beta);

struct QpOptions {
  std::size_t max_iters = 200000;
  // Stop once the projected gradient's Euclidean norm falls below this.
  double tolerance = 1e-9;
  // Step size; 0 selects 1 / L with L the largest absolute row sum of K.
  double step = 0.0;
};

struct QpResult {
  std::vector<double> beta;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Minimises the KMM objective subject to beta >= 0 with accelerated projected
// gradient descent started from zero. Returns the best iterate even when it
// does not converge (converged == false).
QpResult solve_kmm_qp(const KernelSystem& sys, const QpOptions& options = {});

enum class WeightFlag : std::uint8_t {
  kOk,
  kEmptyTargetLeaf,        // no target rows share the leaf: weight 0
  kZeroSourceLikelihood,   // conditional ratio divides by zero: weight +inf
};

struct ClosedForm {
  std::vector<double> beta;
  std::vector<WeightFlag> flags;
};

// Per-leaf analytic KMM weights n_l * N_S / (m_l * N_T), with no smoothing or
// clipping. In joint mode each weight is further multiplied by
// P_main(y_i | x_i) / P_anc(y_i | x_i) from the given positive-class
// probabilities (one per source row).
ClosedForm closed_form_weights(const DualTree& tree, const Dataset& source, const Dataset& target, bool joint,
                               std::span<const double> prob_main = {}, std::span<const double> prob_anc = {});

struct LeafLabelRates {
  std::vector<double> target_positive;  // fraction of positives among target rows in the source row's leaf
  std::vector<double> source_positive;  // same over source rows
};

// Empirical positive rates per leaf, reported for each source row. Plugging
// these in as probabilities makes the joint closed form model-free.
LeafLabelRates empirical_leaf_rates(const DualTree& tree, const Dataset& source, const Dataset& target);

// ---------------------------------------------------------------------------
// Randomised equivalence trials
// ---------------------------------------------------------------------------

struct InstanceSpec {
  std::size_t max_source = 200;
  std::size_t max_target = 100;
  std::size_t max_depth = 3;
  std::size_t n_features = 3;
};

// A random tree over [0,1)^d with source and target rows routed through it.
// Every leaf receives at least one target row; source rows are drawn from a
// skewed distribution so that the weights are not all equal.
struct OracleInstance {
  DualTree tree;
  Dataset source;
  Dataset target;
};

OracleInstance random_instance(std::uint64_t seed, const InstanceSpec& spec = {});

struct TrialResult {
  double marginal_deviation = 0.0;  // |QP - closed form|_inf, tree kernel
  double joint_deviation = 0.0;     // |QP - closed form|_inf, joint kernel with empirical label rates
  bool converged = false;
  std::size_t n_source = 0;
  std::size_t n_target = 0;
  std::size_t n_leaves = 0;
};

TrialResult run_trial(const OracleInstance& instance, const QpOptions& options = {});

}  // namespace transboost::kmm
