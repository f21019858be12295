#include "transboost/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "transboost/error.hpp"
#include "transboost/tree.hpp"

namespace transboost {

double auc(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  if (labels.size() != scores.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double n_pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) {
        rank_sum += mid_rank;
        n_pos += 1.0;
      }
    }
    i = j;
  }
  const double n_neg = static_cast<double>(n) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    throw DataError(ErrorKind::kDegenerateLabels, "AUC needs at least one positive and one negative");
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double approval_ratio(std::span<const std::uint8_t> labels, std::span<const double> scores,
                      double max_default_rate) {
  if (labels.size() != scores.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "labels and scores differ in length");
  }
  const std::size_t n = labels.size();
  if (n == 0) return 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::size_t best = 0;
  double defaults = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    defaults += labels[order[k - 1]];
    if (defaults / static_cast<double>(k) <= max_default_rate) best = k;
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

double log_loss(std::span<const std::uint8_t> labels, std::span<const double> probs, double p_min) {
  if (labels.size() != probs.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "labels and probabilities differ in length");
  }
  if (labels.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) s += logistic_loss(labels[i], probs[i], p_min);
  return s / static_cast<double>(labels.size());
}

}  // namespace transboost
