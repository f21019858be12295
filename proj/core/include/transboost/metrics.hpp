#pragma once

#include <cstdint>
#include <span>

namespace transboost {

// Area under the ROC curve from rank statistics; tied scores count one half.
// Throws DataError(kDegenerateLabels) unless both classes are present.
double auc(std::span<const std::uint8_t> labels, std::span<const double> scores);

// Largest fraction k/n of rows that can be approved, taking rows in ascending
// order of predicted default probability (ties by position), while the
// realised default rate of the approved prefix stays <= max_default_rate.
double approval_ratio(std::span<const std::uint8_t> labels, std::span<const double> scores,
                      double max_default_rate);

// Mean cross-entropy, probabilities clamped to [p_min, 1 - p_min].
double log_loss(std::span<const std::uint8_t> labels, std::span<const double> probs, double p_min = 1e-15);

}  // namespace transboost
