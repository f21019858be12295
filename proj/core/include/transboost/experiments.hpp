#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "transboost/dataset.hpp"
#include "transboost/model.hpp"

namespace transboost {

enum class Algorithm {
  kTransBoost,
  kTargetOnly,   // plain boosting on target rows
  kPooled,       // plain boosting on all rows, every weight 1
  kKmmWeighted,  // plain boosting with one-shot marginal weights from a pilot tree
};

std::string_view to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

// Trains one of the algorithms on a two-domain training set.
TransBoostModel train_algorithm(Algorithm algorithm, const Dataset& train_set, const BoostConfig& config);

// Source-row weights for the kmm_weighted baseline: a depth-limited pilot tree
// is grown to separate target from source rows, and each source row gets the
// raw closed-form marginal weight of its leaf.
std::vector<double> pilot_marginal_weights(const Dataset& train_set, const BoostConfig& config);

// Main-model AUC on a held-out set.
double evaluate_auc(const TransBoostModel& model, const Dataset& test_set);

struct SweepRow {
  double fraction;
  std::uint64_t seed;
  Algorithm algorithm;
  double auc;         // NaN when the cell failed
  std::string error;  // empty on success
};

struct SweepSummary {
  double fraction;
  Algorithm algorithm;
  double mean;
  double stddev;
  std::size_t cells;  // successful cells
};

struct SweepReport {
  std::vector<SweepRow> rows;

  std::vector<SweepSummary> summarize() const;
  std::optional<SweepSummary> find(double fraction, Algorithm algorithm) const;
  // `fraction,seed,algorithm,auc`
  std::string to_csv() const;
};

struct SweepSpec {
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  std::vector<Algorithm> algorithms;
  BoostConfig config;
};

// Trains every (fraction, seed, algorithm) cell on all source rows plus a
// seeded fraction of the target rows in `train_set`, scoring on `test_set`.
// Cell failures are recorded, not thrown.
SweepReport run_fraction_sweep(const Dataset& train_set, const Dataset& test_set, const SweepSpec& spec);

struct SparsityRow {
  double keep_rate;
  std::uint64_t seed;
  double auc;
};

struct SparsityReport {
  std::vector<SparsityRow> rows;

  // Mean AUC for one keep rate (NaN if absent).
  double mean_auc(double keep_rate) const;
  // `keep_rate,seed,auc`
  std::string to_csv() const;
};

// Knocks out cells of the training rows only; the test rows stay intact.
SparsityReport run_sparsity_bench(const Dataset& train_set, const Dataset& test_set,
                                  const std::vector<double>& keep_rates, const std::vector<std::uint64_t>& seeds,
                                  const BoostConfig& config, Algorithm algorithm = Algorithm::kTransBoost);

struct RuntimeRow {
  std::size_t size;
  std::size_t run;
  double seconds;
};

struct RuntimeReport {
  std::vector<RuntimeRow> rows;

  std::vector<std::size_t> sizes() const;
  double mean_seconds(std::size_t size) const;
  double median_seconds(std::size_t size) const;
  // `size,run,seconds`
  std::string to_csv() const;
};

// Resizes `ds` to round(multiplier * n_rows) rows per multiplier by whole
// copies plus a seeded sample of the remainder, keeping the domain mix.
Dataset resize_rows(const Dataset& ds, double multiplier, std::uint64_t seed);

// Wall-clock TransBoost training time per size, `repeats` runs each.
RuntimeReport run_runtime_bench(const Dataset& ds, const std::vector<double>& multipliers, std::size_t repeats,
                                const BoostConfig& config);

struct InclusionRow {
  double rate;
  Algorithm algorithm;
  double approval_ratio;
};

struct InclusionReport {
  std::vector<InclusionRow> rows;
  // `rate,algorithm,approval_ratio`
  std::string to_csv() const;
};

struct ScoredAlgorithm {
  Algorithm algorithm;
  std::vector<double> scores;  // predicted default probabilities
};

InclusionReport approval_table(std::span<const std::uint8_t> labels, const std::vector<ScoredAlgorithm>& scored,
                               const std::vector<double>& rates);

}  // namespace transboost
