#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace transboost {

enum class Domain : std::uint8_t { kSource = 0, kTarget = 1 };

// Cell marker for an absent feature value. Compare with is_missing(), never ==.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) { return std::isnan(v); }

// Column-major feature matrix with binary labels and a domain tag per row.
// Immutable once built; the mutating helpers below all return new datasets.
class Dataset {
 public:
  Dataset() = default;

  // `columns[c][r]` is the value of feature c in row r.
  Dataset(std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels,
          std::vector<Domain> domains, std::vector<std::string> feature_names = {});

  std::size_t n_rows() const { return labels_.size(); }
  std::size_t n_cols() const { return n_cols_; }

  double value(std::size_t row, std::size_t col) const { return values_[col * n_rows() + row]; }
  std::span<const double> column(std::size_t col) const {
    return {values_.data() + col * n_rows(), n_rows()};
  }
  std::vector<double> row(std::size_t r) const;

  std::span<const std::uint8_t> labels() const { return labels_; }
  std::span<const Domain> domains() const { return domains_; }
  std::uint8_t label(std::size_t r) const { return labels_[r]; }
  Domain domain(std::size_t r) const { return domains_[r]; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  std::size_t count(Domain d) const;
  std::vector<std::size_t> rows_of(Domain d) const;
  std::size_t count_present() const;

  // Rows in the given order (duplicates allowed).
  Dataset select(std::span<const std::size_t> rows) const;
  Dataset with_domain(Domain d) const;
  Dataset with_labels(std::vector<std::uint8_t> labels) const;
  Dataset with_values(std::vector<double> column_major) const;

  std::span<const double> raw_values() const { return values_; }

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::size_t n_cols_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> labels_;
  std::vector<Domain> domains_;
  std::vector<std::string> feature_names_;
};

// Row-wise concatenation; feature counts must agree.
Dataset concat(const Dataset& a, const Dataset& b);

struct CsvOptions {
  std::string label_column = "label";
  // When the label column is absent and this is set, every label reads as 0.
  bool label_optional = false;
  // Name of the domain column; empty means there is none.
  std::string domain_column;
  // Overrides the domain column for every row. A domain column that is
  // present is still excluded from the features.
  std::optional<Domain> fixed_domain;
  // Without a usable domain column or fixed_domain, rows are tagged target.
  bool domain_optional = false;
  std::string source_tag = "source";
  std::string target_tag = "target";
  std::vector<std::string> missing_tokens = {"", "NA"};
  char delimiter = ',';
  // When set, the label column is read as a number and binarised as value > threshold.
  std::optional<double> label_threshold;
};

Dataset load_csv(const std::string& path, const CsvOptions& options);
Dataset parse_csv(const std::string& text, const CsvOptions& options);

// Writes features, then `label`, then `domain` columns. Values use 17
// significant digits so load_csv(write_csv(ds)) == ds.
void write_csv(const Dataset& ds, const std::string& path);
std::string format_csv(const Dataset& ds);

// Keeps every source row and a seeded without-replacement sample of
// round(fraction * n_target) target rows, in original order.
Dataset subsample_target(const Dataset& ds, double fraction, std::uint64_t seed);

// Each present cell survives with probability keep_rate; otherwise it becomes missing.
Dataset simulate_sparsity(const Dataset& ds, double keep_rate, std::uint64_t seed);

struct TargetSplit {
  Dataset train;  // all source rows + the target training pool
  Dataset test;   // held-out target rows
};

// Carves `test_size` target rows out as a held-out set. When `train_pool_size`
// is given, only that many of the remaining target rows are kept for training.
TargetSplit split_target(const Dataset& ds, std::size_t test_size,
                         std::optional<std::size_t> train_pool_size, std::uint64_t seed);

struct SyntheticSpec {
  std::size_t n_source = 2000;
  std::size_t n_target = 500;
  std::size_t n_features = 10;
  // Mean offset of target features relative to source (covariate shift).
  double covariate_shift = 0.5;
  // Fraction of the label-generating coefficients that differ between domains.
  double concept_shift = 0.3;
  double missing_rate = 0.0;
};

// Two-domain logistic data with controllable covariate and concept shift.
Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

}  // namespace transboost
