#include "transboost/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "transboost/error.hpp"
#include "transboost/random.hpp"

namespace transboost {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMalformedRow: return "MalformedRow";
    case ErrorKind::kBadLabel: return "BadLabel";
    case ErrorKind::kBadValue: return "BadValue";
    case ErrorKind::kMissingColumn: return "MissingColumn";
    case ErrorKind::kEmptyTarget: return "EmptyTarget";
    case ErrorKind::kEmptySource: return "EmptySource";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kFeatureCountMismatch: return "FeatureCountMismatch";
    case ErrorKind::kIo: return "IoError";
    case ErrorKind::kModelFormat: return "ModelFormat";
    case ErrorKind::kDegenerateLabels: return "DegenerateLabels";
  }
  return "Unknown";
}

Dataset::Dataset(std::vector<std::vector<double>> columns, std::vector<std::uint8_t> labels,
                 std::vector<Domain> domains, std::vector<std::string> feature_names)
    : n_cols_(columns.size()),
      labels_(std::move(labels)),
      domains_(std::move(domains)),
      feature_names_(std::move(feature_names)) {
  if (labels_.size() != domains_.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "labels and domain tags differ in length");
  }
  for (std::uint8_t y : labels_) {
    if (y > 1) throw DataError(ErrorKind::kBadLabel, "label outside {0,1}");
  }
  values_.reserve(n_cols_ * labels_.size());
  for (auto& col : columns) {
    if (col.size() != labels_.size()) {
      throw DataError(ErrorKind::kLengthMismatch, "feature column length differs from label count");
    }
    values_.insert(values_.end(), col.begin(), col.end());
  }
  if (feature_names_.empty()) {
    for (std::size_t c = 0; c < n_cols_; ++c) feature_names_.push_back("f" + std::to_string(c));
  } else if (feature_names_.size() != n_cols_) {
    throw DataError(ErrorKind::kLengthMismatch, "feature name count differs from column count");
  }
}

std::vector<double> Dataset::row(std::size_t r) const {
  std::vector<double> out(n_cols_);
  for (std::size_t c = 0; c < n_cols_; ++c) out[c] = value(r, c);
  return out;
}

std::size_t Dataset::count(Domain d) const {
  return static_cast<std::size_t>(std::count(domains_.begin(), domains_.end(), d));
}

std::vector<std::size_t> Dataset::rows_of(Domain d) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < n_rows(); ++r) {
    if (domains_[r] == d) out.push_back(r);
  }
  return out;
}

std::size_t Dataset::count_present() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](double v) { return !is_missing(v); }));
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  Dataset out;
  out.n_cols_ = n_cols_;
  out.feature_names_ = feature_names_;
  out.labels_.reserve(rows.size());
  out.domains_.reserve(rows.size());
  for (std::size_t r : rows) {
    out.labels_.push_back(labels_[r]);
    out.domains_.push_back(domains_[r]);
  }
  out.values_.reserve(rows.size() * n_cols_);
  for (std::size_t c = 0; c < n_cols_; ++c) {
    for (std::size_t r : rows) out.values_.push_back(value(r, c));
  }
  return out;
}

Dataset Dataset::with_domain(Domain d) const {
  const auto rows = rows_of(d);
  return select(rows);
}

Dataset Dataset::with_labels(std::vector<std::uint8_t> labels) const {
  if (labels.size() != n_rows()) {
    throw DataError(ErrorKind::kLengthMismatch, "replacement labels have the wrong length");
  }
  Dataset out = *this;
  out.labels_ = std::move(labels);
  return out;
}

Dataset Dataset::with_values(std::vector<double> column_major) const {
  if (column_major.size() != values_.size()) {
    throw DataError(ErrorKind::kLengthMismatch, "replacement values have the wrong size");
  }
  Dataset out = *this;
  out.values_ = std::move(column_major);
  return out;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.n_cols_ != b.n_cols_ || a.labels_ != b.labels_ || a.domains_ != b.domains_ ||
      a.feature_names_ != b.feature_names_ || a.values_.size() != b.values_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.values_.size(); ++i) {
    const double x = a.values_[i];
    const double y = b.values_[i];
    if (is_missing(x) != is_missing(y)) return false;
    if (!is_missing(x) && x != y) return false;
  }
  return true;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.n_cols() != b.n_cols()) {
    throw DataError(ErrorKind::kFeatureCountMismatch,
                    "cannot concatenate datasets with " + std::to_string(a.n_cols()) + " and " +
                        std::to_string(b.n_cols()) + " features");
  }
  std::vector<std::vector<double>> cols(a.n_cols());
  for (std::size_t c = 0; c < a.n_cols(); ++c) {
    auto ca = a.column(c);
    auto cb = b.column(c);
    cols[c].reserve(ca.size() + cb.size());
    cols[c].insert(cols[c].end(), ca.begin(), ca.end());
    cols[c].insert(cols[c].end(), cb.begin(), cb.end());
  }
  std::vector<std::uint8_t> labels(a.labels().begin(), a.labels().end());
  labels.insert(labels.end(), b.labels().begin(), b.labels().end());
  std::vector<Domain> domains(a.domains().begin(), a.domains().end());
  domains.insert(domains.end(), b.domains().begin(), b.domains().end());
  return Dataset(std::move(cols), std::move(labels), std::move(domains), a.feature_names());
}

Dataset subsample_target(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DataError(ErrorKind::kEmptyTarget, "target fraction must lie in (0, 1]");
  }
  const auto target = ds.rows_of(Domain::kTarget);
  const auto keep = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(target.size())));
  if (keep == 0) {
    throw DataError(ErrorKind::kEmptyTarget, "fraction leaves no target rows");
  }
  Rng rng(seed);
  std::vector<std::uint8_t> chosen(ds.n_rows(), 0);
  for (std::size_t i : rng.sample_without_replacement(target.size(), keep)) chosen[target[i]] = 1;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (ds.domain(r) == Domain::kSource || chosen[r]) rows.push_back(r);
  }
  return ds.select(rows);
}

Dataset simulate_sparsity(const Dataset& ds, double keep_rate, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> values(ds.raw_values().begin(), ds.raw_values().end());
  for (double& v : values) {
    if (is_missing(v)) continue;
    // One draw per present cell regardless of keep_rate keeps the stream aligned.
    if (!rng.bernoulli(keep_rate)) v = kMissing;
  }
  return ds.with_values(std::move(values));
}

TargetSplit split_target(const Dataset& ds, std::size_t test_size,
                         std::optional<std::size_t> train_pool_size, std::uint64_t seed) {
  auto target = ds.rows_of(Domain::kTarget);
  if (test_size >= target.size()) {
    throw DataError(ErrorKind::kEmptyTarget, "test split consumes every target row");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(target));
  std::vector<std::size_t> test(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(test_size));
  std::vector<std::size_t> pool(target.begin() + static_cast<std::ptrdiff_t>(test_size), target.end());
  if (train_pool_size) {
    if (*train_pool_size == 0 || *train_pool_size > pool.size()) {
      throw DataError(ErrorKind::kEmptyTarget, "requested target training pool is not available");
    }
    pool.resize(*train_pool_size);
  }
  std::sort(test.begin(), test.end());
  std::vector<std::uint8_t> in_pool(ds.n_rows(), 0);
  for (std::size_t r : pool) in_pool[r] = 1;
  std::vector<std::size_t> train;
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    if (ds.domain(r) == Domain::kSource || in_pool[r]) train.push_back(r);
  }
  return {ds.select(train), ds.select(test)};
}

Dataset make_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t m = spec.n_features;
  std::vector<double> coef(m);
  for (double& w : coef) w = rng.normal();
  std::vector<double> target_coef = coef;
  for (std::size_t j = 0; j < m; ++j) {
    if (rng.uniform() < spec.concept_shift) target_coef[j] = rng.normal();
  }

  const std::size_t n = spec.n_source + spec.n_target;
  std::vector<std::vector<double>> cols(m, std::vector<double>(n));
  std::vector<std::uint8_t> labels(n);
  std::vector<Domain> domains(n);
  for (std::size_t r = 0; r < n; ++r) {
    const bool is_target = r >= spec.n_source;
    domains[r] = is_target ? Domain::kTarget : Domain::kSource;
    const double shift = is_target ? spec.covariate_shift : 0.0;
    const auto& w = is_target ? target_coef : coef;
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double x = rng.normal() + shift;
      cols[j][r] = x;
      // Mild nonlinearity so that trees have something to find beyond a plane.
      z += w[j] * (j % 2 == 0 ? x : std::tanh(2.0 * x));
    }
    z /= std::sqrt(static_cast<double>(m));
    labels[r] = rng.uniform() < 1.0 / (1.0 + std::exp(-2.0 * z)) ? 1 : 0;
  }
  if (spec.missing_rate > 0.0) {
    for (auto& col : cols) {
      for (double& x : col) {
        if (rng.uniform() < spec.missing_rate) x = kMissing;
      }
    }
  }
  return Dataset(std::move(cols), std::move(labels), std::move(domains));
}

}  // namespace transboost
