#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "transboost/dataset.hpp"
#include "transboost/kmm.hpp"
#include "transboost/random.hpp"
#include "transboost/tree.hpp"

namespace transboost::testing {

// Synthetic source/target data with the default covariate and concept shift.
inline Dataset shifted_dataset(std::size_t n_source, std::size_t n_target, std::size_t n_features,
                               std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_source = n_source;
  spec.n_target = n_target;
  spec.n_features = n_features;
  return make_synthetic(spec, seed);
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("transboost_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> random_probs(std::size_t n, Rng& rng) {
  std::vector<double> p(n);
  for (auto& v : p) v = 0.02 + 0.96 * rng.uniform();
  return p;
}

// Copy of `ds` with every row tagged `d`.
inline Dataset retag(const Dataset& ds, Domain d) {
  std::vector<std::vector<double>> cols(ds.n_cols());
  for (std::size_t c = 0; c < ds.n_cols(); ++c) cols[c].assign(ds.column(c).begin(), ds.column(c).end());
  return Dataset(std::move(cols), std::vector<std::uint8_t>(ds.labels().begin(), ds.labels().end()),
                 std::vector<Domain>(ds.n_rows(), d), ds.feature_names());
}

// Random oracle instance in which every leaf also holds at least one source
// row: leaves the generator left without source rows receive a copy of one of
// their target rows.
inline kmm::OracleInstance covered_instance(std::uint64_t seed) {
  kmm::OracleInstance inst = kmm::random_instance(seed);
  std::vector<bool> has_source(inst.tree.size(), false);
  for (std::size_t r = 0; r < inst.source.n_rows(); ++r) has_source[static_cast<std::size_t>(inst.tree.route(inst.source, r))] = true;
  std::vector<std::size_t> extra;
  for (std::size_t r = 0; r < inst.target.n_rows(); ++r) {
    const auto leaf = static_cast<std::size_t>(inst.tree.route(inst.target, r));
    if (!has_source[leaf]) {
      has_source[leaf] = true;
      extra.push_back(r);
    }
  }
  if (!extra.empty()) inst.source = concat(inst.source, retag(inst.target.select(extra), Domain::kSource));
  return inst;
}

// Source rows followed by target rows, tagged, with the leaf of each row.
struct PooledInstance {
  Dataset pooled;
  std::vector<NodeId> leaf_of_row;
};

inline PooledInstance pool(const kmm::OracleInstance& inst) {
  PooledInstance p{concat(retag(inst.source, Domain::kSource), retag(inst.target, Domain::kTarget)), {}};
  for (std::size_t r = 0; r < p.pooled.n_rows(); ++r) p.leaf_of_row.push_back(inst.tree.route(p.pooled, r));
  return p;
}

}  // namespace transboost::testing
