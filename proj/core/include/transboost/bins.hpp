#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "transboost/dataset.hpp"

namespace transboost {

using BinIndex = std::uint16_t;

// Per-feature quantile cut points. A finite value v lands in bin
// b = #{cuts <= v}, so bin b covers [cuts[b-1], cuts[b]). Missing values go
// to a dedicated bin whose id is one past the last value bin.
class BinMap {
 public:
  BinMap() = default;
  explicit BinMap(std::vector<std::vector<double>> cuts);

  std::size_t n_features() const { return cuts_.size(); }
  std::span<const double> cuts(std::size_t feature) const { return cuts_[feature]; }

  // Number of value bins for the feature (cuts + 1), excluding the missing bin.
  std::size_t n_value_bins(std::size_t feature) const { return cuts_[feature].size() + 1; }
  BinIndex missing_bin(std::size_t feature) const {
    return static_cast<BinIndex>(cuts_[feature].size() + 1);
  }

  BinIndex bin(std::size_t feature, double value) const;

 private:
  std::vector<std::vector<double>> cuts_;
};

BinMap build_bins(const Dataset& ds, std::size_t max_bins = 256);

// Column-major bin ids for every cell of a dataset.
class BinnedMatrix {
 public:
  BinnedMatrix(const Dataset& ds, const BinMap& bins);

  std::size_t n_rows() const { return n_rows_; }
  std::span<const BinIndex> column(std::size_t feature) const {
    return {bins_.data() + feature * n_rows_, n_rows_};
  }

 private:
  std::size_t n_rows_;
  std::vector<BinIndex> bins_;
};

}  // namespace transboost
