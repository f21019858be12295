#include "transboost/bins.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace transboost {
namespace {

// A cut strictly between two neighbouring distinct values. The midpoint can
// round onto `lo` for adjacent doubles, in which case `hi` itself separates them.
double cut_between(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid > lo ? mid : hi;
}

}  // namespace

BinMap::BinMap(std::vector<std::vector<double>> cuts) : cuts_(std::move(cuts)) {
  for (const auto& c : cuts_) {
    if (!std::is_sorted(c.begin(), c.end()) ||
        std::adjacent_find(c.begin(), c.end()) != c.end()) {
      throw std::invalid_argument("bin cut points must be strictly increasing");
    }
  }
}

BinIndex BinMap::bin(std::size_t feature, double value) const {
  if (is_missing(value)) return missing_bin(feature);
  const auto& c = cuts_[feature];
  return static_cast<BinIndex>(std::upper_bound(c.begin(), c.end(), value) - c.begin());
}

BinMap build_bins(const Dataset& ds, std::size_t max_bins) {
  if (max_bins < 2 || max_bins > 65534) throw std::invalid_argument("max_bins must lie in [2, 65534]");
  std::vector<std::vector<double>> all_cuts(ds.n_cols());
  std::vector<double> sorted;
  for (std::size_t f = 0; f < ds.n_cols(); ++f) {
    sorted.clear();
    for (double v : ds.column(f)) {
      if (!is_missing(v)) sorted.push_back(v);
    }
    std::sort(sorted.begin(), sorted.end());
    auto& cuts = all_cuts[f];
    if (sorted.empty()) continue;

    std::vector<double> distinct;
    std::unique_copy(sorted.begin(), sorted.end(), std::back_inserter(distinct));
    if (distinct.size() <= max_bins) {
      for (std::size_t i = 1; i < distinct.size(); ++i) cuts.push_back(cut_between(distinct[i - 1], distinct[i]));
      continue;
    }

    // Empirical quantiles j/max_bins; each cut is placed just below the
    // quantile value so ties never straddle a bin boundary.
    const std::size_t n = sorted.size();
    for (std::size_t j = 1; j < max_bins; ++j) {
      const std::size_t pos = (j * n) / max_bins;
      const double q = sorted[pos];
      auto lower = std::lower_bound(distinct.begin(), distinct.end(), q);
      if (lower == distinct.begin()) continue;
      const double cut = cut_between(*(lower - 1), q);
      if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
    }
  }
  return BinMap(std::move(all_cuts));
}

BinnedMatrix::BinnedMatrix(const Dataset& ds, const BinMap& bins) : n_rows_(ds.n_rows()) {
  if (bins.n_features() != ds.n_cols()) {
    throw std::invalid_argument("bin map and dataset disagree on feature count");
  }
  bins_.resize(ds.n_cols() * n_rows_);
  for (std::size_t f = 0; f < ds.n_cols(); ++f) {
    auto col = ds.column(f);
    BinIndex* out = bins_.data() + f * n_rows_;
    for (std::size_t r = 0; r < n_rows_; ++r) out[r] = bins.bin(f, col[r]);
  }
}

}  // namespace transboost
