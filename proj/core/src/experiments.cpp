#include "transboost/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "transboost/bins.hpp"
#include "transboost/error.hpp"
#include "transboost/kmm.hpp"
#include "transboost/metrics.hpp"
#include "transboost/random.hpp"
#include "transboost/text.hpp"
#include "transboost/transboost.hpp"

namespace transboost {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kTransBoost: return "transboost";
    case Algorithm::kTargetOnly: return "target_only";
    case Algorithm::kPooled: return "pooled";
    case Algorithm::kKmmWeighted: return "kmm_weighted";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::kTransBoost, Algorithm::kTargetOnly, Algorithm::kPooled, Algorithm::kKmmWeighted}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::vector<double> pilot_marginal_weights(const Dataset& train_set, const BoostConfig& config) {
  const std::size_t n = train_set.n_rows();
  std::vector<std::uint8_t> is_target(n);
  for (std::size_t r = 0; r < n; ++r) is_target[r] = train_set.domain(r) == Domain::kTarget ? 1 : 0;
  const double prior = static_cast<double>(train_set.count(Domain::kTarget)) / static_cast<double>(n);
  const std::vector<double> probs(n, prior);
  const GradStats stats = grad_hess(is_target, probs, config.p_min);
  const std::vector<double> ones(n, 1.0);
  const BinMap bins = build_bins(train_set, config.max_bins);
  const GrownTree pilot = grow_structure(train_set, bins, stats, ones, config.tree_params());

  const Dataset source = train_set.with_domain(Domain::kSource);
  const Dataset target = train_set.with_domain(Domain::kTarget);
  const kmm::ClosedForm cf = kmm::closed_form_weights(pilot.tree, source, target, false);

  std::vector<double> weights(n, 1.0);
  std::size_t s = 0;
  for (std::size_t r = 0; r < n; ++r) {
    if (train_set.domain(r) == Domain::kSource) weights[r] = cf.beta[s++];
  }
  return weights;
}

TransBoostModel train_algorithm(Algorithm algorithm, const Dataset& train_set, const BoostConfig& config) {
  switch (algorithm) {
    case Algorithm::kTransBoost:
      return train(train_set, config);
    case Algorithm::kTargetOnly:
      return train_target_only(train_set, config);
    case Algorithm::kPooled: {
      const std::vector<double> ones(train_set.n_rows(), 1.0);
      return train_gbdt(train_set, ones, config);
    }
    case Algorithm::kKmmWeighted: {
      const auto weights = pilot_marginal_weights(train_set, config);
      return train_gbdt(train_set, weights, config);
    }
  }
  throw ConfigError("unknown algorithm");
}

double evaluate_auc(const TransBoostModel& model, const Dataset& test_set) {
  const auto probs = predict(model, test_set);
  return auc(test_set.labels(), probs);
}

// ---------------------------------------------------------------------------
// Fraction sweep
// ---------------------------------------------------------------------------

SweepReport run_fraction_sweep(const Dataset& train_set, const Dataset& test_set, const SweepSpec& spec) {
  SweepReport report;
  for (std::size_t fi = 0; fi < spec.fractions.size(); ++fi) {
    const double fraction = spec.fractions[fi];
    for (std::uint64_t seed : spec.seeds) {
      std::optional<Dataset> cell_train;
      std::string split_error;
      try {
        cell_train = subsample_target(train_set, fraction, child_seed(seed, "fraction", fi));
      } catch (const std::exception& e) {
        split_error = e.what();
      }
      for (Algorithm algo : spec.algorithms) {
        SweepRow row{fraction, seed, algo, std::numeric_limits<double>::quiet_NaN(), split_error};
        if (cell_train) {
          try {
            BoostConfig cfg = spec.config;
            cfg.seed = seed;
            row.auc = evaluate_auc(train_algorithm(algo, *cell_train, cfg), test_set);
          } catch (const std::exception& e) {
            row.error = e.what();
          }
        }
        report.rows.push_back(std::move(row));
      }
    }
  }
  return report;
}

std::vector<SweepSummary> SweepReport::summarize() const {
  std::map<std::pair<double, int>, std::vector<double>> groups;
  for (const auto& r : rows) {
    auto& g = groups[{r.fraction, static_cast<int>(r.algorithm)}];
    if (r.error.empty()) g.push_back(r.auc);
  }
  std::vector<SweepSummary> out;
  for (const auto& [key, aucs] : groups) {
    SweepSummary s{key.first, static_cast<Algorithm>(key.second), std::numeric_limits<double>::quiet_NaN(), 0.0,
                   aucs.size()};
    if (!aucs.empty()) {
      double sum = 0.0;
      for (double a : aucs) sum += a;
      s.mean = sum / static_cast<double>(aucs.size());
      double ss = 0.0;
      for (double a : aucs) ss += (a - s.mean) * (a - s.mean);
      s.stddev = aucs.size() > 1 ? std::sqrt(ss / static_cast<double>(aucs.size() - 1)) : 0.0;
    }
    out.push_back(s);
  }
  return out;
}

std::optional<SweepSummary> SweepReport::find(double fraction, Algorithm algorithm) const {
  for (const auto& s : summarize()) {
    if (s.fraction == fraction && s.algorithm == algorithm) return s;
  }
  return std::nullopt;
}

namespace {

std::string csv_real(double v) { return std::isnan(v) ? std::string("NA") : format_real(v); }

}  // namespace

std::string SweepReport::to_csv() const {
  std::vector<const SweepRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](const SweepRow* a, const SweepRow* b) {
    if (a->fraction != b->fraction) return a->fraction < b->fraction;
    if (a->seed != b->seed) return a->seed < b->seed;
    return static_cast<int>(a->algorithm) < static_cast<int>(b->algorithm);
  });
  std::string out = "fraction,seed,algorithm,auc\n";
  for (const SweepRow* r : sorted) {
    out += format_real(r->fraction) + ',' + std::to_string(r->seed) + ',' + std::string(to_string(r->algorithm)) +
           ',' + csv_real(r->auc) + '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sparsity
// ---------------------------------------------------------------------------

SparsityReport run_sparsity_bench(const Dataset& train_set, const Dataset& test_set,
                                  const std::vector<double>& keep_rates, const std::vector<std::uint64_t>& seeds,
                                  const BoostConfig& config, Algorithm algorithm) {
  SparsityReport report;
  for (std::size_t ki = 0; ki < keep_rates.size(); ++ki) {
    for (std::uint64_t seed : seeds) {
      const Dataset sparse = simulate_sparsity(train_set, keep_rates[ki], child_seed(seed, "sparsity", ki));
      BoostConfig cfg = config;
      cfg.seed = seed;
      report.rows.push_back({keep_rates[ki], seed, evaluate_auc(train_algorithm(algorithm, sparse, cfg), test_set)});
    }
  }
  return report;
}

double SparsityReport::mean_auc(double keep_rate) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.keep_rate == keep_rate) {
      sum += r.auc;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

std::string SparsityReport::to_csv() const {
  std::string out = "keep_rate,seed,auc\n";
  for (const auto& r : rows) out += format_real(r.keep_rate) + ',' + std::to_string(r.seed) + ',' + csv_real(r.auc) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Runtime
// ---------------------------------------------------------------------------

Dataset resize_rows(const Dataset& ds, double multiplier, std::uint64_t seed) {
  if (!(multiplier > 0.0)) throw ConfigError("size multiplier must be positive");
  const std::size_t n = ds.n_rows();
  const auto wanted = static_cast<std::size_t>(std::llround(multiplier * static_cast<double>(n)));
  std::vector<std::size_t> rows;
  rows.reserve(wanted);
  for (std::size_t copy = 0; copy < wanted / n; ++copy) {
    for (std::size_t r = 0; r < n; ++r) rows.push_back(r);
  }
  Rng rng(seed);
  for (std::size_t r : rng.sample_without_replacement(n, wanted % n)) rows.push_back(r);
  return ds.select(rows);
}

RuntimeReport run_runtime_bench(const Dataset& ds, const std::vector<double>& multipliers, std::size_t repeats,
                                const BoostConfig& config) {
  std::vector<Dataset> sized;
  for (std::size_t mi = 0; mi < multipliers.size(); ++mi) {
    sized.push_back(resize_rows(ds, multipliers[mi], child_seed(config.seed, "runtime", mi)));
  }
  // Sizes are interleaved within each repeat so that slow drift in machine
  // speed affects every size alike.
  std::vector<std::vector<RuntimeRow>> by_size(sized.size());
  for (std::size_t run = 0; run < repeats; ++run) {
    for (std::size_t mi = 0; mi < sized.size(); ++mi) {
      const auto start = std::chrono::steady_clock::now();
      const TransBoostModel model = train(sized[mi], config);
      const auto stop = std::chrono::steady_clock::now();
      // Keep the model observable so the call cannot be elided.
      if (model.trees.size() > config.rounds) throw std::logic_error("tree count exceeds rounds");
      by_size[mi].push_back({sized[mi].n_rows(), run, std::chrono::duration<double>(stop - start).count()});
    }
  }
  RuntimeReport report;
  for (const auto& rows : by_size) report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  return report;
}

std::vector<std::size_t> RuntimeReport::sizes() const {
  std::vector<std::size_t> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.size) == out.end()) out.push_back(r.size);
  }
  return out;
}

double RuntimeReport::mean_seconds(std::size_t size) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : rows) {
    if (r.size == size) {
      sum += r.seconds;
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double RuntimeReport::median_seconds(std::size_t size) const {
  std::vector<double> v;
  for (const auto& r : rows) {
    if (r.size == size) v.push_back(r.seconds);
  }
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

std::string RuntimeReport::to_csv() const {
  std::string out = "size,run,seconds\n";
  for (const auto& r : rows) out += std::to_string(r.size) + ',' + std::to_string(r.run) + ',' + format_real(r.seconds) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Approval ratios
// ---------------------------------------------------------------------------

InclusionReport approval_table(std::span<const std::uint8_t> labels, const std::vector<ScoredAlgorithm>& scored,
                               const std::vector<double>& rates) {
  InclusionReport report;
  for (double rate : rates) {
    for (const auto& s : scored) {
      report.rows.push_back({rate, s.algorithm, approval_ratio(labels, s.scores, rate)});
    }
  }
  return report;
}

std::string InclusionReport::to_csv() const {
  std::string out = "rate,algorithm,approval_ratio\n";
  for (const auto& r : rows) {
    out += format_real(r.rate) + ',' + std::string(to_string(r.algorithm)) + ',' + format_real(r.approval_ratio) + '\n';
  }
  return out;
}

}  // namespace transboost
