#include "cli.hpp"

#ifdef TRANSBOOST_SYSTEM_CLI11
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "transboost/dataset.hpp"
#include "transboost/error.hpp"
#include "transboost/experiments.hpp"
#include "transboost/kmm.hpp"
#include "transboost/metrics.hpp"
#include "transboost/model.hpp"
#include "transboost/random.hpp"
#include "transboost/text.hpp"
#include "transboost/transboost.hpp"

namespace transboost::cli {
namespace {

constexpr double kOracleTolerance = 1e-6;

struct Options {
  std::vector<std::string> data;
  std::string label_col = "label";
  std::string domain_col = "domain";
  std::string source_tag = "source";
  std::string target_tag = "target";
  double label_threshold = 0.0;

  BoostConfig boost;
  std::string algorithm = "transboost";
  std::vector<std::string> algorithms = {"transboost", "target_only", "pooled", "kmm_weighted"};

  std::string model;
  std::string model_out;
  std::string report_out;
  std::string log_out;
  std::string out;

  double test_size = 0.2;
  std::size_t train_pool = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<double> keep_rates = {0.01, 0.05, 0.1, 0.25, 1.0};
  std::vector<double> rates = {0.05, 0.1, 0.15, 0.2};
  std::vector<double> multipliers = {1.0, 2.0};
  std::size_t repeats = 10;
  std::size_t trials = 100;

  SyntheticSpec synthetic;
};

struct Context {
  Options opt;
  const CLI::Option* label_threshold = nullptr;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

// Splits "path@source" into the path and the forced domain.
std::pair<std::string, std::optional<Domain>> split_data_arg(const std::string& arg) {
  const auto at = arg.rfind('@');
  if (at == std::string::npos) return {arg, std::nullopt};
  std::string tag = arg.substr(at + 1);
  std::transform(tag.begin(), tag.end(), tag.begin(), [](unsigned char c) { return std::tolower(c); });
  if (tag == "source") return {arg.substr(0, at), Domain::kSource};
  if (tag == "target") return {arg.substr(0, at), Domain::kTarget};
  return {arg, std::nullopt};
}

CsvOptions csv_options(const Context& ctx) {
  CsvOptions csv;
  csv.label_column = ctx.opt.label_col;
  csv.domain_column = ctx.opt.domain_col;
  csv.source_tag = ctx.opt.source_tag;
  csv.target_tag = ctx.opt.target_tag;
  if (ctx.label_threshold->count() > 0) csv.label_threshold = ctx.opt.label_threshold;
  return csv;
}

Dataset load_data(const Context& ctx, bool for_prediction = false) {
  if (ctx.opt.data.empty()) throw ConfigError("--data is required");
  std::optional<Dataset> all;
  for (const auto& arg : ctx.opt.data) {
    auto [path, domain] = split_data_arg(arg);
    CsvOptions csv = csv_options(ctx);
    csv.fixed_domain = domain;
    if (for_prediction) {
      csv.label_optional = true;
      csv.domain_optional = true;
    }
    Dataset ds = load_csv(path, csv);
    all = all ? concat(*all, ds) : std::move(ds);
  }
  return std::move(*all);
}

std::vector<std::uint64_t> seeds_of(const Options& opt) {
  return opt.seeds.empty() ? std::vector<std::uint64_t>{opt.boost.seed} : opt.seeds;
}

std::vector<Algorithm> algorithms_of(const std::vector<std::string>& names) {
  std::vector<Algorithm> algos;
  for (const auto& name : names) {
    auto a = parse_algorithm(name);
    if (!a) throw ConfigError("unknown algorithm '" + name + "'");
    algos.push_back(*a);
  }
  return algos;
}

TargetSplit split_for_eval(const Context& ctx, const Dataset& ds) {
  const std::size_t n_target = ds.count(Domain::kTarget);
  const double ts = ctx.opt.test_size;
  if (!(ts > 0.0)) throw ConfigError("--test-size must be positive");
  const std::size_t test = ts < 1.0 ? static_cast<std::size_t>(std::llround(ts * static_cast<double>(n_target)))
                                    : static_cast<std::size_t>(ts);
  std::optional<std::size_t> pool;
  if (ctx.opt.train_pool > 0) pool = ctx.opt.train_pool;
  return split_target(ds, test, pool, child_seed(ctx.opt.boost.seed, "split", 0));
}

// Writes `text` to `path`, or to the normal output stream when `path` is empty.
void emit(const Context& ctx, const std::string& path, const std::string& text) {
  if (path.empty()) {
    *ctx.out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError(ErrorKind::kIo, "cannot write '" + path + "'");
  file << text;
  if (!file) throw DataError(ErrorKind::kIo, "write failed for '" + path + "'");
}

int cmd_train(Context& ctx) {
  const Options& opt = ctx.opt;
  if (opt.model_out.empty()) throw ConfigError("--model-out is required");
  opt.boost.validate();
  const Algorithm algo = algorithms_of({opt.algorithm}).front();
  const Dataset ds = load_data(ctx);

  std::vector<RoundLog> log;
  TransBoostModel model;
  if (algo == Algorithm::kTransBoost) {
    TrainOptions to;
    to.log = &log;
    model = train(ds, opt.boost, to);
  } else {
    model = train_algorithm(algo, ds, opt.boost);
  }
  save_model(model, opt.model_out);

  std::ostringstream text;
  text << "algorithm=" << to_string(algo) << " rows_source=" << ds.count(Domain::kSource)
       << " rows_target=" << ds.count(Domain::kTarget) << " features=" << ds.n_cols()
       << " rounds=" << model.trees.size() << '\n';
  for (const auto& r : log) {
    text << "round=" << r.round << " loss_target=" << format_real(r.loss_target)
         << " loss_source=" << format_real(r.loss_source) << " beta_min=" << format_real(r.beta_min)
         << " beta_mean=" << format_real(r.beta_mean) << " beta_max=" << format_real(r.beta_max)
         << " lambda_effective=" << format_real(r.lambda_effective) << " leaves=" << r.n_leaves << '\n';
  }
  emit(ctx, opt.log_out, text.str());
  return kOk;
}

int cmd_predict(Context& ctx) {
  const Options& opt = ctx.opt;
  if (opt.model.empty()) throw ConfigError("--model is required");
  const TransBoostModel model = load_model(opt.model);
  const Dataset ds = load_data(ctx, true);
  const std::vector<double> probs = predict(model, ds);
  std::string text = "probability\n";
  for (double p : probs) text += format_real(p) + '\n';
  emit(ctx, opt.out, text);
  return kOk;
}

int cmd_eval(Context& ctx) {
  const Options& opt = ctx.opt;
  opt.boost.validate();
  const auto algos = algorithms_of(opt.algorithms);
  const Dataset ds = load_data(ctx);
  const TargetSplit split = split_for_eval(ctx, ds);

  std::vector<ScoredAlgorithm> scored;
  for (Algorithm a : algos) {
    const TransBoostModel model = train_algorithm(a, split.train, opt.boost);
    std::vector<double> scores = predict(model, split.test);
    *ctx.out << "algorithm=" << to_string(a) << " auc=" << format_real(auc(split.test.labels(), scores))
             << '\n';
    scored.push_back({a, std::move(scores)});
  }
  if (!opt.report_out.empty()) {
    emit(ctx, opt.report_out, approval_table(split.test.labels(), scored, opt.rates).to_csv());
  }
  return kOk;
}

int cmd_sweep(Context& ctx) {
  const Options& opt = ctx.opt;
  opt.boost.validate();
  SweepSpec spec{opt.fractions, seeds_of(opt), algorithms_of(opt.algorithms), opt.boost};
  const Dataset ds = load_data(ctx);
  const TargetSplit split = split_for_eval(ctx, ds);
  const SweepReport report = run_fraction_sweep(split.train, split.test, spec);
  emit(ctx, opt.report_out, report.to_csv());
  if (!opt.report_out.empty()) {
    for (const auto& s : report.summarize()) {
      *ctx.out << "fraction=" << format_real(s.fraction) << " algorithm=" << to_string(s.algorithm)
               << " mean_auc=" << format_real(s.mean) << " stddev=" << format_real(s.stddev)
               << " cells=" << s.cells << '\n';
    }
  }
  for (const auto& r : report.rows) {
    if (!r.error.empty()) {
      *ctx.err << "fraction=" << format_real(r.fraction) << " seed=" << r.seed << " algorithm=" << to_string(r.algorithm)
               << " error=" << r.error << '\n';
    }
  }
  return kOk;
}

int cmd_sparsity(Context& ctx) {
  const Options& opt = ctx.opt;
  opt.boost.validate();
  const Algorithm algo = algorithms_of({opt.algorithm}).front();
  const Dataset ds = load_data(ctx);
  const TargetSplit split = split_for_eval(ctx, ds);
  const SparsityReport report =
      run_sparsity_bench(split.train, split.test, opt.keep_rates, seeds_of(opt), opt.boost, algo);
  emit(ctx, opt.report_out, report.to_csv());
  if (!opt.report_out.empty()) {
    for (double k : opt.keep_rates) {
      *ctx.out << "keep_rate=" << format_real(k) << " mean_auc=" << format_real(report.mean_auc(k)) << '\n';
    }
  }
  return kOk;
}

int cmd_runtime(Context& ctx) {
  const Options& opt = ctx.opt;
  opt.boost.validate();
  const Dataset ds = opt.data.empty() ? make_synthetic(opt.synthetic, child_seed(opt.boost.seed, "synthetic", 0))
                                      : load_data(ctx);
  const RuntimeReport report = run_runtime_bench(ds, opt.multipliers, opt.repeats, opt.boost);
  emit(ctx, opt.report_out, report.to_csv());
  if (!opt.report_out.empty()) {
    for (std::size_t size : report.sizes()) {
      *ctx.out << "size=" << size << " mean_seconds=" << format_real(report.mean_seconds(size))
               << " median_seconds=" << format_real(report.median_seconds(size)) << '\n';
    }
  }
  return kOk;
}

int cmd_oracle_check(Context& ctx) {
  const Options& opt = ctx.opt;
  if (opt.trials == 0) throw ConfigError("--trials must be at least 1");
  double worst_marginal = 0.0, worst_joint = 0.0;
  bool ok = true;
  for (std::size_t t = 0; t < opt.trials; ++t) {
    const auto instance = kmm::random_instance(child_seed(opt.boost.seed, "oracle", t));
    const kmm::TrialResult r = kmm::run_trial(instance);
    const bool pass = r.converged && r.marginal_deviation <= kOracleTolerance && r.joint_deviation <= kOracleTolerance;
    ok = ok && pass;
    worst_marginal = std::max(worst_marginal, r.marginal_deviation);
    worst_joint = std::max(worst_joint, r.joint_deviation);
    *ctx.out << "trial=" << t << " n_source=" << r.n_source << " n_target=" << r.n_target << " leaves=" << r.n_leaves
             << " marginal_dev=" << format_real(r.marginal_deviation)
             << " joint_dev=" << format_real(r.joint_deviation) << " converged=" << (r.converged ? 1 : 0) << '\n';
  }
  *ctx.out << (ok ? "PASS" : "FAIL") << " trials=" << opt.trials << " max_marginal_dev=" << format_real(worst_marginal)
           << " max_joint_dev=" << format_real(worst_joint) << " tolerance=1e-06\n";
  return ok ? kOk : kCheckFailure;
}

int cmd_importance(Context& ctx) {
  if (ctx.opt.model.empty()) throw ConfigError("--model is required");
  const TransBoostModel model = load_model(ctx.opt.model);
  std::string text;
  for (const auto& fg : feature_importance(model)) {
    text += "feature=" + std::to_string(fg.feature) + " gain=" + format_real(fg.gain) + '\n';
  }
  emit(ctx, ctx.opt.out, text);
  return kOk;
}

int cmd_make_synthetic(Context& ctx) {
  if (ctx.opt.out.empty()) throw ConfigError("--out is required");
  const Dataset ds = make_synthetic(ctx.opt.synthetic, ctx.opt.boost.seed);
  write_csv(ds, ctx.opt.out);
  return kOk;
}

using Command = int (*)(Context&);

void add_options(CLI::App& app, Context& ctx) {
  Options& o = ctx.opt;
  BoostConfig& b = o.boost;

  app.add_option("--data", o.data, "CSV file, optionally suffixed @source or @target")->delimiter(',');
  app.add_option("--label-col", o.label_col, "Label column name")->capture_default_str();
  app.add_option("--domain-col", o.domain_col, "Domain column name")->capture_default_str();
  app.add_option("--source-tag", o.source_tag, "Domain value marking source rows")->capture_default_str();
  app.add_option("--target-tag", o.target_tag, "Domain value marking target rows")->capture_default_str();
  ctx.label_threshold = app.add_option("--label-threshold", o.label_threshold, "Binarize labels as value > threshold");

  app.add_option("--rounds", b.rounds, "Boosting rounds")->capture_default_str();
  app.add_option("--depth", b.max_depth, "Maximum tree depth")->capture_default_str();
  app.add_option("--eta", b.eta, "Learning rate")->capture_default_str();
  app.add_option("--lambda-balance", b.lambda_balance, "Source weight multiplier")->capture_default_str();
  app.add_option("--lambda-reg", b.lambda_reg, "L2 penalty on leaf weights")->capture_default_str();
  app.add_option("--gamma", b.gamma, "Penalty per split")->capture_default_str();
  app.add_option("--min-leaf", b.min_leaf_size, "Minimum rows per leaf")->capture_default_str();
  app.add_option("--min-gain", b.min_gain, "Minimum split gain")->capture_default_str();
  app.add_option("--max-bins", b.max_bins, "Histogram bins per feature")->capture_default_str();
  app.add_option("--eps-smooth", b.eps_smooth, "Leaf count smoothing")->capture_default_str();
  app.add_option("--beta-min", b.beta_min, "Lower clip for source weights")->capture_default_str();
  app.add_option("--beta-max", b.beta_max, "Upper clip for source weights")->capture_default_str();
  app.add_option("--p-min", b.p_min, "Probability clamp")->capture_default_str();
  app.add_flag("--decay", b.decay, "Decay lambda-balance over rounds");
  app.add_option("--seed", b.seed, "Root random seed")->capture_default_str();

  app.add_option("--algorithm", o.algorithm, "transboost, target_only, pooled or kmm_weighted")->capture_default_str();
  app.add_option("--algorithms", o.algorithms, "Algorithms to compare")->delimiter(',');

  app.add_option("--model", o.model, "Model file to read");
  app.add_option("--model-out", o.model_out, "Model file to write");
  app.add_option("--report-out", o.report_out, "Report CSV to write");
  app.add_option("--log-out", o.log_out, "Training log to write");
  app.add_option("--out", o.out, "Output file");

  app.add_option("--test-size", o.test_size, "Held-out target rows (count, or fraction when < 1)")
      ->capture_default_str();
  app.add_option("--train-pool", o.train_pool, "Target rows kept for training after the split (0 keeps all)")
      ->capture_default_str();
  app.add_option("--seeds", o.seeds, "Seeds for repeated runs")->delimiter(',');
  app.add_option("--fractions", o.fractions, "Target fractions for the sweep")->delimiter(',');
  app.add_option("--keep-rates", o.keep_rates, "Cell keep rates for the sparsity bench")->delimiter(',');
  app.add_option("--rates", o.rates, "Default-rate thresholds for approval ratios")->delimiter(',');
  app.add_option("--multipliers", o.multipliers, "Row multipliers for the runtime bench")->delimiter(',');
  app.add_option("--repeats", o.repeats, "Runs per size in the runtime bench")->capture_default_str();
  app.add_option("--trials", o.trials, "Random instances for oracle-check")->capture_default_str();

  SyntheticSpec& s = o.synthetic;
  app.add_option("--n-source", s.n_source, "Synthetic source rows")->capture_default_str();
  app.add_option("--n-target", s.n_target, "Synthetic target rows")->capture_default_str();
  app.add_option("--n-features", s.n_features, "Synthetic features")->capture_default_str();
  app.add_option("--covariate-shift", s.covariate_shift, "Synthetic covariate shift")->capture_default_str();
  app.add_option("--concept-shift", s.concept_shift, "Synthetic concept shift")->capture_default_str();
  app.add_option("--missing-rate", s.missing_rate, "Synthetic missing-cell rate")->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx;
  ctx.out = &out;
  ctx.err = &err;

  CLI::App app{"Transfer boosting with shared tree structures", "transboost"};
  app.set_config("--config", "", "Profile of key = value lines; flags override it");
  app.allow_config_extras(false);
  app.require_subcommand(1, 1);
  add_options(app, ctx);

  const std::vector<std::pair<std::string, std::pair<std::string, Command>>> commands = {
      {"train", {"Train a model and write it with a round log", cmd_train}},
      {"predict", {"Write probabilities for every row", cmd_predict}},
      {"eval", {"Compare algorithms on a held-out target split", cmd_eval}},
      {"sweep", {"AUC over target fractions and seeds", cmd_sweep}},
      {"sparsity", {"AUC over cell keep rates", cmd_sparsity}},
      {"runtime", {"Training time over dataset sizes", cmd_runtime}},
      {"oracle-check", {"Compare QP weights with the closed forms", cmd_oracle_check}},
      {"importance", {"Split gain per feature", cmd_importance}},
      {"make-synthetic", {"Write a synthetic shifted dataset", cmd_make_synthetic}},
  };
  std::map<const CLI::App*, Command> dispatch;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->fallthrough();
    dispatch[sub] = entry.second;
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    for (const auto& [sub, command] : dispatch) {
      if (sub->parsed()) return command(ctx);
    }
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace transboost::cli
