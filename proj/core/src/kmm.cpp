#include "transboost/kmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "transboost/error.hpp"
#include "transboost/random.hpp"

namespace transboost::kmm {
namespace {

std::vector<NodeId> route_all(const DualTree& tree, const Dataset& rows) {
  std::vector<NodeId> out(rows.n_rows());
  for (std::size_t r = 0; r < rows.n_rows(); ++r) out[r] = tree.route(rows, r);
  return out;
}

void matvec(const KernelSystem& sys, std::span<const double> x, std::span<double> y) {
  const std::size_t n = sys.n_source;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = sys.K.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

// Norm of the gradient restricted to coordinates that can still move.
double projected_gradient_norm(std::span<const double> beta, std::span<const double> grad) {
  double s = 0.0;
  for (std::size_t i = 0; i < beta.size(); ++i) {
    const double g = (beta[i] <= 0.0 && grad[i] > 0.0) ? 0.0 : grad[i];
    s += g * g;
  }
  return std::sqrt(s);
}

}  // namespace

KernelSystem build_tree_kernel(const DualTree& tree, const Dataset& source, const Dataset& target, bool joint) {
  if (source.n_rows() > kMaxSourceRows) {
    throw std::invalid_argument("kernel oracle is limited to " + std::to_string(kMaxSourceRows) + " source rows");
  }
  if (target.n_rows() == 0) throw DataError(ErrorKind::kEmptyTarget, "kernel system needs target rows");

  KernelSystem sys;
  sys.n_source = source.n_rows();
  sys.n_target = target.n_rows();
  sys.joint = joint;
  sys.leaf = route_all(tree, source);
  sys.label.assign(source.labels().begin(), source.labels().end());
  const auto target_leaf = route_all(tree, target);

  auto kernel = [&](NodeId qa, std::uint8_t ya, NodeId qb, std::uint8_t yb) {
    return (qa == qb && (!joint || ya == yb)) ? 1.0 : 0.0;
  };

  const std::size_t n = sys.n_source;
  sys.K.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      sys.K[i * n + j] = kernel(sys.leaf[i], sys.label[i], sys.leaf[j], sys.label[j]);
    }
  }
  const double scale = static_cast<double>(sys.n_source) / static_cast<double>(sys.n_target);
  sys.k.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < sys.n_target; ++j) {
      s += kernel(sys.leaf[i], sys.label[i], target_leaf[j], target.label(j));
    }
    sys.k[i] = scale * s;
  }
  return sys;
}

double objective(const KernelSystem& sys, std::span<const double> beta) {
  std::vector<double> kb(sys.n_source);
  matvec(sys, beta, kb);
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < sys.n_source; ++i) {
    quad += beta[i] * kb[i];
    lin += sys.k[i] * beta[i];
  }
  return 0.5 * quad - lin;
}

QpResult solve_kmm_qp(const KernelSystem& sys, const QpOptions& options) {
  const std::size_t n = sys.n_source;
  QpResult res;
  res.beta.assign(n, 0.0);
  if (n == 0) {
    res.converged = true;
    return res;
  }

  double step = options.step;
  if (step <= 0.0) {
    double lipschitz = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += std::abs(sys.at(i, j));
      lipschitz = std::max(lipschitz, s);
    }
    step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;
  }

  // FISTA with gradient-based adaptive restart.
  std::vector<double> x(n, 0.0), x_prev(n, 0.0), y(n, 0.0), grad(n), kx(n);
  double t = 1.0;
  double best_norm = std::numeric_limits<double>::infinity();

  auto gradient_at = [&](std::span<const double> point, std::span<double> g) {
    matvec(sys, point, g);
    for (std::size_t i = 0; i < n; ++i) g[i] -= sys.k[i];
  };

  for (std::size_t it = 0; it < options.max_iters; ++it) {
    gradient_at(x, kx);
    const double norm = projected_gradient_norm(x, kx);
    if (norm < best_norm) {
      best_norm = norm;
      res.beta = x;
    }
    res.iterations = it;
    if (norm < options.tolerance) {
      res.converged = true;
      break;
    }

    gradient_at(y, grad);
    x_prev = x;
    for (std::size_t i = 0; i < n; ++i) x[i] = std::max(0.0, y[i] - step * grad[i]);

    double restart_dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) restart_dot += (y[i] - x[i]) * (x[i] - x_prev[i]);
    if (restart_dot > 0.0) t = 1.0;

    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double momentum = (t - 1.0) / t_next;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + momentum * (x[i] - x_prev[i]);
    t = t_next;
  }
  res.gradient_norm = best_norm;
  return res;
}

ClosedForm closed_form_weights(const DualTree& tree, const Dataset& source, const Dataset& target, bool joint,
                               std::span<const double> prob_main, std::span<const double> prob_anc) {
  if (joint && (prob_main.size() != source.n_rows() || prob_anc.size() != source.n_rows())) {
    throw DataError(ErrorKind::kLengthMismatch, "joint closed form needs one probability pair per source row");
  }
  const auto source_leaf = route_all(tree, source);
  const auto target_leaf = route_all(tree, target);
  std::map<NodeId, double> m, n;
  for (NodeId q : source_leaf) m[q] += 1.0;
  for (NodeId q : target_leaf) n[q] += 1.0;
  const double ratio = static_cast<double>(source.n_rows()) / static_cast<double>(target.n_rows());

  ClosedForm out;
  out.beta.resize(source.n_rows());
  out.flags.assign(source.n_rows(), WeightFlag::kOk);
  for (std::size_t i = 0; i < source.n_rows(); ++i) {
    const NodeId q = source_leaf[i];
    const double n_leaf = n.count(q) ? n[q] : 0.0;
    double beta = n_leaf / m[q] * ratio;
    if (n_leaf == 0.0) out.flags[i] = WeightFlag::kEmptyTargetLeaf;
    if (joint) {
      const std::uint8_t y = source.label(i);
      const double num = y ? prob_main[i] : 1.0 - prob_main[i];
      const double den = y ? prob_anc[i] : 1.0 - prob_anc[i];
      if (den == 0.0) {
        beta = std::numeric_limits<double>::infinity();
        out.flags[i] = WeightFlag::kZeroSourceLikelihood;
      } else {
        beta *= num / den;
      }
    }
    out.beta[i] = beta;
  }
  return out;
}

LeafLabelRates empirical_leaf_rates(const DualTree& tree, const Dataset& source, const Dataset& target) {
  const auto source_leaf = route_all(tree, source);
  const auto target_leaf = route_all(tree, target);
  std::map<NodeId, std::pair<double, double>> src, tgt;  // (positives, total)
  for (std::size_t i = 0; i < source.n_rows(); ++i) {
    auto& s = src[source_leaf[i]];
    s.first += source.label(i);
    s.second += 1.0;
  }
  for (std::size_t j = 0; j < target.n_rows(); ++j) {
    auto& s = tgt[target_leaf[j]];
    s.first += target.label(j);
    s.second += 1.0;
  }
  LeafLabelRates out;
  for (std::size_t i = 0; i < source.n_rows(); ++i) {
    const auto& s = src[source_leaf[i]];
    out.source_positive.push_back(s.first / s.second);
    auto it = tgt.find(source_leaf[i]);
    out.target_positive.push_back(it == tgt.end() ? 0.0 : it->second.first / it->second.second);
  }
  return out;
}

}  // namespace transboost::kmm

namespace transboost::kmm {
namespace {

struct Box {
  std::vector<double> lo, hi;
};

// Random splits down to max_depth; each child is created with probability 0.8.
void grow_random(DualTree& tree, NodeId id, Box box, std::size_t depth, const InstanceSpec& spec, Rng& rng,
                 std::vector<std::pair<NodeId, Box>>& leaves) {
  if (depth >= spec.max_depth || (depth > 0 && rng.uniform() > 0.8)) {
    leaves.emplace_back(id, std::move(box));
    return;
  }
  const auto f = static_cast<std::size_t>(rng.below(spec.n_features));
  const double lo = box.lo[f], hi = box.hi[f];
  const double threshold = lo + (0.2 + 0.6 * rng.uniform()) * (hi - lo);
  const auto dir = rng.bernoulli(0.5) ? DefaultDirection::kLeft : DefaultDirection::kRight;
  const NodeId left = tree.split(id, static_cast<std::int32_t>(f), threshold, dir);
  Box lbox = box, rbox = box;
  lbox.hi[f] = threshold;
  rbox.lo[f] = threshold;
  grow_random(tree, left, std::move(lbox), depth + 1, spec, rng, leaves);
  grow_random(tree, left + 1, std::move(rbox), depth + 1, spec, rng, leaves);
}

Dataset make_rows(const std::vector<std::vector<double>>& points, std::vector<std::uint8_t> labels, Domain d) {
  const std::size_t m = points.empty() ? 0 : points.front().size();
  std::vector<std::vector<double>> cols(m, std::vector<double>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    for (std::size_t c = 0; c < m; ++c) cols[c][r] = points[r][c];
  }
  std::vector<Domain> domains(points.size(), d);
  return Dataset(std::move(cols), std::move(labels), std::move(domains));
}

}  // namespace

OracleInstance random_instance(std::uint64_t seed, const InstanceSpec& spec) {
  Rng rng(seed);
  OracleInstance inst;
  std::vector<std::pair<NodeId, Box>> leaves;
  Box unit{std::vector<double>(spec.n_features, 0.0), std::vector<double>(spec.n_features, 1.0)};
  grow_random(inst.tree, 0, unit, 0, spec, rng, leaves);

  // Per-leaf positive rate, different across domains.
  std::vector<double> rate_target(inst.tree.size(), 0.5), rate_source(inst.tree.size(), 0.5);
  for (const auto& [id, box] : leaves) {
    rate_target[static_cast<std::size_t>(id)] = 0.1 + 0.8 * rng.uniform();
    rate_source[static_cast<std::size_t>(id)] = 0.1 + 0.8 * rng.uniform();
  }

  const std::size_t n_leaves = leaves.size();
  const std::size_t room = spec.max_target > n_leaves ? spec.max_target - n_leaves : 0;
  const std::size_t n_target = n_leaves + static_cast<std::size_t>(rng.below(room + 1));
  const std::size_t n_source = 1 + static_cast<std::size_t>(rng.below(spec.max_source));

  std::vector<std::vector<double>> points;
  std::vector<std::uint8_t> labels;
  auto label_for = [&](const std::vector<double>& x, const std::vector<double>& rates) {
    const NodeId q = inst.tree.route(x);
    return static_cast<std::uint8_t>(rng.bernoulli(rates[static_cast<std::size_t>(q)]) ? 1 : 0);
  };

  for (const auto& [id, box] : leaves) {
    std::vector<double> x(spec.n_features);
    for (std::size_t c = 0; c < spec.n_features; ++c) x[c] = box.lo[c] + rng.uniform() * (box.hi[c] - box.lo[c]);
    labels.push_back(label_for(x, rate_target));
    points.push_back(std::move(x));
  }
  while (points.size() < n_target) {
    std::vector<double> x(spec.n_features);
    for (double& v : x) v = rng.uniform();
    labels.push_back(label_for(x, rate_target));
    points.push_back(std::move(x));
  }
  inst.target = make_rows(points, std::move(labels), Domain::kTarget);

  points.clear();
  labels = {};
  for (std::size_t i = 0; i < n_source; ++i) {
    std::vector<double> x(spec.n_features);
    for (double& v : x) {
      const double u = rng.uniform();
      v = u * u;  // mass pushed toward the lower corner
    }
    labels.push_back(label_for(x, rate_source));
    points.push_back(std::move(x));
  }
  inst.source = make_rows(points, std::move(labels), Domain::kSource);
  return inst;
}

TrialResult run_trial(const OracleInstance& instance, const QpOptions& options) {
  TrialResult out;
  out.n_source = instance.source.n_rows();
  out.n_target = instance.target.n_rows();
  out.n_leaves = instance.tree.n_leaves();

  auto deviation = [](std::span<const double> a, std::span<const double> b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  };

  const KernelSystem marginal = build_tree_kernel(instance.tree, instance.source, instance.target, false);
  const QpResult qp_marginal = solve_kmm_qp(marginal, options);
  const ClosedForm cf_marginal = closed_form_weights(instance.tree, instance.source, instance.target, false);
  out.marginal_deviation = deviation(qp_marginal.beta, cf_marginal.beta);

  const KernelSystem joint = build_tree_kernel(instance.tree, instance.source, instance.target, true);
  const QpResult qp_joint = solve_kmm_qp(joint, options);
  const LeafLabelRates rates = empirical_leaf_rates(instance.tree, instance.source, instance.target);
  const ClosedForm cf_joint = closed_form_weights(instance.tree, instance.source, instance.target, true,
                                                  rates.target_positive, rates.source_positive);
  out.joint_deviation = deviation(qp_joint.beta, cf_joint.beta);
  out.converged = qp_marginal.converged && qp_joint.converged;
  return out;
}

}  // namespace transboost::kmm
