#include "sgin/hierfl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <fmt/format.h>

#include "sgin/geometry.hpp"

namespace sgin::hierfl {

double ModelVector::norm() const {
  double s = 0.0;
  for (double v : values) s += v * v;
  return std::sqrt(s);
}

bool ModelVector::finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

ModelVector& ModelVector::operator+=(const ModelVector& other) {
  if (other.dim() != dim()) throw std::invalid_argument("model dimension mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

ModelVector& ModelVector::operator-=(const ModelVector& other) {
  if (other.dim() != dim()) throw std::invalid_argument("model dimension mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= other.values[i];
  return *this;
}

ModelVector& ModelVector::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

void LocalTask::validate() const {
  if (local_steps < 1) throw ConfigError(fmt::format("device {}: local_steps must be >= 1", device_id));
  if (!(learning_rate >= 0.0)) throw ConfigError(fmt::format("device {}: learning_rate must be >= 0", device_id));
  if (!(weight >= 0.0)) throw ConfigError(fmt::format("device {}: weight must be >= 0", device_id));
  if (batch_size == 0) throw ConfigError(fmt::format("device {}: batch_size must be positive", device_id));
  if (data.rows == 0 || data.features.size() != data.rows * data.cols || data.targets.size() != data.rows)
    throw ConfigError(fmt::format("device {}: malformed dataset", device_id));
}

namespace {

// Residual-weighted gradient over the listed rows: (1/|rows|) sum a_r (a_r . x - b_r).
ModelVector gradient_on(const Dataset& d, const ModelVector& x, std::span<const std::size_t> rows) {
  ModelVector g(d.cols);
  for (std::size_t r : rows) {
    const double* a = d.features.data() + r * d.cols;
    double residual = -d.targets[r];
    for (std::size_t c = 0; c < d.cols; ++c) residual += a[c] * x.values[c];
    for (std::size_t c = 0; c < d.cols; ++c) g.values[c] += a[c] * residual;
  }
  g *= 1.0 / static_cast<double>(rows.size());
  return g;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.rows);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

double task_loss(const LocalTask& task, const ModelVector& x) {
  const auto& d = task.data;
  double s = 0.0;
  for (std::size_t r = 0; r < d.rows; ++r) {
    const double* a = d.features.data() + r * d.cols;
    double residual = -d.targets[r];
    for (std::size_t c = 0; c < d.cols; ++c) residual += a[c] * x.values[c];
    s += residual * residual;
  }
  return 0.5 * s / static_cast<double>(d.rows);
}

ModelVector task_gradient(const LocalTask& task, const ModelVector& x) {
  const auto rows = all_rows(task.data);
  return gradient_on(task.data, x, rows);
}

ModelVector local_update(const LocalTask& task, const ModelVector& global, std::mt19937_64& rng) {
  task.validate();
  if (global.dim() != task.data.cols) throw std::invalid_argument("model/data dimension mismatch");
  ModelVector x = global;
  auto rows = all_rows(task.data);
  const bool full = task.batch_size >= task.data.rows;
  for (int e = 0; e < task.local_steps; ++e) {
    std::span<const std::size_t> batch(rows);
    if (!full) {
      // Partial Fisher-Yates: the first batch_size entries become a uniform sample.
      for (std::size_t i = 0; i < task.batch_size; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
        std::swap(rows[i], rows[pick(rng)]);
      }
      batch = batch.first(task.batch_size);
    }
    x -= task.learning_rate * gradient_on(task.data, x, batch);
  }
  return x - global;
}

ModelVector flat_aggregate(std::span<const DeviceDelta> deltas) {
  if (deltas.empty()) throw AggregationError("no deltas to aggregate");
  std::vector<const DeviceDelta*> order;
  for (const auto& d : deltas) order.push_back(&d);
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->device_id < b->device_id; });
  ModelVector sum(order.front()->delta.dim());
  for (const auto* d : order) sum += d->weight * d->delta;
  return sum;
}

ModelVector tree_aggregate(const routing::Arborescence& tree, std::span<const DeviceDelta> deltas) {
  if (deltas.empty()) throw AggregationError("no deltas to aggregate");
  std::map<routing::NodeId, routing::NodeId> parent;
  for (const auto& e : tree.edges) {
    if (!parent.emplace(e.src, e.dst).second)
      throw AggregationError(fmt::format("node {} has more than one parent edge", e.src));
  }
  const auto nodes = tree.nodes();
  std::map<routing::NodeId, int> depth;
  for (routing::NodeId n : nodes) {
    int d = 0;
    for (routing::NodeId x = n; x != tree.root; ++d) {
      auto it = parent.find(x);
      if (it == parent.end() || d > static_cast<int>(nodes.size()))
        throw AggregationError(fmt::format("node {} does not reach the root", n));
      x = it->second;
    }
    depth[n] = d;
  }

  std::vector<const DeviceDelta*> order;
  for (const auto& d : deltas) {
    if (!depth.contains(d.terminal))
      throw AggregationError(fmt::format("terminal {} of device {} is not in the tree", d.terminal, d.device_id));
    order.push_back(&d);
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->device_id < b->device_id; });

  const std::size_t dim = order.front()->delta.dim();
  std::map<routing::NodeId, ModelVector> partial;
  for (routing::NodeId n : nodes) partial.emplace(n, ModelVector(dim));
  for (const auto* d : order) partial.at(d->terminal) += d->weight * d->delta;

  std::vector<routing::NodeId> schedule(nodes);
  std::sort(schedule.begin(), schedule.end(), [&](routing::NodeId a, routing::NodeId b) {
    return std::pair(-depth[a], a) < std::pair(-depth[b], b);
  });
  for (routing::NodeId n : schedule)
    if (n != tree.root) partial.at(parent.at(n)) += partial.at(n);
  return partial.at(tree.root);
}

Problem make_synthetic(const SyntheticSpec& spec) {
  if (spec.devices < 1) throw ConfigError("training.devices must be >= 1");
  if (spec.dim == 0) throw ConfigError("training.dim must be >= 1");
  if (spec.samples_min == 0 || spec.samples_max < spec.samples_min)
    throw ConfigError("training.samples_min/samples_max must satisfy 0 < min <= max");
  if (!(spec.heterogeneity >= 0.0)) throw ConfigError("training.heterogeneity must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> count(spec.samples_min, spec.samples_max);

  ModelVector shared(spec.dim);
  for (double& v : shared.values) v = normal(rng);

  Problem p;
  p.dim = spec.dim;
  std::size_t total = 0;
  for (int j = 0; j < spec.devices; ++j) {
    LocalTask t;
    t.device_id = j;
    t.cluster_id = j;
    t.local_steps = spec.local_steps;
    t.learning_rate = spec.learning_rate;
    t.batch_size = spec.batch_size;

    ModelVector optimum = shared;
    for (double& v : optimum.values) v += spec.heterogeneity * normal(rng);

    auto& d = t.data;
    d.rows = count(rng);
    d.cols = spec.dim;
    d.features.resize(d.rows * d.cols);
    d.targets.resize(d.rows);
    for (std::size_t r = 0; r < d.rows; ++r) {
      double y = 0.0;
      for (std::size_t c = 0; c < d.cols; ++c) {
        const double a = normal(rng);
        d.features[r * d.cols + c] = a;
        y += a * optimum.values[c];
      }
      d.targets[r] = y + spec.noise * normal(rng);
    }
    total += d.rows;
    p.tasks.push_back(std::move(t));
  }
  for (auto& t : p.tasks) t.weight = static_cast<double>(t.data.rows) / static_cast<double>(total);
  return p;
}

double global_loss(const Problem& p, const ModelVector& x) {
  double s = 0.0;
  for (const auto& t : p.tasks) s += t.weight * task_loss(t, x);
  return s;
}

ModelVector global_gradient(const Problem& p, const ModelVector& x) {
  ModelVector g(p.dim);
  for (const auto& t : p.tasks) g += t.weight * task_gradient(t, x);
  return g;
}

double learning_rate_bound(double smoothness, int local_steps, double dissimilarity_alpha) {
  if (!(smoothness > 0.0) || local_steps < 1 || !(dissimilarity_alpha >= 1.0))
    throw ConfigError("learning-rate bound needs L > 0, E >= 1, alpha >= 1");
  const double e = local_steps;
  const double first = 1.0 / (2.0 * smoothness * e);
  if (local_steps == 1) return first;
  const double second = 1.0 / (smoothness * std::sqrt(2.0 * e * (e - 1.0) * (2.0 * dissimilarity_alpha + 1.0)));
  return std::min(first, second);
}

std::optional<std::string> check_learning_rate(double eta, double smoothness, int local_steps,
                                               double dissimilarity_alpha) {
  const double bound = learning_rate_bound(smoothness, local_steps, dissimilarity_alpha);
  if (eta <= bound) return std::nullopt;
  return fmt::format("learning rate {} exceeds the convergence bound {} (L = {}, E = {}, alpha = {})", eta, bound,
                     smoothness, local_steps, dissimilarity_alpha);
}

TrainingTrace run_training(const Problem& problem, const TrainingOptions& options, const TrainingHooks& hooks) {
  if (problem.tasks.empty()) throw ConfigError("training problem has no devices");
  for (const auto& t : problem.tasks) t.validate();

  TrainingTrace trace;
  ModelVector x(problem.dim);
  double energy = 0.0;
  const double initial = global_loss(problem, x);
  auto record = [&](int round) {
    const double loss = global_loss(problem, x);
    trace.rounds.push_back({round, loss, global_gradient(problem, x).norm(), energy});
    if (options.keep_models) trace.models.push_back(x);
    return loss;
  };
  record(0);

  for (int round = 0; round < options.rounds; ++round) {
    std::vector<DeviceDelta> deltas;
    deltas.reserve(problem.tasks.size());
    for (const auto& task : problem.tasks) {
      // Per-device stream keyed by (seed, round, device): results do not depend on evaluation order.
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(round), static_cast<std::uint32_t>(task.device_id)};
      std::mt19937_64 rng(seq);
      DeviceDelta d;
      d.device_id = task.device_id;
      d.terminal = hooks.terminal_of ? hooks.terminal_of(round, task) : task.cluster_id;
      d.weight = task.weight;
      d.delta = local_update(task, x, rng);
      deltas.push_back(std::move(d));
    }

    std::optional<routing::Arborescence> tree;
    if (hooks.tree_for) {
      std::vector<routing::NodeId> terminals;
      for (const auto& d : deltas) terminals.push_back(d.terminal);
      std::sort(terminals.begin(), terminals.end());
      terminals.erase(std::unique(terminals.begin(), terminals.end()), terminals.end());
      tree = hooks.tree_for(round, terminals);
    }
    x += tree ? tree_aggregate(*tree, deltas) : flat_aggregate(deltas);
    if (hooks.round_energy) energy += hooks.round_energy(round);

    const double loss = record(round + 1);
    if (!std::isfinite(loss) || !x.finite() || loss > options.divergence_limit * std::max(initial, 1.0)) {
      trace.diverged = true;
      trace.message = fmt::format("training diverged at round {} (loss {})", round + 1, loss);
      break;
    }
  }
  return trace;
}

}  // namespace sgin::hierfl
