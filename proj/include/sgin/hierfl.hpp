#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgin/routing.hpp"

namespace sgin::hierfl {

/// Dense model parameter vector.
struct ModelVector {
  std::vector<double> values;

  ModelVector() = default;
  explicit ModelVector(std::size_t dim, double fill = 0.0) : values(dim, fill) {}
  explicit ModelVector(std::vector<double> v) : values(std::move(v)) {}

  std::size_t dim() const { return values.size(); }
  double norm() const;
  bool finite() const;

  ModelVector& operator+=(const ModelVector& other);
  ModelVector& operator-=(const ModelVector& other);
  ModelVector& operator*=(double s);
  friend ModelVector operator+(ModelVector a, const ModelVector& b) { return a += b; }
  friend ModelVector operator-(ModelVector a, const ModelVector& b) { return a -= b; }
  friend ModelVector operator*(double s, ModelVector a) { return a *= s; }
};

/// Row-major regression samples.
struct Dataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> features;
  std::vector<double> targets;
};

/// One device's least-squares task f(x) = 1/(2n) ||A x - b||^2 and its local SGD settings.
struct LocalTask {
  int device_id = 0;
  int cluster_id = 0;
  Dataset data;
  double weight = 0.0;     // aggregation weight lambda
  int local_steps = 1;     // E
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;  // >= rows means full batch

  void validate() const;
};

double task_loss(const LocalTask& task, const ModelVector& x);
ModelVector task_gradient(const LocalTask& task, const ModelVector& x);

/// E steps of mini-batch SGD from `global`; returns x^{E} - x^{0}.
ModelVector local_update(const LocalTask& task, const ModelVector& global, std::mt19937_64& rng);

struct DeviceDelta {
  int device_id = 0;
  routing::NodeId terminal = 0;  // serving satellite that received the delta
  double weight = 0.0;
  ModelVector delta;
};

class AggregationError : public std::runtime_error {
public:
  explicit AggregationError(const std::string& what) : std::runtime_error(what) {}
};

/// Sum of weight * delta reduced leaf-to-root along `tree`; the root ends up holding the total.
/// Each node first adds its own devices in ascending device id, then its children's partial sums.
ModelVector tree_aggregate(const routing::Arborescence& tree, std::span<const DeviceDelta> deltas);

/// Same sum in ascending device order, with no tree involved.
ModelVector flat_aggregate(std::span<const DeviceDelta> deltas);

struct SyntheticSpec {
  std::size_t dim = 10;
  int devices = 41;
  std::size_t samples_min = 64;
  std::size_t samples_max = 256;
  double heterogeneity = 0.0;  // spread of per-device optima around the shared one
  double noise = 0.1;
  int local_steps = 5;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
};

struct Problem {
  std::size_t dim = 0;
  std::vector<LocalTask> tasks;
};

/// Linear-regression tasks with weights proportional to sample counts (sum to 1).
Problem make_synthetic(const SyntheticSpec& spec);

double global_loss(const Problem& p, const ModelVector& x);
ModelVector global_gradient(const Problem& p, const ModelVector& x);

/// Upper bound on the step size: min{1/(2LE), 1/(L sqrt(2E(E-1)(2 alpha + 1)))}.
double learning_rate_bound(double smoothness, int local_steps, double dissimilarity_alpha);

/// Warning text when `eta` exceeds the bound, otherwise nullopt.
std::optional<std::string> check_learning_rate(double eta, double smoothness, int local_steps,
                                               double dissimilarity_alpha);

struct RoundRecord {
  int round = 0;
  double global_loss = 0.0;
  double grad_norm = 0.0;
  double cumulative_energy_j = 0.0;
};

struct TrainingTrace {
  std::vector<RoundRecord> rounds;  // entry t describes the model after t rounds (entry 0 is x^0)
  std::vector<ModelVector> models;  // filled when keep_models is set
  bool diverged = false;
  std::string message;
};

struct TrainingHooks {
  /// Terminal that receives each device's delta in a round. Defaults to the device's cluster id.
  std::function<routing::NodeId(int round, const LocalTask&)> terminal_of;
  /// Tree used to combine the deltas. Defaults to the flat sum.
  std::function<std::optional<routing::Arborescence>(int round, std::span<const routing::NodeId> terminals)> tree_for;
  /// Energy spent by the round's aggregation.
  std::function<double(int round)> round_energy;
};

struct TrainingOptions {
  int rounds = 100;
  std::uint64_t seed = 1;
  bool keep_models = false;
  double divergence_limit = 1e12;  // abort when loss exceeds this multiple of the initial loss
};

TrainingTrace run_training(const Problem& problem, const TrainingOptions& options, const TrainingHooks& hooks = {});

}  // namespace sgin::hierfl
