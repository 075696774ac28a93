#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sgin/channel.hpp"
#include "sgin/geometry.hpp"
#include "sgin/routing.hpp"
#include "sgin/topology.hpp"

namespace sgin::sim {

using routing::NodeId;

enum class Algorithm { Taeer, DMerge, OrbitGreedy };

std::string to_string(Algorithm a);
/// Accepts "taeer", "d-merge"/"dmerge", "orbit-greedy"/"orbitgreedy" (case-insensitive).
std::optional<Algorithm> parse_algorithm(std::string_view name);

enum class RootRule { MinGeoWeight, Random };

/// Auto samples outages only when rho < 1.
enum class OutageSampling { Auto, On, Off };

struct ClusterConfig {
  int count = 41;                 // random clusters drawn when `explicit_clusters` is empty
  double max_abs_lat_deg = 60.0;
  std::vector<geo::GroundCluster> explicit_clusters;
};

struct ScenarioConfig {
  geo::ConstellationSpec constellation;  // 80/4/1 Walker-Delta, 500 km, 45 deg
  channel::LinkParams link;
  double slot_target_s = 250.0;   // M = round(P / slot_target_s)
  int slot_stride = 1;            // round t starts at slot t * slot_stride
  topology::SnapshotOptions snapshot;
  ClusterConfig clusters;
  std::vector<Algorithm> algorithms{Algorithm::Taeer, Algorithm::DMerge, Algorithm::OrbitGreedy};
  routing::TaeerOptions taeer;
  RootRule root_rule = RootRule::MinGeoWeight;
  double rho = 1.0;
  OutageSampling outage_sampling = OutageSampling::Auto;
  int max_attempts = 100;
  int rounds = 300;
  std::uint64_t seed = 1;
  std::string out_dir = ".";

  void validate() const;
  bool sampling_enabled() const;
};

/// Config plus everything derived from it once: slotting, per-satellite powers, clusters.
struct Scenario {
  ScenarioConfig cfg;
  topology::TimeStructure time;
  std::vector<double> tx_power_w;
  std::vector<geo::GroundCluster> clusters;

  static Scenario build(const ScenarioConfig& cfg);
};

/// Independent stream for (seed, round, tag); rounds never share randomness.
std::mt19937_64 round_stream(std::uint64_t seed, long long round, std::uint32_t tag);

inline constexpr std::uint32_t kPowerStream = 1;
inline constexpr std::uint32_t kClusterStream = 2;
inline constexpr std::uint32_t kRootStream = 3;
inline constexpr std::uint32_t kOrbitGreedyStream = 4;
inline constexpr std::uint32_t kOutageStream = 5;

/// Stream consumed by solve_frame for `alg` within a round.
inline std::uint32_t solver_stream(Algorithm alg) {
  return alg == Algorithm::OrbitGreedy ? kOrbitGreedyStream : kRootStream;
}

struct RoundContext {
  int round = 0;
  long long slot = 0;          // absolute slot index (t * stride)
  double t_start_s = 0.0;
  topology::SnapshotGraph graph;   // weights already mixed with rho
  int dropped_edges = 0;
  std::vector<NodeId> cluster_terminal;  // serving satellite per cluster
  std::vector<NodeId> terminals;         // sorted, deduplicated
};

RoundContext prepare_round(const Scenario& sc, int round);

struct FrameSolution {
  std::vector<NodeId> roots;
  std::vector<routing::Edge> edges;  // routing weights, GEO uplinks included
  double cost = 0.0;
};

/// Root rule for TAEER / D-Merge: terminal with the cheapest raw GEO uplink, ties to the lower id.
NodeId pick_root(const Scenario& sc, const RoundContext& ctx, int frame, std::mt19937_64& rng);

FrameSolution solve_frame(const Scenario& sc, const RoundContext& ctx, Algorithm alg, int frame,
                          std::mt19937_64& rng);

struct RoundRecord {
  int round = 0;
  long long slot = 0;
  Algorithm algorithm = Algorithm::Taeer;
  bool failed = false;
  std::string failure;
  int terminals = 0;
  double tree_cost = 0.0;            // sum of routing weights over frames
  double tree_energy_j = 0.0;        // one attempt per used edge-frame
  double retransmission_energy_j = 0.0;
  long long transmissions = 0;
  long long outage_events = 0;
  long long isl_edge_frames = 0;     // LEO-LEO edges used, counted per frame
  double outage_prob_sum = 0.0;      // analytic P_out summed over those edge-frames

  double energy_j() const { return tree_energy_j + retransmission_energy_j; }
};

RoundRecord run_round(const Scenario& sc, const RoundContext& ctx, Algorithm alg);

struct RunMetrics {
  Algorithm algorithm = Algorithm::Taeer;
  double rho = 1.0;
  std::string constellation;
  double avg_energy_per_slot_j = 0.0;
  double avg_outage_per_isl_pct = 0.0;
  int failed_rounds = 0;
  std::vector<RoundRecord> rounds;
};

/// Averages over the non-failed rounds.
void recompute_averages(RunMetrics& m);

RunMetrics run_scenario(const ScenarioConfig& cfg, Algorithm alg);

/// Every algorithm sees the same per-round snapshots, terminals and random streams.
std::vector<RunMetrics> compare_algorithms(const ScenarioConfig& cfg);

std::string metrics_json(const RunMetrics& m, bool include_rounds = false);
std::string comparison_json(const std::vector<RunMetrics>& all);
void write_rounds_csv(std::ostream& out, const RunMetrics& m);
std::string tree_json(const FrameSolution& s, Algorithm alg, long long slot, int frame);

}  // namespace sgin::sim
