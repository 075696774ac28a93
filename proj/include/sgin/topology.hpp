#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "sgin/channel.hpp"
#include "sgin/geometry.hpp"
#include "sgin/graph.hpp"

namespace sgin::topology {

using routing::NodeId;

/// Constellation period P split into M slots of U frames each.
struct TimeStructure {
  double period_s = 0.0;
  int slots_per_period = 1;   // M
  int frames_per_slot = 1;    // U

  double slot_len_s() const { return period_s / slots_per_period; }
  double frame_len_s() const { return slot_len_s() / frames_per_slot; }
  double slot_start_s(long long slot) const { return static_cast<double>(slot) * slot_len_s(); }

  /// M = max(1, round(P / target_slot_len)), so that slot_len = P / M exactly.
  static TimeStructure for_constellation(const geo::ConstellationSpec& spec, double target_slot_len_s,
                                         int frames_per_slot);
};

/// Per-frame state of one directed link.
struct LinkState {
  double distance_km = 0.0;
  double energy_j = 0.0;      // transmission energy for one frame's share of the payload
  double outage_prob = 0.0;
  double weight = 0.0;        // routing weight (energy, or the robust mix)
};

enum class LinkKind { IntraOrbit, InterOrbit, ToGeo };

struct SnapshotEdge {
  NodeId src = 0;
  NodeId dst = 0;
  LinkKind kind = LinkKind::IntraOrbit;
  std::vector<LinkState> frames;
};

struct SnapshotOptions {
  std::array<double, 3> geo_longitudes_deg{0.0, 120.0, 240.0};
  bool earth_rotation = true;
};

/// Directed ISL graph for one slot. LEO satellites are nodes 0..S-1 in sat_index order;
/// node S is the aggregate GEO sink. Connectivity is fixed across frames, weights are not.
class SnapshotGraph {
public:
  SnapshotGraph() = default;
  SnapshotGraph(geo::ConstellationSpec spec, long long slot_index, double t_slot_start_s,
                double frame_len_s, int frame_count, std::vector<SnapshotEdge> edges);

  const geo::ConstellationSpec& spec() const { return spec_; }
  long long slot_index() const { return slot_index_; }
  double slot_start_s() const { return t_slot_start_s_; }
  double frame_len_s() const { return frame_len_s_; }
  int frame_count() const { return frame_count_; }
  double frame_midpoint_s(int u) const { return t_slot_start_s_ + (u + 0.5) * frame_len_s_; }

  NodeId geo_node() const { return spec_.total_sats; }
  bool is_geo(NodeId n) const { return n == geo_node(); }
  geo::SatId sat(NodeId n) const { return geo::sat_from_index(spec_, n); }
  NodeId node(geo::SatId id) const { return geo::sat_index(spec_, id); }
  std::vector<NodeId> nodes() const;

  const std::vector<SnapshotEdge>& edges() const { return edges_; }
  const SnapshotEdge* find(NodeId src, NodeId dst) const;
  const LinkState& state(NodeId src, NodeId dst, int frame) const;

  /// Routing graph of one frame over LEO nodes plus GEO, weighted by LinkState::weight.
  routing::Digraph frame_view(int frame) const;

private:
  geo::ConstellationSpec spec_;
  long long slot_index_ = 0;
  double t_slot_start_s_ = 0.0;
  double frame_len_s_ = 0.0;
  int frame_count_ = 0;
  std::vector<SnapshotEdge> edges_;
  std::vector<std::vector<int>> out_;  // per source node, indices into edges_
};

/// Snapshot at the start of a slot. Links are those feasible at t_slot_start_s; weights are
/// evaluated at each frame midpoint. `tx_power_w` holds one transmit power per LEO satellite.
SnapshotGraph build_snapshot(const geo::ConstellationSpec& spec, const channel::LinkParams& params,
                             std::span<const double> tx_power_w, long long slot_index,
                             double t_slot_start_s, double frame_len_s,
                             const SnapshotOptions& options = {});

struct RobustGraph {
  SnapshotGraph graph;
  int dropped_edges = 0;
};

/// w_r = rho w + (1 - rho) ln(1 / (1 - P_out)) per edge and frame. For rho < 1 any edge that
/// is certain to fail in some frame is removed. rho = 1 returns the graph unchanged.
RobustGraph robust_weights(const SnapshotGraph& g, double rho);

/// Edge list CSV: slot,frame,src_orbit,src_slot,dst_orbit,dst_slot,distance_km,weight_j,outage_prob.
/// The GEO sink is written as orbit -1, slot 0.
void write_snapshot_csv(std::ostream& out, const SnapshotGraph& g, bool header = true);

}  // namespace sgin::topology
