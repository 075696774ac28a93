#include "sgin/topology.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <fmt/format.h>
#include <fmt/ostream.h>

namespace sgin::topology {

TimeStructure TimeStructure::for_constellation(const geo::ConstellationSpec& spec, double target_slot_len_s,
                                               int frames_per_slot) {
  if (!(target_slot_len_s > 0.0))
    throw ConfigError(fmt::format("time.slot_len_s = {} must be positive", target_slot_len_s));
  if (frames_per_slot < 1)
    throw ConfigError(fmt::format("time.frames_per_slot = {} must be at least 1", frames_per_slot));
  TimeStructure ts;
  ts.period_s = spec.period_s();
  ts.slots_per_period = std::max(1, static_cast<int>(std::lround(ts.period_s / target_slot_len_s)));
  ts.frames_per_slot = frames_per_slot;
  return ts;
}

SnapshotGraph::SnapshotGraph(geo::ConstellationSpec spec, long long slot_index, double t_slot_start_s,
                             double frame_len_s, int frame_count, std::vector<SnapshotEdge> edges)
    : spec_(std::move(spec)),
      slot_index_(slot_index),
      t_slot_start_s_(t_slot_start_s),
      frame_len_s_(frame_len_s),
      frame_count_(frame_count),
      edges_(std::move(edges)) {
  std::sort(edges_.begin(), edges_.end(), [](const SnapshotEdge& a, const SnapshotEdge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  out_.assign(static_cast<std::size_t>(spec_.total_sats) + 1, {});
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const auto& e = edges_[i];
    if (e.src == e.dst) throw std::invalid_argument("snapshot edge is a self-loop");
    if (static_cast<int>(e.frames.size()) != frame_count_)
      throw std::invalid_argument("snapshot edge frame count mismatch");
    out_[static_cast<std::size_t>(e.src)].push_back(static_cast<int>(i));
  }
}

std::vector<NodeId> SnapshotGraph::nodes() const {
  std::vector<NodeId> out(static_cast<std::size_t>(spec_.total_sats) + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<NodeId>(i);
  return out;
}

const SnapshotEdge* SnapshotGraph::find(NodeId src, NodeId dst) const {
  if (src < 0 || static_cast<std::size_t>(src) >= out_.size()) return nullptr;
  for (int i : out_[static_cast<std::size_t>(src)])
    if (edges_[static_cast<std::size_t>(i)].dst == dst) return &edges_[static_cast<std::size_t>(i)];
  return nullptr;
}

const LinkState& SnapshotGraph::state(NodeId src, NodeId dst, int frame) const {
  const SnapshotEdge* e = find(src, dst);
  if (e == nullptr) throw std::out_of_range(fmt::format("no link {} -> {} in slot {}", src, dst, slot_index_));
  return e->frames.at(static_cast<std::size_t>(frame));
}

routing::Digraph SnapshotGraph::frame_view(int frame) const {
  if (frame < 0 || frame >= frame_count_) throw std::out_of_range(fmt::format("frame {} out of range", frame));
  const auto ids = nodes();
  routing::Digraph g(ids);
  for (const auto& e : edges_) g.add_edge(e.src, e.dst, e.frames[static_cast<std::size_t>(frame)].weight);
  return g;
}

namespace {

LinkState make_state(double tx_power_w, double distance_km, const channel::LinkParams& params, bool reliable) {
  const auto m = channel::link_metrics(tx_power_w, distance_km, params);
  LinkState s;
  s.distance_km = distance_km;
  s.energy_j = m.energy_j;
  s.outage_prob = reliable ? 0.0 : m.outage_prob;
  s.weight = m.energy_j;
  return s;
}

}  // namespace

SnapshotGraph build_snapshot(const geo::ConstellationSpec& spec, const channel::LinkParams& params,
                             std::span<const double> tx_power_w, long long slot_index,
                             double t_slot_start_s, double frame_len_s, const SnapshotOptions& options) {
  spec.validate();
  params.validate();
  const int sats = spec.total_sats;
  if (static_cast<int>(tx_power_w.size()) != sats)
    throw ConfigError(fmt::format("expected {} transmit powers, got {}", sats, tx_power_w.size()));
  const int frames = params.frames_per_slot;

  // Connectivity from the slot's reference epoch.
  const auto ref = geo::propagate(spec, t_slot_start_s);
  std::vector<std::pair<NodeId, NodeId>> links;
  for (int i = 0; i < sats; ++i) {
    const auto& a = ref[static_cast<std::size_t>(i)];
    const int s = spec.sats_per_orbit;
    if (s >= 2) {
      const int next = geo::sat_index(spec, {a.id.orbit, (a.id.slot + 1) % s});
      const int prev = geo::sat_index(spec, {a.id.orbit, (a.id.slot + s - 1) % s});
      links.emplace_back(i, next);
      if (prev != next) links.emplace_back(i, prev);
    }
    for (int orbit = 0; orbit < spec.num_orbits; ++orbit) {
      if (orbit == a.id.orbit) continue;
      const int slot = geo::nearest_in_orbit(a, orbit, ref, spec);
      if (slot >= 0) links.emplace_back(i, geo::sat_index(spec, {orbit, slot}));
    }
  }

  std::vector<std::vector<geo::SatelliteEphemeris>> at_frame;
  std::vector<std::array<geo::Vec3, 3>> geo_at_frame;
  for (int u = 0; u < frames; ++u) {
    const double t = t_slot_start_s + (u + 0.5) * frame_len_s;
    at_frame.push_back(geo::propagate(spec, t));
    std::array<geo::Vec3, 3> g{};
    for (std::size_t k = 0; k < 3; ++k)
      g[k] = geo::geo_position(options.geo_longitudes_deg[k], t, options.earth_rotation);
    geo_at_frame.push_back(g);
  }

  std::vector<SnapshotEdge> edges;
  edges.reserve(links.size() + static_cast<std::size_t>(sats));
  for (auto [src, dst] : links) {
    SnapshotEdge e;
    e.src = src;
    e.dst = dst;
    e.kind = geo::sat_from_index(spec, src).orbit == geo::sat_from_index(spec, dst).orbit
                 ? LinkKind::IntraOrbit
                 : LinkKind::InterOrbit;
    for (int u = 0; u < frames; ++u) {
      const auto& eph = at_frame[static_cast<std::size_t>(u)];
      const double d = geo::distance(eph[static_cast<std::size_t>(src)].position_km,
                                     eph[static_cast<std::size_t>(dst)].position_km);
      e.frames.push_back(make_state(tx_power_w[static_cast<std::size_t>(src)], d, params, false));
    }
    edges.push_back(std::move(e));
  }

  const NodeId geo_node = sats;
  for (int i = 0; i < sats; ++i) {
    SnapshotEdge e;
    e.src = i;
    e.dst = geo_node;
    e.kind = LinkKind::ToGeo;
    for (int u = 0; u < frames; ++u) {
      const auto& pos = at_frame[static_cast<std::size_t>(u)][static_cast<std::size_t>(i)].position_km;
      double d = 0.0;
      for (const auto& g : geo_at_frame[static_cast<std::size_t>(u)]) {
        const double dk = geo::distance(pos, g);
        if (d == 0.0 || dk < d) d = dk;
      }
      e.frames.push_back(make_state(tx_power_w[static_cast<std::size_t>(i)], d, params, true));
    }
    edges.push_back(std::move(e));
  }

  return SnapshotGraph(spec, slot_index, t_slot_start_s, frame_len_s, frames, std::move(edges));
}

RobustGraph robust_weights(const SnapshotGraph& g, double rho) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError(fmt::format("rho = {} is outside [0, 1]", rho));
  if (rho == 1.0) return {g, 0};

  std::vector<SnapshotEdge> kept;
  int dropped = 0;
  for (const auto& e : g.edges()) {
    const bool certain_failure = std::any_of(e.frames.begin(), e.frames.end(),
                                             [](const LinkState& s) { return s.outage_prob >= 1.0; });
    if (certain_failure) {
      ++dropped;
      continue;
    }
    SnapshotEdge r = e;
    for (auto& s : r.frames) s.weight = rho * s.energy_j + (1.0 - rho) * -std::log1p(-s.outage_prob);
    kept.push_back(std::move(r));
  }
  return {SnapshotGraph(g.spec(), g.slot_index(), g.slot_start_s(), g.frame_len_s(), g.frame_count(),
                        std::move(kept)),
          dropped};
}

void write_snapshot_csv(std::ostream& out, const SnapshotGraph& g, bool header) {
  if (header) out << "slot,frame,src_orbit,src_slot,dst_orbit,dst_slot,distance_km,weight_j,outage_prob\n";
  auto ids = [&](NodeId n) {
    if (g.is_geo(n)) return std::pair{-1, 0};
    const auto s = g.sat(n);
    return std::pair{s.orbit, s.slot};
  };
  for (int u = 0; u < g.frame_count(); ++u) {
    for (const auto& e : g.edges()) {
      const auto [so, ss] = ids(e.src);
      const auto [d_o, ds] = ids(e.dst);
      const auto& s = e.frames[static_cast<std::size_t>(u)];
      fmt::print(out, "{},{},{},{},{},{},{},{},{}\n", g.slot_index(), u, so, ss, d_o, ds, s.distance_km, s.weight,
                 s.outage_prob);
    }
  }
}

}  // namespace sgin::topology
