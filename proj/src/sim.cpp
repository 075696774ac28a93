#include "sgin/sim.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <fmt/format.h>
#include <json.hpp>

namespace sgin::sim {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Taeer: return "taeer";
    case Algorithm::DMerge: return "d-merge";
    case Algorithm::OrbitGreedy: return "orbit-greedy";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  const auto n = lower(name);
  if (n == "taeer") return Algorithm::Taeer;
  if (n == "d-merge" || n == "dmerge") return Algorithm::DMerge;
  if (n == "orbit-greedy" || n == "orbitgreedy") return Algorithm::OrbitGreedy;
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  constellation.validate();
  link.validate();
  if (!(slot_target_s > 0.0)) throw ConfigError(fmt::format("time.slot_len_s = {} must be positive", slot_target_s));
  if (slot_stride < 1) throw ConfigError(fmt::format("time.slot_stride = {} must be at least 1", slot_stride));
  if (clusters.explicit_clusters.empty() && clusters.count < 1)
    throw ConfigError(fmt::format("clusters.count = {} must be at least 1", clusters.count));
  if (!(clusters.max_abs_lat_deg >= 0.0 && clusters.max_abs_lat_deg <= 90.0))
    throw ConfigError(fmt::format("clusters.max_abs_lat_deg = {} must lie in [0, 90]", clusters.max_abs_lat_deg));
  for (const auto& c : clusters.explicit_clusters) {
    if (!(c.lat_deg >= -90.0 && c.lat_deg <= 90.0))
      throw ConfigError(fmt::format("clusters.cluster{}: latitude {} must lie in [-90, 90]", c.cluster_id, c.lat_deg));
  }
  if (algorithms.empty()) throw ConfigError("algorithms.list must name at least one algorithm");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError(fmt::format("sim.rho = {} must lie in [0, 1]", rho));
  if (max_attempts < 1) throw ConfigError(fmt::format("sim.max_attempts = {} must be at least 1", max_attempts));
  if (rounds < 1) throw ConfigError(fmt::format("sim.rounds = {} must be at least 1", rounds));
}

bool ScenarioConfig::sampling_enabled() const {
  switch (outage_sampling) {
    case OutageSampling::On: return true;
    case OutageSampling::Off: return false;
    case OutageSampling::Auto: return rho < 1.0;
  }
  return false;
}

std::mt19937_64 round_stream(std::uint64_t seed, long long round, std::uint32_t tag) {
  const auto r = static_cast<std::uint64_t>(round);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(r >> 32), tag};
  return std::mt19937_64(seq);
}

Scenario Scenario::build(const ScenarioConfig& cfg) {
  cfg.validate();
  Scenario sc;
  sc.cfg = cfg;
  sc.time = topology::TimeStructure::for_constellation(cfg.constellation, cfg.slot_target_s, cfg.link.frames_per_slot);

  auto power_rng = round_stream(cfg.seed, -1, kPowerStream);
  std::uniform_real_distribution<double> power(cfg.link.tx_power_min_w, cfg.link.tx_power_max_w);
  sc.tx_power_w.resize(static_cast<std::size_t>(cfg.constellation.total_sats));
  for (double& p : sc.tx_power_w) p = power(power_rng);

  if (!cfg.clusters.explicit_clusters.empty()) {
    sc.clusters = cfg.clusters.explicit_clusters;
  } else {
    auto rng = round_stream(cfg.seed, -1, kClusterStream);
    std::uniform_real_distribution<double> lat(-cfg.clusters.max_abs_lat_deg, cfg.clusters.max_abs_lat_deg);
    std::uniform_real_distribution<double> lon(0.0, 360.0);
    for (int i = 0; i < cfg.clusters.count; ++i) {
      geo::GroundCluster c;
      c.cluster_id = i;
      c.lat_deg = lat(rng);
      c.lon_deg = lon(rng);
      c.device_weights = {1.0};
      sc.clusters.push_back(std::move(c));
    }
  }
  return sc;
}

RoundContext prepare_round(const Scenario& sc, int round) {
  const auto& cfg = sc.cfg;
  RoundContext ctx;
  ctx.round = round;
  ctx.slot = static_cast<long long>(round) * cfg.slot_stride;
  ctx.t_start_s = sc.time.slot_start_s(ctx.slot);

  const auto eph = geo::propagate(cfg.constellation, ctx.t_start_s);
  for (const auto& c : sc.clusters) {
    const auto id = geo::serving_satellite(c, eph, ctx.t_start_s, cfg.snapshot.earth_rotation);
    ctx.cluster_terminal.push_back(geo::sat_index(cfg.constellation, id));
  }
  ctx.terminals = ctx.cluster_terminal;
  std::sort(ctx.terminals.begin(), ctx.terminals.end());
  ctx.terminals.erase(std::unique(ctx.terminals.begin(), ctx.terminals.end()), ctx.terminals.end());

  auto snapshot = topology::build_snapshot(cfg.constellation, cfg.link, sc.tx_power_w, ctx.slot, ctx.t_start_s,
                                           sc.time.frame_len_s(), cfg.snapshot);
  auto robust = topology::robust_weights(snapshot, cfg.rho);
  ctx.graph = std::move(robust.graph);
  ctx.dropped_edges = robust.dropped_edges;
  return ctx;
}

NodeId pick_root(const Scenario& sc, const RoundContext& ctx, int frame, std::mt19937_64& rng) {
  if (ctx.terminals.empty()) throw routing::InfeasibleError("round has no terminals", {});
  if (sc.cfg.root_rule == RootRule::Random) {
    std::uniform_int_distribution<std::size_t> pick(0, ctx.terminals.size() - 1);
    return ctx.terminals[pick(rng)];
  }
  const NodeId geo = ctx.graph.geo_node();
  std::optional<NodeId> best;
  double best_w = 0.0;
  for (NodeId t : ctx.terminals) {
    const auto* e = ctx.graph.find(t, geo);
    if (e == nullptr) continue;
    const double w = e->frames.at(static_cast<std::size_t>(frame)).energy_j;
    if (!best || w < best_w) {
      best = t;
      best_w = w;
    }
  }
  if (!best) throw routing::InfeasibleError("no terminal has a GEO uplink", ctx.terminals);
  return *best;
}

FrameSolution solve_frame(const Scenario& sc, const RoundContext& ctx, Algorithm alg, int frame,
                          std::mt19937_64& rng) {
  FrameSolution sol;
  if (alg == Algorithm::OrbitGreedy) {
    auto forest = routing::orbit_greedy(ctx.graph, frame, ctx.terminals, rng);
    sol.roots = std::move(forest.roots);
    sol.edges = std::move(forest.edges);
  } else {
    const NodeId root = pick_root(sc, ctx, frame, rng);
    const auto view = ctx.graph.frame_view(frame);
    auto tree = alg == Algorithm::Taeer ? routing::taeer(view, ctx.terminals, root, sc.cfg.taeer)
                                        : routing::d_merge(view, ctx.terminals, root);
    sol.roots = {root};
    sol.edges = std::move(tree.edges);
    const NodeId geo = ctx.graph.geo_node();
    sol.edges.push_back({root, geo, ctx.graph.state(root, geo, frame).weight});
  }
  for (const auto& e : sol.edges) sol.cost += e.weight;
  return sol;
}

RoundRecord run_round(const Scenario& sc, const RoundContext& ctx, Algorithm alg) {
  RoundRecord rec;
  rec.round = ctx.round;
  rec.slot = ctx.slot;
  rec.algorithm = alg;
  rec.terminals = static_cast<int>(ctx.terminals.size());

  auto solver_rng = round_stream(sc.cfg.seed, ctx.round, solver_stream(alg));
  auto outage_rng = round_stream(sc.cfg.seed, ctx.round, kOutageStream);
  const bool sampling = sc.cfg.sampling_enabled();
  const NodeId geo = ctx.graph.geo_node();

  try {
    for (int u = 0; u < ctx.graph.frame_count(); ++u) {
      const auto sol = solve_frame(sc, ctx, alg, u, solver_rng);
      rec.tree_cost += sol.cost;
      for (const auto& e : sol.edges) {
        const auto& st = ctx.graph.state(e.src, e.dst, u);
        long long attempts = 1;
        if (e.dst != geo) {
          ++rec.isl_edge_frames;
          rec.outage_prob_sum += st.outage_prob;
          if (sampling) {
            const double gamma0 =
                channel::outage_loss_threshold(sc.tx_power_w.at(static_cast<std::size_t>(e.src)), st.distance_km,
                                               sc.cfg.link);
            while (channel::sample_outage(gamma0, sc.cfg.link, outage_rng)) {
              ++rec.outage_events;
              if (attempts == sc.cfg.max_attempts) {
                rec.failed = true;
                rec.failure = fmt::format("link {} -> {} failed {} attempts in frame {}", e.src, e.dst, attempts, u);
                break;
              }
              ++attempts;
            }
          }
        }
        rec.transmissions += attempts;
        rec.tree_energy_j += st.energy_j;
        rec.retransmission_energy_j += static_cast<double>(attempts - 1) * st.energy_j;
        if (rec.failed) return rec;
      }
    }
  } catch (const routing::InfeasibleError& ex) {
    rec.failed = true;
    rec.failure = ex.what();
  }
  return rec;
}

void recompute_averages(RunMetrics& m) {
  double energy = 0.0;
  double outage = 0.0;
  long long isl = 0;
  int ok = 0;
  m.failed_rounds = 0;
  for (const auto& r : m.rounds) {
    if (r.failed) {
      ++m.failed_rounds;
      continue;
    }
    ++ok;
    energy += r.energy_j();
    outage += r.outage_prob_sum;
    isl += r.isl_edge_frames;
  }
  m.avg_energy_per_slot_j = ok > 0 ? energy / ok : 0.0;
  m.avg_outage_per_isl_pct = isl > 0 ? 100.0 * outage / static_cast<double>(isl) : 0.0;
}

namespace {

std::vector<RunMetrics> run_all(const ScenarioConfig& cfg, const std::vector<Algorithm>& algs) {
  const auto sc = Scenario::build(cfg);
  std::vector<RunMetrics> out;
  for (Algorithm a : algs) {
    RunMetrics m;
    m.algorithm = a;
    m.rho = cfg.rho;
    m.constellation = cfg.constellation.walker_notation();
    out.push_back(std::move(m));
  }
  for (int t = 0; t < cfg.rounds; ++t) {
    const auto ctx = prepare_round(sc, t);
    for (auto& m : out) m.rounds.push_back(run_round(sc, ctx, m.algorithm));
  }
  for (auto& m : out) recompute_averages(m);
  return out;
}

}  // namespace

RunMetrics run_scenario(const ScenarioConfig& cfg, Algorithm alg) { return run_all(cfg, {alg}).front(); }

std::vector<RunMetrics> compare_algorithms(const ScenarioConfig& cfg) { return run_all(cfg, cfg.algorithms); }

namespace {

nlohmann::ordered_json metrics_object(const RunMetrics& m, bool include_rounds) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(m.algorithm);
  j["rho"] = m.rho;
  j["constellation"] = m.constellation;
  j["avg_energy_per_slot_j"] = m.avg_energy_per_slot_j;
  j["avg_outage_pct"] = m.avg_outage_per_isl_pct;
  j["rounds"] = m.rounds.size();
  j["failed_rounds"] = m.failed_rounds;
  if (include_rounds) {
    auto& arr = j["records"] = nlohmann::ordered_json::array();
    for (const auto& r : m.rounds) {
      arr.push_back({{"round", r.round},
                     {"slot", r.slot},
                     {"failed", r.failed},
                     {"terminals", r.terminals},
                     {"tree_cost", r.tree_cost},
                     {"tree_energy_j", r.tree_energy_j},
                     {"retransmission_energy_j", r.retransmission_energy_j},
                     {"transmissions", r.transmissions},
                     {"outage_events", r.outage_events}});
    }
  }
  return j;
}

}  // namespace

std::string metrics_json(const RunMetrics& m, bool include_rounds) {
  return metrics_object(m, include_rounds).dump(2) + "\n";
}

std::string comparison_json(const std::vector<RunMetrics>& all) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& m : all) arr.push_back(metrics_object(m, false));
  return arr.dump(2) + "\n";
}

void write_rounds_csv(std::ostream& out, const RunMetrics& m) {
  out << "round,slot,algorithm,failed,terminals,tree_cost,tree_energy_j,retransmission_energy_j,energy_j,"
         "transmissions,outage_events,isl_edge_frames,outage_prob_sum\n";
  for (const auto& r : m.rounds) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.round, r.slot, to_string(r.algorithm),
                       r.failed ? 1 : 0, r.terminals, r.tree_cost, r.tree_energy_j, r.retransmission_energy_j,
                       r.energy_j(), r.transmissions, r.outage_events, r.isl_edge_frames, r.outage_prob_sum);
  }
}

std::string tree_json(const FrameSolution& s, Algorithm alg, long long slot, int frame) {
  nlohmann::ordered_json j;
  j["algorithm"] = to_string(alg);
  j["slot"] = slot;
  j["frame"] = frame;
  j["root"] = s.roots.size() == 1 ? nlohmann::ordered_json(s.roots.front()) : nlohmann::ordered_json(nullptr);
  j["roots"] = s.roots;
  j["total_cost"] = s.cost;
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : s.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"weight", e.weight}});
  return j.dump(2) + "\n";
}

}  // namespace sgin::sim
