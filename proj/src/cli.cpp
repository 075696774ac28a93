#include "sgin/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sgin/config.hpp"

namespace sgin::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string algorithms;
  std::optional<double> rho;
  long long slot = 0;
  int slots = 0;
};

config::AppConfig resolve(const Options& o) {
  auto cfg = o.config_path.empty() ? config::AppConfig{} : config::load_config(o.config_path);
  if (o.seed) {
    cfg.scenario.seed = *o.seed;
    cfg.training.synthetic.seed = *o.seed;
  }
  if (!o.out_dir.empty()) cfg.scenario.out_dir = o.out_dir;
  if (o.rho) cfg.scenario.rho = *o.rho;
  if (!o.algorithms.empty()) {
    cfg.scenario.algorithms.clear();
    std::stringstream ss(o.algorithms);
    for (std::string name; std::getline(ss, name, ',');) {
      if (name.empty()) continue;
      const auto a = sim::parse_algorithm(name);
      if (!a) throw ConfigError(fmt::format("--algorithms: unknown algorithm '{}' (taeer, d-merge, orbit-greedy)", name));
      cfg.scenario.algorithms.push_back(*a);
    }
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return f;
}

int generate_constellation(const config::AppConfig& cfg, const Options& o, std::ostream& out) {
  const auto& sc = cfg.scenario;
  const auto time = topology::TimeStructure::for_constellation(sc.constellation, sc.slot_target_s, sc.link.frames_per_slot);
  const int slots = o.slots > 0 ? o.slots : time.slots_per_period;
  auto f = open_output(sc.out_dir, "ephemeris.csv");
  f << "t_s,orbit,slot,x_km,y_km,z_km\n";
  for (int k = 0; k < slots; ++k) {
    const double t = time.slot_start_s(k);
    for (const auto& e : geo::propagate(sc.constellation, t))
      fmt::print(f, "{},{},{},{},{},{}\n", t, e.id.orbit, e.id.slot, e.position_km[0], e.position_km[1],
                 e.position_km[2]);
  }
  fmt::print(out, "{}: {} epochs, period {:.1f} s -> {}\n", sc.constellation.walker_notation(), slots, time.period_s,
             (fs::path(sc.out_dir) / "ephemeris.csv").string());
  return 0;
}

int export_snapshot(const config::AppConfig& cfg, const Options& o, std::ostream& out) {
  const auto sc = sim::Scenario::build(cfg.scenario);
  // Round r sits at slot r * stride; pick the round whose slot is requested.
  if (o.slot < 0 || o.slot % cfg.scenario.slot_stride != 0)
    throw ConfigError(fmt::format("--slot {} must be a non-negative multiple of time.slot_stride", o.slot));
  const int round = static_cast<int>(o.slot / cfg.scenario.slot_stride);
  const auto ctx = sim::prepare_round(sc, round);

  auto csv = open_output(cfg.scenario.out_dir, fmt::format("snapshot_slot{}.csv", ctx.slot));
  topology::write_snapshot_csv(csv, ctx.graph);

  auto trees = open_output(cfg.scenario.out_dir, fmt::format("trees_slot{}.json", ctx.slot));
  trees << "[\n";
  bool first = true;
  for (auto alg : cfg.scenario.algorithms) {
    auto rng = sim::round_stream(cfg.scenario.seed, round, sim::solver_stream(alg));
    for (int u = 0; u < ctx.graph.frame_count(); ++u) {
      const auto sol = sim::solve_frame(sc, ctx, alg, u, rng);
      if (!first) trees << ",\n";
      first = false;
      auto text = sim::tree_json(sol, alg, ctx.slot, u);
      if (!text.empty() && text.back() == '\n') text.pop_back();
      trees << text;
    }
  }
  trees << "\n]\n";
  fmt::print(out, "slot {}: {} terminals, {} directed links, {} dropped\n", ctx.slot, ctx.terminals.size(),
             ctx.graph.edges().size(), ctx.dropped_edges);
  return 0;
}

int run_scenario(const config::AppConfig& cfg, std::ostream& out) {
  const auto all = sim::compare_algorithms(cfg.scenario);
  for (const auto& m : all) {
    const auto name = sim::to_string(m.algorithm);
    auto j = open_output(cfg.scenario.out_dir, fmt::format("metrics_{}.json", name));
    j << sim::metrics_json(m);
    auto c = open_output(cfg.scenario.out_dir, fmt::format("rounds_{}.csv", name));
    sim::write_rounds_csv(c, m);
    fmt::print(out, "{}: {:.3f} J/slot, {:.3f} % outage per ISL, {} failed of {} rounds\n", name,
               m.avg_energy_per_slot_j, m.avg_outage_per_isl_pct, m.failed_rounds, m.rounds.size());
  }
  return 0;
}

int compare(const config::AppConfig& cfg, std::ostream& out) {
  const auto all = sim::compare_algorithms(cfg.scenario);
  auto j = open_output(cfg.scenario.out_dir, "comparison.json");
  j << sim::comparison_json(all);
  auto c = open_output(cfg.scenario.out_dir, "comparison.csv");
  c << "algorithm,rho,constellation,avg_energy_per_slot_j,avg_outage_pct,rounds,failed_rounds\n";
  fmt::print(out, "{:<14}{:>18}{:>16}{:>10}\n", "algorithm", "energy J/slot", "outage %", "failed");
  for (const auto& m : all) {
    fmt::print(c, "{},{},{},{},{},{},{}\n", sim::to_string(m.algorithm), m.rho, m.constellation,
               m.avg_energy_per_slot_j, m.avg_outage_per_isl_pct, m.rounds.size(), m.failed_rounds);
    fmt::print(out, "{:<14}{:>18.3f}{:>16.3f}{:>10}\n", sim::to_string(m.algorithm), m.avg_energy_per_slot_j,
               m.avg_outage_per_isl_pct, m.failed_rounds);
  }
  return 0;
}

int link_sweep(const config::AppConfig& cfg, std::ostream& out) {
  const auto& sw = cfg.sweep;
  const auto& p = cfg.scenario.link;
  auto f = open_output(cfg.scenario.out_dir, "link_sweep.csv");
  f << "d_km,p_t_w,rx_power_w,snr_db,rate_bps,energy_j,outage_prob\n";
  const double noise = channel::noise_power(p);
  for (int i = 0; i < sw.distance_steps; ++i) {
    const double d = sw.distance_steps == 1
                         ? sw.distance_min_km
                         : sw.distance_min_km + (sw.distance_max_km - sw.distance_min_km) * i / (sw.distance_steps - 1);
    for (double pt : sw.powers_w) {
      const auto m = channel::link_metrics(pt, d, p);
      fmt::print(f, "{},{},{},{},{},{},{}\n", d, pt, m.rx_power_w, 10.0 * std::log10(m.rx_power_w / noise),
                 m.rate_bps, m.energy_j, m.outage_prob);
    }
  }
  fmt::print(out, "{} rows -> {}\n", sw.distance_steps * sw.powers_w.size(),
             (fs::path(cfg.scenario.out_dir) / "link_sweep.csv").string());
  return 0;
}

int train(const config::AppConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto& tc = cfg.training;
  if (tc.smoothness > 0.0) {
    if (auto w = hierfl::check_learning_rate(tc.synthetic.learning_rate, tc.smoothness, tc.synthetic.local_steps,
                                             tc.dissimilarity_alpha))
      fmt::print(err, "warning: {}\n", *w);
  }
  const auto problem = hierfl::make_synthetic(tc.synthetic);
  const auto sc = sim::Scenario::build(cfg.scenario);

  // Rounds are visited in order, so one cached context is enough.
  std::optional<sim::RoundContext> ctx;
  auto context = [&](int round) -> const sim::RoundContext& {
    if (!ctx || ctx->round != round) ctx = sim::prepare_round(sc, round);
    return *ctx;
  };

  hierfl::TrainingHooks hooks;
  hooks.terminal_of = [&](int round, const hierfl::LocalTask& task) {
    const auto& c = context(round);
    return c.cluster_terminal.at(static_cast<std::size_t>(task.cluster_id) % c.cluster_terminal.size());
  };
  hooks.tree_for = [&](int round, std::span<const routing::NodeId> terminals) -> std::optional<routing::Arborescence> {
    auto c = context(round);
    c.terminals.assign(terminals.begin(), terminals.end());
    auto rng = sim::round_stream(cfg.scenario.seed, round, sim::kRootStream);
    const auto sol = sim::solve_frame(sc, c, sim::Algorithm::Taeer, 0, rng);
    routing::Arborescence tree;
    tree.root = sol.roots.front();
    for (const auto& e : sol.edges)
      if (!c.graph.is_geo(e.dst)) tree.edges.push_back(e);
    std::sort(tree.edges.begin(), tree.edges.end(),
              [](const auto& a, const auto& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
    tree.total_cost = routing::edge_cost(tree.edges);
    return tree;
  };
  hooks.round_energy = [&](int round) {
    return sim::run_round(sc, context(round), sim::Algorithm::Taeer).energy_j();
  };

  hierfl::TrainingOptions opts;
  opts.rounds = tc.rounds;
  opts.seed = tc.synthetic.seed;
  const auto trace = hierfl::run_training(problem, opts, hooks);

  auto f = open_output(cfg.scenario.out_dir, "loss_trace.csv");
  f << "round,global_loss,grad_norm,cumulative_energy_j\n";
  for (const auto& r : trace.rounds)
    fmt::print(f, "{},{},{},{}\n", r.round, r.global_loss, r.grad_norm, r.cumulative_energy_j);
  const auto& last = trace.rounds.back();
  fmt::print(out, "round {}: loss {:.6g}, grad norm {:.6g}, energy {:.3f} J\n", last.round, last.global_loss,
             last.grad_norm, last.cumulative_energy_j);
  if (trace.diverged) {
    fmt::print(err, "error: {}\n", trace.message);
    return 1;
  }
  return 0;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware aggregation routing for satellite-ground federated learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "sgin 0.1.0");

  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "INI scenario file");
    sub->add_option("--seed", o.seed, "RNG seed (unsigned 64-bit)");
    sub->add_option("--out", o.out_dir, "Output directory");
    sub->add_option("--algorithms", o.algorithms, "Comma-separated: taeer,d-merge,orbit-greedy");
    sub->add_option("--rho", o.rho, "Energy/outage trade-off in [0, 1]");
  };

  auto* gen = app.add_subcommand("generate-constellation", "Write satellite positions at slot epochs");
  add_common(gen);
  gen->add_option("--slots", o.slots, "Number of slot epochs (default: one period)");
  auto* snap = app.add_subcommand("export-snapshot", "Write one slot's link graph and routing trees");
  add_common(snap);
  snap->add_option("--slot", o.slot, "Slot index");
  auto* run = app.add_subcommand("run-scenario", "Run every configured algorithm and write metrics");
  add_common(run);
  auto* cmp = app.add_subcommand("compare-algorithms", "Side-by-side metrics table");
  add_common(cmp);
  auto* sweep = app.add_subcommand("link-sweep", "Tabulate the optical link budget");
  add_common(sweep);
  auto* tr = app.add_subcommand("train", "Hierarchical federated training on synthetic regression");
  add_common(tr);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!o.config_path.empty() && !fs::exists(o.config_path))
      throw ConfigError(fmt::format("config file not found: {}", o.config_path));
    const auto cfg = resolve(o);
    if (*gen) return generate_constellation(cfg, o, out);
    if (*snap) return export_snapshot(cfg, o, out);
    if (*run) return run_scenario(cfg, out);
    if (*cmp) return compare(cfg, out);
    if (*sweep) return link_sweep(cfg, out);
    if (*tr) return train(cfg, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace sgin::cli
