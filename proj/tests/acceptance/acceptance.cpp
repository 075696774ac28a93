// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <iostream>
#include <random>
#include <sstream>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "oracles.hpp"
#include "sgin/channel.hpp"
#include "sgin/cli.hpp"
#include "sgin/hierfl.hpp"
#include "sgin/routing.hpp"
#include "sgin/sim.hpp"

using namespace sgin;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome msa_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> density(0.25, 0.9);
  const oracle::WeightKind kinds[] = {oracle::WeightKind::Integer, oracle::WeightKind::Dyadic,
                                      oracle::WeightKind::Real};
  int matched = 0, feasible = 0;
  std::string first_mismatch;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = size(rng);
    const auto g = oracle::random_digraph(rng, n, density(rng), kinds[trial % 3]);
    const routing::NodeId root = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const auto expected = oracle::brute_force_msa(g, root);
    std::optional<double> got;
    try {
      got = routing::chu_liu_edmonds(g, root).total_cost;
    } catch (const routing::InfeasibleError&) {
    }
    if (expected) ++feasible;
    if (got == expected) {
      ++matched;
    } else if (first_mismatch.empty()) {
      first_mismatch = fmt::format(" first mismatch: trial {} n={} got {} want {}", trial, n,
                                   got ? fmt::format("{}", *got) : "infeasible",
                                   expected ? fmt::format("{}", *expected) : "infeasible");
    }
  }
  const double secs = seconds_since(t0);
  return {matched == 500 && secs < 30.0,
          fmt::format("{}/500 exact matches ({} feasible), {:.2f} s{}", matched, feasible, secs, first_mismatch)};
}

Outcome heuristic_sandwich() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> size(3, 9);
  std::uniform_real_distribution<double> density(0.3, 0.8);
  int ok = 0, instances = 0, strict_below_dmerge = 0;
  std::string first_bad;
  while (instances < 200) {
    const int n = size(rng);
    auto g = oracle::random_digraph(rng, n, density(rng), oracle::WeightKind::Integer);
    std::vector<int> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(4, n - 1))(rng);
    const routing::NodeId root = ids[0];
    std::vector<routing::NodeId> terminals(ids.begin() + 1, ids.begin() + 1 + k);
    const bool reachable = std::all_of(terminals.begin(), terminals.end(),
                                       [&](auto t) { return routing::dijkstra(g, t, root).has_value(); });
    if (!reachable) continue;
    ++instances;
    const double exact = routing::exact_dst_oracle(g, terminals, root);
    const double heur = routing::taeer(g, terminals, root).total_cost;
    const double merged = routing::d_merge(g, terminals, root).total_cost;
    if (exact <= heur && heur <= merged) {
      ++ok;
    } else if (first_bad.empty()) {
      first_bad = fmt::format(" first violation: exact {} taeer {} d-merge {}", exact, heur, merged);
    }
    if (heur < merged) ++strict_below_dmerge;
  }
  const double secs = seconds_since(t0);
  return {ok == 200 && secs < 60.0,
          fmt::format("{}/200 satisfy exact <= TAEER <= D-Merge (TAEER strictly cheaper on {}), {:.2f} s{}", ok,
                      strict_below_dmerge, secs, first_bad)};
}

Outcome outage_closed_form() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> sigma(0.01, 0.15);
  std::uniform_real_distribution<double> beam(0.05, 0.4);
  std::uniform_real_distribution<double> log_gamma(-12.0, -1e-3);
  double worst = 0.0, worst_mass = 0.0;
  for (int i = 0; i < 1000; ++i) {
    channel::LinkParams p;
    p.sigma_p = sigma(rng);
    p.beamwidth_3db_rad = beam(rng);
    const double gamma0 = std::exp(log_gamma(rng));
    const double closed = channel::outage_probability_from_threshold(gamma0, p);
    const double numeric = oracle::outage_by_quadrature(gamma0, p);
    worst = std::max(worst, std::abs(closed - numeric));
    if (i % 10 == 0) worst_mass = std::max(worst_mass, std::abs(oracle::pdf_mass(p) - 1.0));
  }
  return {worst <= 1e-6 && worst_mass <= 1e-6,
          fmt::format("max |closed - integral| = {:.3g} over 1000 draws, max |mass - 1| = {:.3g}", worst,
                      worst_mass)};
}

Outcome aggregation_equivalence() {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst_rel = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int nodes = std::uniform_int_distribution<int>(1, 30)(rng);
    routing::Arborescence tree;
    tree.root = 0;
    // Random recursive tree: node i attaches to an earlier node.
    for (int i = 1; i < nodes; ++i)
      tree.edges.push_back({i, std::uniform_int_distribution<int>(0, i - 1)(rng), 1.0});
    std::sort(tree.edges.begin(), tree.edges.end(),
              [](auto& a, auto& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
    const int devices = std::uniform_int_distribution<int>(1, 60)(rng);
    const std::size_t dim = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    std::vector<hierfl::DeviceDelta> deltas;
    for (int d = 0; d < devices; ++d) {
      hierfl::DeviceDelta dd;
      dd.device_id = d;
      dd.terminal = std::uniform_int_distribution<int>(0, nodes - 1)(rng);
      dd.weight = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      dd.delta = hierfl::ModelVector(dim);
      for (double& v : dd.delta.values) v = normal(rng) * std::pow(10.0, normal(rng));
      deltas.push_back(std::move(dd));
    }
    const auto a = hierfl::tree_aggregate(tree, deltas);
    const auto b = hierfl::flat_aggregate(deltas);
    const double scale = std::max(b.norm(), 1e-300);
    worst_rel = std::max(worst_rel, (a - b).norm() / scale);
  }

  hierfl::SyntheticSpec spec;
  spec.devices = 8;
  spec.dim = 6;
  spec.samples_min = 20;
  spec.samples_max = 60;
  spec.heterogeneity = 0.5;
  spec.local_steps = 1;
  spec.batch_size = 1000;
  spec.learning_rate = 0.05;
  spec.seed = 5;
  const auto problem = hierfl::make_synthetic(spec);
  hierfl::TrainingOptions opts;
  opts.rounds = 50;
  opts.keep_models = true;
  const auto trace = hierfl::run_training(problem, opts);
  const auto gd = oracle::centralized_gd(problem, spec.learning_rate, 50);
  double worst_step = 0.0;
  for (std::size_t k = 0; k < gd.size() && k < trace.models.size(); ++k) {
    const auto diff = trace.models[k] - gd[k];
    for (double v : diff.values) worst_step = std::max(worst_step, std::abs(v));
  }
  const bool complete = trace.models.size() == gd.size();
  return {worst_rel <= 1e-12 && worst_step <= 1e-10 && complete,
          fmt::format("tree vs flat max rel diff {:.3g} (100 trees); E=1 vs GD max step diff {:.3g} over {} steps",
                      worst_rel, worst_step, trace.models.size() - 1)};
}

geo::ConstellationSpec delta80() { return geo::ConstellationSpec::walker(geo::WalkerPattern::Delta, 80, 4, 1, 500.0, 45.0); }
geo::ConstellationSpec star80() { return geo::ConstellationSpec::walker(geo::WalkerPattern::Star, 80, 4, 1, 700.0, 99.5); }

Outcome ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  for (const auto& [name, spec] : {std::pair{"delta", delta80()}, std::pair{"star", star80()}}) {
    sim::ScenarioConfig cfg;
    cfg.constellation = spec;
    cfg.rounds = 60;
    cfg.seed = 42;
    cfg.rho = 1.0;
    const auto r1 = sim::compare_algorithms(cfg);
    const double e_t = r1[0].avg_energy_per_slot_j, e_d = r1[1].avg_energy_per_slot_j,
                 e_o = r1[2].avg_energy_per_slot_j;
    cfg.rho = 0.1;
    cfg.algorithms = {sim::Algorithm::Taeer, sim::Algorithm::DMerge};
    const auto r2 = sim::compare_algorithms(cfg);
    const double o_t = r2[0].avg_outage_per_isl_pct, o_d = r2[1].avg_outage_per_isl_pct;
    int failed = 0;
    for (const auto* set : {&r1, &r2})
      for (const auto& m : *set) failed += m.failed_rounds;
    const bool ok = e_t <= e_d && e_d < e_o && e_o / e_t >= 2.0 && o_d >= o_t;
    pass = pass && ok;
    detail += fmt::format("{}: E taeer {:.2f} d-merge {:.2f} orbit-greedy {:.2f} J (ratio {:.2f}); outage@0.1 taeer "
                          "{:.3f}% d-merge {:.3f}%; failed rounds {}. ",
                          name, e_t, e_d, e_o, e_o / e_t, o_t, o_d, failed);
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 300.0, detail + fmt::format("{:.1f} s", secs)};
}

Outcome large_frame_runtime() {
  sim::ScenarioConfig cfg;
  cfg.constellation = geo::ConstellationSpec::walker(geo::WalkerPattern::Delta, 800, 20, 1, 500.0, 45.0);
  cfg.rounds = 1;
  const auto sc = sim::Scenario::build(cfg);
  const auto t_build = std::chrono::steady_clock::now();
  const auto ctx = sim::prepare_round(sc, 0);
  const double build_s = seconds_since(t_build);

  const auto t0 = std::chrono::steady_clock::now();
  auto rng = sim::round_stream(cfg.seed, 0, sim::kRootStream);
  const auto sol = sim::solve_frame(sc, ctx, sim::Algorithm::Taeer, 0, rng);
  const double solve_s = seconds_since(t0);
  return {solve_s < 1.0,
          fmt::format("800/20/1: {} terminals, {} links, TAEER frame solve {:.4f} s (snapshot build {:.3f} s), {} tree edges",
                      ctx.terminals.size(), ctx.graph.edges().size(), solve_s, build_s, sol.edges.size())};
}

Outcome threshold_trend() {
  const std::vector<double> thresholds{-120.0, -116.0, -112.0, -108.0, -104.0, -100.0};
  bool pass = true;
  std::string detail;
  for (const auto& [name, spec] : {std::pair{"delta", delta80()}, std::pair{"star", star80()}}) {
    std::vector<double> outage;
    for (double th : thresholds) {
      sim::ScenarioConfig cfg;
      cfg.constellation = spec;
      cfg.link.snr_threshold_db = th;
      cfg.rho = 0.1;
      cfg.rounds = 50;
      cfg.seed = 42;
      outage.push_back(sim::run_scenario(cfg, sim::Algorithm::Taeer).avg_outage_per_isl_pct);
    }
    const bool mono = std::is_sorted(outage.begin(), outage.end());
    pass = pass && mono;
    std::vector<std::string> cells;
    for (double o : outage) cells.push_back(fmt::format("{:.3f}", o));
    detail += fmt::format("{} [{}]%{} ", name, fmt::join(cells, ", "), mono ? "" : " NOT monotone");
  }
  return {pass, fmt::format("SNR_th {} dB: {}", fmt::join(thresholds, "/"), detail)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path base = fs::current_path() / "acceptance_determinism";
  fs::remove_all(base);
  fs::create_directories(base);
  const auto cfg_path = base / "scenario.cfg";
  std::ofstream(cfg_path) << "[constellation]\npattern = star\naltitude_km = 700\ninclination_deg = 99.5\n"
                             "[sim]\nrounds = 20\nrho = 0.1\n";
  std::ostringstream sink;
  auto run = [&](const std::string& out) {
    const std::string config = cfg_path.string();
    const std::string outdir = (base / out).string();
    const char* argv[] = {"sgin", "run-scenario", "--config", config.c_str(), "--seed", "42", "--out", outdir.c_str()};
    return cli::parse_and_dispatch(8, argv, sink, sink);
  };
  const int a = run("a"), b = run("b");
  if (a != 0 || b != 0) return {false, fmt::format("exit codes {} and {}: {}", a, b, sink.str())};
  int files = 0, identical = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    ++files;
    const auto other = base / "b" / entry.path().filename();
    if (fs::exists(other) && slurp(entry.path()) == slurp(other)) ++identical;
  }
  return {files > 0 && files == identical, fmt::format("{}/{} output files byte-identical", identical, files)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"msa-exactness", msa_exactness},
      {"heuristic-sandwich", heuristic_sandwich},
      {"outage-closed-form", outage_closed_form},
      {"aggregation-equivalence", aggregation_equivalence},
      {"algorithm-ordering", ordering},
      {"large-frame-runtime", large_frame_runtime},
      {"threshold-trend", threshold_trend},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    failures += o.pass ? 0 : 1;
    std::cout << fmt::format("{} [{}] {}: {}\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail)
              << std::flush;
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures;
}
