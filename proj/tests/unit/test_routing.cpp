#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "oracles.hpp"
#include "sgin/routing.hpp"
#include "sgin/topology.hpp"

using namespace sgin;
using namespace sgin::routing;

namespace {

Digraph make(std::initializer_list<Edge> edges) {
  Digraph g;
  for (const auto& e : edges) g.add_edge(e.src, e.dst, e.weight);
  return g;
}

// Every parent assignment, no pruning at all. Only for tiny graphs.
std::optional<double> exhaustive_msa(const Digraph& g, NodeId root) {
  const auto& nodes = g.nodes();
  std::vector<std::vector<Edge>> choices;
  for (NodeId n : nodes) {
    if (n == root) continue;
    std::vector<Edge> out;
    for (const auto& e : g.edges())
      if (e.src == n) out.push_back(e);
    if (out.empty()) return std::nullopt;
    choices.push_back(out);
  }
  std::optional<double> best;
  std::vector<std::size_t> pick(choices.size(), 0);
  while (true) {
    std::map<NodeId, NodeId> parent;
    std::vector<Edge> chosen;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      chosen.push_back(choices[i][pick[i]]);
      parent[chosen.back().src] = chosen.back().dst;
    }
    bool ok = true;
    for (const auto& [n, p] : parent) {
      NodeId x = n;
      for (std::size_t steps = 0; x != root && ok; ++steps) {
        if (steps > nodes.size()) ok = false;
        else x = parent.at(x);
      }
    }
    if (ok) {
      std::sort(chosen.begin(), chosen.end(), [](auto& a, auto& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); });
      const double c = edge_cost(chosen);
      if (!best || c < *best) best = c;
    }
    std::size_t i = 0;
    while (i < pick.size() && ++pick[i] == choices[i].size()) pick[i++] = 0;
    if (i == pick.size()) break;
  }
  if (choices.empty()) return 0.0;
  return best;
}

struct Instance {
  Digraph g;
  std::vector<NodeId> terminals;
  NodeId root;
};

Instance random_instance(std::mt19937_64& rng, int max_nodes, int max_terminals, oracle::WeightKind kind) {
  while (true) {
    const int n = std::uniform_int_distribution<int>(3, max_nodes)(rng);
    auto g = oracle::random_digraph(rng, n, std::uniform_real_distribution<double>(0.3, 0.8)(rng), kind);
    std::vector<NodeId> ids(static_cast<std::size_t>(n));
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(max_terminals, n - 1))(rng);
    Instance in{g, std::vector<NodeId>(ids.begin() + 1, ids.begin() + 1 + k), ids[0]};
    const bool ok = std::all_of(in.terminals.begin(), in.terminals.end(),
                                [&](NodeId t) { return dijkstra(in.g, t, in.root).has_value(); });
    if (ok) return in;
  }
}

}  // namespace

TEST_CASE("dijkstra basics") {
  const auto g = make({{0, 1, 2.5}});
  const auto same = dijkstra(g, 0, 0);
  REQUIRE(same);
  CHECK(same->cost == 0.0);
  CHECK(same->edges.empty());
  const auto p = dijkstra(g, 0, 1);
  REQUIRE(p);
  CHECK(p->cost == 2.5);
  CHECK(p->nodes == std::vector<NodeId>{0, 1});
  CHECK_FALSE(dijkstra(g, 1, 0).has_value());
  CHECK_THROWS_AS(dijkstra(make({{0, 1, -1.0}}), 0, 1), std::invalid_argument);
}

TEST_CASE("dijkstra tie-break prefers smaller predecessor") {
  // 0 -> 1 -> 3 and 0 -> 2 -> 3 both cost 2.
  const auto g = make({{0, 2, 1.0}, {2, 3, 1.0}, {0, 1, 1.0}, {1, 3, 1.0}});
  const auto p = dijkstra(g, 0, 3);
  REQUIRE(p);
  CHECK(p->nodes == std::vector<NodeId>{0, 1, 3});
  for (int i = 0; i < 5; ++i) CHECK(dijkstra(g, 0, 3)->nodes == p->nodes);
}

TEST_CASE("dijkstra matches bellman-ford") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    Digraph g = oracle::random_digraph(rng, n, 0.35, trial % 2 ? oracle::WeightKind::Integer : oracle::WeightKind::Dyadic);
    const NodeId s = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const NodeId t = std::uniform_int_distribution<int>(0, n - 1)(rng);
    const auto p = dijkstra(g, s, t);
    const auto bf = oracle::bellman_ford(g, s, t);
    REQUIRE(p.has_value() == bf.has_value());
    if (p) {
      CHECK(p->cost == *bf);
      double along = 0.0;
      for (const auto& e : p->edges) {
        CHECK(g.weight(e.src, e.dst) == e.weight);
        along += e.weight;
      }
      CHECK(along == p->cost);
    }
  }
}

TEST_CASE("shortest path set and substitute graph") {
  const std::vector<NodeId> one{1};
  const auto g = make({{1, 2, 1.0}, {2, 0, 1.0}, {3, 2, 1.0}, {4, 5, 1.0}, {5, 0, 1.0}, {1, 0, 5.0}});
  auto sub = build_substitute_graph(shortest_paths_to_root(g, one, 0));
  CHECK(sub.node_count() == 3);
  CHECK(sub.edge_count() == 2);

  const std::vector<NodeId> shared{1, 3};
  sub = build_substitute_graph(shortest_paths_to_root(g, shared, 0));
  CHECK(sub.edge_count() == 3);  // 2->0 appears once

  const std::vector<NodeId> disjoint{1, 4};
  sub = build_substitute_graph(shortest_paths_to_root(g, disjoint, 0));
  CHECK(sub.edge_count() == 4);

  const std::vector<NodeId> only_root{0};
  sub = build_substitute_graph(shortest_paths_to_root(g, only_root, 0));
  CHECK(sub.node_count() == 1);
  CHECK(sub.edge_count() == 0);

  const std::vector<NodeId> stranded{1, 6};
  auto h = g;
  h.add_node(6);
  try {
    shortest_paths_to_root(h, stranded, 0);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.stranded() == std::vector<NodeId>{6});
  }
}

TEST_CASE("chu-liu-edmonds examples") {
  // r = 0, a = 1, b = 2.
  auto t = chu_liu_edmonds(make({{1, 0, 1.0}, {2, 0, 5.0}, {2, 1, 2.0}}), 0);
  CHECK(t.total_cost == 3.0);
  CHECK(t.edges == std::vector<Edge>{{1, 0, 1.0}, {2, 1, 2.0}});

  t = chu_liu_edmonds(make({{1, 0, 10.0}, {2, 1, 1.0}, {1, 2, 1.0}, {2, 0, 10.0}}), 0);
  CHECK(t.total_cost == 11.0);
  CHECK(t.edges == std::vector<Edge>{{1, 0, 10.0}, {2, 1, 1.0}});

  Digraph single;
  single.add_node(4);
  t = chu_liu_edmonds(single, 4);
  CHECK(t.edges.empty());
  CHECK(t.total_cost == 0.0);

  auto g = make({{1, 0, 1.0}, {0, 2, 1.0}});
  try {
    chu_liu_edmonds(g, 0);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.stranded() == std::vector<NodeId>{2});
  }
}

TEST_CASE("msa oracle agrees with unpruned enumeration") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto g = oracle::random_digraph(rng, n, 0.6, oracle::WeightKind::Real);
    const NodeId root = std::uniform_int_distribution<int>(0, n - 1)(rng);
    CHECK(oracle::brute_force_msa(g, root) == exhaustive_msa(g, root));
  }
}

TEST_CASE("chu-liu-edmonds is exact on random graphs") {
  std::mt19937_64 rng(3);
  const oracle::WeightKind kinds[] = {oracle::WeightKind::Integer, oracle::WeightKind::Dyadic, oracle::WeightKind::Real};
  for (int trial = 0; trial < 300; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const auto g = oracle::random_digraph(rng, n, 0.5, kinds[trial % 3]);
    const auto want = oracle::brute_force_msa(g, 0);
    if (!want) {
      CHECK_THROWS_AS(chu_liu_edmonds(g, 0), InfeasibleError);
      continue;
    }
    const auto t = chu_liu_edmonds(g, 0);
    CHECK(t.total_cost == *want);
    std::vector<NodeId> all(g.nodes());
    CHECK(arborescence_violations(t, all, false).empty());
    CHECK(t.nodes().size() == g.node_count());
  }
}

TEST_CASE("prune removes non-terminal leaves to a fixpoint") {
  Arborescence t;
  t.root = 0;
  t.edges = {{1, 0, 1.0}, {2, 1, 1.0}, {3, 2, 1.0}, {4, 0, 1.0}, {5, 4, 1.0}};
  const std::vector<NodeId> terms{2, 0};
  const auto p = prune(t, terms);
  CHECK(p.edges == std::vector<Edge>{{1, 0, 1.0}, {2, 1, 1.0}});
  CHECK(p.total_cost == 2.0);
  CHECK(arborescence_violations(p, terms).empty());
  CHECK_FALSE(arborescence_violations(t, terms).empty());
}

TEST_CASE("taeer examples") {
  const auto g = make({{1, 2, 1.0}, {2, 0, 1.0}, {3, 2, 1.0}, {1, 0, 5.0}, {3, 0, 4.0}});
  const std::vector<NodeId> only_root{0};
  CHECK(taeer(g, only_root, 0).edges.empty());
  const std::vector<NodeId> one{1};
  CHECK(taeer(g, one, 0).total_cost == dijkstra(g, 1, 0)->cost);
  CHECK(d_merge(g, one, 0).edges == taeer(g, one, 0).edges);

  auto h = g;
  h.add_node(9);
  const std::vector<NodeId> bad{1, 9};
  try {
    taeer(h, bad, 0);
    FAIL("expected InfeasibleError");
  } catch (const InfeasibleError& e) {
    CHECK(e.stranded() == std::vector<NodeId>{9});
  }
}

TEST_CASE("d-merge on node-disjoint paths") {
  const auto g = make({{1, 2, 1.5}, {2, 0, 1.0}, {3, 4, 2.0}, {4, 0, 0.5}});
  const std::vector<NodeId> terms{1, 3};
  CHECK(d_merge(g, terms, 0).total_cost == 5.0);
  CHECK(taeer(g, terms, 0).total_cost == 5.0);
}

TEST_CASE("induced substitute graph can beat the path union") {
  // Shortest paths 1->0 (cost 3) and 2->0 (cost 3) are disjoint, but 2->1 (cost 1) is cheaper
  // once 1 is already in the tree.
  const auto g = make({{1, 0, 3.0}, {2, 0, 3.0}, {2, 1, 1.0}});
  const std::vector<NodeId> terms{1, 2};
  CHECK(taeer(g, terms, 0).total_cost == 6.0);
  CHECK(taeer(g, terms, 0, {SubstituteMode::Induced}).total_cost == 4.0);
  CHECK(d_merge(g, terms, 0).total_cost == 6.0);
  CHECK(exact_dst_oracle(g, terms, 0) == 4.0);
}

TEST_CASE("taeer invariants, ordering and determinism on random instances") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, 12, 5, trial % 2 ? oracle::WeightKind::Integer : oracle::WeightKind::Dyadic);
    const auto a = taeer(in.g, in.terminals, in.root);
    const auto b = taeer(in.g, in.terminals, in.root);
    const auto induced = taeer(in.g, in.terminals, in.root, {SubstituteMode::Induced});
    const auto m = d_merge(in.g, in.terminals, in.root);
    CHECK(a.edges == b.edges);
    CHECK(arborescence_violations(a, in.terminals).empty());
    CHECK(arborescence_violations(induced, in.terminals).empty());
    CHECK(a.total_cost <= m.total_cost);
    CHECK(induced.total_cost <= m.total_cost);
  }
}

TEST_CASE("exact dst oracle") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 120; ++trial) {
    const auto in = random_instance(rng, 7, 3, oracle::WeightKind::Integer);
    const double exact = exact_dst_oracle(in.g, in.terminals, in.root);
    CHECK(exact == oracle::brute_force_dst(in.g, in.terminals, in.root).value());
    CHECK(exact <= taeer(in.g, in.terminals, in.root).total_cost);
  }
  const auto g = make({{1, 0, 1.0}, {2, 1, 2.0}, {2, 0, 5.0}});
  const std::vector<NodeId> all{0, 1, 2};
  CHECK(exact_dst_oracle(g, all, 0) == chu_liu_edmonds(g, 0).total_cost);
  const std::vector<NodeId> root_only{0};
  CHECK(exact_dst_oracle(g, root_only, 0) == 0.0);
  const auto path = make({{3, 2, 1.0}, {2, 1, 2.0}, {1, 0, 4.0}});
  const std::vector<NodeId> end{3};
  CHECK(exact_dst_oracle(path, end, 0) == 7.0);

  Digraph big;
  for (int i = 0; i < 13; ++i) big.add_node(i);
  CHECK_THROWS_AS(exact_dst_oracle(big, root_only, 0), std::length_error);
}

TEST_CASE("orbit greedy") {
  const auto spec = geo::ConstellationSpec::walker(geo::WalkerPattern::Delta, 80, 4, 1, 500.0, 45.0);
  channel::LinkParams params;
  std::vector<double> power(80, 1.0);
  const auto ts = topology::TimeStructure::for_constellation(spec, 250.0, 25);
  const auto g = topology::build_snapshot(spec, params, power, 0, 0.0, ts.frame_len_s());
  auto id = [&](int o, int s) { return g.node({o, s}); };

  SUBCASE("adjacent terminals in one orbit") {
    std::mt19937_64 rng(1);
    const std::vector<NodeId> terms{id(1, 4), id(1, 5), id(1, 6)};
    const auto f = orbit_greedy(g, 0, terms, rng);
    CHECK(f.roots.size() == 1);
    CHECK(f.edges.size() == 3);  // arc of 2 ring edges plus the uplink
    int uplinks = 0;
    for (const auto& e : f.edges) uplinks += g.is_geo(e.dst) ? 1 : 0;
    CHECK(uplinks == 1);
  }
  SUBCASE("wrap-around arc") {
    std::mt19937_64 rng(1);
    const std::vector<NodeId> terms{id(0, 19), id(0, 1)};
    const auto f = orbit_greedy(g, 0, terms, rng);
    CHECK(f.edges.size() == 3);
  }
  SUBCASE("three orbits, three uplinks, cost adds up") {
    std::mt19937_64 rng(9);
    const std::vector<NodeId> terms{id(0, 2), id(0, 8), id(2, 11), id(3, 0), id(3, 17)};
    const auto f = orbit_greedy(g, 3, terms, rng);
    CHECK(f.roots.size() == 3);
    int uplinks = 0;
    double cost = 0.0;
    for (const auto& e : f.edges) {
      uplinks += g.is_geo(e.dst) ? 1 : 0;
      CHECK(e.weight == g.state(e.src, e.dst, 3).weight);
      cost += e.weight;
    }
    CHECK(uplinks == 3);
    CHECK(f.total_cost == doctest::Approx(cost));
    std::mt19937_64 again(9);
    CHECK(orbit_greedy(g, 3, terms, again).edges == f.edges);
  }
  SUBCASE("empty terminal set") {
    std::mt19937_64 rng(1);
    CHECK_THROWS(orbit_greedy(g, 0, std::vector<NodeId>{}, rng));
  }
}
