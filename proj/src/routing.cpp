#include "sgin/routing.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sgin/topology.hpp"

namespace sgin::routing {

namespace {

bool edge_order(const Edge& a, const Edge& b) { return std::pair(a.src, a.dst) < std::pair(b.src, b.dst); }

std::vector<NodeId> unique_sorted(std::span<const NodeId> ids) {
  std::vector<NodeId> out(ids.begin(), ids.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double edge_cost(std::span<const Edge> edges) {
  std::vector<Edge> sorted(edges.begin(), edges.end());
  std::sort(sorted.begin(), sorted.end(), edge_order);
  double total = 0.0;
  for (const auto& e : sorted) total += e.weight;
  return total;
}

std::vector<NodeId> Arborescence::nodes() const {
  std::vector<NodeId> out{root};
  for (const auto& e : edges) {
    out.push_back(e.src);
    out.push_back(e.dst);
  }
  return unique_sorted(out);
}

std::optional<NodeId> Arborescence::parent(NodeId n) const {
  for (const auto& e : edges)
    if (e.src == n) return e.dst;
  return std::nullopt;
}

std::vector<std::string> arborescence_violations(const Arborescence& tree, std::span<const NodeId> terminals,
                                                 bool require_pruned) {
  std::vector<std::string> issues;
  std::map<NodeId, std::vector<NodeId>> parents;
  std::map<NodeId, int> children;
  for (const auto& e : tree.edges) {
    parents[e.src].push_back(e.dst);
    ++children[e.dst];
  }
  const auto nodes = tree.nodes();
  for (NodeId n : nodes) {
    const auto count = parents.contains(n) ? parents[n].size() : 0;
    if (n == tree.root && count != 0) issues.push_back(fmt::format("root {} has an outgoing edge", n));
    if (n != tree.root && count != 1)
      issues.push_back(fmt::format("node {} has {} outgoing edges", n, count));
  }
  for (NodeId n : nodes) {
    // Walk toward the root; more steps than nodes means a cycle.
    NodeId x = n;
    std::size_t steps = 0;
    while (x != tree.root && parents.contains(x) && steps <= nodes.size()) {
      x = parents[x].front();
      ++steps;
    }
    if (x != tree.root) {
      issues.push_back(fmt::format("node {} does not reach root {}", n, tree.root));
    }
  }
  const std::set<NodeId> node_set(nodes.begin(), nodes.end());
  const std::set<NodeId> term_set(terminals.begin(), terminals.end());
  for (NodeId t : term_set)
    if (!node_set.contains(t)) issues.push_back(fmt::format("terminal {} missing", t));
  if (require_pruned) {
    for (NodeId n : nodes)
      if (n != tree.root && !children.contains(n) && !term_set.contains(n))
        issues.push_back(fmt::format("leaf {} is not a terminal", n));
  }
  return issues;
}

std::optional<Path> dijkstra(const Digraph& g, NodeId source, NodeId target) {
  const std::size_t s = g.index_of(source);
  const std::size_t t = g.index_of(target);
  if (s == t) return Path{{source}, {}, 0.0};

  const auto& nodes = g.nodes();
  const auto& edges = g.edges();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(g.node_count(), inf);
  std::vector<int> via(g.node_count(), -1);
  std::vector<char> done(g.node_count(), 0);

  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[s] = 0.0;
  queue.emplace(0.0, s);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (done[u] || d > dist[u]) continue;
    done[u] = 1;
    if (u == t) break;
    for (int ei : g.out_edges(u)) {
      const Edge& e = edges[static_cast<std::size_t>(ei)];
      if (e.weight < 0.0) throw std::invalid_argument(fmt::format("negative weight on {} -> {}", e.src, e.dst));
      const std::size_t v = g.index_of(e.dst);
      if (done[v]) continue;
      const double nd = d + e.weight;
      const bool better = nd < dist[v] ||
                          (nd == dist[v] && via[v] >= 0 && e.src < edges[static_cast<std::size_t>(via[v])].src);
      if (better) {
        dist[v] = nd;
        via[v] = ei;
        queue.emplace(nd, v);
      }
    }
  }
  if (dist[t] == inf) return std::nullopt;

  Path path;
  path.cost = dist[t];
  for (std::size_t x = t; x != s;) {
    const Edge& e = edges[static_cast<std::size_t>(via[x])];
    path.edges.push_back(e);
    x = g.index_of(e.src);
  }
  std::reverse(path.edges.begin(), path.edges.end());
  path.nodes.push_back(nodes[s]);
  for (const auto& e : path.edges) path.nodes.push_back(e.dst);
  return path;
}

ShortestPathSet shortest_paths_to_root(const Digraph& g, std::span<const NodeId> terminals, NodeId root) {
  ShortestPathSet set;
  set.root = root;
  std::vector<NodeId> unreachable;
  std::unordered_set<NodeId> seen;
  for (NodeId t : terminals) {
    if (!seen.insert(t).second) continue;
    set.terminals.push_back(t);
    if (t == root) continue;
    if (!g.has_node(t)) throw std::invalid_argument(fmt::format("terminal {} is not in the graph", t));
    auto p = dijkstra(g, t, root);
    if (!p) {
      unreachable.push_back(t);
      continue;
    }
    set.paths.push_back(std::move(*p));
  }
  if (!unreachable.empty())
    throw InfeasibleError(fmt::format("terminals {} cannot reach root {}", unreachable, root), unreachable);
  return set;
}

Digraph build_substitute_graph(const ShortestPathSet& paths) {
  Digraph sub;
  sub.add_node(paths.root);
  for (const auto& p : paths.paths) {
    for (NodeId n : p.nodes) sub.add_node(n);
    for (const auto& e : p.edges) sub.add_edge(e.src, e.dst, e.weight);
  }
  return sub;
}

namespace {

// Works on the reversed (root-outward) graph: every non-root node keeps its cheapest
// incoming edge; cycles are contracted and the reduced problem is solved recursively.
struct CleEdge {
  int from;
  int to;
  double w;
  int orig;  // position in lexicographic (child, parent) order; final tie-breaker
};

std::vector<int> cle_solve(int n, int root, const std::vector<CleEdge>& edges) {
  std::vector<int> best(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const auto& e = edges[static_cast<std::size_t>(i)];
    if (e.to == root || e.from == e.to) continue;
    int& b = best[static_cast<std::size_t>(e.to)];
    const auto& cur = edges[static_cast<std::size_t>(std::max(b, 0))];
    if (b < 0 || e.w < cur.w || (e.w == cur.w && e.orig < cur.orig)) b = i;
  }
  for (int v = 0; v < n; ++v)
    if (v != root && best[static_cast<std::size_t>(v)] < 0)
      throw std::logic_error("contracted node without incoming edge");

  auto pred = [&](int v) { return edges[static_cast<std::size_t>(best[static_cast<std::size_t>(v)])].from; };

  std::vector<int> cycle_of(static_cast<std::size_t>(n), -1);
  std::vector<int> stamp(static_cast<std::size_t>(n), -1);
  int cycles = 0;
  for (int v = 0; v < n; ++v) {
    int x = v;
    while (x != root && stamp[static_cast<std::size_t>(x)] < 0) {
      stamp[static_cast<std::size_t>(x)] = v;
      x = pred(x);
    }
    if (x != root && stamp[static_cast<std::size_t>(x)] == v) {
      int y = x;
      do {
        cycle_of[static_cast<std::size_t>(y)] = cycles;
        y = pred(y);
      } while (y != x);
      ++cycles;
    }
  }

  std::vector<int> chosen;
  if (cycles == 0) {
    for (int v = 0; v < n; ++v)
      if (v != root) chosen.push_back(best[static_cast<std::size_t>(v)]);
    return chosen;
  }

  // Contract: each cycle becomes one node; edges entering a cycle are charged
  // w - w(best incoming edge of the entry vertex).
  std::vector<int> id(static_cast<std::size_t>(n));
  int next = cycles;
  for (int v = 0; v < n; ++v) {
    const int c = cycle_of[static_cast<std::size_t>(v)];
    id[static_cast<std::size_t>(v)] = c >= 0 ? c : next++;
  }
  std::vector<CleEdge> reduced;
  std::vector<int> origin;
  for (int i = 0; i < static_cast<int>(edges.size()); ++i) {
    const auto& e = edges[static_cast<std::size_t>(i)];
    if (e.to == root) continue;
    const int cu = id[static_cast<std::size_t>(e.from)];
    const int cv = id[static_cast<std::size_t>(e.to)];
    if (cu == cv) continue;
    const bool into_cycle = cycle_of[static_cast<std::size_t>(e.to)] >= 0;
    const double w = into_cycle ? e.w - edges[static_cast<std::size_t>(best[static_cast<std::size_t>(e.to)])].w : e.w;
    reduced.push_back({cu, cv, w, e.orig});
    origin.push_back(i);
  }

  const auto sub = cle_solve(next, id[static_cast<std::size_t>(root)], reduced);

  // Expand: keep the reduced choice and, inside each cycle, every cycle edge except the one
  // into the vertex where the cycle is entered.
  std::vector<int> entry(static_cast<std::size_t>(cycles), -1);
  for (int j : sub) {
    const int i = origin[static_cast<std::size_t>(j)];
    chosen.push_back(i);
    const int to = edges[static_cast<std::size_t>(i)].to;
    if (const int c = cycle_of[static_cast<std::size_t>(to)]; c >= 0) entry[static_cast<std::size_t>(c)] = to;
  }
  for (int v = 0; v < n; ++v) {
    const int c = cycle_of[static_cast<std::size_t>(v)];
    if (c >= 0 && entry[static_cast<std::size_t>(c)] != v) chosen.push_back(best[static_cast<std::size_t>(v)]);
  }
  return chosen;
}

std::vector<NodeId> stranded_nodes(const Digraph& g, NodeId root) {
  std::vector<char> reached(g.node_count(), 0);
  std::vector<std::size_t> stack{g.index_of(root)};
  reached[stack.back()] = 1;
  while (!stack.empty()) {
    const std::size_t x = stack.back();
    stack.pop_back();
    for (int ei : g.in_edges(x)) {
      const std::size_t y = g.index_of(g.edges()[static_cast<std::size_t>(ei)].src);
      if (!reached[y]) {
        reached[y] = 1;
        stack.push_back(y);
      }
    }
  }
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (!reached[i]) out.push_back(g.nodes()[i]);
  return out;
}

}  // namespace

Arborescence chu_liu_edmonds(const Digraph& g, NodeId root) {
  Arborescence tree;
  tree.root = root;
  const int r = static_cast<int>(g.index_of(root));
  if (auto stranded = stranded_nodes(g, root); !stranded.empty())
    throw InfeasibleError(fmt::format("nodes {} cannot reach root {}", stranded, root), stranded);
  if (g.node_count() == 1) return tree;

  std::vector<Edge> ordered = g.edges();
  std::sort(ordered.begin(), ordered.end(), edge_order);
  std::vector<CleEdge> reversed;
  reversed.reserve(ordered.size());
  for (int i = 0; i < static_cast<int>(ordered.size()); ++i) {
    const auto& e = ordered[static_cast<std::size_t>(i)];
    if (e.src == root) continue;
    reversed.push_back({static_cast<int>(g.index_of(e.dst)), static_cast<int>(g.index_of(e.src)), e.weight, i});
  }

  for (int i : cle_solve(static_cast<int>(g.node_count()), r, reversed))
    tree.edges.push_back(ordered[static_cast<std::size_t>(reversed[static_cast<std::size_t>(i)].orig)]);
  std::sort(tree.edges.begin(), tree.edges.end(), edge_order);
  tree.total_cost = edge_cost(tree.edges);
  return tree;
}

Arborescence prune(Arborescence tree, std::span<const NodeId> terminals) {
  const std::unordered_set<NodeId> keep(terminals.begin(), terminals.end());
  std::unordered_map<NodeId, int> children;
  std::unordered_map<NodeId, NodeId> parent;
  for (const auto& e : tree.edges) {
    ++children[e.dst];
    parent[e.src] = e.dst;
  }
  std::set<NodeId> removed;
  std::vector<NodeId> queue;
  for (const auto& e : tree.edges)
    if (!children.contains(e.src) && !keep.contains(e.src)) queue.push_back(e.src);
  while (!queue.empty()) {
    const NodeId leaf = queue.back();
    queue.pop_back();
    if (leaf == tree.root || keep.contains(leaf) || !removed.insert(leaf).second) continue;
    const NodeId up = parent.at(leaf);
    if (--children[up] == 0 && !keep.contains(up)) queue.push_back(up);
  }
  std::erase_if(tree.edges, [&](const Edge& e) { return removed.contains(e.src); });
  tree.total_cost = edge_cost(tree.edges);
  return tree;
}

Arborescence taeer(const Digraph& g, std::span<const NodeId> terminals, NodeId root, const TaeerOptions& options) {
  if (!g.has_node(root)) throw std::invalid_argument(fmt::format("root {} is not in the graph", root));
  const auto paths = shortest_paths_to_root(g, terminals, root);
  if (paths.paths.empty()) return Arborescence{root, {}, 0.0};

  Digraph sub = build_substitute_graph(paths);
  if (options.substitute == SubstituteMode::Induced) sub = g.induced(sub.nodes());

  std::vector<NodeId> keep(paths.terminals);
  keep.push_back(root);
  return prune(chu_liu_edmonds(sub, root), keep);
}

Arborescence d_merge(const Digraph& g, std::span<const NodeId> terminals, NodeId root) {
  if (!g.has_node(root)) throw std::invalid_argument(fmt::format("root {} is not in the graph", root));
  const auto paths = shortest_paths_to_root(g, terminals, root);
  Arborescence merged;
  merged.root = root;
  std::set<std::pair<NodeId, NodeId>> seen;
  for (const auto& p : paths.paths)
    for (const auto& e : p.edges)
      if (seen.emplace(e.src, e.dst).second) merged.edges.push_back(e);
  std::sort(merged.edges.begin(), merged.edges.end(), edge_order);
  merged.total_cost = edge_cost(merged.edges);
  return merged;
}

OrbitForest orbit_greedy(const topology::SnapshotGraph& g, int frame, std::span<const NodeId> terminals,
                         std::mt19937_64& rng) {
  if (terminals.empty()) throw std::invalid_argument("orbit_greedy needs at least one terminal");
  const auto& spec = g.spec();
  const int ring = spec.sats_per_orbit;

  std::map<int, std::vector<int>> slots_by_orbit;
  for (NodeId t : unique_sorted(terminals)) {
    if (g.is_geo(t)) continue;
    const auto id = g.sat(t);
    slots_by_orbit[id.orbit].push_back(id.slot);
  }

  auto link = [&](NodeId src, NodeId dst) -> Edge {
    const auto* e = g.find(src, dst);
    if (e == nullptr)
      throw InfeasibleError(fmt::format("orbit-greedy needs missing link {} -> {}", src, dst), {src});
    return {src, dst, e->frames.at(static_cast<std::size_t>(frame)).weight};
  };

  OrbitForest forest;
  std::vector<Edge> uplinks;
  for (auto& [orbit, slots] : slots_by_orbit) {
    std::sort(slots.begin(), slots.end());
    // The shortest covering arc is the complement of the widest gap between consecutive terminals.
    std::size_t start_idx = 0;
    int widest = -1;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const int a = slots[i];
      const int b = slots[(i + 1) % slots.size()];
      const int gap = slots.size() == 1 ? ring : (b - a + ring) % ring;
      if (gap > widest) {
        widest = gap;
        start_idx = (i + 1) % slots.size();
      }
    }
    const int start = slots[start_idx];
    const int length = ring - widest;  // edges along the arc
    std::vector<NodeId> arc;
    for (int k = 0; k <= length; ++k) arc.push_back(g.node({orbit, (start + k) % ring}));

    std::uniform_int_distribution<std::size_t> pick(0, arc.size() - 1);
    const std::size_t r = pick(rng);
    forest.roots.push_back(arc[r]);
    for (std::size_t k = 0; k < r; ++k) forest.edges.push_back(link(arc[k], arc[k + 1]));
    for (std::size_t k = arc.size() - 1; k > r; --k) forest.edges.push_back(link(arc[k], arc[k - 1]));
    uplinks.push_back(link(arc[r], g.geo_node()));
  }
  forest.edges.insert(forest.edges.end(), uplinks.begin(), uplinks.end());
  for (const auto& e : forest.edges) forest.total_cost += e.weight;
  return forest;
}

double exact_dst_oracle(const Digraph& g, std::span<const NodeId> terminals, NodeId root) {
  if (g.node_count() > kExactOracleMaxNodes)
    throw std::length_error(fmt::format("exact DST oracle limited to {} nodes, graph has {}", kExactOracleMaxNodes,
                                        g.node_count()));
  std::vector<NodeId> required = unique_sorted(terminals);
  if (!std::binary_search(required.begin(), required.end(), root)) {
    required.push_back(root);
    std::sort(required.begin(), required.end());
  }
  std::vector<NodeId> optional;
  for (NodeId n : g.nodes())
    if (!std::binary_search(required.begin(), required.end(), n)) optional.push_back(n);

  double best = std::numeric_limits<double>::infinity();
  const std::size_t subsets = std::size_t{1} << optional.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<NodeId> keep = required;
    for (std::size_t i = 0; i < optional.size(); ++i)
      if (mask & (std::size_t{1} << i)) keep.push_back(optional[i]);
    const Digraph sub = g.induced(keep);
    if (!stranded_nodes(sub, root).empty()) continue;
    best = std::min(best, chu_liu_edmonds(sub, root).total_cost);
  }
  if (best == std::numeric_limits<double>::infinity())
    throw InfeasibleError("no Steiner arborescence reaches the root", required);
  return best;
}

}  // namespace sgin::routing
