#pragma once

#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgin/graph.hpp"

namespace sgin::topology {
class SnapshotGraph;
}

namespace sgin::routing {

/// Raised when some node or terminal has no directed route to the root.
class InfeasibleError : public std::runtime_error {
public:
  InfeasibleError(const std::string& what, std::vector<NodeId> stranded)
      : std::runtime_error(what), stranded_(std::move(stranded)) {}
  const std::vector<NodeId>& stranded() const { return stranded_; }

private:
  std::vector<NodeId> stranded_;
};

/// Rooted aggregation tree in data-flow orientation: each edge is child -> parent.
struct Arborescence {
  NodeId root = 0;
  std::vector<Edge> edges;  // sorted by (src, dst)
  double total_cost = 0.0;

  std::vector<NodeId> nodes() const;
  std::optional<NodeId> parent(NodeId n) const;
};

/// Sum of edge weights in (src, dst) order.
double edge_cost(std::span<const Edge> edges);

/// Human-readable violations of the arborescence invariants (empty when valid): one parent per
/// non-root node, none for the root, acyclic, every terminal present, every leaf a terminal.
std::vector<std::string> arborescence_violations(const Arborescence& tree, std::span<const NodeId> terminals,
                                                 bool require_pruned = true);

struct Path {
  std::vector<NodeId> nodes;  // source first, target last
  std::vector<Edge> edges;
  double cost = 0.0;
};

/// Minimum-weight directed path. Equal-distance ties prefer the smaller predecessor id.
std::optional<Path> dijkstra(const Digraph& g, NodeId source, NodeId target);

struct ShortestPathSet {
  NodeId root = 0;
  std::vector<NodeId> terminals;
  std::vector<Path> paths;  // one per non-root terminal, same order as `terminals` minus root
};

/// Per-terminal Dijkstra to the root. Throws InfeasibleError naming unreachable terminals.
ShortestPathSet shortest_paths_to_root(const Digraph& g, std::span<const NodeId> terminals, NodeId root);

/// Union of path edges (deduplicated) over path nodes plus the root.
Digraph build_substitute_graph(const ShortestPathSet& paths);

/// Minimum spanning arborescence over every node of `g`, directed toward `root`.
Arborescence chu_liu_edmonds(const Digraph& g, NodeId root);

/// Repeatedly strips non-terminal leaves.
Arborescence prune(Arborescence tree, std::span<const NodeId> terminals);

enum class SubstituteMode {
  PathUnion,  // edges of the shortest paths only
  Induced,    // every edge of g among the shortest-path nodes
};

struct TaeerOptions {
  SubstituteMode substitute = SubstituteMode::PathUnion;
};

/// Shortest paths -> substitute graph -> minimum spanning arborescence -> pruning.
Arborescence taeer(const Digraph& g, std::span<const NodeId> terminals, NodeId root,
                   const TaeerOptions& options = {});

/// Union of the per-terminal shortest paths. Not guaranteed to be a tree when paths diverge.
Arborescence d_merge(const Digraph& g, std::span<const NodeId> terminals, NodeId root);

struct OrbitForest {
  std::vector<NodeId> roots;  // one per orbit holding terminals, ascending orbit
  std::vector<Edge> edges;    // ring edges toward each orbit root, then root -> GEO uplinks
  double total_cost = 0.0;
};

/// Intra-orbit baseline: per orbit, the shortest ring arc covering its terminals drains into a
/// random arc member, which uplinks to GEO.
OrbitForest orbit_greedy(const topology::SnapshotGraph& g, int frame, std::span<const NodeId> terminals,
                         std::mt19937_64& rng);

inline constexpr std::size_t kExactOracleMaxNodes = 12;

/// Optimal directed Steiner arborescence cost by enumerating Steiner-node subsets and solving an
/// MSA on each induced subgraph. Throws std::length_error above kExactOracleMaxNodes nodes.
double exact_dst_oracle(const Digraph& g, std::span<const NodeId> terminals, NodeId root);

}  // namespace sgin::routing
