#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace sgin::routing {

using NodeId = int;

/// Directed, weighted edge. In aggregation results `src` is the child and `dst` its parent.
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Sparse directed graph over arbitrary integer node ids.
///
/// Node ids are kept sorted, so iteration order (and every tie-break built on it) is
/// lexicographic. At most one edge per ordered pair; re-adding keeps the smaller weight.
class Digraph {
public:
  Digraph() = default;
  explicit Digraph(std::span<const NodeId> nodes);

  void add_node(NodeId id);
  /// Adds both endpoints if needed. Self-loops are rejected with std::invalid_argument.
  void add_edge(NodeId src, NodeId dst, double weight);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool has_node(NodeId id) const { return index_.contains(id); }
  std::optional<double> weight(NodeId src, NodeId dst) const;

  /// Dense position of a node in nodes(); throws std::out_of_range for unknown ids.
  std::size_t index_of(NodeId id) const;

  /// Edge indices leaving / entering the node at dense position `i`.
  const std::vector<int>& out_edges(std::size_t i) const { return out_[i]; }
  const std::vector<int>& in_edges(std::size_t i) const { return in_[i]; }

  /// Subgraph on `keep` with every edge whose endpoints both survive.
  Digraph induced(std::span<const NodeId> keep) const;

private:
  void rebuild_index();

  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<Edge> edges_;
  std::unordered_map<long long, int> edge_lookup_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
};

}  // namespace sgin::routing
