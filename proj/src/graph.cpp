#include "sgin/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace sgin::routing {

namespace {

long long pair_key(NodeId a, NodeId b) {
  return (static_cast<long long>(a) << 32) ^ static_cast<long long>(static_cast<unsigned int>(b));
}

}  // namespace

Digraph::Digraph(std::span<const NodeId> nodes) {
  nodes_.assign(nodes.begin(), nodes.end());
  std::sort(nodes_.begin(), nodes_.end());
  nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
  rebuild_index();
}

void Digraph::rebuild_index() {
  index_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_[nodes_[i]] = i;
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    out_[index_.at(edges_[e].src)].push_back(static_cast<int>(e));
    in_[index_.at(edges_[e].dst)].push_back(static_cast<int>(e));
  }
}

void Digraph::add_node(NodeId id) {
  if (has_node(id)) return;
  auto pos = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  const bool append = pos == nodes_.end();
  nodes_.insert(pos, id);
  if (append) {
    index_[id] = nodes_.size() - 1;
    out_.emplace_back();
    in_.emplace_back();
  } else {
    rebuild_index();
  }
}

void Digraph::add_edge(NodeId src, NodeId dst, double weight) {
  if (src == dst) throw std::invalid_argument("self-loop on node " + std::to_string(src));
  add_node(src);
  add_node(dst);
  const long long key = pair_key(src, dst);
  if (auto it = edge_lookup_.find(key); it != edge_lookup_.end()) {
    auto& e = edges_[static_cast<std::size_t>(it->second)];
    e.weight = std::min(e.weight, weight);
    return;
  }
  const int e = static_cast<int>(edges_.size());
  edges_.push_back({src, dst, weight});
  edge_lookup_[key] = e;
  out_[index_.at(src)].push_back(e);
  in_[index_.at(dst)].push_back(e);
}

std::optional<double> Digraph::weight(NodeId src, NodeId dst) const {
  auto it = edge_lookup_.find(pair_key(src, dst));
  if (it == edge_lookup_.end()) return std::nullopt;
  return edges_[static_cast<std::size_t>(it->second)].weight;
}

std::size_t Digraph::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw std::out_of_range("unknown node " + std::to_string(id));
  return it->second;
}

Digraph Digraph::induced(std::span<const NodeId> keep) const {
  Digraph sub(keep);
  std::unordered_set<NodeId> kept(keep.begin(), keep.end());
  for (const auto& e : edges_)
    if (kept.contains(e.src) && kept.contains(e.dst)) sub.add_edge(e.src, e.dst, e.weight);
  return sub;
}

}  // namespace sgin::routing
