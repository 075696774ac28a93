#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "sgin/graph.hpp"

using sgin::routing::Digraph;
using sgin::routing::NodeId;

TEST_CASE("digraph basics") {
  Digraph g;
  g.add_edge(5, 2, 3.0);
  g.add_edge(2, 9, 1.0);
  g.add_node(7);
  CHECK(g.nodes() == std::vector<NodeId>{2, 5, 7, 9});
  CHECK(g.node_count() == 4);
  CHECK(g.edge_count() == 2);
  CHECK(g.weight(5, 2) == 3.0);
  CHECK_FALSE(g.weight(2, 5).has_value());
  CHECK(g.index_of(7) == 2);
  CHECK_THROWS_AS(g.index_of(8), std::out_of_range);
  CHECK_THROWS_AS(g.add_edge(3, 3, 1.0), std::invalid_argument);
}

TEST_CASE("parallel edges keep the cheaper weight") {
  Digraph g;
  g.add_edge(0, 1, 4.0);
  g.add_edge(0, 1, 2.5);
  g.add_edge(0, 1, 9.0);
  CHECK(g.edge_count() == 1);
  CHECK(g.weight(0, 1) == 2.5);
  g.add_edge(1, 0, 7.0);
  CHECK(g.edge_count() == 2);
}

TEST_CASE("adjacency and induced subgraph") {
  Digraph g;
  g.add_edge(0, 1, 1.0);
  g.add_edge(1, 2, 1.0);
  g.add_edge(2, 0, 1.0);
  g.add_edge(0, 2, 1.0);
  CHECK(g.out_edges(g.index_of(0)).size() == 2);
  CHECK(g.in_edges(g.index_of(2)).size() == 2);
  const std::vector<NodeId> keep{0, 2};
  const auto sub = g.induced(keep);
  CHECK(sub.node_count() == 2);
  CHECK(sub.edge_count() == 2);
  CHECK(sub.weight(2, 0) == 1.0);
}
