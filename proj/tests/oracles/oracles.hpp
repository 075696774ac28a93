#pragma once

// Slow reference implementations used only by the test binaries.

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sgin/channel.hpp"
#include "sgin/graph.hpp"
#include "sgin/hierfl.hpp"

namespace sgin::oracle {

using routing::Digraph;
using routing::NodeId;

std::optional<double> bellman_ford(const Digraph& g, NodeId source, NodeId target);

/// Minimum spanning in-arborescence cost by enumerating one parent per non-root node.
/// Costs are summed in (src, dst) order, the same order routing::edge_cost uses.
std::optional<double> brute_force_msa(const Digraph& g, NodeId root);

/// Minimum directed Steiner arborescence cost: every non-root node either stays out or picks
/// one parent. Only meant for graphs with at most 8 nodes.
std::optional<double> brute_force_dst(const Digraph& g, std::span<const NodeId> terminals, NodeId root);

/// P{L_PL < gamma0} by quadrature of channel::pointing_loss_pdf.
double outage_by_quadrature(double gamma0, const channel::LinkParams& p);

/// Integral of channel::pointing_loss_pdf over (0, 1).
double pdf_mass(const channel::LinkParams& p);

/// Iterates x <- x - eta * grad f(x) on the weighted global objective; element 0 is x0.
std::vector<hierfl::ModelVector> centralized_gd(const hierfl::Problem& p, double eta, int steps);

enum class WeightKind { Integer, Dyadic, Real };

/// Random digraph on nodes 0..n-1 with independent edge probability `density`.
Digraph random_digraph(std::mt19937_64& rng, int n, double density, WeightKind kind);

}  // namespace sgin::oracle
