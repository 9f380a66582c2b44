#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "qkdnar/route.hpp"

namespace qkdnar {

// Total order on routes: shorter first, equal lengths (within 1e-9 km) by
// lexicographic node-id sequence.
bool route_less(const Route& a, const Route& b);

// Yen's algorithm. Up to k loopless routes in route_less order; empty when
// dst is unreachable.
std::vector<Route> k_shortest_routes(const Topology& topo, NodeId src, NodeId dst, int k);

// Depth-first search expanding neighbours in ascending id order. Returns the
// first route found within max_km, otherwise the first route found at all.
std::optional<Route> dfs_first_route(const Topology& topo, NodeId src, NodeId dst,
                                     double max_km = 50.0);

// Candidate physical routes for one auxiliary (node-pair) link: the
// max_routes shortest, then those within max_km.
std::vector<Route> enumerate_phi(const Topology& topo, NodeId src, NodeId dst, int max_routes,
                                 double max_km = 50.0);

// Memoised k_shortest_routes for one topology. Not thread-safe.
class RouteCache {
 public:
  RouteCache(const Topology& topo, int k) : topo_(&topo), k_(k) {}

  const std::vector<Route>& get(NodeId src, NodeId dst);
  int k() const { return k_; }

 private:
  const Topology* topo_;
  int k_;
  std::vector<std::optional<std::vector<Route>>> cache_;
};

}  // namespace qkdnar
