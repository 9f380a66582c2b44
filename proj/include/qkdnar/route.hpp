#pragma once

#include <span>
#include <string>
#include <vector>

#include "qkdnar/topology.hpp"

namespace qkdnar {

// A simple directed path over physical links.
struct Route {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  double km = 0.0;

  // Throws ValidationError on repeated nodes or on a missing hop.
  static Route from_nodes(const Topology& topo, std::span<const NodeId> nodes);
  static Route from_links(const Topology& topo, std::span<const LinkId> links);

  NodeId src() const { return nodes.front(); }
  NodeId dst() const { return nodes.back(); }
  int hop_count() const { return static_cast<int>(links.size()); }
  int crossings() const { return static_cast<int>(nodes.size()) - 2; }
  bool empty() const { return links.empty(); }
  bool contains(LinkId e) const;

  // Node names joined by '-', e.g. "A-B-C".
  std::string label(const Topology& topo) const;

  bool operator==(const Route& o) const { return links == o.links; }
};

// Splits a route into one single-link route per hop (a trusted-relay chain
// with a relay at every intermediate node).
std::vector<Route> per_link_hops(const Topology& topo, const Route& route);

}  // namespace qkdnar
