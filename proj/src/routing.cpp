#include "qkdnar/routing.hpp"

#include <algorithm>
#include <cmath>

#include "qkdnar/errors.hpp"

namespace qkdnar {

namespace {
constexpr double kTieKm = 1e-9;
}

// ---------------------------------------------------------------------------
// Route

Route Route::from_nodes(const Topology& topo, std::span<const NodeId> nodes) {
  if (nodes.size() < 2) throw ValidationError("route: needs at least two nodes");
  Route r;
  r.nodes.assign(nodes.begin(), nodes.end());
  std::vector<bool> seen(topo.node_count(), false);
  for (NodeId n : nodes) {
    if (n < 0 || n >= topo.node_count()) throw ValidationError("route: node out of range");
    if (seen[n]) throw ValidationError("route: repeats node " + topo.node(n).name);
    seen[n] = true;
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto e = topo.find_link(nodes[i], nodes[i + 1]);
    if (!e)
      throw ValidationError("route: no link " + topo.node(nodes[i]).name + ">" +
                            topo.node(nodes[i + 1]).name);
    r.links.push_back(*e);
    r.km += topo.link(*e).km;
  }
  return r;
}

Route Route::from_links(const Topology& topo, std::span<const LinkId> links) {
  if (links.empty()) throw ValidationError("route: no links");
  std::vector<NodeId> nodes{topo.link(links.front()).src};
  for (std::size_t i = 0; i < links.size(); ++i) {
    const auto& l = topo.link(links[i]);
    if (l.src != nodes.back()) throw ValidationError("route: non-contiguous links");
    nodes.push_back(l.dst);
  }
  return from_nodes(topo, nodes);
}

bool Route::contains(LinkId e) const {
  return std::find(links.begin(), links.end(), e) != links.end();
}

std::string Route::label(const Topology& topo) const {
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += '-';
    s += topo.node(nodes[i]).name;
  }
  return s;
}

std::vector<Route> per_link_hops(const Topology& topo, const Route& route) {
  std::vector<Route> hops;
  hops.reserve(route.links.size());
  for (LinkId e : route.links) hops.push_back(Route::from_links(topo, std::span(&e, 1)));
  return hops;
}

bool route_less(const Route& a, const Route& b) {
  if (std::abs(a.km - b.km) > kTieKm) return a.km < b.km;
  return a.nodes < b.nodes;
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

// Dijkstra whose labels are (distance, node sequence) so that equal-length
// paths resolve to the lexicographically smallest one.
std::optional<Route> shortest_route(const Topology& topo, NodeId src, NodeId dst,
                                    const std::vector<bool>& banned_node,
                                    const std::vector<bool>& banned_link) {
  const int n = topo.node_count();
  struct Label {
    double km = 0.0;
    std::vector<NodeId> seq;
    bool reached = false;
    bool done = false;
  };
  std::vector<Label> lab(n);
  lab[src].reached = true;
  lab[src].seq = {src};
  auto better = [](const Label& a, double km, const std::vector<NodeId>& seq) {
    if (!a.reached) return true;
    if (std::abs(km - a.km) > kTieKm) return km < a.km;
    return seq < a.seq;
  };
  for (;;) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      if (!lab[v].reached || lab[v].done) continue;
      if (u < 0 || better(lab[u], lab[v].km, lab[v].seq)) u = v;
    }
    if (u < 0) return std::nullopt;
    lab[u].done = true;
    if (u == dst) break;
    for (LinkId e : topo.out_links(u)) {
      if (banned_link[e]) continue;
      const auto& l = topo.link(e);
      if (banned_node[l.dst] || lab[l.dst].done) continue;
      auto seq = lab[u].seq;
      seq.push_back(l.dst);
      const double km = lab[u].km + l.km;
      if (better(lab[l.dst], km, seq)) {
        lab[l.dst].km = km;
        lab[l.dst].seq = std::move(seq);
        lab[l.dst].reached = true;
      }
    }
  }
  return Route::from_nodes(topo, lab[dst].seq);
}

}  // namespace

std::vector<Route> k_shortest_routes(const Topology& topo, NodeId src, NodeId dst, int k) {
  if (src == dst) throw std::invalid_argument("k_shortest_routes: src == dst");
  if (k < 1) throw std::invalid_argument("k_shortest_routes: k must be >= 1");
  const int n = topo.node_count();
  std::vector<bool> no_nodes(n, false), no_links(topo.link_count(), false);
  std::vector<Route> found;
  auto first = shortest_route(topo, src, dst, no_nodes, no_links);
  if (!first) return found;
  found.push_back(std::move(*first));

  std::vector<Route> candidates;  // kept sorted by route_less
  auto known = [&](const Route& r) {
    auto same = [&](const Route& x) { return x.nodes == r.nodes; };
    return std::any_of(found.begin(), found.end(), same) ||
           std::any_of(candidates.begin(), candidates.end(), same);
  };

  while (static_cast<int>(found.size()) < k) {
    const Route prev = found.back();
    for (std::size_t i = 0; i + 1 < prev.nodes.size(); ++i) {
      const NodeId spur = prev.nodes[i];
      std::vector<bool> ban_node(n, false), ban_link(topo.link_count(), false);
      for (std::size_t j = 0; j < i; ++j) ban_node[prev.nodes[j]] = true;
      for (const auto& p : found) {
        if (p.nodes.size() > i + 1 &&
            std::equal(prev.nodes.begin(), prev.nodes.begin() + i + 1, p.nodes.begin()))
          ban_link[p.links[i]] = true;
      }
      auto tail = shortest_route(topo, spur, dst, ban_node, ban_link);
      if (!tail) continue;
      std::vector<NodeId> seq(prev.nodes.begin(), prev.nodes.begin() + i);
      seq.insert(seq.end(), tail->nodes.begin(), tail->nodes.end());
      Route r = Route::from_nodes(topo, seq);
      if (known(r)) continue;
      candidates.insert(std::upper_bound(candidates.begin(), candidates.end(), r, route_less),
                        std::move(r));
    }
    if (candidates.empty()) break;
    found.push_back(std::move(candidates.front()));
    candidates.erase(candidates.begin());
  }
  return found;
}

std::optional<Route> dfs_first_route(const Topology& topo, NodeId src, NodeId dst,
                                     double max_km) {
  if (src == dst) throw std::invalid_argument("dfs_first_route: src == dst");
  std::optional<std::vector<NodeId>> fallback;
  std::vector<NodeId> path{src};
  std::vector<bool> on_path(topo.node_count(), false);
  on_path[src] = true;

  // Returns true once a route within max_km is found (left in `path`).
  auto dfs = [&](auto&& self, NodeId u, double km) -> bool {
    for (LinkId e : topo.out_links(u)) {
      const auto& l = topo.link(e);
      if (on_path[l.dst]) continue;
      const double next_km = km + l.km;
      // Once a fallback exists only routes within reach are still useful.
      if (fallback && next_km > max_km + kTieKm) continue;
      path.push_back(l.dst);
      if (l.dst == dst) {
        if (next_km <= max_km + kTieKm) return true;
        if (!fallback) fallback = path;
      } else {
        on_path[l.dst] = true;
        if (self(self, l.dst, next_km)) return true;
        on_path[l.dst] = false;
      }
      path.pop_back();
    }
    return false;
  };

  if (dfs(dfs, src, 0.0)) return Route::from_nodes(topo, path);
  if (fallback) return Route::from_nodes(topo, *fallback);
  return std::nullopt;
}

std::vector<Route> enumerate_phi(const Topology& topo, NodeId src, NodeId dst, int max_routes,
                                 double max_km) {
  if (max_routes < 1) throw std::invalid_argument("enumerate_phi: max_routes must be >= 1");
  auto routes = k_shortest_routes(topo, src, dst, max_routes);
  std::erase_if(routes, [&](const Route& r) { return r.km > max_km + kTieKm; });
  return routes;
}

const std::vector<Route>& RouteCache::get(NodeId src, NodeId dst) {
  const int n = topo_->node_count();
  if (cache_.empty()) cache_.resize(static_cast<std::size_t>(n) * n);
  auto& slot = cache_[static_cast<std::size_t>(src) * n + dst];
  if (!slot) slot = k_shortest_routes(*topo_, src, dst, k_);
  return *slot;
}

}  // namespace qkdnar
