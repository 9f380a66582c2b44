#pragma once

#include <string>
#include <vector>

#include "qkdnar/model.hpp"
#include "qkdnar/rng.hpp"
#include "qkdnar/routing.hpp"
#include "qkdnar/state.hpp"

namespace fx {

using namespace qkdnar;

// Path topology A-B-C-... with equal fiber lengths.
inline Topology chain(int n, double km = 10.0, int channels = 4, int modules = 10) {
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({std::string(1, static_cast<char>('A' + i)), modules});
  std::vector<Fiber> fibers;
  for (int i = 0; i + 1 < n; ++i) fibers.push_back({i, i + 1, km});
  return Topology(std::move(nodes), std::move(fibers), channels);
}

inline Topology ring(int n, double km = 10.0, int channels = 4, int modules = 10) {
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({std::string(1, static_cast<char>('A' + i)), modules});
  std::vector<Fiber> fibers;
  for (int i = 0; i < n; ++i) fibers.push_back({i, (i + 1) % n, km});
  return Topology(std::move(nodes), std::move(fibers), channels);
}

// Connected random graph: a spanning path in shuffled order plus extra
// fibers with probability `p_extra`.
inline Topology random_topology(Rng& rng, int n, double p_extra, int channels, int modules,
                                double km_lo = 5.0, double km_hi = 15.0) {
  std::vector<Node> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({std::string(1, static_cast<char>('A' + i)), modules});
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  std::vector<Fiber> fibers;
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (int i = 0; i + 1 < n; ++i) {
    fibers.push_back({order[i], order[i + 1], rng.uniform(km_lo, km_hi)});
    has[order[i]][order[i + 1]] = has[order[i + 1]][order[i]] = true;
  }
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!has[a][b] && rng.bernoulli(p_extra)) fibers.push_back({a, b, rng.uniform(km_lo, km_hi)});
  return Topology(std::move(nodes), std::move(fibers), channels);
}

inline Route route(const Topology& topo, std::initializer_list<NodeId> nodes) {
  std::vector<NodeId> v(nodes);
  return Route::from_nodes(topo, v);
}

inline Realization ob(const Topology& topo, int request, std::initializer_list<NodeId> nodes, int w = 0) {
  Realization r;
  r.request_id = request;
  r.kind = RealizationKind::OB;
  r.hops.push_back({route(topo, nodes), w});
  r.pair = NodePair(r.hops[0].route.src(), r.hops[0].route.dst());
  return r;
}

inline Realization qkp(int request, NodeId a, NodeId b, double amount) {
  Realization r;
  r.request_id = request;
  r.kind = RealizationKind::QKP;
  r.pair = NodePair(a, b);
  r.amount_kbslot = amount;
  r.delivered_kbps = amount;
  return r;
}

// A random slot of realizations on `topo`: OB lightpaths and TR chains over
// random simple routes, caching channels and QKP draws. Resources are not
// checked; the metric code does not need them.
inline std::vector<Realization> random_slot(Rng& rng, const Topology& topo, int count) {
  std::vector<Realization> out;
  RouteCache routes(topo, 4);
  for (int i = 0; i < count; ++i) {
    NodeId a = static_cast<NodeId>(rng.below(topo.node_count()));
    NodeId b = static_cast<NodeId>(rng.below(topo.node_count() - 1));
    if (b >= a) ++b;
    const auto& cands = routes.get(a, b);
    const int request = rng.bernoulli(0.15) ? -1 : i;
    const double roll = rng.uniform();
    if (cands.empty() || (request >= 0 && roll < 0.15)) {
      out.push_back(qkp(request < 0 ? i : request, a, b, 5.0));
      continue;
    }
    const Route& r = cands[rng.below(cands.size())];
    Realization x;
    x.request_id = request;
    x.pair = NodePair(a, b);
    if (roll < 0.6) {
      x.kind = RealizationKind::OB;
      x.hops.push_back({r, 0});
    } else {
      // Cut the route at random relays.
      x.kind = RealizationKind::TR;
      std::vector<NodeId> seg{r.nodes.front()};
      for (std::size_t k = 1; k < r.nodes.size(); ++k) {
        seg.push_back(r.nodes[k]);
        if (k + 1 == r.nodes.size() || rng.bernoulli(0.5)) {
          x.hops.push_back({Route::from_nodes(topo, seg), 0});
          seg = {r.nodes[k]};
        }
      }
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace fx
