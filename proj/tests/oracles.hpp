#pragma once

// Brute-force reference implementations. Deliberately naive and written
// without the library's helpers so a shared bug cannot hide in both.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "qkdnar/state.hpp"
#include "qkdnar/topology.hpp"

namespace oracle {

using qkdnar::LinkId;
using qkdnar::NodeId;
using qkdnar::Realization;
using qkdnar::Topology;

// Key-rate anchors copied by hand: 10/20/30/40/50 km -> 23/13/7/3.5/1.9.
inline double rate(double km) {
  static const double reach[] = {10, 20, 30, 40, 50};
  static const double kbps[] = {23, 13, 7, 3.5, 1.9};
  if (km <= 10) return 23;
  if (km > 50) return 0;
  for (int i = 0; i + 1 < 5; ++i) {
    if (km <= reach[i + 1]) {
      const double f = (km - reach[i]) / (reach[i + 1] - reach[i]);
      return kbps[i] + f * (kbps[i + 1] - kbps[i]);
    }
  }
  return kbps[4];
}

inline double ob_rate(double km, int crossed) { return rate(km) * std::pow(0.89, crossed); }

struct Path {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  double km = 0;
};

// Every simple directed path from src to dst, by exhaustive DFS over the
// link list (no adjacency index).
inline std::vector<Path> all_simple_paths(const Topology& topo, NodeId src, NodeId dst) {
  std::vector<Path> out;
  Path cur;
  cur.nodes.push_back(src);
  std::function<void()> dfs = [&] {
    const NodeId at = cur.nodes.back();
    if (at == dst) {
      out.push_back(cur);
      return;
    }
    for (LinkId e = 0; e < topo.link_count(); ++e) {
      const auto& l = topo.link(e);
      if (l.src != at) continue;
      if (std::find(cur.nodes.begin(), cur.nodes.end(), l.dst) != cur.nodes.end()) continue;
      cur.nodes.push_back(l.dst);
      cur.links.push_back(e);
      cur.km += l.km;
      dfs();
      cur.km -= l.km;
      cur.links.pop_back();
      cur.nodes.pop_back();
    }
  };
  dfs();
  std::sort(out.begin(), out.end(), [](const Path& a, const Path& b) {
    if (std::abs(a.km - b.km) > 1e-9) return a.km < b.km;
    return a.nodes < b.nodes;
  });
  return out;
}

// Lightpath segments of a slot: one per channel hop, tagged with the
// request it serves (-1 for caching channels).
struct Segment {
  int request = -1;
  std::vector<LinkId> links;
};

inline std::vector<Segment> segments(const std::vector<Realization>& slot) {
  std::vector<Segment> out;
  for (const auto& r : slot)
    if (r.kind != qkdnar::RealizationKind::QKP)
      for (const auto& h : r.hops) out.push_back({r.request_id, h.route.links});
  return out;
}

// Jamming on e: the attacked set grows by the downstream remainder of every
// segment that carries an attacked link. With `transitive` false only
// segments carrying e itself spread it; otherwise repeat to a fixpoint.
inline std::set<int> affected_by_link(const std::vector<Realization>& slot, LinkId e, bool transitive) {
  const auto segs = segments(slot);
  std::set<LinkId> attacked{e};
  for (bool grew = true; grew;) {
    grew = false;
    const std::set<LinkId> sources = transitive ? attacked : std::set<LinkId>{e};
    for (const auto& s : segs) {
      for (std::size_t i = 0; i < s.links.size(); ++i) {
        if (!sources.count(s.links[i])) continue;
        for (std::size_t j = i + 1; j < s.links.size(); ++j) grew |= attacked.insert(s.links[j]).second;
      }
    }
    if (!transitive) break;
  }
  std::set<int> hit;
  for (const auto& s : segs)
    if (s.request >= 0)
      for (LinkId l : s.links)
        if (attacked.count(l)) hit.insert(s.request);
  return hit;
}

// Route attack: every request with a channel link on the route.
inline std::set<int> affected_by_route(const std::vector<Realization>& slot, const std::vector<LinkId>& route) {
  std::set<int> hit;
  for (const auto& s : segments(slot))
    if (s.request >= 0)
      for (LinkId l : s.links)
        if (std::find(route.begin(), route.end(), l) != route.end()) hit.insert(s.request);
  return hit;
}

inline int max_nar_link(const Topology& topo, const std::vector<Realization>& slot, bool transitive) {
  int best = 0;
  for (LinkId e = 0; e < topo.link_count(); ++e)
    best = std::max(best, static_cast<int>(affected_by_link(slot, e, transitive).size()));
  return best;
}

inline int max_nar_route(const std::vector<Realization>& slot) {
  int best = 0;
  for (const auto& s : segments(slot)) best = std::max(best, static_cast<int>(affected_by_route(slot, s.links).size()));
  return best;
}

// Mean over links that carry any segment.
inline double avg_nar_link(const Topology& topo, const std::vector<Realization>& slot, bool transitive) {
  std::set<LinkId> used;
  for (const auto& s : segments(slot)) used.insert(s.links.begin(), s.links.end());
  if (used.empty()) return 0.0;
  double sum = 0;
  for (LinkId e = 0; e < topo.link_count(); ++e)
    if (used.count(e)) sum += static_cast<double>(affected_by_link(slot, e, transitive).size());
  return sum / static_cast<double>(used.size());
}

}  // namespace oracle
