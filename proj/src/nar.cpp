#include "qkdnar/nar.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qkdnar {

std::string_view to_string(Semantics s) { return s == Semantics::Link ? "link" : "route"; }
std::string_view to_string(Propagation p) {
  return p == Propagation::OneLevel ? "one" : "transitive";
}

NarEngine::NarEngine(const Topology& topo, std::span<const Realization> slot_realizations,
                     Propagation propagation)
    : topo_(&topo),
      propagation_(propagation),
      on_link_(topo.link_count()),
      link_requests_(topo.link_count()) {
  for (const auto& r : slot_realizations) {
    if (!r.is_channel()) continue;
    for (const auto& h : r.hops) {
      const int seg = static_cast<int>(segments_.size());
      segments_.push_back(&h.route);
      for (int pos = 0; pos < h.route.hop_count(); ++pos) {
        const LinkId e = h.route.links[pos];
        on_link_[e].emplace_back(seg, pos);
        if (!r.is_cache()) link_requests_[e].push_back(r.request_id);
      }
      if (std::none_of(used_routes_.begin(), used_routes_.end(),
                       [&](const Route& u) { return u == h.route; }))
        used_routes_.push_back(h.route);
    }
  }
  for (LinkId e = 0; e < topo.link_count(); ++e) {
    auto& reqs = link_requests_[e];
    std::sort(reqs.begin(), reqs.end());
    reqs.erase(std::unique(reqs.begin(), reqs.end()), reqs.end());
    if (!on_link_[e].empty()) used_links_.push_back(e);
  }
}

std::vector<int> NarEngine::requests_on(const std::vector<bool>& links) const {
  std::vector<int> out;
  for (LinkId e = 0; e < static_cast<LinkId>(links.size()); ++e)
    if (links[e]) out.insert(out.end(), link_requests_[e].begin(), link_requests_[e].end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> NarEngine::affected_by_link(LinkId e) const {
  if (e < 0 || e >= topo_->link_count()) throw std::invalid_argument("affected_by_link: unknown link");
  std::vector<bool> jammed(topo_->link_count(), false);
  jammed[e] = true;
  if (propagation_ == Propagation::OneLevel) {
    for (const auto& [seg, pos] : on_link_[e]) {
      const auto& links = segments_[seg]->links;
      for (std::size_t i = pos + 1; i < links.size(); ++i) jammed[links[i]] = true;
    }
  } else {
    // Each segment is entered at its earliest jammed link; iterate until no
    // segment adds a new link.
    bool grew = true;
    while (grew) {
      grew = false;
      for (const Route* seg : segments_) {
        const auto& links = seg->links;
        auto first = std::find_if(links.begin(), links.end(), [&](LinkId l) { return jammed[l]; });
        if (first == links.end()) continue;
        for (auto it = first + 1; it != links.end(); ++it) {
          if (!jammed[*it]) {
            jammed[*it] = true;
            grew = true;
          }
        }
      }
    }
  }
  return requests_on(jammed);
}

std::vector<int> NarEngine::affected_by_route(const Route& route) const {
  if (std::none_of(used_routes_.begin(), used_routes_.end(),
                   [&](const Route& u) { return u == route; }))
    throw std::invalid_argument("affected_by_route: route not in use");
  std::vector<bool> hit(topo_->link_count(), false);
  for (LinkId e : route.links) hit[e] = true;
  return requests_on(hit);
}

int NarEngine::max_nar(Semantics s) const {
  std::size_t best = 0;
  if (s == Semantics::Link) {
    for (LinkId e : used_links_) best = std::max(best, affected_by_link(e).size());
  } else {
    for (const auto& r : used_routes_) best = std::max(best, affected_by_route(r).size());
  }
  return static_cast<int>(best);
}

double NarEngine::avg_nar(Semantics s) const {
  std::size_t total = 0;
  std::size_t count = 0;
  if (s == Semantics::Link) {
    for (LinkId e : used_links_) total += affected_by_link(e).size();
    count = used_links_.size();
  } else {
    for (const auto& r : used_routes_) total += affected_by_route(r).size();
    count = used_routes_.size();
  }
  return count == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(count);
}

std::vector<int> affected_by_link(const Topology& topo, std::span<const Realization> slot,
                                  LinkId e, Propagation p) {
  return NarEngine(topo, slot, p).affected_by_link(e);
}

std::vector<int> affected_by_route(const Topology& topo, std::span<const Realization> slot,
                                   const Route& route) {
  return NarEngine(topo, slot).affected_by_route(route);
}

int max_nar(const Topology& topo, std::span<const Realization> slot, Semantics s, Propagation p) {
  return NarEngine(topo, slot, p).max_nar(s);
}

double avg_nar(const Topology& topo, std::span<const Realization> slot, Semantics s,
               Propagation p) {
  return NarEngine(topo, slot, p).avg_nar(s);
}

int NarReport::objective() const {
  return std::accumulate(slots.begin(), slots.end(), 0,
                         [](int acc, const SlotNar& s) { return acc + s.max_nar; });
}

NarReport evaluate_plan(const Topology& topo, std::span<const Realization> plan, int horizon,
                        Semantics s, Propagation p) {
  NarReport report{s, p, {}};
  for (int t = 0; t < horizon; ++t) {
    std::vector<Realization> slot;
    for (const auto& r : plan)
      if (r.slot == t) slot.push_back(r);
    NarEngine engine(topo, slot, p);
    SlotNar sn;
    sn.slot = t;
    sn.max_nar = engine.max_nar(s);
    sn.avg_nar = engine.avg_nar(s);
    if (s == Semantics::Link) {
      for (LinkId e : engine.used_links())
        sn.targets.push_back({topo.link_label(e), engine.affected_by_link(e)});
    } else {
      for (const auto& r : engine.used_routes())
        sn.targets.push_back({r.label(topo), engine.affected_by_route(r)});
    }
    report.slots.push_back(std::move(sn));
  }
  return report;
}

}  // namespace qkdnar
