#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkdnar/state.hpp"

namespace qkdnar {

// Attack targets: single directed links (jamming rides bypassed lightpaths
// downstream) or whole used routes (the ILP's route-attack form).
enum class Semantics { Link, Route };

// OneLevel: only lightpaths through the attacked link carry the jamming on.
// Transitive: lightpaths entered by propagated jamming propagate it further.
enum class Propagation { OneLevel, Transitive };

std::string_view to_string(Semantics s);
std::string_view to_string(Propagation p);

// Affected-request computation over the realizations of one slot. Every
// channel hop is a lightpath segment: jamming entering a segment reaches its
// downstream links and stops at the segment end (a relay regenerates). QKP
// draws carry no physical links and are never affected.
class NarEngine {
 public:
  NarEngine(const Topology& topo, std::span<const Realization> slot_realizations,
            Propagation propagation = Propagation::OneLevel);

  // Sorted request ids. Throws std::invalid_argument for an unknown link.
  std::vector<int> affected_by_link(LinkId e) const;

  // Throws std::invalid_argument when no segment uses exactly this route.
  std::vector<int> affected_by_route(const Route& route) const;

  // Links carrying at least one channel segment, ascending.
  const std::vector<LinkId>& used_links() const { return used_links_; }

  // Distinct segment routes in first-use order.
  const std::vector<Route>& used_routes() const { return used_routes_; }

  int max_nar(Semantics s) const;
  double avg_nar(Semantics s) const;

 private:
  std::vector<int> requests_on(const std::vector<bool>& links) const;

  const Topology* topo_;
  Propagation propagation_;
  std::vector<const Route*> segments_;
  std::vector<std::vector<std::pair<int, int>>> on_link_;  // link -> (segment, position)
  std::vector<std::vector<int>> link_requests_;            // link -> request ids
  std::vector<LinkId> used_links_;
  std::vector<Route> used_routes_;
};

std::vector<int> affected_by_link(const Topology& topo, std::span<const Realization> slot,
                                  LinkId e, Propagation p = Propagation::OneLevel);
std::vector<int> affected_by_route(const Topology& topo, std::span<const Realization> slot,
                                   const Route& route);
int max_nar(const Topology& topo, std::span<const Realization> slot, Semantics s,
            Propagation p = Propagation::OneLevel);
double avg_nar(const Topology& topo, std::span<const Realization> slot, Semantics s,
               Propagation p = Propagation::OneLevel);

struct TargetNar {
  std::string target;  // "u>v" or "A-B-C"
  std::vector<int> requests;
};

struct SlotNar {
  int slot = 0;
  int max_nar = 0;
  double avg_nar = 0.0;
  std::vector<TargetNar> targets;  // used links or used routes
};

struct NarReport {
  Semantics semantics = Semantics::Link;
  Propagation propagation = Propagation::OneLevel;
  std::vector<SlotNar> slots;

  int objective() const;  // sum of per-slot maxNAR
};

// `plan` may span several slots; realizations are grouped by their slot.
NarReport evaluate_plan(const Topology& topo, std::span<const Realization> plan, int horizon,
                        Semantics s, Propagation p = Propagation::OneLevel);

}  // namespace qkdnar
