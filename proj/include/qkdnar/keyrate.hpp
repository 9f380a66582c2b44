#pragma once

#include <span>
#include <utility>
#include <vector>

#include "qkdnar/route.hpp"

namespace qkdnar {

struct RateAnchor {
  double reach_km = 0.0;
  double rate_kbps = 0.0;

  bool operator==(const RateAnchor&) const = default;
};

// Secret-key rate versus reach. Piecewise linear between anchors, flat at the
// first anchor's rate below its reach, zero past max_reach_km.
class KeyRateTable {
 public:
  KeyRateTable();  // 10/20/30/40/50 km -> 23/13/7/3.5/1.9 kb/s, 11% per node
  KeyRateTable(std::vector<RateAnchor> anchors, double ob_penalty_per_node);

  double rate_for_distance(double km) const;

  const std::vector<RateAnchor>& anchors() const { return anchors_; }
  double ob_penalty_per_node() const { return ob_penalty_; }
  double max_reach_km() const { return anchors_.back().reach_km; }
  double max_rate_kbps() const { return anchors_.front().rate_kbps; }

  bool operator==(const KeyRateTable&) const = default;

 private:
  std::vector<RateAnchor> anchors_;
  double ob_penalty_ = 0.11;
};

// Optical-bypass lightpath: rate at the route length, reduced by the bypass
// penalty once per intermediate node.
double ob_route_rate(const KeyRateTable& table, const Route& route);

// Trusted-relay chain: the bottleneck hop. Throws std::invalid_argument on an
// empty chain.
double tr_chain_rate(const KeyRateTable& table, std::span<const Route> hops);

}  // namespace qkdnar
