#include "qkdnar/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qkdnar/errors.hpp"

namespace qkdnar {

KeyRateTable::KeyRateTable()
    : KeyRateTable({{10.0, 23.0}, {20.0, 13.0}, {30.0, 7.0}, {40.0, 3.5}, {50.0, 1.9}}, 0.11) {}

KeyRateTable::KeyRateTable(std::vector<RateAnchor> anchors, double ob_penalty_per_node)
    : anchors_(std::move(anchors)), ob_penalty_(ob_penalty_per_node) {
  if (anchors_.empty()) throw ValidationError("key_rate_table.anchors: empty");
  for (std::size_t i = 0; i < anchors_.size(); ++i) {
    if (!(anchors_[i].reach_km > 0.0) || !(anchors_[i].rate_kbps > 0.0))
      throw ValidationError("key_rate_table.anchors: values must be > 0");
    if (i > 0 && (anchors_[i].reach_km <= anchors_[i - 1].reach_km ||
                  anchors_[i].rate_kbps >= anchors_[i - 1].rate_kbps))
      throw ValidationError(
          "key_rate_table.anchors: reach must increase and rate decrease strictly");
  }
  if (!(ob_penalty_ > 0.0 && ob_penalty_ < 1.0))
    throw ValidationError("key_rate_table.ob_penalty: must be in (0, 1)");
}

double KeyRateTable::rate_for_distance(double km) const {
  if (km < 0.0 || std::isnan(km)) throw std::invalid_argument("rate_for_distance: negative distance");
  if (km <= anchors_.front().reach_km) return anchors_.front().rate_kbps;
  if (km > anchors_.back().reach_km) return 0.0;
  auto hi = std::lower_bound(anchors_.begin(), anchors_.end(), km,
                             [](const RateAnchor& a, double d) { return a.reach_km < d; });
  if (hi->reach_km == km) return hi->rate_kbps;
  auto lo = hi - 1;
  const double frac = (km - lo->reach_km) / (hi->reach_km - lo->reach_km);
  return lo->rate_kbps + frac * (hi->rate_kbps - lo->rate_kbps);
}

double ob_route_rate(const KeyRateTable& table, const Route& route) {
  if (route.empty()) throw std::invalid_argument("ob_route_rate: empty route");
  const double base = table.rate_for_distance(route.km);
  if (base == 0.0) return 0.0;
  return base * std::pow(1.0 - table.ob_penalty_per_node(), route.crossings());
}

double tr_chain_rate(const KeyRateTable& table, std::span<const Route> hops) {
  if (hops.empty()) throw std::invalid_argument("tr_chain_rate: empty chain");
  double rate = ob_route_rate(table, hops.front());
  for (std::size_t i = 1; i < hops.size(); ++i) {
    if (hops[i].src() != hops[i - 1].dst())
      throw std::invalid_argument("tr_chain_rate: hops do not concatenate");
    rate = std::min(rate, ob_route_rate(table, hops[i]));
  }
  return rate;
}

}  // namespace qkdnar
