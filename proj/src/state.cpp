#include "qkdnar/state.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace qkdnar {

std::string_view to_string(RealizationKind k) {
  switch (k) {
    case RealizationKind::OB: return "OB";
    case RealizationKind::TR: return "TR";
    case RealizationKind::QKP: return "QKP";
  }
  return "?";
}

std::string_view to_string(Refusal r) {
  switch (r) {
    case Refusal::None: return "none";
    case Refusal::NoWavelength: return "no wavelength";
    case Refusal::ModuleBudget: return "module budget";
    case Refusal::ZeroRate: return "zero rate";
    case Refusal::InsufficientKeys: return "insufficient keys";
    case Refusal::WavelengthTaken: return "wavelength exclusivity";
    case Refusal::BadRoute: return "route contiguity";
  }
  return "?";
}

double Realization::km() const {
  return std::accumulate(hops.begin(), hops.end(), 0.0,
                         [](double acc, const Hop& h) { return acc + h.route.km; });
}

std::string Realization::signature(const Topology& topo) const {
  std::string s(to_string(kind));
  s += ':';
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (i) s += '|';
    s += hops[i].route.label(topo);
  }
  return s;
}

KeyUnits to_units(double kb) { return std::llround(kb * 1e6); }
double from_units(KeyUnits u) { return static_cast<double>(u) / 1e6; }

KeyUnits NetworkState::Pool::balance() const {
  KeyUnits b = base;
  for (const auto& d : draws) b -= d.second;
  return b;
}

NetworkState::NetworkState(const Topology& topo, const KeyRateTable& rates,
                           double qkp_capacity_kbslot)
    : topo_(&topo),
      rates_(&rates),
      capacity_(to_units(qkp_capacity_kbslot)),
      channels_(topo.channels()),
      occupancy_(static_cast<std::size_t>(topo.link_count()) * topo.channels(), -1),
      modules_(topo.node_count(), 0) {}

int NetworkState::first_fit(const Route& route) const {
  for (int w = 0; w < channels_; ++w) {
    bool free = std::all_of(route.links.begin(), route.links.end(),
                            [&](LinkId e) { return occ(e, w) < 0; });
    if (free) return w;
  }
  return -1;
}

Allocation NetworkState::try_allocate_ob(int request_id, const Route& route) {
  if (route.empty()) return {std::nullopt, Refusal::BadRoute};
  Realization r;
  r.request_id = request_id;
  r.pair = NodePair(route.src(), route.dst());
  r.slot = slot_;
  r.kind = RealizationKind::OB;
  r.delivered_kbps = ob_route_rate(*rates_, route);
  if (r.delivered_kbps <= 0.0) return {std::nullopt, Refusal::ZeroRate};
  const int w = first_fit(route);
  if (w < 0) return {std::nullopt, Refusal::NoWavelength};
  r.hops.push_back({route, w});
  return install(std::move(r), false);
}

Allocation NetworkState::try_allocate_tr(int request_id, std::span<const Route> hops) {
  if (hops.empty()) return {std::nullopt, Refusal::BadRoute};
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (hops[i].empty()) return {std::nullopt, Refusal::BadRoute};
    if (i > 0 && hops[i].src() != hops[i - 1].dst()) return {std::nullopt, Refusal::BadRoute};
  }
  Realization r;
  r.request_id = request_id;
  r.pair = NodePair(hops.front().src(), hops.back().dst());
  r.slot = slot_;
  r.kind = RealizationKind::TR;
  r.delivered_kbps = tr_chain_rate(*rates_, hops);
  if (r.delivered_kbps <= 0.0) return {std::nullopt, Refusal::ZeroRate};
  for (const auto& h : hops) {
    const int w = first_fit(h);
    if (w < 0) return {std::nullopt, Refusal::NoWavelength};
    r.hops.push_back({h, w});
  }
  return install(std::move(r), false);
}

Allocation NetworkState::allocate_exact(const Realization& in) {
  if (!in.is_channel() || in.hops.empty()) return {std::nullopt, Refusal::BadRoute};
  Realization r = in;
  r.slot = slot_;
  for (std::size_t i = 0; i < r.hops.size(); ++i) {
    const auto& h = r.hops[i];
    if (h.route.empty()) return {std::nullopt, Refusal::BadRoute};
    if (i > 0 && h.route.src() != r.hops[i - 1].route.dst()) return {std::nullopt, Refusal::BadRoute};
    if (h.wavelength < 0 || h.wavelength >= channels_) return {std::nullopt, Refusal::NoWavelength};
  }
  if (r.kind == RealizationKind::OB && r.hops.size() != 1) return {std::nullopt, Refusal::BadRoute};
  r.pair = NodePair(r.hops.front().route.src(), r.hops.back().route.dst());
  std::vector<Route> routes;
  for (const auto& h : r.hops) routes.push_back(h.route);
  r.delivered_kbps = tr_chain_rate(*rates_, routes);
  if (r.delivered_kbps <= 0.0) return {std::nullopt, Refusal::ZeroRate};
  const bool keep_id = r.id >= 0 && !active_.count(r.id);
  return install(std::move(r), keep_id);
}

Allocation NetworkState::install(Realization r, bool keep_id) {
  // Wavelengths: every (link, wavelength) must be free, including against
  // other hops of the same realization.
  std::vector<std::pair<LinkId, int>> cells;
  for (const auto& h : r.hops) {
    for (LinkId e : h.route.links) {
      if (occ(e, h.wavelength) >= 0) return {std::nullopt, Refusal::WavelengthTaken};
      cells.emplace_back(e, h.wavelength);
    }
  }
  std::sort(cells.begin(), cells.end());
  if (std::adjacent_find(cells.begin(), cells.end()) != cells.end())
    return {std::nullopt, Refusal::WavelengthTaken};

  std::vector<int> extra(modules_.size(), 0);
  for (const auto& h : r.hops) {
    ++extra[h.route.src()];
    ++extra[h.route.dst()];
  }
  for (std::size_t n = 0; n < extra.size(); ++n)
    if (modules_[n] + extra[n] > topo_->node(static_cast<NodeId>(n)).modules)
      return {std::nullopt, Refusal::ModuleBudget};

  if (!keep_id) r.id = next_id_;
  next_id_ = std::max(next_id_, r.id + 1);
  for (const auto& [e, w] : cells) occ(e, w) = r.id;
  for (std::size_t n = 0; n < extra.size(); ++n) modules_[n] += extra[n];
  active_.emplace(r.id, r);
  return {std::move(r), Refusal::None};
}

Allocation NetworkState::draw_qkp(int request_id, NodePair pair, double amount_kbslot) {
  if (!(amount_kbslot > 0.0)) throw std::invalid_argument("draw_qkp: amount must be > 0");
  const KeyUnits amount = to_units(amount_kbslot);
  auto it = pools_.find(pair);
  if (it == pools_.end() || it->second.balance() < amount)
    return {std::nullopt, Refusal::InsufficientKeys};
  Realization r;
  r.id = next_id_++;
  r.request_id = request_id;
  r.pair = pair;
  r.slot = slot_;
  r.kind = RealizationKind::QKP;
  r.amount_kbslot = from_units(amount);
  r.delivered_kbps = r.amount_kbslot;
  it->second.draws.emplace_back(r.id, amount);
  active_.emplace(r.id, r);
  return {std::move(r), Refusal::None};
}

double NetworkState::deposit_qkp(NodePair pair, double amount_kbslot) {
  if (amount_kbslot < 0.0) throw std::invalid_argument("deposit_qkp: negative amount");
  auto& pool = pools_[pair];
  const KeyUnits room = std::max<KeyUnits>(0, capacity_ - pool.balance());
  const KeyUnits stored = std::min(to_units(amount_kbslot), room);
  pool.base += stored;
  pool.deposited += stored;
  return from_units(stored);
}

void NetworkState::release(const Realization& r) {
  auto it = active_.find(r.id);
  if (it == active_.end()) throw std::invalid_argument("release: unknown realization");
  const Realization& held = it->second;
  if (held.kind == RealizationKind::QKP) {
    auto& draws = pools_.at(held.pair).draws;
    std::erase_if(draws, [&](const auto& d) { return d.first == held.id; });
  } else {
    for (const auto& h : held.hops) {
      for (LinkId e : h.route.links) occ(e, h.wavelength) = -1;
      --modules_[h.route.src()];
      --modules_[h.route.dst()];
    }
  }
  active_.erase(it);
}

void NetworkState::advance_slot() {
  for (auto& [pair, pool] : pools_) {
    KeyUnits drawn = 0;
    for (const auto& d : pool.draws) drawn += d.second;
    const KeyUnits closing = pool.balance();
    ledger_.push_back({slot_, pair, from_units(pool.opening), from_units(pool.deposited),
                       from_units(drawn), from_units(closing)});
    pool = Pool{closing, closing, 0, {}};
  }
  std::fill(occupancy_.begin(), occupancy_.end(), -1);
  std::fill(modules_.begin(), modules_.end(), 0);
  active_.clear();
  ++slot_;
}

int NetworkState::occupant(LinkId e, int wavelength) const { return occ(e, wavelength); }

int NetworkState::free_wavelengths(LinkId e) const {
  int n = 0;
  for (int w = 0; w < channels_; ++w) n += occ(e, w) < 0;
  return n;
}

int NetworkState::total_modules_used() const {
  return std::accumulate(modules_.begin(), modules_.end(), 0);
}

double NetworkState::qkp_balance(NodePair pair) const {
  auto it = pools_.find(pair);
  return it == pools_.end() ? 0.0 : from_units(it->second.balance());
}

double NetworkState::qkp_total() const {
  KeyUnits total = 0;
  for (const auto& [pair, pool] : pools_) total += pool.balance();
  return from_units(total);
}

bool NetworkState::same_resources(const NetworkState& o) const {
  if (slot_ != o.slot_ || occupancy_ != o.occupancy_ || modules_ != o.modules_) return false;
  auto nonzero = [](const std::map<NodePair, Pool>& pools) {
    std::vector<std::tuple<NodePair, KeyUnits, KeyUnits, KeyUnits>> out;
    for (const auto& [pair, p] : pools)
      if (p.base || p.opening || p.deposited || !p.draws.empty())
        out.emplace_back(pair, p.base, p.opening, p.balance());
    return out;
  };
  if (nonzero(pools_) != nonzero(o.pools_)) return false;
  if (active_.size() != o.active_.size()) return false;
  for (const auto& [id, r] : active_)
    if (!o.active_.count(id)) return false;
  return true;
}

}  // namespace qkdnar
