#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "qkdnar/errors.hpp"
#include "solve_internal.hpp"

namespace qkdnar {

int SolveResult::unserved_total() const {
  int n = 0;
  for (const auto& s : slots) n += static_cast<int>(s.unserved.size());
  return n;
}

double SolveResult::mean_modules_avg() const {
  if (slots.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : slots) total += s.modules_avg;
  return total / static_cast<double>(slots.size());
}

std::vector<ChannelMode> modes_for(const Architecture& arch, const Route& route) {
  if (route.hop_count() == 1) return {arch.allows_ob() ? ChannelMode::OB : ChannelMode::TR};
  std::vector<ChannelMode> modes;
  if (arch.allows_ob()) modes.push_back(ChannelMode::OB);
  if (arch.allows_tr()) modes.push_back(ChannelMode::TR);
  return modes;
}

// ---------------------------------------------------------------------------
// SlotPlan

SlotPlan::SlotPlan(const Scenario& scenario, int slot) : slot_(slot) {
  for (const auto& r : scenario.requests)
    if (r.active(slot)) active_.push_back(&r);
  std::sort(active_.begin(), active_.end(),
            [](const Request* a, const Request* b) { return a->id < b->id; });
}

const Service* SlotPlan::find(int request_id) const {
  auto it = services_.find(request_id);
  return it == services_.end() ? nullptr : &it->second;
}

bool SlotPlan::served(const Request& r) const {
  const Service* s = find(r.id);
  if (!s) return false;
  double got = 0.0;
  if (s->channel) got += s->channel->delivered_kbps;
  if (s->draw) got += s->draw->amount_kbslot;
  return got >= r.rate_kbps - kRateEps;
}

int SlotPlan::unserved_count() const {
  int n = 0;
  for (const Request* r : active_) n += !served(*r);
  return n;
}

std::vector<Realization> SlotPlan::flatten() const {
  std::vector<Realization> out;
  for (const auto& [id, s] : services_) {
    if (s.channel) out.push_back(*s.channel);
    if (s.draw) out.push_back(*s.draw);
  }
  out.insert(out.end(), cache_.begin(), cache_.end());
  return out;
}

Score score_slot(const Topology& topo, const SlotPlan& plan, const NetworkState& state,
                 const SolveOptions& opts) {
  const auto realizations = plan.flatten();
  NarEngine engine(topo, realizations, opts.propagation);
  return {plan.unserved_count(), engine.max_nar(opts.semantics), engine.avg_nar(opts.semantics),
          state.total_modules_used()};
}

// ---------------------------------------------------------------------------
// Allocation helpers

Allocation try_channel(NetworkState& state, int request_id, const Route& route, ChannelMode mode) {
  if (mode == ChannelMode::OB) return state.try_allocate_ob(request_id, route);
  const auto hops = per_link_hops(state.topology(), route);
  return state.try_allocate_tr(request_id, hops);
}

Refusal serve_with_channel(NetworkState& state, SlotPlan& plan, const Request& req,
                           const Route& route, ChannelMode mode) {
  auto alloc = try_channel(state, req.id, route, mode);
  if (!alloc) return alloc.refusal;
  Service& svc = plan.service(req.id);
  const double shortfall = req.rate_kbps - alloc->delivered_kbps;
  if (shortfall > kRateEps) {
    auto draw = state.draw_qkp(req.id, req.pair(), shortfall);
    if (!draw) {
      state.release(*alloc);
      return Refusal::InsufficientKeys;
    }
    svc.draw = std::move(draw.realization);
  }
  svc.channel = std::move(alloc.realization);
  return Refusal::None;
}

int serve_from_pool(NetworkState& state, SlotPlan& plan) {
  int n = 0;
  for (const Request* r : plan.active()) {
    if (plan.served(*r)) continue;
    auto draw = state.draw_qkp(r->id, r->pair(), r->rate_kbps);
    if (!draw) continue;
    plan.service(r->id).draw = std::move(draw.realization);
    ++n;
  }
  return n;
}

double settle_slot(const Scenario& scenario, NetworkState& state,
                   std::span<const Realization> slot_realizations) {
  std::map<int, double> got;  // request id -> kb delivered this slot
  std::map<NodePair, double> offered;
  for (const auto& r : slot_realizations) {
    if (r.is_cache()) {
      if (r.is_channel()) offered[r.pair] += r.delivered_kbps;
    } else {
      got[r.request_id] += r.is_channel() ? r.delivered_kbps : r.amount_kbslot;
    }
  }
  for (const auto& [id, amount] : got) {
    auto it = std::find_if(scenario.requests.begin(), scenario.requests.end(),
                           [&](const Request& q) { return q.id == id; });
    if (it == scenario.requests.end()) continue;
    const double surplus = amount - it->rate_kbps;
    if (surplus > 0.0) offered[it->pair()] += surplus;
  }
  double stored = 0.0;
  for (const auto& [pair, amount] : offered)
    if (amount > 0.0) stored += state.deposit_qkp(pair, amount);
  return stored;
}

// ---------------------------------------------------------------------------
// Result assembly

namespace detail {

void close_slot(const Scenario& scenario, NetworkState& state, const SlotPlan& plan,
                SolveResult& result) {
  const auto realizations = plan.flatten();
  settle_slot(scenario, state, realizations);
  SlotSummary sum;
  sum.slot = plan.slot();
  for (const Request* r : plan.active()) (plan.served(*r) ? sum.served : sum.unserved).push_back(r->id);
  const auto& topo = scenario.topology;
  for (NodeId n = 0; n < topo.node_count(); ++n) sum.modules_per_node.push_back(state.modules_used(n));
  sum.modules_avg = topo.node_count() == 0
                        ? 0.0
                        : static_cast<double>(state.total_modules_used()) / topo.node_count();
  sum.qkp_total_kbslot = state.qkp_total();
  result.plan.insert(result.plan.end(), realizations.begin(), realizations.end());
  result.slots.push_back(std::move(sum));
  state.advance_slot();
}

void finalize(const Scenario& scenario, const NetworkState& state, const SolveOptions& opts,
              SolveResult& result) {
  result.nar = evaluate_plan(scenario.topology, result.plan, scenario.horizon, opts.semantics,
                             opts.propagation);
  for (std::size_t t = 0; t < result.slots.size(); ++t) {
    result.slots[t].max_nar = result.nar.slots[t].max_nar;
    result.slots[t].avg_nar = result.nar.slots[t].avg_nar;
  }
  result.ledger = state.ledger();
  const int n = scenario.topology.node_count();
  result.modules_avg_per_node.assign(n, 0.0);
  for (const auto& s : result.slots)
    for (int i = 0; i < n; ++i) result.modules_avg_per_node[i] += s.modules_per_node[i];
  if (!result.slots.empty())
    for (auto& v : result.modules_avg_per_node) v /= static_cast<double>(result.slots.size());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Replay

SolveResult replay_plan(const Scenario& scenario, std::span<const Realization> plan,
                        const SolveOptions& opts) {
  detail::Stopwatch clock;
  const auto& topo = scenario.topology;
  NetworkState state(topo, scenario.key_rates, scenario.qkp_capacity_kbslot);
  SolveResult result;
  result.solver = "replay";

  for (const auto& r : plan)
    if (r.slot < 0 || r.slot >= scenario.horizon)
      throw ValidationError("slot range: realization outside the horizon");

  for (int t = 0; t < scenario.horizon; ++t) {
    SlotPlan slot_plan(scenario, t);
    auto fail = [&](std::string_view invariant, const std::string& detail) {
      throw ValidationError(std::string(invariant) + ": slot " + std::to_string(t) + ", " + detail);
    };
    for (const auto& r : plan) {
      if (r.slot != t) continue;
      const std::string who =
          r.is_cache() ? "caching channel" : "request " + std::to_string(r.request_id);
      const Request* req = nullptr;
      if (!r.is_cache()) {
        for (const Request* a : slot_plan.active())
          if (a->id == r.request_id) req = a;
        if (!req) fail("request activity", who + " is not active in this slot");
      }
      if (r.is_channel()) {
        if (r.hops.empty()) fail("route contiguity", who + " has no hops");
        const NodePair ends(r.hops.front().route.src(), r.hops.back().route.dst());
        if (req && ends != req->pair()) fail("request endpoints", who + " channel ends elsewhere");
        auto alloc = state.allocate_exact(r);
        if (!alloc) fail(to_string(alloc.refusal), who);
        if (req) {
          auto& svc = slot_plan.service(req->id);
          if (svc.channel) fail("single channel", who + " has two channel realizations");
          svc.channel = std::move(alloc.realization);
        } else {
          slot_plan.cache().push_back(std::move(*alloc.realization));
        }
      } else {
        if (r.is_cache()) fail("qkp draw", "draw without a request");
        if (NodePair(req->src, req->dst) != r.pair) fail("request endpoints", who + " draws another pair");
        auto& svc = slot_plan.service(req->id);
        if (svc.draw) fail("single draw", who + " draws twice");
        if (!(r.amount_kbslot > 0.0)) fail("qkp draw", who + " draws a non-positive amount");
        auto draw = state.draw_qkp(req->id, req->pair(), r.amount_kbslot);
        if (!draw) fail("qkp non-negativity", who + " overdraws the pool");
        svc.draw = std::move(draw.realization);
      }
    }
    detail::close_slot(scenario, state, slot_plan, result);
  }
  detail::finalize(scenario, state, opts, result);
  result.wallclock_s = clock.seconds();
  return result;
}

}  // namespace qkdnar
