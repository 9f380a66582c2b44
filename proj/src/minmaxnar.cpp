#include <algorithm>
#include <limits>

#include "qkdnar/errors.hpp"
#include "solve_internal.hpp"

namespace qkdnar {

// ---------------------------------------------------------------------------
// TabuList

void TabuList::push(int request_id, std::string signature, long long now) {
  if (tenure_ <= 0) return;
  entries_.push_back({request_id, std::move(signature), now + tenure_});
  while (static_cast<int>(entries_.size()) > tenure_) entries_.pop_front();
}

bool TabuList::contains(int request_id, const std::string& signature, long long now) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const TabuEntry& e) {
    return e.expires > now && e.request_id == request_id && e.signature == signature;
  });
}

void TabuList::expire(long long now) {
  std::erase_if(entries_, [&](const TabuEntry& e) { return e.expires <= now; });
}

HeuristicContext::HeuristicContext(const Scenario& scenario, SolveOptions opts)
    : scenario_(&scenario), opts_(opts), routes_(scenario.topology, scenario.k_neighborhood) {}

// ---------------------------------------------------------------------------
// Initial solution

int build_initial_solution(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan,
                           Rng& alpha_rng) {
  const auto& arch = ctx.scenario().architecture;
  int relay_choices = 0;
  for (const Request* req : plan.active()) {
    if (plan.served(*req)) continue;
    ChannelMode mode = arch.allows_ob() ? ChannelMode::OB : ChannelMode::TR;
    if (arch.kind == Architecture::Kind::OBTR && alpha_rng.bernoulli(arch.alpha_percent / 100.0))
      mode = ChannelMode::TR;
    for (const auto& route : ctx.routes(req->src, req->dst)) {
      if (serve_with_channel(state, plan, *req, route, mode) == Refusal::None) {
        relay_choices += mode == ChannelMode::TR;
        break;
      }
    }
  }
  return relay_choices;
}

// ---------------------------------------------------------------------------
// Pre-caching

double precache_qkp(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan) {
  const auto& scenario = ctx.scenario();
  const int t = plan.slot();
  std::map<NodePair, double> need;
  for (const auto& r : scenario.requests)
    for (int s : r.slots)
      if (s > t) need[r.pair()] += r.rate_kbps;
  if (need.empty()) return 0.0;

  std::map<NodePair, double> projected;
  for (const auto& [pair, amount] : need) projected[pair] = state.qkp_balance(pair);
  for (const Request* r : plan.active()) {
    const Service* s = plan.find(r->id);
    if (!s || !need.count(r->pair())) continue;
    double got = (s->channel ? s->channel->delivered_kbps : 0.0) + (s->draw ? s->draw->amount_kbslot : 0.0);
    if (got > r->rate_kbps) projected[r->pair()] += got - r->rate_kbps;
  }
  for (const auto& c : plan.cache()) projected[c.pair] += c.delivered_kbps;

  const double cap = state.qkp_capacity();
  std::map<NodePair, bool> exhausted;
  double offered = 0.0;
  for (;;) {
    std::optional<NodePair> pick;
    double worst = kRateEps;
    for (const auto& [pair, amount] : need) {
      if (exhausted[pair]) continue;
      const double shortfall = std::min(cap, amount) - projected[pair];
      if (shortfall > worst) {
        worst = shortfall;
        pick = pair;
      }
    }
    if (!pick) break;

    struct Option {
      int modules;
      double km;
      const Route* route;
      ChannelMode mode;
    };
    std::vector<Option> options;
    for (const auto& route : ctx.routes(pick->lo, pick->hi))
      for (ChannelMode m : modes_for(scenario.architecture, route))
        options.push_back({m == ChannelMode::OB ? 2 : 2 * route.hop_count(), route.km, &route, m});
    std::stable_sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
      return a.modules != b.modules ? a.modules < b.modules : a.km < b.km;
    });
    bool placed = false;
    for (const auto& o : options) {
      auto alloc = try_channel(state, -1, *o.route, o.mode);
      if (!alloc) continue;
      projected[*pick] += alloc->delivered_kbps;
      offered += alloc->delivered_kbps;
      plan.cache().push_back(std::move(*alloc.realization));
      placed = true;
      break;
    }
    if (!placed) exhausted[*pick] = true;
  }
  return offered;
}

// ---------------------------------------------------------------------------
// Tabu search

namespace {

struct Snapshot {
  std::optional<Realization> channel;
  std::optional<Realization> draw;
};

// Frees the request's channel and top-up draw. Pool-only service is not
// touched by rerouting.
Snapshot take_out(NetworkState& state, SlotPlan& plan, int request_id) {
  Service& svc = plan.service(request_id);
  Snapshot snap{svc.channel, svc.draw};
  if (svc.channel) state.release(*svc.channel);
  if (svc.draw) state.release(*svc.draw);
  svc.channel.reset();
  svc.draw.reset();
  return snap;
}

void put_back(NetworkState& state, SlotPlan& plan, const Request& req, const Snapshot& snap) {
  Service& svc = plan.service(req.id);
  if (svc.channel) state.release(*svc.channel);
  if (svc.draw) state.release(*svc.draw);
  svc.channel.reset();
  svc.draw.reset();
  if (snap.channel) {
    auto alloc = state.allocate_exact(*snap.channel);
    if (!alloc) throw std::logic_error("tabu: cannot restore channel");
    svc.channel = std::move(alloc.realization);
  }
  if (snap.draw) {
    auto draw = state.draw_qkp(req.id, req.pair(), snap.draw->amount_kbslot);
    if (!draw) throw std::logic_error("tabu: cannot restore draw");
    svc.draw = std::move(draw.realization);
  }
}

std::string config_signature(const Topology& topo, const Service* svc) {
  return svc && svc->channel ? svc->channel->signature(topo) : std::string("none");
}

}  // namespace

namespace {

struct Candidate {
  const Route* route;
  ChannelMode mode;
  Score score;
};

// The K shortest routes from a to b, each in every mode the architecture
// allows, then optionally the same from b to a. Keys land in the pair's
// pool whichever way the channel runs.
template <typename Fn>
void for_each_option(HeuristicContext& ctx, NodeId a, NodeId b, bool both_ways, Fn&& fn) {
  for (const auto* routes : {&ctx.routes(a, b), &ctx.routes(b, a)}) {
    for (const auto& route : *routes)
      for (ChannelMode mode : modes_for(ctx.scenario().architecture, route)) fn(route, mode);
    if (!both_ways) break;
  }
}

bool move_request(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan, TabuList& tabu,
                  const Request& req, long long iteration, const Score& best) {
  const auto& topo = ctx.scenario().topology;
  const std::string current = config_signature(topo, plan.find(req.id));
  std::optional<Candidate> chosen;
  const Snapshot before = take_out(state, plan, req.id);
  for_each_option(ctx, req.src, req.dst, ctx.scenario().reverse_channels, [&](const Route& route, ChannelMode mode) {
    if (serve_with_channel(state, plan, req, route, mode) != Refusal::None) return;
    const std::string sig = config_signature(topo, plan.find(req.id));
    const Score s = score_slot(topo, plan, state, ctx.options());
    take_out(state, plan, req.id);
    if (sig == current) return;
    if (tabu.contains(req.id, sig, iteration) && !(s < best)) return;
    if (!chosen || s < chosen->score) chosen = Candidate{&route, mode, s};
  });
  if (!chosen) {
    put_back(state, plan, req, before);
    return false;
  }
  if (serve_with_channel(state, plan, req, *chosen->route, chosen->mode) != Refusal::None)
    throw std::logic_error("tabu: chosen move no longer feasible");
  tabu.push(req.id, current, iteration);
  return true;
}

// Caching channels are keyed in the tabu list by -1 - index.
bool move_cache(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan, TabuList& tabu,
                std::size_t index, long long iteration, const Score& best) {
  const auto& topo = ctx.scenario().topology;
  const int key = -1 - static_cast<int>(index);
  Realization old = plan.cache()[index];
  const std::string current = old.signature(topo);
  state.release(old);
  std::optional<Candidate> chosen;
  for_each_option(ctx, old.pair.lo, old.pair.hi, true, [&](const Route& route, ChannelMode mode) {
    auto alloc = try_channel(state, -1, route, mode);
    if (!alloc) return;
    if (alloc->delivered_kbps < old.delivered_kbps - kRateEps) {
      state.release(*alloc);  // would starve the pool it fills
      return;
    }
    const std::string sig = alloc->signature(topo);
    plan.cache()[index] = *alloc;
    const Score s = score_slot(topo, plan, state, ctx.options());
    state.release(*alloc);
    if (sig == current) return;
    if (tabu.contains(key, sig, iteration) && !(s < best)) return;
    if (!chosen || s < chosen->score) chosen = Candidate{&route, mode, s};
  });
  if (!chosen) {
    auto back = state.allocate_exact(old);
    if (!back) throw std::logic_error("tabu: cannot restore caching channel");
    plan.cache()[index] = std::move(*back.realization);
    return false;
  }
  auto alloc = try_channel(state, -1, *chosen->route, chosen->mode);
  if (!alloc) throw std::logic_error("tabu: chosen move no longer feasible");
  plan.cache()[index] = std::move(*alloc.realization);
  tabu.push(key, current, iteration);
  return true;
}

}  // namespace

bool tabu_step(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan, TabuList& tabu,
               Rng& rng, long long iteration, const Score& best) {
  // Movable: requests on a channel, requests still unserved, caching channels.
  std::vector<const Request*> movable;
  for (const Request* r : plan.active()) {
    const Service* s = plan.find(r->id);
    if ((s && s->channel) || !plan.served(*r)) movable.push_back(r);
  }
  const std::size_t total = movable.size() + plan.cache().size();
  if (total == 0) return false;
  const std::size_t pick = rng.below(total);
  if (pick < movable.size()) return move_request(ctx, state, plan, tabu, *movable[pick], iteration, best);
  return move_cache(ctx, state, plan, tabu, pick - movable.size(), iteration, best);
}

// ---------------------------------------------------------------------------

SolveResult solve_minmaxnar(const Scenario& scenario, const SolveOptions& opts) {
  scenario.validate();
  detail::Stopwatch clock;
  const auto& topo = scenario.topology;
  HeuristicContext ctx(scenario, opts);
  NetworkState state(topo, scenario.key_rates, scenario.qkp_capacity_kbslot);
  Rng alpha_rng(scenario.seed, stream::kAlpha);
  SolveResult result;
  result.solver = "heuristic";

  for (int t = 0; t < scenario.horizon; ++t) {
    SlotPlan plan(scenario, t);
    serve_from_pool(state, plan);
    build_initial_solution(ctx, state, plan, alpha_rng);
    precache_qkp(ctx, state, plan);

    Rng tabu_rng(scenario.seed, stream::kTabu, static_cast<std::uint64_t>(t));
    TabuList tabu(scenario.tabu_tenure);
    Score best = score_slot(topo, plan, state, opts);
    SlotPlan best_plan = plan;
    NetworkState best_state = state;
    for (long long it = 1; it <= scenario.theta; ++it) {
      tabu.expire(it);
      tabu_step(ctx, state, plan, tabu, tabu_rng, it, best);
      ++result.iterations;
      const Score s = score_slot(topo, plan, state, opts);
      if (s < best) {
        best = s;
        best_plan = plan;
        best_state = state;
      }
    }
    plan = std::move(best_plan);
    state = std::move(best_state);
    detail::close_slot(scenario, state, plan, result);
  }
  detail::finalize(scenario, state, opts, result);
  result.wallclock_s = clock.seconds();
  return result;
}

}  // namespace qkdnar
