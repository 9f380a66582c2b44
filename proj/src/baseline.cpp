#include "qkdnar/errors.hpp"
#include "solve_internal.hpp"

namespace qkdnar {

// Depth-first routing in request order with first-fit wavelengths. No
// rerouting and no deliberate caching; pools only cover shortfalls.
SolveResult solve_baseline(const Scenario& scenario, const SolveOptions& opts) {
  scenario.validate();
  detail::Stopwatch clock;
  const auto& topo = scenario.topology;
  const auto& arch = scenario.architecture;
  NetworkState state(topo, scenario.key_rates, scenario.qkp_capacity_kbslot);
  SolveResult result;
  result.solver = "baseline";

  std::map<std::pair<NodeId, NodeId>, std::optional<Route>> dfs_cache;
  auto dfs_route = [&](NodeId s, NodeId d) -> const std::optional<Route>& {
    auto it = dfs_cache.find({s, d});
    if (it == dfs_cache.end())
      it = dfs_cache.emplace(std::pair{s, d}, dfs_first_route(topo, s, d, scenario.key_rates.max_reach_km()))
               .first;
    return it->second;
  };

  for (int t = 0; t < scenario.horizon; ++t) {
    SlotPlan plan(scenario, t);
    for (const Request* req : plan.active()) {
      const auto& route = dfs_route(req->src, req->dst);
      bool ok = false;
      if (route) {
        ChannelMode mode = ChannelMode::OB;
        if (arch.kind == Architecture::Kind::TR) {
          mode = ChannelMode::TR;
        } else if (arch.kind == Architecture::Kind::OBTR) {
          mode = ob_route_rate(scenario.key_rates, *route) >= req->rate_kbps - kRateEps
                     ? ChannelMode::OB
                     : ChannelMode::TR;
        }
        if (route->hop_count() == 1) mode = modes_for(arch, *route).front();
        ok = serve_with_channel(state, plan, *req, *route, mode) == Refusal::None;
      }
      if (!ok) {
        auto draw = state.draw_qkp(req->id, req->pair(), req->rate_kbps);
        if (draw) plan.service(req->id).draw = std::move(draw.realization);
      }
    }
    ++result.iterations;
    detail::close_slot(scenario, state, plan, result);
  }
  detail::finalize(scenario, state, opts, result);
  result.wallclock_s = clock.seconds();
  return result;
}

}  // namespace qkdnar
