#include <limits>

#include "qkdnar/errors.hpp"
#include "solve_internal.hpp"

namespace qkdnar {

namespace {

struct Choice {
  const Route* route = nullptr;  // nullptr: leave the request unserved
  ChannelMode mode = ChannelMode::OB;
};

class BranchAndBound {
 public:
  BranchAndBound(const Scenario& scenario, const SolveOptions& opts, int slot)
      : scenario_(scenario), opts_(opts), plan_(scenario, slot),
        state_(scenario.topology, scenario.key_rates, scenario.qkp_capacity_kbslot) {
    const auto& topo = scenario.topology;
    // With reverse channels on, a channel may also run from dst to src. Both
    // directions feed the same pool.
    const double reach = std::numeric_limits<double>::infinity();
    for (const Request* r : plan_.active()) {
      auto rs = enumerate_phi(topo, r->src, r->dst, scenario.max_routes, reach);
      if (scenario.reverse_channels)
        for (auto& back : enumerate_phi(topo, r->dst, r->src, scenario.max_routes, reach))
          rs.push_back(std::move(back));
      routes_.push_back(std::move(rs));
    }
    for (std::size_t i = 0; i < routes_.size(); ++i) {
      std::vector<Choice> cs;
      for (const auto& route : routes_[i])
        for (ChannelMode m : modes_for(scenario.architecture, route)) cs.push_back({&route, m});
      cs.push_back({});
      choices_.push_back(std::move(cs));
    }
    current_.resize(choices_.size());
  }

  void run() { descend(0, 0); }

  // Re-applies the best assignment to a fresh state. First-fit is
  // deterministic, so the wavelengths match those seen during search.
  void apply_best(NetworkState& state, SlotPlan& plan) const {
    const auto& active = plan.active();
    for (std::size_t i = 0; i < best_choice_.size(); ++i) {
      const Choice& c = best_choice_[i];
      if (!c.route) continue;
      if (serve_with_channel(state, plan, *active[i], *c.route, c.mode) != Refusal::None)
        throw std::logic_error("exact: best assignment no longer feasible");
    }
  }

  long long nodes() const { return nodes_; }

 private:
  bool dominated(int unserved, int max_nar) const {
    if (!best_) return false;
    if (unserved != best_->unserved) return unserved > best_->unserved;
    return max_nar > best_->max_nar;
  }

  int partial_max_nar() const {
    const auto rs = plan_.flatten();
    return NarEngine(scenario_.topology, rs, opts_.propagation).max_nar(opts_.semantics);
  }

  void descend(std::size_t i, int unserved) {
    ++nodes_;
    if (i == choices_.size()) {
      const Score s = score_slot(scenario_.topology, plan_, state_, opts_);
      const Score key{s.unserved, s.max_nar, s.avg_nar, 0};
      if (!best_ || key < *best_) {
        best_ = key;
        best_choice_ = current_;
      }
      return;
    }
    const Request& req = *plan_.active()[i];
    for (const Choice& c : choices_[i]) {
      if (!c.route) {
        if (dominated(unserved + 1, partial_max_nar())) continue;
        current_[i] = c;
        descend(i + 1, unserved + 1);
        continue;
      }
      if (serve_with_channel(state_, plan_, req, *c.route, c.mode) != Refusal::None) continue;
      if (!dominated(unserved, partial_max_nar())) {
        current_[i] = c;
        descend(i + 1, unserved);
      }
      Service& svc = plan_.service(req.id);
      if (svc.draw) state_.release(*svc.draw);
      state_.release(*svc.channel);
      svc = Service{};
    }
  }

  const Scenario& scenario_;
  SolveOptions opts_;
  SlotPlan plan_;
  NetworkState state_;
  std::vector<std::vector<Route>> routes_;
  std::vector<std::vector<Choice>> choices_;
  std::vector<Choice> current_;
  std::vector<Choice> best_choice_;
  std::optional<Score> best_;
  long long nodes_ = 0;
};

}  // namespace

SolveResult solve_exact(const Scenario& scenario, const SolveOptions& opts, const ExactLimits& limits) {
  scenario.validate();
  const auto& topo = scenario.topology;
  if (static_cast<int>(scenario.requests.size()) > limits.max_requests ||
      topo.node_count() > limits.max_nodes || scenario.horizon > limits.max_horizon) {
    throw SizeGuardError("exact solver limited to " + std::to_string(limits.max_requests) +
                         " requests, " + std::to_string(limits.max_nodes) + " nodes and " +
                         std::to_string(limits.max_horizon) + " slot(s); instance has " +
                         std::to_string(scenario.requests.size()) + ", " +
                         std::to_string(topo.node_count()) + " and " + std::to_string(scenario.horizon));
  }
  detail::Stopwatch clock;
  SolveResult result;
  result.solver = "exact";
  NetworkState state(topo, scenario.key_rates, scenario.qkp_capacity_kbslot);
  for (int t = 0; t < scenario.horizon; ++t) {
    BranchAndBound bb(scenario, opts, t);
    bb.run();
    result.iterations += bb.nodes();
    SlotPlan plan(scenario, t);
    bb.apply_best(state, plan);
    detail::close_slot(scenario, state, plan, result);
  }
  detail::finalize(scenario, state, opts, result);
  result.wallclock_s = clock.seconds();
  return result;
}

}  // namespace qkdnar
