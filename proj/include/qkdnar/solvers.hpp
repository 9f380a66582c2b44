#pragma once

#include <compare>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qkdnar/model.hpp"
#include "qkdnar/nar.hpp"
#include "qkdnar/routing.hpp"
#include "qkdnar/rng.hpp"
#include "qkdnar/state.hpp"

namespace qkdnar {

// Served-rate comparisons tolerate the micro-kb rounding of key pools.
inline constexpr double kRateEps = 1e-6;

struct SolveOptions {
  Semantics semantics = Semantics::Link;
  Propagation propagation = Propagation::OneLevel;
};

struct SlotSummary {
  int slot = 0;
  int max_nar = 0;
  double avg_nar = 0.0;
  std::vector<int> served;
  std::vector<int> unserved;
  double modules_avg = 0.0;  // modules in use per node
  double qkp_total_kbslot = 0.0;
  std::vector<int> modules_per_node;
};

struct SolveResult {
  std::string solver;
  std::vector<Realization> plan;
  NarReport nar;
  std::vector<SlotSummary> slots;
  std::vector<QkpLedgerEntry> ledger;
  std::vector<double> modules_avg_per_node;  // averaged over slots
  double wallclock_s = 0.0;
  long long iterations = 0;

  int objective() const { return nar.objective(); }
  int unserved_total() const;
  double mean_modules_avg() const;
};

// ---------------------------------------------------------------------------
// Slot-level building blocks shared by the solvers.

enum class ChannelMode { OB, TR };

// Modes the architecture allows on `route`. A single-link route yields one
// mode only: bypass and relay coincide there.
std::vector<ChannelMode> modes_for(const Architecture& arch, const Route& route);

struct Service {
  std::optional<Realization> channel;
  std::optional<Realization> draw;
};

// Everything provisioned in one slot, keyed by request id.
class SlotPlan {
 public:
  SlotPlan(const Scenario& scenario, int slot);

  int slot() const { return slot_; }
  const std::vector<const Request*>& active() const { return active_; }
  Service& service(int request_id) { return services_[request_id]; }
  const Service* find(int request_id) const;
  std::vector<Realization>& cache() { return cache_; }
  const std::vector<Realization>& cache() const { return cache_; }

  bool served(const Request& r) const;
  int unserved_count() const;
  std::vector<Realization> flatten() const;  // request order, then caching channels

 private:
  int slot_;
  std::vector<const Request*> active_;
  std::map<int, Service> services_;
  std::vector<Realization> cache_;
};

// Lexicographic: fewer unserved, then maxNAR, avgNAR, modules in use.
struct Score {
  int unserved = 0;
  int max_nar = 0;
  double avg_nar = 0.0;
  int modules = 0;

  auto operator<=>(const Score&) const = default;
};

Score score_slot(const Topology& topo, const SlotPlan& plan, const NetworkState& state,
                 const SolveOptions& opts);

Allocation try_channel(NetworkState& state, int request_id, const Route& route, ChannelMode mode);

// Allocates a channel for `req` and tops a rate shortfall up from the pair's
// pool. On failure nothing is left allocated.
Refusal serve_with_channel(NetworkState& state, SlotPlan& plan, const Request& req,
                           const Route& route, ChannelMode mode);

// Serves requests whose pool already holds a full slot of keys.
int serve_from_pool(NetworkState& state, SlotPlan& plan);

// Moves channel surplus and caching output into the pools. Returns the
// amount actually stored. Shared by the solvers and plan replay.
double settle_slot(const Scenario& scenario, NetworkState& state,
                   std::span<const Realization> slot_realizations);

// ---------------------------------------------------------------------------
// Min-maxNAR heuristic pieces.

struct TabuEntry {
  int request_id = 0;
  std::string signature;
  long long expires = 0;
};

class TabuList {
 public:
  explicit TabuList(int tenure) : tenure_(tenure) {}

  void push(int request_id, std::string signature, long long now);
  bool contains(int request_id, const std::string& signature, long long now) const;
  void expire(long long now);
  std::size_t size() const { return entries_.size(); }
  int tenure() const { return tenure_; }

 private:
  int tenure_;
  std::deque<TabuEntry> entries_;
};

class HeuristicContext {
 public:
  HeuristicContext(const Scenario& scenario, SolveOptions opts);

  const Scenario& scenario() const { return *scenario_; }
  const SolveOptions& options() const { return opts_; }
  const std::vector<Route>& routes(NodeId src, NodeId dst) { return routes_.get(src, dst); }

 private:
  const Scenario* scenario_;
  SolveOptions opts_;
  RouteCache routes_;
};

// Shortest-route realization for every request not yet served. Under OBTR a
// Bernoulli(alpha/100) draw picks relay first, otherwise bypass first.
// Returns the number of TR realizations chosen.
int build_initial_solution(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan, Rng& alpha_rng);

// Fills pools of pairs with future demand using spare channels and modules.
// Returns the kb*slot offered to the pools.
double precache_qkp(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan);

// One Tabu move. `best` is the incumbent score used for aspiration. Returns
// true when a move was applied.
bool tabu_step(HeuristicContext& ctx, NetworkState& state, SlotPlan& plan, TabuList& tabu,
               Rng& rng, long long iteration, const Score& best);

// ---------------------------------------------------------------------------
// Solvers.

SolveResult solve_baseline(const Scenario& scenario, const SolveOptions& opts = {});
SolveResult solve_minmaxnar(const Scenario& scenario, const SolveOptions& opts = {});

struct ExactLimits {
  int max_requests = 8;
  int max_nodes = 6;
  int max_horizon = 1;
};

// Branch and bound over route x mode x skip per request. Routes run from
// src to dst, and also from dst to src when the scenario allows reverse
// channels. Optimal for (unserved, maxNAR, avgNAR). Throws SizeGuardError
// past the limits.
SolveResult solve_exact(const Scenario& scenario, const SolveOptions& opts = {},
                        const ExactLimits& limits = {});

// Re-installs a plan on a fresh state. Throws ValidationError naming the
// violated invariant.
SolveResult replay_plan(const Scenario& scenario, std::span<const Realization> plan,
                        const SolveOptions& opts = {});

// ---------------------------------------------------------------------------
// ILP export (CPLEX LP format).

struct LpCounts {
  long long variables = 0;
  long long binaries = 0;
  long long integers = 0;
  long long constraints = 0;
  std::map<std::string, long long> by_family;  // constraint family -> rows
};

struct LpExport {
  std::string text;
  LpCounts counts;
  double big_m = 0.0;
  bool infeasible_flag = false;
};

LpExport build_lp(const Scenario& scenario, int max_routes);
LpExport export_lp(const Scenario& scenario, const std::filesystem::path& path, int max_routes);

}  // namespace qkdnar
