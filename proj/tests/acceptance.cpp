// Acceptance run: one PASS/FAIL line per criterion. Exits 0 once every
// criterion has been evaluated; --strict also exits 1 when any line fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lp_reader.hpp"
#include "oracles.hpp"
#include "qkdnar/nar.hpp"
#include "qkdnar/solvers.hpp"

using namespace qkdnar;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[2048];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int max_modules_used(const SolveResult& r) {
  int m = 0;
  for (const auto& s : r.slots)
    for (int n : s.modules_per_node) m = std::max(m, n);
  return m;
}

Scenario nsf_scenario(std::uint64_t seed, int modules, int requests, int horizon, Architecture arch) {
  Scenario s;
  s.topology = build_nsf(seed, modules, 16);
  s.requests = generate_demands_count(s.topology, requests, seed, horizon);
  s.horizon = horizon;
  s.seed = seed;
  s.architecture = arch;
  return s;
}

// 1. Heuristic matches the exact optimum on small random instances.
Verdict heuristic_equals_exact() {
  Verdict v;
  const std::vector<Architecture> archs{Architecture::ob(), Architecture::tr(), Architecture::obtr(0),
                                        Architecture::obtr(80)};
  double slowest = 0.0;
  int better = 0;
  for (const auto& arch : archs) {
    int equal = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
      Rng rng(seed, "acceptance-small");
      const int n = 4 + static_cast<int>(rng.below(3));
      Scenario s;
      s.topology = fx::random_topology(rng, n, 0.35, 2 + static_cast<int>(rng.below(3)),
                                       4 + static_cast<int>(rng.below(5)));
      s.requests = generate_demands_count(s.topology, 3 + static_cast<int>(rng.below(4)), seed, 1);
      s.architecture = arch;
      s.seed = seed;
      const auto t0 = std::chrono::steady_clock::now();
      const SolveResult he = solve_minmaxnar(s);
      slowest = std::max(slowest, seconds_since(t0));
      const SolveResult ex = solve_exact(s);
      const auto key = [](const SolveResult& r) { return std::pair(r.unserved_total(), r.objective()); };
      if (key(he) == key(ex)) ++equal;
      if (key(he) < key(ex)) ++better;
    }
    v.detail += fmt("%s %d/100, ", arch.label().c_str(), equal);
    if (equal < 95) v.pass = false;
  }
  if (better > 0 || slowest >= 5.0) v.pass = false;
  v.detail += fmt("heuristic better than exact %d times, slowest %.3f s", better, slowest);
  return v;
}

// 2. PoliQi ring.
Verdict poliqi() {
  Verdict v;
  const auto path = std::filesystem::path(QKDNAR_SOURCE_DIR) / "scenarios" / "poliqi.json";
  Scenario s = load_scenario(path);
  auto run = [&](Architecture a, double* wall) {
    s.architecture = a;
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve_minmaxnar(s);
    *wall = std::max(*wall, seconds_since(t0));
    return r;
  };
  double wall = 0.0;
  const SolveResult tr = run(Architecture::tr(), &wall);
  const SolveResult obtr = run(Architecture::obtr(0), &wall);
  const SolveResult ob = run(Architecture::ob(), &wall);
  s.architecture = Architecture::tr();
  const SolveResult ex = solve_exact(s);
  v.pass = tr.objective() == 2 && obtr.objective() == 2 && ob.objective() > 2 && ex.objective() == 2 &&
           tr.unserved_total() == 0 && obtr.unserved_total() == 0 && ex.unserved_total() == 0 && wall <= 5.0;
  v.detail = fmt("TR %d, OBTR0 %d, OB %d (unserved %d), exact TR %d, slowest %.3f s", tr.objective(),
                 obtr.objective(), ob.objective(), ob.unserved_total(), ex.objective(), wall);
  return v;
}

// 3. Architecture ordering and baseline reduction on NSF.
Verdict nsf_ordering() {
  Verdict v;
  int cases = 0, ordered = 0, tr_full = 0, not_worse = 0, compared = 0;
  double reduction_sum = 0.0, slowest = 0.0;
  int arch_not_worse[2] = {0, 0}, arch_unserved[2][2] = {{0, 0}, {0, 0}};
  double arch_reduction[2] = {0.0, 0.0};
  std::string misses;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (int n : {40, 70, 100}) {
      ++cases;
      std::map<std::string, SolveResult> he, ba;
      for (auto arch : {Architecture::ob(), Architecture::obtr(0), Architecture::tr()}) {
        const Scenario s = nsf_scenario(seed, 70, n, 1, arch);
        const auto t0 = std::chrono::steady_clock::now();
        he[arch.label()] = solve_minmaxnar(s);
        slowest = std::max(slowest, seconds_since(t0));
        if (arch.label() != "TR") ba[arch.label()] = solve_baseline(s);
      }
      if (he["TR"].unserved_total() == 0) {
        ++tr_full;
        const int ob = he["OB"].objective(), o0 = he["OBTR0"].objective(), tr = he["TR"].objective();
        if (ob >= o0 && o0 >= tr)
          ++ordered;
        else
          misses += fmt(" s%llu/n%d OB %d OBTR0 %d TR %d;", static_cast<unsigned long long>(seed), n, ob, o0, tr);
      }
      for (int k = 0; k < 2; ++k) {
        const char* a = k == 0 ? "OB" : "OBTR0";
        ++compared;
        const int h = he[a].objective(), b = ba[a].objective();
        if (h <= b) ++not_worse, ++arch_not_worse[k];
        const double cut = b > 0 ? static_cast<double>(b - h) / b : 0.0;
        reduction_sum += cut;
        arch_reduction[k] += cut;
        arch_unserved[k][0] += he[a].unserved_total();
        arch_unserved[k][1] += ba[a].unserved_total();
      }
    }
  }
  const double mean_reduction = reduction_sum / compared;
  v.pass = ordered == tr_full && not_worse == compared && mean_reduction >= 0.15 && slowest < 60.0;
  v.detail = fmt("ordering %d/%d where TR serves all, heuristic <= baseline %d/%d, mean reduction %.1f%%, "
                 "slowest %.2f s",
                 ordered, tr_full, not_worse, compared, 100.0 * mean_reduction, slowest);
  for (int k = 0; k < 2; ++k)
    v.detail += fmt("; %s: <= baseline %d/%d, mean reduction %.1f%%, unserved heuristic %d vs baseline %d",
                    k == 0 ? "OB" : "OBTR0", arch_not_worse[k], cases, 100.0 * arch_reduction[k] / cases,
                    arch_unserved[k][0], arch_unserved[k][1]);
  if (!misses.empty()) v.detail += "; misses:" + misses;
  return v;
}

// 4. Relay architecture runs out of modules at 5 per node.
Verdict tr_exhaustion() {
  Verdict v;
  const int budget = 5;
  int first_unserved = -1;
  bool stays_unserved = true, budget_hit = false, ob_exhausts = false;
  int ob_peak = 0, ob_first_full = -1;
  for (int n = 5; n <= 145; n += 5) {
    const SolveResult tr = solve_minmaxnar(nsf_scenario(1, budget, n, 1, Architecture::tr()));
    const SolveResult ob = solve_minmaxnar(nsf_scenario(1, budget, n, 1, Architecture::ob()));
    if (tr.unserved_total() > 0 && first_unserved < 0) first_unserved = n;
    if (first_unserved >= 0 && tr.unserved_total() == 0) stays_unserved = false;
    if (max_modules_used(tr) >= budget) budget_hit = true;
    ob_peak = std::max(ob_peak, max_modules_used(ob));
    if (max_modules_used(ob) >= budget && !ob_exhausts) {
      ob_exhausts = true;
      ob_first_full = n;
    }
  }
  v.pass = first_unserved > 0 && first_unserved <= 145 && stays_unserved && budget_hit && !ob_exhausts;
  v.detail = fmt("TR first unserved at n=%d (stays unserved %s), TR reaches budget %s, OB peak %d/%d modules "
                 "(first at n=%d)",
                 first_unserved, stays_unserved ? "yes" : "no", budget_hit ? "yes" : "no", ob_peak, budget,
                 ob_first_full);
  return v;
}

// 5. Alpha trade-off on one NSF seed.
Verdict alpha_tradeoff() {
  Verdict v;
  const std::vector<int> alphas{0, 40, 80};
  std::vector<double> nar, modules;
  for (int a : alphas) {
    double nsum = 0.0, msum = 0.0;
    int runs = 0;
    for (int n : {40, 60, 80, 100}) {
      const SolveResult r = solve_minmaxnar(nsf_scenario(1, 70, n, 1, Architecture::obtr(a)));
      nsum += r.objective();
      msum += r.mean_modules_avg();
      ++runs;
    }
    nar.push_back(nsum / runs);
    modules.push_back(msum / runs);
  }
  const bool nar_down = nar[1] <= nar[0] && nar[2] <= nar[1];
  const bool mod_up = modules[1] >= modules[0] && modules[2] >= modules[1];
  const double cut = nar[0] > 0 ? (nar[0] - nar[2]) / nar[0] : 0.0;
  v.pass = nar_down && mod_up && cut >= 0.10;
  v.detail = fmt("mean maxNAR %.2f / %.2f / %.2f, mean modules %.2f / %.2f / %.2f, OBTR80 vs OBTR0 %.1f%%",
                 nar[0], nar[1], nar[2], modules[0], modules[1], modules[2], 100.0 * cut);
  return v;
}

// 6. Key pools flatten maxNAR over five slots.
Verdict qkp_dynamics() {
  Verdict v;
  const SolveResult r = solve_minmaxnar(nsf_scenario(1, 70, 145, 5, Architecture::obtr(0)));
  std::vector<int> m;
  for (const auto& s : r.slots) m.push_back(s.max_nar);
  const int settled = std::max(m[2], m[3]);
  bool ledger_ok = true;
  for (const auto& e : r.ledger)
    if (to_units(e.closing) != to_units(e.opening) + to_units(e.deposited) - to_units(e.drawn)) ledger_ok = false;
  v.pass = m[0] >= 5 * settled && settled <= 3 && ledger_ok;
  v.detail = fmt("maxNAR per slot %d %d %d %d %d, ledger identity %s over %zu entries", m[0], m[1], m[2], m[3],
                 m[4], ledger_ok ? "exact" : "BROKEN", r.ledger.size());
  return v;
}

std::set<int> as_set(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// 7. Metric engine against the set-construction oracle.
Verdict metric_oracle() {
  Verdict v;
  Rng rng(7007);
  int mismatches = 0, property_breaks = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(4));
    Topology t = fx::random_topology(rng, n, 0.4, 4, 8);
    const auto slot = fx::random_slot(rng, t, 2 + static_cast<int>(rng.below(7)));
    std::set<int> on_channel, pool_only;
    for (const auto& r : slot)
      if (r.is_channel() && !r.is_cache()) on_channel.insert(r.request_id);
    for (const auto& r : slot)
      if (r.kind == RealizationKind::QKP && !on_channel.count(r.request_id)) pool_only.insert(r.request_id);
    for (auto p : {Propagation::OneLevel, Propagation::Transitive}) {
      const bool transitive = p == Propagation::Transitive;
      NarEngine engine(t, slot, p);
      const std::set<LinkId> used(engine.used_links().begin(), engine.used_links().end());
      for (LinkId e = 0; e < t.link_count(); ++e) {
        const auto got = as_set(engine.affected_by_link(e));
        if (got != oracle::affected_by_link(slot, e, transitive)) ++mismatches;
        if (!used.count(e) && !got.empty()) ++property_breaks;
        for (int id : pool_only)
          if (got.count(id)) ++property_breaks;
      }
      if (engine.max_nar(Semantics::Link) != oracle::max_nar_link(t, slot, transitive)) ++mismatches;
    }
    NarEngine engine(t, slot);
    for (const auto& seg : oracle::segments(slot)) {
      const auto got = as_set(engine.affected_by_route(Route::from_links(t, seg.links)));
      if (got != oracle::affected_by_route(slot, seg.links)) ++mismatches;
      for (int id : pool_only)
        if (got.count(id)) ++property_breaks;
    }
    if (engine.max_nar(Semantics::Route) != oracle::max_nar_route(slot)) ++mismatches;
    if (engine.max_nar(Semantics::Link) < engine.max_nar(Semantics::Route)) ++property_breaks;
  }
  v.pass = mismatches == 0 && property_breaks == 0;
  v.detail = fmt("500 plans, %d oracle mismatches, %d property violations", mismatches, property_breaks);
  return v;
}

// 8. Module accounting and release round trips.
Verdict module_accounting() {
  Verdict v;
  Rng rng(8008);
  const KeyRateTable rates;
  int sequences = 0, cost_errors = 0, roundtrip_errors = 0, allocations = 0;
  while (sequences < 1000) {
    Topology topo = fx::random_topology(rng, 5 + static_cast<int>(rng.below(3)), 0.4, 3,
                                        1 + static_cast<int>(rng.below(6)));
    NetworkState state(topo, rates, 50.0);
    RouteCache routes(topo, 3);
    for (int s = 0; s < 10 && sequences < 1000; ++s, ++sequences) {
      const NetworkState before = state;
      std::vector<Realization> made;
      const int steps = 1 + static_cast<int>(rng.below(12));
      for (int k = 0; k < steps; ++k) {
        const NodeId a = static_cast<NodeId>(rng.below(topo.node_count()));
        NodeId c = static_cast<NodeId>(rng.below(topo.node_count() - 1));
        if (c >= a) ++c;
        const auto& cands = routes.get(a, c);
        const Route& r = cands[rng.below(cands.size())];
        const int used = state.total_modules_used();
        Allocation got;
        int expected;
        if (rng.bernoulli(0.5)) {
          got = state.try_allocate_ob(k, r);
          expected = 2;
        } else {
          got = state.try_allocate_tr(k, per_link_hops(topo, r));
          expected = 2 * (r.hop_count() - 1) + 2;
        }
        if (!got) {
          if (state.total_modules_used() != used) ++cost_errors;
          continue;
        }
        ++allocations;
        if (state.total_modules_used() - used != expected || got.realization->module_cost() != expected)
          ++cost_errors;
        made.push_back(*got.realization);
      }
      rng.shuffle(made.begin(), made.end());
      for (const auto& r : made) state.release(r);
      if (!state.same_resources(before)) ++roundtrip_errors;
    }
  }
  v.pass = cost_errors == 0 && roundtrip_errors == 0;
  v.detail = fmt("%d allocations, %d module cost errors, %d/1000 sequences not restored", allocations, cost_errors,
                 roundtrip_errors);
  return v;
}

// 9. LP export counts on the two-node instance.
Verdict lp_export() {
  Verdict v;
  Scenario s;
  s.topology = fx::chain(2, 10.0, 1, 2);
  s.requests = {{0, 0, 1, 5.0, {0}}};
  const LpExport lp = build_lp(s, 4);
  const lpread::ParsedLp p = lpread::parse_lp(lp.text);
  bool ok = p.rows == lp.counts.constraints && p.header.at("constraints") == lp.counts.constraints &&
            p.header.at("variables") == lp.counts.variables &&
            static_cast<long long>(p.binaries.size() + p.generals.size()) == lp.counts.variables;
  for (const auto& [fam, n] : lp.counts.by_family)
    if (!p.rows_by_prefix.count(fam) || p.rows_by_prefix.at(fam) != n) ok = false;
  for (const auto& id : p.used)
    if (id != "e" && id != "E" && p.binaries.count(id) + p.generals.count(id) != 1) ok = false;
  v.pass = ok;
  v.detail = fmt("%lld variables, %lld constraints, parse-back %s; external MILP solve is a manual step",
                 lp.counts.variables, lp.counts.constraints, ok ? "matches" : "differs");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"heuristic equals exact at desk scale", heuristic_equals_exact},
      {"PoliQi reconstruction", poliqi},
      {"architecture ordering on NSF", nsf_ordering},
      {"relay resource exhaustion", tr_exhaustion},
      {"alpha trade-off", alpha_tradeoff},
      {"key pool timeslot dynamics", qkp_dynamics},
      {"metric oracle equivalence", metric_oracle},
      {"module accounting", module_accounting},
      {"LP export validity", lp_export},
  };
  int passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Verdict v = criteria[i].second();
    passed += v.pass;
    std::printf("criterion %zu %s: %s (%s) [%.1f s]\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first,
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass\n", passed, criteria.size());
  return strict && passed != static_cast<int>(criteria.size()) ? 1 : 0;
}
