#include "qkdnar/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#include <CLI11.hpp>

#include "qkdnar/errors.hpp"
#include "qkdnar/model.hpp"
#include "qkdnar/plan_io.hpp"
#include "qkdnar/solvers.hpp"

namespace qkdnar {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

Architecture parse_arch(const std::string& text) {
  const std::string s = lower(text);
  if (s == "ob") return Architecture::ob();
  if (s == "tr") return Architecture::tr();
  if (s == "obtr") return Architecture::obtr(0);
  if (s.rfind("obtr:", 0) == 0) {
    const std::string a = s.substr(5);
    char* end = nullptr;
    const long v = std::strtol(a.c_str(), &end, 10);
    if (a.empty() || *end != '\0' || v < 0 || v > 100)
      throw ValidationError("--arch: alpha must be an integer in [0, 100], got \"" + a + "\"");
    return Architecture::obtr(static_cast<int>(v));
  }
  throw ValidationError("--arch: expected ob, tr or obtr:ALPHA, got \"" + text + "\"");
}

Semantics parse_semantics(const std::string& s) {
  if (s == "link") return Semantics::Link;
  if (s == "route") return Semantics::Route;
  throw ValidationError("--semantics: expected link or route");
}

Propagation parse_propagation(const std::string& s) {
  if (s == "one") return Propagation::OneLevel;
  if (s == "transitive") return Propagation::Transitive;
  throw ValidationError("--propagation: expected one or transitive");
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

void write_manifest(const fs::path& dir, const Scenario& scenario, const std::vector<std::string>& args,
                    const std::vector<fs::path>& outputs, double wallclock) {
  json outs = json::array();
  for (const auto& p : outputs) outs.push_back(p.string());
  outs.push_back((dir / "manifest.json").string());
  const json m{{"tool", "qkdnar"},
               {"version", kToolVersion},
               {"command", join_args(args)},
               {"scenario_hash", scenario_hash(scenario)},
               {"seed", scenario.seed},
               {"outputs", std::move(outs)},
               {"wallclock_s", wallclock}};
  write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

SolveResult run_solver(const std::string& name, const Scenario& s, const SolveOptions& opts) {
  if (name == "baseline") return solve_baseline(s, opts);
  if (name == "heuristic") return solve_minmaxnar(s, opts);
  if (name == "exact") return solve_exact(s, opts);
  throw ValidationError("--solver: expected baseline, heuristic or exact");
}

unsigned sweep_threads(unsigned requested, std::size_t cells) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QKDNAR_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, std::min<unsigned>(n, static_cast<unsigned>(cells)));
}

// ---------------------------------------------------------------------------

struct GenOpts {
  std::string topology = "poliqi";
  double coverage = 0.8;
  int requests = 0;
  std::uint64_t seed = 1;
  int horizon = 1;
  std::string arch = "obtr:0";
  std::string out;
  double qkp_capacity = 50.0;
  int modules_per_node = 5;
  int channels = 0;
  int theta = 200;
};

int cmd_gen(const GenOpts& o, bool coverage_given, std::ostream& out) {
  if (!(o.coverage > 0.0) || o.coverage > 1.0)
    throw ValidationError("--coverage: must be in (0, 1], got " + std::to_string(o.coverage));
  if (o.horizon < 1) throw ValidationError("--horizon: must be >= 1");
  const Architecture arch = parse_arch(o.arch);
  Scenario s;
  const std::string topo = lower(o.topology);
  if (topo == "poliqi" && !coverage_given && o.requests == 0) {
    s = poliqi_scenario(arch, o.horizon);
    if (o.channels > 0) s.topology = build_poliqi(o.channels);
  } else {
    if (topo == "poliqi") {
      s.topology = build_poliqi(o.channels > 0 ? o.channels : 8);
    } else if (topo == "nsf") {
      s.topology = build_nsf(o.seed, o.modules_per_node, o.channels > 0 ? o.channels : 16);
    } else if (o.topology.rfind("file:", 0) == 0) {
      s.topology = load_topology(o.topology.substr(5));
    } else {
      throw ValidationError("--topology: expected poliqi, nsf or file:PATH");
    }
    s.requests = o.requests > 0 ? generate_demands_count(s.topology, o.requests, o.seed, o.horizon)
                                : generate_demands(s.topology, o.coverage, o.seed, o.horizon);
    s.architecture = arch;
    s.horizon = o.horizon;
  }
  s.seed = o.seed;
  s.qkp_capacity_kbslot = o.qkp_capacity;
  s.theta = o.theta;
  s.validate();
  const std::string text = scenario_to_json(s).dump(2) + "\n";
  if (o.out.empty()) {
    out << text;
  } else {
    write_text_file(o.out, text);
    out << "wrote " << o.out << ": " << s.topology.node_count() << " nodes, " << s.requests.size()
        << " requests, " << s.architecture.label() << ", horizon " << s.horizon << "\n";
  }
  return kExitOk;
}

struct SolveOpts {
  std::string scenario;
  std::string solver = "heuristic";
  std::string semantics = "link";
  std::string propagation = "one";
  std::string out = "out";
};

int cmd_solve(const SolveOpts& o, const std::vector<std::string>& args, std::ostream& out) {
  const SolveOptions opts{parse_semantics(o.semantics), parse_propagation(o.propagation)};
  const Scenario s = load_scenario(o.scenario);
  const SolveResult r = run_solver(o.solver, s, opts);
  const fs::path dir = o.out;
  fs::create_directories(dir);
  const std::vector<fs::path> files{dir / "plan.json", dir / "result.json", dir / "summary.csv"};
  write_text_file(files[0], plan_to_json(s.topology, r.plan).dump(1) + "\n");
  write_text_file(files[1], result_to_json(s, r, opts).dump(2) + "\n");
  write_text_file(files[2], summary_csv(r));
  write_manifest(dir, s, args, files, r.wallclock_s);
  out << r.solver << " on " << o.scenario << " (" << s.architecture.label() << ", "
      << to_string(opts.semantics) << " semantics)\n"
      << slot_table(r) << "objective " << r.objective() << ", unserved " << r.unserved_total()
      << ", " << r.wallclock_s << " s\n";
  return kExitOk;
}

struct EvalOpts {
  std::string scenario;
  std::string plan;
  std::string semantics = "link";
  std::string propagation = "one";
  std::string out = ".";
};

int cmd_eval(const EvalOpts& o, const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  const SolveOptions opts{parse_semantics(o.semantics), parse_propagation(o.propagation)};
  const Scenario s = load_scenario(o.scenario);
  const auto plan = load_plan(s.topology, o.plan);
  SolveResult r;
  try {
    r = replay_plan(s, plan, opts);
  } catch (const ValidationError& e) {
    err << "infeasible plan: " << e.what() << "\n";
    return kExitInvalid;
  }
  const fs::path dir = o.out;
  fs::create_directories(dir);
  const std::vector<fs::path> files{dir / "nar.json", dir / "nar.csv"};
  write_text_file(files[0], nar_report_to_json(r.nar).dump(2) + "\n");
  write_text_file(files[1], nar_report_csv(r.nar));
  write_manifest(dir, s, args, files, r.wallclock_s);
  out << "plan " << o.plan << " is feasible (" << to_string(opts.semantics) << " semantics, "
      << to_string(opts.propagation) << " propagation)\n"
      << slot_table(r) << "objective " << r.objective() << "\n";
  return kExitOk;
}

struct SweepOpts {
  std::string scenario;
  std::string alphas = "0,20,40,60,80,100";
  int seeds = 1;
  std::string request_counts;
  std::string solver = "heuristic";
  std::string semantics = "link";
  std::string out;
  unsigned threads = 0;
};

std::vector<int> parse_int_list(const std::string& text, const char* flag) {
  std::vector<int> v;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    char* end = nullptr;
    const long x = std::strtol(item.c_str(), &end, 10);
    if (item.empty() || *end != '\0') throw ValidationError(std::string(flag) + ": bad list item \"" + item + "\"");
    v.push_back(static_cast<int>(x));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return v;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  const SolveOptions opts{parse_semantics(o.semantics), Propagation::OneLevel};
  const Scenario base = load_scenario(o.scenario);
  const auto alphas = parse_int_list(o.alphas, "--alphas");
  for (int a : alphas)
    if (a < 0 || a > 100) throw ValidationError("--alphas: values must be in [0, 100]");
  auto counts = parse_int_list(o.request_counts, "--request-counts");
  for (int n : counts)
    if (n < 1) throw ValidationError("--request-counts: values must be >= 1");
  const bool regenerate = !counts.empty();
  if (!regenerate) counts.push_back(static_cast<int>(base.requests.size()));
  if (alphas.empty() || o.seeds < 1) throw ValidationError("sweep: empty grid");

  struct Cell {
    int alpha, seed_index, n;
  };
  std::vector<Cell> cells;
  for (int a : alphas)
    for (int i = 0; i < o.seeds; ++i)
      for (int n : counts) cells.push_back({a, i, n});

  struct Row {
    int alpha;
    std::uint64_t seed;
    int n;
    SlotSummary slot;
  };
  std::vector<std::vector<Row>> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < cells.size();) {
      try {
        const Cell& c = cells[k];
        Scenario s = base;
        s.architecture = Architecture::obtr(c.alpha);
        s.seed = base.seed + static_cast<std::uint64_t>(c.seed_index);
        if (regenerate) s.requests = generate_demands_count(s.topology, c.n, s.seed, s.horizon);
        const SolveResult r = run_solver(o.solver, s, opts);
        for (const auto& sl : r.slots) rows[k].push_back({c.alpha, s.seed, c.n, sl});
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = sweep_threads(o.threads, cells.size());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  std::vector<Row> flat;
  for (auto& v : rows) flat.insert(flat.end(), v.begin(), v.end());
  std::sort(flat.begin(), flat.end(), [](const Row& a, const Row& b) {
    return std::tie(a.alpha, a.seed, a.n, a.slot.slot) < std::tie(b.alpha, b.seed, b.n, b.slot.slot);
  });
  std::string csv = "alpha,seed,n_requests,slot,maxNAR,avgNAR,modules_avg,served\n";
  char line[256];
  for (const auto& r : flat) {
    std::snprintf(line, sizeof line, "%d,%llu,%d,%d,%d,%.10g,%.10g,%zu\n", r.alpha,
                  static_cast<unsigned long long>(r.seed), r.n, r.slot.slot, r.slot.max_nar, r.slot.avg_nar,
                  r.slot.modules_avg, r.slot.served.size());
    csv += line;
  }
  if (o.out.empty()) {
    out << csv;
  } else {
    write_text_file(o.out, csv);
    out << "wrote " << o.out << ": " << flat.size() << " rows from " << cells.size() << " cells on "
        << n_threads << " thread(s)\n";
  }
  return kExitOk;
}

struct ExportOpts {
  std::string scenario;
  std::string out = "model.lp";
  int max_routes = -1;
};

int cmd_export_lp(const ExportOpts& o, std::ostream& out) {
  const Scenario s = load_scenario(o.scenario);
  const int k = o.max_routes == -1 ? s.max_routes : o.max_routes;
  const LpExport lp = export_lp(s, o.out, k);
  out << "wrote " << o.out << "\n"
      << "variables " << lp.counts.variables << " (binary " << lp.counts.binaries << ", integer "
      << lp.counts.integers << ")\nconstraints " << lp.counts.constraints << "\n";
  for (const auto& [fam, n] : lp.counts.by_family) out << "  " << fam << " " << n << "\n";
  out << "big-M " << lp.big_m << "\n";
  if (lp.infeasible_flag) out << "model flagged infeasible: no quantum channels\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Attack-radius-aware routing and wavelength assignment for QKD networks", "qkdnar"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  GenOpts gen;
  auto* g = app.add_subcommand("gen", "Write a scenario file");
  g->add_option("--topology", gen.topology, "poliqi | nsf | file:PATH")->capture_default_str();
  auto* cov = g->add_option("--coverage", gen.coverage, "Fraction of node pairs with a request")->capture_default_str();
  g->add_option("--requests", gen.requests, "Request count (overrides --coverage)");
  g->add_option("--seed", gen.seed, "Scenario seed")->capture_default_str();
  g->add_option("--horizon", gen.horizon, "Number of timeslots")->capture_default_str();
  g->add_option("--arch", gen.arch, "ob | tr | obtr:ALPHA")->capture_default_str();
  g->add_option("--out", gen.out, "Output path (stdout when omitted)");
  g->add_option("--qkp-capacity", gen.qkp_capacity, "Key pool capacity per pair, kb*slot")->capture_default_str();
  g->add_option("--modules-per-node", gen.modules_per_node, "NSF module budget per node")->capture_default_str();
  g->add_option("--channels", gen.channels, "Channels per link (0: topology default)");
  g->add_option("--theta", gen.theta, "Tabu iterations per slot")->capture_default_str();

  SolveOpts solve;
  auto* s = app.add_subcommand("solve", "Solve a scenario");
  s->add_option("--scenario", solve.scenario, "Scenario file")->required();
  s->add_option("--solver", solve.solver, "baseline | heuristic | exact")->capture_default_str();
  s->add_option("--semantics", solve.semantics, "link | route")->capture_default_str();
  s->add_option("--propagation", solve.propagation, "one | transitive")->capture_default_str();
  s->add_option("--out", solve.out, "Output directory")->capture_default_str();

  EvalOpts eval;
  auto* e = app.add_subcommand("eval", "Replay a plan and report NAR");
  e->add_option("--scenario", eval.scenario, "Scenario file")->required();
  e->add_option("--plan", eval.plan, "Plan file")->required();
  e->add_option("--semantics", eval.semantics, "link | route")->capture_default_str();
  e->add_option("--propagation", eval.propagation, "one | transitive")->capture_default_str();
  e->add_option("--out", eval.out, "Output directory")->capture_default_str();

  SweepOpts sweep;
  auto* w = app.add_subcommand("sweep", "Run the heuristic over an alpha x seed x demand grid");
  w->add_option("--scenario", sweep.scenario, "Base scenario file")->required();
  w->add_option("--alphas", sweep.alphas, "Comma-separated alpha values")->capture_default_str();
  w->add_option("--seeds", sweep.seeds, "Seeds per cell (base seed + 0..N-1)")->capture_default_str();
  w->add_option("--request-counts", sweep.request_counts, "Comma-separated request counts (regenerates demand)");
  w->add_option("--solver", sweep.solver, "baseline | heuristic")->capture_default_str();
  w->add_option("--semantics", sweep.semantics, "link | route")->capture_default_str();
  w->add_option("--threads", sweep.threads, "Worker threads (0: hardware; QKDNAR_THREADS caps)");
  w->add_option("--out", sweep.out, "CSV path (stdout when omitted)");

  ExportOpts lp;
  auto* x = app.add_subcommand("export-lp", "Write the ILP in CPLEX LP format");
  x->add_option("--scenario", lp.scenario, "Scenario file")->required();
  x->add_option("--out", lp.out, "LP path")->capture_default_str();
  x->add_option("--max-routes", lp.max_routes, "Candidate routes per node pair (default: scenario)");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  try {
    if (*g) return cmd_gen(gen, cov->count() > 0, out);
    if (*s) return cmd_solve(solve, args, out);
    if (*e) return cmd_eval(eval, args, out, err);
    if (*w) return cmd_sweep(sweep, out);
    if (*x) return cmd_export_lp(lp, out);
  } catch (const SizeGuardError& ex) {
    err << "size guard: " << ex.what() << "\n";
    return kExitSizeGuard;
  } catch (const IoError& ex) {
    err << "i/o error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& ex) {
    err << "i/o error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& ex) {
    err << "error: " << ex.what() << "\n";
    if (*g) err << "\n" << g->help();
    return kExitInvalid;
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitInvalid;
  }
  return kExitInvalid;
}

}  // namespace qkdnar
