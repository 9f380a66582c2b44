#include "qkdnar/plan_io.hpp"

#include <cstdio>

#include "qkdnar/errors.hpp"

namespace qkdnar {

using nlohmann::json;

namespace {

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

json links_json(const Topology& topo, const Route& route) {
  json a = json::array();
  for (LinkId e : route.links) a.push_back(topo.link_label(e));
  return a;
}

Route route_from_json(const Topology& topo, const json& links, const std::string& ctx) {
  if (!links.is_array() || links.empty()) throw ParseError(ctx + ".links: expected a non-empty array");
  std::vector<LinkId> ids;
  for (const auto& l : links) {
    if (!l.is_string()) throw ParseError(ctx + ".links: expected \"u>v\" strings");
    auto id = topo.parse_link_label(l.get<std::string>());
    if (!id) throw ValidationError(ctx + ": unknown link \"" + l.get<std::string>() + "\"");
    ids.push_back(*id);
  }
  try {
    return Route::from_links(topo, ids);
  } catch (const ValidationError& e) {
    throw ValidationError("route contiguity: " + ctx + ": " + e.what());
  }
}

int wavelength_from_json(const json& j, const std::string& ctx) {
  if (!j.contains("wavelength") || !j.at("wavelength").is_number_integer())
    throw ParseError(ctx + ".wavelength: expected an integer");
  return j.at("wavelength").get<int>();
}

}  // namespace

json realization_to_json(const Topology& topo, const Realization& r) {
  json j;
  j["kind"] = std::string(to_string(r.kind));
  j["request"] = r.is_cache() ? json(nullptr) : json(r.request_id);
  if (r.is_cache()) j["purpose"] = "cache";
  j["pair"] = {topo.nodes()[r.pair.lo].name, topo.nodes()[r.pair.hi].name};
  j["slot"] = r.slot;
  switch (r.kind) {
    case RealizationKind::OB:
      j["links"] = links_json(topo, r.hops.at(0).route);
      j["wavelength"] = r.hops.at(0).wavelength;
      break;
    case RealizationKind::TR: {
      json hops = json::array();
      for (const auto& h : r.hops) hops.push_back({{"links", links_json(topo, h.route)}, {"wavelength", h.wavelength}});
      j["hops"] = std::move(hops);
      break;
    }
    case RealizationKind::QKP:
      j["amount"] = r.amount_kbslot;
      break;
  }
  j["delivered"] = r.delivered_kbps;
  return j;
}

Realization realization_from_json(const Topology& topo, const json& j) {
  if (!j.is_object()) throw ParseError("plan record: expected an object");
  const std::string ctx = "plan record";
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ParseError(ctx + ".kind: missing");
  Realization r;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "OB") {
    r.kind = RealizationKind::OB;
  } else if (kind == "TR") {
    r.kind = RealizationKind::TR;
  } else if (kind == "QKP") {
    r.kind = RealizationKind::QKP;
  } else {
    throw ParseError(ctx + ".kind: expected OB, TR or QKP, got \"" + kind + "\"");
  }
  if (!j.contains("request")) throw ParseError(ctx + ".request: missing");
  const auto& req = j.at("request");
  if (req.is_null()) {
    r.request_id = -1;
  } else if (req.is_number_integer()) {
    r.request_id = req.get<int>();
    if (r.request_id < 0) throw ParseError(ctx + ".request: negative id");
  } else {
    throw ParseError(ctx + ".request: expected an integer or null");
  }
  if (!j.contains("slot") || !j.at("slot").is_number_integer()) throw ParseError(ctx + ".slot: missing");
  r.slot = j.at("slot").get<int>();

  if (r.kind == RealizationKind::OB) {
    if (!j.contains("links")) throw ParseError(ctx + ".links: missing");
    r.hops.push_back({route_from_json(topo, j.at("links"), ctx), wavelength_from_json(j, ctx)});
  } else if (r.kind == RealizationKind::TR) {
    if (!j.contains("hops") || !j.at("hops").is_array() || j.at("hops").empty())
      throw ParseError(ctx + ".hops: expected a non-empty array");
    for (const auto& h : j.at("hops")) {
      if (!h.is_object() || !h.contains("links")) throw ParseError(ctx + ".hops.links: missing");
      r.hops.push_back({route_from_json(topo, h.at("links"), ctx), wavelength_from_json(h, ctx + ".hops")});
    }
  } else {
    if (!j.contains("amount") || !j.at("amount").is_number()) throw ParseError(ctx + ".amount: missing");
    r.amount_kbslot = j.at("amount").get<double>();
    r.delivered_kbps = r.amount_kbslot;
  }

  if (j.contains("pair")) {
    const auto& p = j.at("pair");
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ParseError(ctx + ".pair: expected two node names");
    auto a = topo.find_node(p[0].get<std::string>());
    auto b = topo.find_node(p[1].get<std::string>());
    if (!a) throw ValidationError(ctx + ".pair: unknown node \"" + p[0].get<std::string>() + "\"");
    if (!b) throw ValidationError(ctx + ".pair: unknown node \"" + p[1].get<std::string>() + "\"");
    if (*a == *b) throw ValidationError(ctx + ".pair: identical endpoints");
    r.pair = NodePair(*a, *b);
  } else if (r.is_channel()) {
    r.pair = NodePair(r.hops.front().route.src(), r.hops.back().route.dst());
  } else {
    throw ParseError(ctx + ".pair: required for QKP draws");
  }
  if (r.is_channel() && j.contains("delivered") && j.at("delivered").is_number())
    r.delivered_kbps = j.at("delivered").get<double>();
  return r;
}

json plan_to_json(const Topology& topo, std::span<const Realization> plan) {
  json a = json::array();
  for (const auto& r : plan) a.push_back(realization_to_json(topo, r));
  return a;
}

std::vector<Realization> plan_from_json(const Topology& topo, const json& j) {
  const json* arr = &j;
  if (j.is_object() && j.contains("plan")) arr = &j.at("plan");
  if (!arr->is_array()) throw ParseError("plan: expected an array of records");
  std::vector<Realization> out;
  for (const auto& r : *arr) out.push_back(realization_from_json(topo, r));
  return out;
}

std::vector<Realization> load_plan(const Topology& topo, const std::filesystem::path& path) {
  return plan_from_json(topo, read_json_file(path));
}

json nar_report_to_json(const NarReport& report, std::size_t elide_above) {
  json slots = json::array();
  for (const auto& s : report.slots) {
    json targets = json::array();
    for (const auto& t : s.targets) {
      json jt{{"target", t.target}, {"count", t.requests.size()}};
      if (t.requests.size() <= elide_above)
        jt["requests"] = t.requests;
      else
        jt["requests_elided"] = true;
      targets.push_back(std::move(jt));
    }
    slots.push_back({{"slot", s.slot}, {"max_nar", s.max_nar}, {"avg_nar", s.avg_nar}, {"targets", std::move(targets)}});
  }
  return {{"semantics", std::string(to_string(report.semantics))},
          {"propagation", std::string(to_string(report.propagation))},
          {"objective", report.objective()},
          {"slots", std::move(slots)}};
}

std::string nar_report_csv(const NarReport& report) {
  std::string out = "t,maxNAR,avgNAR,targets\n";
  for (const auto& s : report.slots)
    out += std::to_string(s.slot) + "," + std::to_string(s.max_nar) + "," + fmt_num(s.avg_nar) + "," +
           std::to_string(s.targets.size()) + "\n";
  return out;
}

json result_to_json(const Scenario& scenario, const SolveResult& result, const SolveOptions& opts) {
  json slots = json::array();
  for (const auto& s : result.slots) {
    slots.push_back({{"slot", s.slot},
                     {"max_nar", s.max_nar},
                     {"avg_nar", s.avg_nar},
                     {"served", s.served},
                     {"unserved", s.unserved},
                     {"modules_avg", s.modules_avg},
                     {"modules_per_node", s.modules_per_node},
                     {"qkp_total_kbslot", s.qkp_total_kbslot}});
  }
  json ledger = json::array();
  const auto& topo = scenario.topology;
  for (const auto& e : result.ledger) {
    ledger.push_back({{"slot", e.slot},
                      {"pair", {topo.nodes()[e.pair.lo].name, topo.nodes()[e.pair.hi].name}},
                      {"opening", e.opening},
                      {"deposited", e.deposited},
                      {"drawn", e.drawn},
                      {"closing", e.closing}});
  }
  json modules = json::object();
  for (std::size_t n = 0; n < result.modules_avg_per_node.size(); ++n)
    modules[topo.nodes()[n].name] = result.modules_avg_per_node[n];
  return {{"solver", result.solver},
          {"scenario_hash", scenario_hash(scenario)},
          {"architecture", scenario.architecture.label()},
          {"semantics", std::string(to_string(opts.semantics))},
          {"propagation", std::string(to_string(opts.propagation))},
          {"objective", result.objective()},
          {"unserved_total", result.unserved_total()},
          {"iterations", result.iterations},
          {"wallclock_s", result.wallclock_s},
          {"slots", std::move(slots)},
          {"modules_avg_per_node", std::move(modules)},
          {"qkp_ledger", std::move(ledger)},
          {"nar", nar_report_to_json(result.nar)}};
}

std::string summary_csv(const SolveResult& result) {
  std::string out = "t,maxNAR,avgNAR,served,unserved,modules_avg,qkp_total_kbslot\n";
  for (const auto& s : result.slots)
    out += std::to_string(s.slot) + "," + std::to_string(s.max_nar) + "," + fmt_num(s.avg_nar) + "," +
           std::to_string(s.served.size()) + "," + std::to_string(s.unserved.size()) + "," +
           fmt_num(s.modules_avg) + "," + fmt_num(s.qkp_total_kbslot) + "\n";
  return out;
}

std::string slot_table(const SolveResult& result) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%4s %7s %8s %7s %9s %12s %10s\n", "t", "maxNAR", "avgNAR", "served",
                "unserved", "modules_avg", "qkp_total");
  out += line;
  for (const auto& s : result.slots) {
    std::snprintf(line, sizeof line, "%4d %7d %8.3f %7zu %9zu %12.3f %10.2f\n", s.slot, s.max_nar, s.avg_nar,
                  s.served.size(), s.unserved.size(), s.modules_avg, s.qkp_total_kbslot);
    out += line;
  }
  return out;
}

}  // namespace qkdnar
