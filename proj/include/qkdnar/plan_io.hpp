#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkdnar/model.hpp"
#include "qkdnar/nar.hpp"
#include "qkdnar/solvers.hpp"

namespace qkdnar {

// Plan records:
//   {"kind":"OB","request":3,"pair":["A","C"],"slot":0,
//    "links":["A>B","B>C"],"wavelength":0,"delivered":11.57}
//   {"kind":"TR",...,"hops":[{"links":["A>B"],"wavelength":1},...]}
//   {"kind":"QKP",...,"amount":10}
// Caching channels have "request": null and "purpose": "cache".
nlohmann::json realization_to_json(const Topology& topo, const Realization& r);
Realization realization_from_json(const Topology& topo, const nlohmann::json& j);

nlohmann::json plan_to_json(const Topology& topo, std::span<const Realization> plan);
std::vector<Realization> plan_from_json(const Topology& topo, const nlohmann::json& j);
std::vector<Realization> load_plan(const Topology& topo, const std::filesystem::path& path);

// Per-target request lists longer than `elide_above` are dropped; counts stay.
nlohmann::json nar_report_to_json(const NarReport& report, std::size_t elide_above = 32);
std::string nar_report_csv(const NarReport& report);  // t,maxNAR,avgNAR,targets

nlohmann::json result_to_json(const Scenario& scenario, const SolveResult& result,
                              const SolveOptions& opts);

// t,maxNAR,avgNAR,served,unserved,modules_avg,qkp_total_kbslot
std::string summary_csv(const SolveResult& result);

// Fixed-width per-slot table for terminals.
std::string slot_table(const SolveResult& result);

}  // namespace qkdnar
