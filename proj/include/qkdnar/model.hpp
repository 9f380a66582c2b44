#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkdnar/keyrate.hpp"
#include "qkdnar/topology.hpp"

namespace qkdnar {

struct Request {
  int id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  double rate_kbps = 0.0;
  std::vector<int> slots;  // sorted, unique

  NodePair pair() const { return {src, dst}; }
  bool active(int slot) const;

  bool operator==(const Request&) const = default;
};

// Which channel realizations a network can build.
struct Architecture {
  enum class Kind { OB, TR, OBTR };

  Kind kind = Kind::OBTR;
  int alpha_percent = 0;  // OBTR only: chance (in %) of an initial TR choice

  static Architecture ob() { return {Kind::OB, 0}; }
  static Architecture tr() { return {Kind::TR, 0}; }
  static Architecture obtr(int alpha);

  bool allows_ob() const { return kind != Kind::TR; }
  bool allows_tr() const { return kind != Kind::OB; }

  // "OB", "TR", "OBTR80"
  std::string label() const;

  bool operator==(const Architecture&) const = default;
};

struct Scenario {
  Topology topology;
  std::vector<Request> requests;
  Architecture architecture;
  int horizon = 1;
  double qkp_capacity_kbslot = 50.0;
  std::uint64_t seed = 1;
  int theta = 200;
  int k_neighborhood = 4;
  int tabu_tenure = 7;
  int max_routes = 8;  // bound on candidate routes per node pair
  bool reverse_channels = false;  // heuristic and exact may also run a channel from dst to src
  KeyRateTable key_rates;

  // Throws ValidationError on broken invariants.
  void validate() const;

  bool operator==(const Scenario&) const = default;
};

// ---- builders ----

// Five-node ring A..E, 10 km links, ten modules per node.
Topology build_poliqi(int channels = 8);

// 14-node, 21-fiber NSF backbone with fiber lengths drawn from [5, 15] km.
Topology build_nsf(std::uint64_t seed, int modules_per_node = 5, int channels = 16);

// Picks floor(coverage * #pairs) unordered pairs without replacement. 80% of
// requests draw a rate from [5, 10] kb/s and the rest from [15, 25] kb/s.
std::vector<Request> generate_demands(const Topology& topo, double coverage,
                                      std::uint64_t seed, int horizon);

// Fixed request count. Counts above the number of node pairs cycle through
// fresh shuffles of all pairs, so pairs repeat as evenly as possible.
std::vector<Request> generate_demands_count(const Topology& topo, int count,
                                            std::uint64_t seed, int horizon);

// The bundled seven-request PoliQi instance (10 kb/s each).
Scenario poliqi_scenario(Architecture arch, int horizon = 1);

// ---- file formats ----

Topology topology_from_json(const nlohmann::json& j);
nlohmann::json topology_to_json(const Topology& topo);
Topology load_topology(const std::filesystem::path& path);

Architecture architecture_from_json(const nlohmann::json& j);
nlohmann::json architecture_to_json(const Architecture& arch);

// `base_dir` resolves relative topology paths.
Scenario scenario_from_json(const nlohmann::json& j,
                            const std::filesystem::path& base_dir = {});
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& s, const std::filesystem::path& path);

// Stable 64-bit hash of the canonical scenario JSON, as 16 hex digits.
std::string scenario_hash(const Scenario& s);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace qkdnar
