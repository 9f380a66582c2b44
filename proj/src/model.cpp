#include "qkdnar/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include "qkdnar/errors.hpp"
#include "qkdnar/rng.hpp"

namespace qkdnar {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(std::vector<Node> nodes, std::vector<Fiber> fibers, int channels)
    : nodes_(std::move(nodes)), fibers_(std::move(fibers)), channels_(channels) {
  if (channels_ < 0) throw ValidationError("channels: must be >= 0");
  std::set<std::string> seen;
  for (const auto& n : nodes_) {
    if (n.name.empty()) throw ValidationError("nodes.id: empty node id");
    if (!seen.insert(n.name).second)
      throw ValidationError("nodes.id: duplicate node id \"" + n.name + "\"");
    if (n.modules < 0)
      throw ValidationError("nodes.modules: negative budget at \"" + n.name + "\"");
  }
  const int n = node_count();
  std::set<std::pair<NodeId, NodeId>> declared;
  for (const auto& f : fibers_) {
    if (f.a < 0 || f.a >= n || f.b < 0 || f.b >= n)
      throw ValidationError("fibers: endpoint out of range");
    if (f.a == f.b)
      throw ValidationError("fibers: self-loop at \"" + nodes_[f.a].name + "\"");
    if (!(f.km > 0.0) || !std::isfinite(f.km))
      throw ValidationError("fibers.km: length must be > 0 on " + nodes_[f.a].name + "-" +
                            nodes_[f.b].name);
    if (!declared.insert({std::min(f.a, f.b), std::max(f.a, f.b)}).second)
      throw ValidationError("fibers: duplicate fiber " + nodes_[f.a].name + "-" +
                            nodes_[f.b].name);
    links_.push_back({f.a, f.b, f.km});
    links_.push_back({f.b, f.a, f.km});
  }
  out_.assign(n, {});
  for (LinkId e = 0; e < link_count(); ++e) out_[links_[e].src].push_back(e);
  for (auto& lst : out_) {
    std::sort(lst.begin(), lst.end(),
              [&](LinkId x, LinkId y) { return links_[x].dst < links_[y].dst; });
  }
}

std::optional<NodeId> Topology::find_node(std::string_view name) const {
  for (NodeId i = 0; i < node_count(); ++i)
    if (nodes_[i].name == name) return i;
  return std::nullopt;
}

std::optional<LinkId> Topology::find_link(NodeId src, NodeId dst) const {
  if (src < 0 || src >= node_count()) return std::nullopt;
  for (LinkId e : out_[src])
    if (links_[e].dst == dst) return e;
  return std::nullopt;
}

std::string Topology::link_label(LinkId e) const {
  const auto& l = link(e);
  return nodes_[l.src].name + ">" + nodes_[l.dst].name;
}

std::optional<LinkId> Topology::parse_link_label(std::string_view label) const {
  const auto pos = label.find('>');
  if (pos == std::string_view::npos) return std::nullopt;
  auto u = find_node(label.substr(0, pos));
  auto v = find_node(label.substr(pos + 1));
  if (!u || !v) return std::nullopt;
  return find_link(*u, *v);
}

int Topology::total_modules() const {
  return std::accumulate(nodes_.begin(), nodes_.end(), 0,
                         [](int acc, const Node& n) { return acc + n.modules; });
}

// ---------------------------------------------------------------------------
// Request / Architecture / Scenario

bool Request::active(int slot) const {
  return std::binary_search(slots.begin(), slots.end(), slot);
}

Architecture Architecture::obtr(int alpha) {
  if (alpha < 0 || alpha > 100) throw ValidationError("architecture: alpha must be in [0,100]");
  return {Kind::OBTR, alpha};
}

std::string Architecture::label() const {
  switch (kind) {
    case Kind::OB: return "OB";
    case Kind::TR: return "TR";
    case Kind::OBTR: return "OBTR" + std::to_string(alpha_percent);
  }
  return "?";
}

void Scenario::validate() const {
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  if (!(qkp_capacity_kbslot >= 0.0)) throw ValidationError("qkp_capacity: must be >= 0");
  if (theta < 0) throw ValidationError("theta: must be >= 0");
  if (k_neighborhood < 1) throw ValidationError("k_neighborhood: must be >= 1");
  if (tabu_tenure < 0) throw ValidationError("tabu_tenure: must be >= 0");
  if (max_routes < 1) throw ValidationError("max_routes: must be >= 1");
  if (architecture.alpha_percent < 0 || architecture.alpha_percent > 100)
    throw ValidationError("architecture: alpha must be in [0,100]");
  std::set<int> ids;
  for (const auto& r : requests) {
    const auto tag = "requests[" + std::to_string(r.id) + "]";
    if (!ids.insert(r.id).second) throw ValidationError(tag + ".id: duplicate");
    if (r.src < 0 || r.src >= topology.node_count() || r.dst < 0 ||
        r.dst >= topology.node_count())
      throw ValidationError(tag + ": endpoint not in topology");
    if (r.src == r.dst) throw ValidationError(tag + ": src == dst");
    if (!(r.rate_kbps > 0.0)) throw ValidationError(tag + ".rate: must be > 0");
    if (r.slots.empty()) throw ValidationError(tag + ".slots: empty");
    for (int t : r.slots)
      if (t < 0 || t >= horizon) throw ValidationError(tag + ".slots: slot outside horizon");
    if (!std::is_sorted(r.slots.begin(), r.slots.end()) ||
        std::adjacent_find(r.slots.begin(), r.slots.end()) != r.slots.end())
      throw ValidationError(tag + ".slots: must be sorted and unique");
  }
}

// ---------------------------------------------------------------------------
// Builders

Topology build_poliqi(int channels) {
  std::vector<Node> nodes;
  for (const char* name : {"A", "B", "C", "D", "E"}) nodes.push_back({name, 10});
  std::vector<Fiber> fibers;
  for (int i = 0; i < 5; ++i) fibers.push_back({i, (i + 1) % 5, 10.0});
  return Topology(std::move(nodes), std::move(fibers), channels);
}

Topology build_nsf(std::uint64_t seed, int modules_per_node, int channels) {
  static constexpr std::pair<int, int> kAdjacency[] = {
      {1, 2},  {1, 3},  {1, 8},   {2, 3},   {2, 4},   {3, 6},   {4, 5},
      {4, 11}, {5, 6},  {5, 7},   {6, 10},  {6, 14},  {7, 8},   {8, 9},
      {9, 10}, {9, 12}, {9, 13},  {11, 12}, {11, 13}, {12, 14}, {13, 14}};
  std::vector<Node> nodes;
  for (int i = 1; i <= 14; ++i) nodes.push_back({std::to_string(i), modules_per_node});
  Rng rng(seed, stream::kLengths);
  std::vector<Fiber> fibers;
  for (const auto& [a, b] : kAdjacency) fibers.push_back({a - 1, b - 1, rng.uniform(5.0, 15.0)});
  return Topology(std::move(nodes), std::move(fibers), channels);
}

namespace {

std::vector<NodePair> all_pairs(const Topology& topo) {
  std::vector<NodePair> pairs;
  for (NodeId i = 0; i < topo.node_count(); ++i)
    for (NodeId j = i + 1; j < topo.node_count(); ++j) pairs.emplace_back(i, j);
  return pairs;
}

std::vector<Request> make_requests(const std::vector<NodePair>& chosen, std::uint64_t seed,
                                   int horizon) {
  const int n = static_cast<int>(chosen.size());
  // Exactly floor(0.8 n) low-rate requests; the classes are shuffled.
  const int low = static_cast<int>(std::floor(0.8 * n + 1e-9));
  std::vector<bool> high(n, false);
  std::fill(high.begin() + low, high.end(), true);
  Rng rates(seed, stream::kDemandRates);
  rates.shuffle(high.begin(), high.end());

  std::vector<int> slots(horizon);
  std::iota(slots.begin(), slots.end(), 0);

  Rng orient(seed, stream::kDemandPairs, 1);
  std::vector<Request> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    const bool flip = orient.bernoulli(0.5);
    Request r;
    r.id = i;
    r.src = flip ? chosen[i].hi : chosen[i].lo;
    r.dst = flip ? chosen[i].lo : chosen[i].hi;
    r.rate_kbps = high[i] ? rates.uniform(15.0, 25.0) : rates.uniform(5.0, 10.0);
    r.slots = slots;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<Request> generate_demands(const Topology& topo, double coverage, std::uint64_t seed,
                                      int horizon) {
  if (!(coverage > 0.0) || coverage > 1.0)
    throw ValidationError("coverage: must be in (0, 1]");
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  auto pairs = all_pairs(topo);
  const auto count = static_cast<std::size_t>(std::floor(coverage * pairs.size() + 1e-9));
  if (count == 0) throw ValidationError("coverage: selects no node pair");
  Rng rng(seed, stream::kDemandPairs);
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + rng.below(pairs.size() - i);
    std::swap(pairs[i], pairs[j]);
  }
  pairs.resize(count);
  return make_requests(pairs, seed, horizon);
}

std::vector<Request> generate_demands_count(const Topology& topo, int count, std::uint64_t seed,
                                            int horizon) {
  if (count < 1) throw ValidationError("request count: must be >= 1");
  if (horizon < 1) throw ValidationError("horizon: must be >= 1");
  const auto pairs = all_pairs(topo);
  if (pairs.empty()) throw ValidationError("topology: needs at least two nodes");
  Rng rng(seed, stream::kDemandPairs);
  std::vector<NodePair> chosen;
  while (static_cast<int>(chosen.size()) < count) {
    auto round = pairs;
    rng.shuffle(round.begin(), round.end());
    for (const auto& p : round) {
      if (static_cast<int>(chosen.size()) == count) break;
      chosen.push_back(p);
    }
  }
  return make_requests(chosen, seed, horizon);
}

Scenario poliqi_scenario(Architecture arch, int horizon) {
  Scenario s;
  s.topology = build_poliqi();
  s.architecture = arch;
  s.horizon = horizon;
  // Five clockwise neighbour pairs plus two two-hop pairs.
  static constexpr std::pair<int, int> kPairs[] = {{0, 1}, {1, 2}, {2, 3}, {3, 4},
                                                   {4, 0}, {0, 2}, {1, 3}};
  std::vector<int> slots(horizon);
  std::iota(slots.begin(), slots.end(), 0);
  int id = 0;
  for (const auto& [a, b] : kPairs) s.requests.push_back({id++, a, b, 10.0, slots});
  return s;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
T get_field(const json& j, const char* key, const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(ctx + "." + key + ": missing");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(ctx + "." + key + ": wrong type");
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& ctx) {
  if (!j.contains(key)) return fallback;
  return get_field<T>(j, key, ctx);
}

NodeId node_ref(const Topology& topo, const json& v, const std::string& ctx) {
  std::string name;
  if (v.is_string()) {
    name = v.get<std::string>();
  } else if (v.is_number_integer()) {
    name = std::to_string(v.get<long long>());
  } else {
    throw ParseError(ctx + ": node reference must be a string");
  }
  auto id = topo.find_node(name);
  if (!id) throw ValidationError(ctx + ": unknown node \"" + name + "\"");
  return *id;
}

}  // namespace

Topology topology_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("topology: expected an object");
  const auto& jn = j.contains("nodes") ? j.at("nodes") : throw ParseError("topology.nodes: missing");
  if (!jn.is_array()) throw ParseError("topology.nodes: expected an array");
  std::vector<Node> nodes;
  for (const auto& n : jn) {
    Node node;
    const auto& id = n.is_object() && n.contains("id") ? n.at("id")
                                                         : throw ParseError("nodes.id: missing");
    if (id.is_string()) {
      node.name = id.get<std::string>();
    } else if (id.is_number_integer()) {
      node.name = std::to_string(id.get<long long>());
    } else {
      throw ParseError("nodes.id: expected a string");
    }
    node.modules = get_field<int>(n, "modules", "nodes[" + node.name + "]");
    nodes.push_back(std::move(node));
  }
  const int channels = get_field<int>(j, "channels", "topology");
  // Resolve fiber endpoints against a node-only topology first so the error
  // names the dangling id.
  Topology names_only(nodes, {}, std::max(channels, 0));
  const auto& jf = j.contains("fibers") ? j.at("fibers") : throw ParseError("topology.fibers: missing");
  if (!jf.is_array()) throw ParseError("topology.fibers: expected an array");
  std::vector<Fiber> fibers;
  for (std::size_t i = 0; i < jf.size(); ++i) {
    const auto ctx = "fibers[" + std::to_string(i) + "]";
    const auto& f = jf[i];
    if (!f.is_object() || !f.contains("a") || !f.contains("b"))
      throw ParseError(ctx + ": needs a and b");
    Fiber fiber;
    fiber.a = node_ref(names_only, f.at("a"), ctx + ".a");
    fiber.b = node_ref(names_only, f.at("b"), ctx + ".b");
    fiber.km = get_field<double>(f, "km", ctx);
    fibers.push_back(fiber);
  }
  return Topology(std::move(nodes), std::move(fibers), channels);
}

json topology_to_json(const Topology& topo) {
  json nodes = json::array();
  for (const auto& n : topo.nodes()) nodes.push_back({{"id", n.name}, {"modules", n.modules}});
  json fibers = json::array();
  for (const auto& f : topo.fibers())
    fibers.push_back({{"a", topo.node(f.a).name}, {"b", topo.node(f.b).name}, {"km", f.km}});
  return {{"nodes", nodes}, {"fibers", fibers}, {"channels", topo.channels()}};
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

Topology load_topology(const std::filesystem::path& path) {
  return topology_from_json(read_json_file(path));
}

Architecture architecture_from_json(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "OB") return Architecture::ob();
    if (s == "TR") return Architecture::tr();
    if (s == "OBTR") return Architecture::obtr(0);
    throw ParseError("architecture: unknown value \"" + s + "\"");
  }
  if (j.is_object() && j.contains("OBTR")) {
    const auto& a = j.at("OBTR");
    if (!a.is_number_integer()) throw ParseError("architecture.OBTR: expected an integer");
    return Architecture::obtr(a.get<int>());
  }
  throw ParseError("architecture: expected \"OB\", \"TR\" or {\"OBTR\": alpha}");
}

json architecture_to_json(const Architecture& arch) {
  switch (arch.kind) {
    case Architecture::Kind::OB: return "OB";
    case Architecture::Kind::TR: return "TR";
    case Architecture::Kind::OBTR: return {{"OBTR", arch.alpha_percent}};
  }
  return nullptr;
}

Scenario scenario_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError("scenario: expected an object");
  Scenario s;
  if (!j.contains("topology")) throw ParseError("scenario.topology: missing");
  const auto& jt = j.at("topology");
  if (jt.is_string()) {
    std::filesystem::path p = jt.get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    s.topology = load_topology(p);
  } else {
    s.topology = topology_from_json(jt);
  }
  s.horizon = get_or<int>(j, "horizon", 1, "scenario");
  s.qkp_capacity_kbslot = get_or<double>(j, "qkp_capacity", 50.0, "scenario");
  s.seed = get_or<std::uint64_t>(j, "seed", 1, "scenario");
  s.theta = get_or<int>(j, "theta", 200, "scenario");
  s.k_neighborhood = get_or<int>(j, "k_neighborhood", 4, "scenario");
  s.tabu_tenure = get_or<int>(j, "tabu_tenure", 7, "scenario");
  s.max_routes = get_or<int>(j, "max_routes", 8, "scenario");
  s.reverse_channels = get_or<bool>(j, "reverse_channels", false, "scenario");
  s.architecture =
      j.contains("architecture") ? architecture_from_json(j.at("architecture")) : Architecture{};
  if (s.horizon < 1) throw ValidationError("horizon: must be >= 1");

  if (j.contains("key_rate_table")) {
    const auto& jk = j.at("key_rate_table");
    std::vector<RateAnchor> anchors;
    for (const auto& a : get_field<json>(jk, "anchors", "key_rate_table")) {
      if (!a.is_array() || a.size() != 2) throw ParseError("key_rate_table.anchors: expected [km, rate]");
      anchors.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    s.key_rates = KeyRateTable(std::move(anchors),
                               get_or<double>(jk, "ob_penalty", 0.11, "key_rate_table"));
  }

  if (!j.contains("requests")) throw ParseError("scenario.requests: missing");
  const auto& jr = j.at("requests");
  if (jr.is_array()) {
    std::vector<int> all(s.horizon);
    std::iota(all.begin(), all.end(), 0);
    int next_id = 0;
    for (std::size_t i = 0; i < jr.size(); ++i) {
      const auto ctx = "requests[" + std::to_string(i) + "]";
      const auto& r = jr[i];
      if (!r.is_object()) throw ParseError(ctx + ": expected an object");
      Request req;
      req.id = get_or<int>(r, "id", next_id, ctx);
      next_id = req.id + 1;
      if (!r.contains("src") || !r.contains("dst")) throw ParseError(ctx + ": needs src and dst");
      req.src = node_ref(s.topology, r.at("src"), ctx + ".src");
      req.dst = node_ref(s.topology, r.at("dst"), ctx + ".dst");
      req.rate_kbps = get_field<double>(r, "rate", ctx);
      req.slots = get_or<std::vector<int>>(r, "slots", all, ctx);
      s.requests.push_back(std::move(req));
    }
  } else if (jr.is_object()) {
    const auto seed = get_or<std::uint64_t>(jr, "seed", s.seed, "requests");
    if (jr.contains("count")) {
      s.requests = generate_demands_count(s.topology, get_field<int>(jr, "count", "requests"),
                                          seed, s.horizon);
    } else {
      s.requests = generate_demands(s.topology, get_field<double>(jr, "coverage", "requests"),
                                    seed, s.horizon);
    }
  } else {
    throw ParseError("scenario.requests: expected an array or a generator object");
  }
  s.validate();
  return s;
}

json scenario_to_json(const Scenario& s) {
  json reqs = json::array();
  for (const auto& r : s.requests) {
    reqs.push_back({{"id", r.id},
                    {"src", s.topology.node(r.src).name},
                    {"dst", s.topology.node(r.dst).name},
                    {"rate", r.rate_kbps},
                    {"slots", r.slots}});
  }
  json anchors = json::array();
  for (const auto& a : s.key_rates.anchors()) anchors.push_back({a.reach_km, a.rate_kbps});
  return {{"topology", topology_to_json(s.topology)},
          {"requests", reqs},
          {"architecture", architecture_to_json(s.architecture)},
          {"horizon", s.horizon},
          {"qkp_capacity", s.qkp_capacity_kbslot},
          {"seed", s.seed},
          {"theta", s.theta},
          {"k_neighborhood", s.k_neighborhood},
          {"tabu_tenure", s.tabu_tenure},
          {"max_routes", s.max_routes},
          {"reverse_channels", s.reverse_channels},
          {"key_rate_table", {{"anchors", anchors}, {"ob_penalty", s.key_rates.ob_penalty_per_node()}}}};
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path), path.parent_path());
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  write_text_file(path, scenario_to_json(s).dump(2) + "\n");
}

std::string scenario_hash(const Scenario& s) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(scenario_to_json(s).dump());
  return os.str();
}

}  // namespace qkdnar
