#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "qkdnar/errors.hpp"
#include "qkdnar/solvers.hpp"

namespace qkdnar {

namespace {

constexpr long long kMaxLpVariables = 4'000'000;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Term {
  double coef;
  std::string var;
};

class LpWriter {
 public:
  explicit LpWriter(std::string fallback_var) : fallback_(std::move(fallback_var)) {}

  void row(const std::string& family, const std::string& name, const std::vector<Term>& terms,
           const char* op, double rhs) {
    ++counts_[family];
    out_ += ' ';
    out_ += name;
    out_ += ':';
    if (terms.empty()) {
      out_ += " 0 " + fallback_;
    }
    int on_line = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double c = terms[i].coef;
      if (on_line == 8) {
        out_ += "\n  ";
        on_line = 0;
      }
      out_ += c < 0 ? " - " : (i == 0 ? " " : " + ");
      if (std::abs(c) != 1.0) out_ += num(std::abs(c)) + ' ';
      out_ += terms[i].var;
      ++on_line;
    }
    out_ += ' ';
    out_ += op;
    out_ += ' ';
    out_ += num(rhs);
    out_ += '\n';
  }

  std::string& text() { return out_; }
  const std::map<std::string, long long>& counts() const { return counts_; }

 private:
  std::string fallback_;
  std::string out_;
  std::map<std::string, long long> counts_;
};

struct AuxLink {
  NodeId a, b;
  std::string tag;  // "e<a>_<b>"
  std::vector<int> routes;  // global route indices
};

struct PhiRoute {
  Route route;
  int aux;  // owning auxiliary link
  double rate;
};

}  // namespace

LpExport build_lp(const Scenario& scenario, int max_routes) {
  if (max_routes < 1) throw ValidationError("max_routes must be at least 1");
  scenario.validate();
  const auto& topo = scenario.topology;
  const int nN = topo.node_count();
  const int nEp = topo.link_count();
  const int W = topo.channels();
  const int T = scenario.horizon;
  const auto& reqs = scenario.requests;
  const int nD = static_cast<int>(reqs.size());

  // Request pairs, oriented as their lowest-id request.
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::map<NodePair, int> pair_index;
  std::vector<int> req_pair(nD);
  {
    std::vector<const Request*> by_id;
    for (const auto& r : reqs) by_id.push_back(&r);
    std::sort(by_id.begin(), by_id.end(), [](auto* x, auto* y) { return x->id < y->id; });
    for (const Request* r : by_id) {
      if (!pair_index.count(r->pair())) {
        pair_index[r->pair()] = static_cast<int>(pairs.size());
        pairs.emplace_back(r->src, r->dst);
      }
    }
    for (int d = 0; d < nD; ++d) req_pair[d] = pair_index.at(reqs[d].pair());
  }
  const int nP = static_cast<int>(pairs.size());

  std::vector<AuxLink> aux;
  std::vector<std::vector<int>> aux_at(nN * nN, std::vector<int>{});
  std::vector<PhiRoute> phi;
  long long incidences = 0;
  for (NodeId a = 0; a < nN; ++a) {
    for (NodeId b = 0; b < nN; ++b) {
      if (a == b) continue;
      AuxLink e{a, b, "e" + std::to_string(a) + "_" + std::to_string(b), {}};
      for (auto& r : enumerate_phi(topo, a, b, max_routes)) {
        e.routes.push_back(static_cast<int>(phi.size()));
        incidences += r.hop_count();
        const double rate = ob_route_rate(scenario.key_rates, r);
        phi.push_back({std::move(r), static_cast<int>(aux.size()), rate});
      }
      aux_at[a * nN + b].push_back(static_cast<int>(aux.size()));
      aux.push_back(std::move(e));
    }
  }
  const long long nEa = static_cast<long long>(aux.size());
  const long long nPhi = static_cast<long long>(phi.size());
  const long long nAllPairs = static_cast<long long>(nN) * (nN - 1) / 2;

  // Closed-form sizes from the index sets.
  LpCounts cf;
  const long long PEaWT = static_cast<long long>(nP) * nEa * W * T;
  const long long PWT = static_cast<long long>(nP) * W * T;
  cf.binaries = 3 * PEaWT                          // f, p, q
                + PWT * nPhi                        // x
                + static_cast<long long>(nP) * nEp * T  // xx
                + PWT                               // z
                + nPhi * T                          // B
                + static_cast<long long>(nD) * nPhi * T  // C
                + static_cast<long long>(nD) * T;   // y
  cf.integers = PWT          // u
                + PEaWT      // gamma
                + nAllPairs * T  // g
                + T;         // maxNAR
  cf.variables = cf.binaries + cf.integers;
  cf.by_family = {
      {"flow", static_cast<long long>(nP) * nN * W * T},
      {"f_or", 3 * PEaWT},
      {"modules", static_cast<long long>(nN) * T},
      {"route_select", PEaWT},
      {"route_excl", nPhi * W * T},
      {"link_excl", static_cast<long long>(nEp) * W * T},
      {"rate", PEaWT},
      {"rate_active", PWT},
      {"qkp_nonneg", nAllPairs * T},
      {"qkp_balance", nAllPairs * T},
      {"qkp_use", PEaWT},
      {"link_use", PWT * incidences},
      {"route_use", PWT * nPhi},
      {"affect", static_cast<long long>(nD) * T * incidences},
      {"nar", nPhi * T},
      {"serve", static_cast<long long>(nD) * T},
  };
  for (const auto& [_, n] : cf.by_family) cf.constraints += n;
  if (cf.variables > kMaxLpVariables)
    throw SizeGuardError("LP would have " + std::to_string(cf.variables) + " variables (limit " +
                         std::to_string(kMaxLpVariables) + "); lower max_routes or the demand");

  double max_k = 0.0;
  for (const auto& r : reqs) max_k = std::max(max_k, r.rate_kbps);
  const double big_m = scenario.key_rates.max_rate_kbps() * W + max_k;

  auto ts = [](int t) { return "_t" + std::to_string(t); };
  auto ps = [](int p) { return "_p" + std::to_string(p); };
  auto ws = [](int w) { return "_w" + std::to_string(w); };
  auto pewt = [&](const char* v, int p, int e, int w, int t) {
    return std::string(v) + ps(p) + "_" + aux[e].tag + ws(w) + ts(t);
  };
  auto f_ = [&](int p, int e, int w, int t) { return pewt("f", p, e, w, t); };
  auto pc_ = [&](int p, int e, int w, int t) { return pewt("pc", p, e, w, t); };
  auto q_ = [&](int p, int e, int w, int t) { return pewt("q", p, e, w, t); };
  auto gam_ = [&](int p, int e, int w, int t) { return pewt("gamma", p, e, w, t); };
  auto x_ = [&](int p, int r, int w, int t) {
    return "x" + ps(p) + "_" + aux[phi[r].aux].tag + ws(w) + ts(t) + "_r" + std::to_string(r);
  };
  auto xx_ = [&](int p, int t, LinkId l) { return "xx" + ps(p) + ts(t) + "_l" + std::to_string(l); };
  auto u_ = [&](int p, int w, int t) { return "u" + ps(p) + ws(w) + ts(t); };
  auto z_ = [&](int p, int w, int t) { return "z" + ps(p) + ws(w) + ts(t); };
  auto B_ = [&](int r, int t) { return "B_r" + std::to_string(r) + ts(t); };
  auto C_ = [&](int d, int r, int t) {
    return "C_d" + std::to_string(reqs[d].id) + "_r" + std::to_string(r) + ts(t);
  };
  auto g_ = [&](NodeId lo, NodeId hi, int t) {
    return "g_" + std::to_string(lo) + "_" + std::to_string(hi) + ts(t);
  };
  auto y_ = [&](int d, int t) { return "y_d" + std::to_string(reqs[d].id) + ts(t); };
  auto nar_ = [&](int t) { return "maxNAR_" + std::to_string(t); };

  LpExport out;
  out.big_m = big_m;
  out.infeasible_flag = W == 0 && nD > 0;

  // ---- header ----
  std::string h;
  auto hl = [&](const std::string& s) { h += "\\ " + s + "\n"; };
  hl("min-maxNAR routing and key caching ILP, CPLEX LP format");
  hl("instance hash: " + scenario_hash(scenario));
  if (out.infeasible_flag)
    hl("INFEASIBLE: no quantum channels (W = 0); requests that must be served cannot be");
  hl("");
  hl("index sets");
  hl("  |N_p| = " + std::to_string(nN) + "  |E_p| = " + std::to_string(nEp) +
     "  |E_a| = " + std::to_string(nEa) + "  node pairs (all) = " + std::to_string(nAllPairs));
  hl("  |P| = " + std::to_string(nP) + "  |D| = " + std::to_string(nD) + "  |W| = " +
     std::to_string(W) + "  |T| = " + std::to_string(T));
  hl("  |Phi| = " + std::to_string(nPhi) + " (sum over E_a, at most " + std::to_string(max_routes) +
     " per link, within " + num(scenario.key_rates.max_reach_km()) + " km)");
  hl("  route-link incidences H = " + std::to_string(incidences));
  hl("big-M = max key rate * |W| + max k_d = " + num(scenario.key_rates.max_rate_kbps()) + " * " +
     std::to_string(W) + " + " + num(max_k) + " = " + num(big_m));
  hl("");
  hl("closed-form variable counts");
  hl("  f, pc, q, gamma: |P||E_a||W||T| = " + std::to_string(PEaWT) + " each");
  hl("  x: |P||W||T||Phi| = " + std::to_string(PWT * nPhi));
  hl("  xx: |P||E_p||T| = " + std::to_string(static_cast<long long>(nP) * nEp * T));
  hl("  u, z: |P||W||T| = " + std::to_string(PWT) + " each");
  hl("  B: |Phi||T| = " + std::to_string(nPhi * T));
  hl("  C: |D||Phi||T| = " + std::to_string(static_cast<long long>(nD) * nPhi * T));
  hl("  g: pairs*|T| = " + std::to_string(nAllPairs * T));
  hl("  y: |D||T| = " + std::to_string(static_cast<long long>(nD) * T));
  hl("  maxNAR: |T| = " + std::to_string(T));
  hl("variables: " + std::to_string(cf.variables) + " (binary " + std::to_string(cf.binaries) +
     ", general integer " + std::to_string(cf.integers) + ")");
  hl("constraints: " + std::to_string(cf.constraints));
  for (const auto& [fam, n] : cf.by_family) hl("  " + fam + ": " + std::to_string(n));
  hl("");
  hl("constraint map (row prefix -> model constraint)");
  hl("  flow         sum_{S+(i)} f - sum_{S-(i)} f = z at a(p), -z at b(p), 0 elsewhere");
  hl("  f_or         f = q OR pc, as f >= q, f >= pc, f <= q + pc");
  hl("  modules      sum over p, e in S+(n) and S-(n), w of pc <= O_n");
  hl("  route_select sum_{phi in Phi_e} x = q");
  hl("  route_excl   sum_p x <= 1 per (e, w, t, phi)");
  hl("  link_excl    sum over p, e', phi containing e of x <= 1 per physical (e, w, t)");
  hl("  rate         u <= sum_phi x l_phi + gamma + M (1 - f)");
  hl("  rate_active  u <= M z");
  hl("  qkp_nonneg   g >= 0");
  hl("  qkp_balance  g_t <= g_{t-1} + sum_w u - sum gamma (both directions) - sum_d k_d y");
  hl("  qkp_use      gamma <= M q");
  hl("  link_use     xx_{e'} >= x for every phi containing e'");
  hl("  route_use    B_phi >= x");
  hl("  affect       C_phi^d >= xx^d_{e'} + B_phi - 1 for every e' in phi (AND of the two)");
  hl("  nar          maxNAR_t >= sum_d C_phi^d");
  hl("  serve        y_d^t = 1 when d is active in t, else 0");
  hl("");
  hl("pairs (a(p) > b(p))");
  for (int p = 0; p < nP; ++p)
    hl("  p" + std::to_string(p) + " = " + topo.nodes()[pairs[p].first].name + ">" +
       topo.nodes()[pairs[p].second].name);
  hl("nodes");
  for (NodeId n = 0; n < nN; ++n) hl("  " + std::to_string(n) + " = " + topo.nodes()[n].name);
  hl("physical links");
  for (LinkId l = 0; l < nEp; ++l) hl("  l" + std::to_string(l) + " = " + topo.link_label(l));
  hl("routes (l_phi in kb/s)");
  for (std::size_t r = 0; r < phi.size(); ++r)
    hl("  r" + std::to_string(r) + " = " + phi[r].route.label(topo) + "  l = " + num(phi[r].rate));
  hl("");

  LpWriter lp(nar_(0));
  std::string& s = lp.text();
  s = h;
  s += "Minimize\n obj:";
  for (int t = 0; t < T; ++t) s += (t ? " + " : " ") + nar_(t);
  s += "\nSubject To\n";

  for (int t = 0; t < T; ++t) {
    for (int w = 0; w < W; ++w) {
      for (int p = 0; p < nP; ++p) {
        for (NodeId i = 0; i < nN; ++i) {
          std::vector<Term> terms;
          for (NodeId j = 0; j < nN; ++j) {
            if (j == i) continue;
            terms.push_back({1, f_(p, aux_at[i * nN + j][0], w, t)});
            terms.push_back({-1, f_(p, aux_at[j * nN + i][0], w, t)});
          }
          if (i == pairs[p].first) terms.push_back({-1, z_(p, w, t)});
          if (i == pairs[p].second) terms.push_back({1, z_(p, w, t)});
          lp.row("flow", "flow" + ps(p) + "_n" + std::to_string(i) + ws(w) + ts(t), terms, "=", 0);
        }
        for (int e = 0; e < nEa; ++e) {
          const std::string tag = ps(p) + "_" + aux[e].tag + ws(w) + ts(t);
          lp.row("f_or", "f_or_q" + tag, {{1, f_(p, e, w, t)}, {-1, q_(p, e, w, t)}}, ">=", 0);
          lp.row("f_or", "f_or_p" + tag, {{1, f_(p, e, w, t)}, {-1, pc_(p, e, w, t)}}, ">=", 0);
          lp.row("f_or", "f_or_u" + tag,
                 {{1, f_(p, e, w, t)}, {-1, q_(p, e, w, t)}, {-1, pc_(p, e, w, t)}}, "<=", 0);
        }
      }
    }
    for (NodeId n = 0; n < nN; ++n) {
      std::vector<Term> terms;
      for (int p = 0; p < nP; ++p)
        for (int e = 0; e < nEa; ++e)
          if (aux[e].a == n || aux[e].b == n)
            for (int w = 0; w < W; ++w) terms.push_back({1, pc_(p, e, w, t)});
      lp.row("modules", "modules_n" + std::to_string(n) + ts(t), terms, "<=", topo.nodes()[n].modules);
    }
    for (int p = 0; p < nP; ++p)
      for (int e = 0; e < nEa; ++e)
        for (int w = 0; w < W; ++w) {
          std::vector<Term> terms;
          for (int r : aux[e].routes) terms.push_back({1, x_(p, r, w, t)});
          terms.push_back({-1, q_(p, e, w, t)});
          lp.row("route_select", "route_select" + ps(p) + "_" + aux[e].tag + ws(w) + ts(t), terms, "=", 0);
        }
    for (int r = 0; r < nPhi; ++r)
      for (int w = 0; w < W; ++w) {
        std::vector<Term> terms;
        for (int p = 0; p < nP; ++p) terms.push_back({1, x_(p, r, w, t)});
        lp.row("route_excl", "route_excl_r" + std::to_string(r) + ws(w) + ts(t), terms, "<=", 1);
      }
    for (LinkId l = 0; l < nEp; ++l)
      for (int w = 0; w < W; ++w) {
        std::vector<Term> terms;
        for (int r = 0; r < nPhi; ++r)
          if (phi[r].route.contains(l))
            for (int p = 0; p < nP; ++p) terms.push_back({1, x_(p, r, w, t)});
        lp.row("link_excl", "link_excl_l" + std::to_string(l) + ws(w) + ts(t), terms, "<=", 1);
      }
    for (int p = 0; p < nP; ++p)
      for (int w = 0; w < W; ++w) {
        for (int e = 0; e < nEa; ++e) {
          std::vector<Term> terms{{1, u_(p, w, t)}};
          for (int r : aux[e].routes) terms.push_back({-phi[r].rate, x_(p, r, w, t)});
          terms.push_back({-1, gam_(p, e, w, t)});
          terms.push_back({big_m, f_(p, e, w, t)});
          lp.row("rate", "rate" + ps(p) + "_" + aux[e].tag + ws(w) + ts(t), terms, "<=", big_m);
        }
        lp.row("rate_active", "rate_active" + ps(p) + ws(w) + ts(t),
               {{1, u_(p, w, t)}, {-big_m, z_(p, w, t)}}, "<=", 0);
      }
    for (NodeId lo = 0; lo < nN; ++lo)
      for (NodeId hi = lo + 1; hi < nN; ++hi) {
        const std::string tag = "_" + std::to_string(lo) + "_" + std::to_string(hi) + ts(t);
        lp.row("qkp_nonneg", "qkp_nonneg" + tag, {{1, g_(lo, hi, t)}}, ">=", 0);
        std::vector<Term> terms{{1, g_(lo, hi, t)}};
        if (t > 0) terms.push_back({-1, g_(lo, hi, t - 1)});
        auto it = pair_index.find(NodePair(lo, hi));
        if (it != pair_index.end())
          for (int w = 0; w < W; ++w) terms.push_back({-1, u_(it->second, w, t)});
        const int e_fwd = aux_at[lo * nN + hi][0];
        const int e_rev = aux_at[hi * nN + lo][0];
        for (int p = 0; p < nP; ++p)
          for (int w = 0; w < W; ++w) {
            terms.push_back({1, gam_(p, e_fwd, w, t)});
            terms.push_back({1, gam_(p, e_rev, w, t)});
          }
        for (int d = 0; d < nD; ++d)
          if (reqs[d].pair() == NodePair(lo, hi)) terms.push_back({reqs[d].rate_kbps, y_(d, t)});
        lp.row("qkp_balance", "qkp_balance" + tag, terms, "<=", 0);
      }
    for (int p = 0; p < nP; ++p)
      for (int e = 0; e < nEa; ++e)
        for (int w = 0; w < W; ++w)
          lp.row("qkp_use", "qkp_use" + ps(p) + "_" + aux[e].tag + ws(w) + ts(t),
                 {{1, gam_(p, e, w, t)}, {-big_m, q_(p, e, w, t)}}, "<=", 0);
    for (int p = 0; p < nP; ++p)
      for (int w = 0; w < W; ++w)
        for (int r = 0; r < nPhi; ++r) {
          for (LinkId l : phi[r].route.links)
            lp.row("link_use",
                   "link_use" + ps(p) + ws(w) + ts(t) + "_r" + std::to_string(r) + "_l" + std::to_string(l),
                   {{1, xx_(p, t, l)}, {-1, x_(p, r, w, t)}}, ">=", 0);
          lp.row("route_use", "route_use" + ps(p) + ws(w) + ts(t) + "_r" + std::to_string(r),
                 {{1, B_(r, t)}, {-1, x_(p, r, w, t)}}, ">=", 0);
        }
    for (int d = 0; d < nD; ++d)
      for (int r = 0; r < nPhi; ++r)
        for (LinkId l : phi[r].route.links)
          lp.row("affect",
                 "affect_d" + std::to_string(reqs[d].id) + ts(t) + "_r" + std::to_string(r) + "_l" +
                     std::to_string(l),
                 {{1, C_(d, r, t)}, {-1, xx_(req_pair[d], t, l)}, {-1, B_(r, t)}}, ">=", -1);
    for (int r = 0; r < nPhi; ++r) {
      std::vector<Term> terms{{1, nar_(t)}};
      for (int d = 0; d < nD; ++d) terms.push_back({-1, C_(d, r, t)});
      lp.row("nar", "nar_r" + std::to_string(r) + ts(t), terms, ">=", 0);
    }
    for (int d = 0; d < nD; ++d)
      lp.row("serve", "serve_d" + std::to_string(reqs[d].id) + ts(t), {{1, y_(d, t)}}, "=",
             reqs[d].active(t) ? 1 : 0);
  }

  // ---- declarations ----
  std::vector<std::string> bins, gens;
  for (int t = 0; t < T; ++t) {
    for (int p = 0; p < nP; ++p)
      for (int e = 0; e < nEa; ++e)
        for (int w = 0; w < W; ++w) {
          bins.push_back(f_(p, e, w, t));
          bins.push_back(pc_(p, e, w, t));
          bins.push_back(q_(p, e, w, t));
          gens.push_back(gam_(p, e, w, t));
        }
    for (int p = 0; p < nP; ++p)
      for (int w = 0; w < W; ++w) {
        for (int r = 0; r < nPhi; ++r) bins.push_back(x_(p, r, w, t));
        bins.push_back(z_(p, w, t));
        gens.push_back(u_(p, w, t));
      }
    for (int p = 0; p < nP; ++p)
      for (LinkId l = 0; l < nEp; ++l) bins.push_back(xx_(p, t, l));
    for (int r = 0; r < nPhi; ++r) {
      bins.push_back(B_(r, t));
      for (int d = 0; d < nD; ++d) bins.push_back(C_(d, r, t));
    }
    for (int d = 0; d < nD; ++d) bins.push_back(y_(d, t));
    for (NodeId lo = 0; lo < nN; ++lo)
      for (NodeId hi = lo + 1; hi < nN; ++hi) gens.push_back(g_(lo, hi, t));
    gens.push_back(nar_(t));
  }
  auto declare = [&](const char* section, const std::vector<std::string>& vars) {
    s += section;
    s += '\n';
    for (std::size_t i = 0; i < vars.size(); ++i) s += (i % 8 ? " " : (i ? "\n " : " ")) + vars[i];
    if (!vars.empty()) s += '\n';
  };
  declare("Binaries", bins);
  declare("Generals", gens);
  s += "End\n";

  out.counts.binaries = static_cast<long long>(bins.size());
  out.counts.integers = static_cast<long long>(gens.size());
  out.counts.variables = out.counts.binaries + out.counts.integers;
  out.counts.by_family = lp.counts();
  for (const auto& [_, n] : out.counts.by_family) out.counts.constraints += n;
  if (out.counts.variables != cf.variables || out.counts.constraints != cf.constraints ||
      out.counts.binaries != cf.binaries)
    throw std::logic_error("LP export: generated sizes disagree with the closed-form counts");
  out.text = std::move(s);
  return out;
}

LpExport export_lp(const Scenario& scenario, const std::filesystem::path& path, int max_routes) {
  LpExport lp = build_lp(scenario, max_routes);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << lp.text;
  if (!f) throw IoError("write failed: " + path.string());
  return lp;
}

}  // namespace qkdnar
