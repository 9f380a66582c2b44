#pragma once

#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace lpread {

// Independent reading of an LP file: rows under "Subject To", declared
// variables, and every identifier used in the objective or a row.
struct ParsedLp {
  std::map<std::string, long long> rows_by_prefix;
  long long rows = 0;
  std::set<std::string> binaries;
  std::set<std::string> generals;
  std::set<std::string> used;
  std::map<std::string, long long> header;
};

inline std::string family_of(const std::string& row_name) {
  static const std::vector<std::string> families{
      "flow",       "f_or",        "modules",  "route_select", "route_excl", "link_excl",
      "rate_active", "rate",       "qkp_nonneg", "qkp_balance", "qkp_use",   "link_use",
      "route_use",  "affect",      "nar",      "serve"};
  // Longest matching prefix wins ("rate_active" over "rate").
  std::string best;
  for (const auto& f : families)
    if (row_name.rfind(f, 0) == 0 && f.size() > best.size()) best = f;
  return best;
}

inline ParsedLp parse_lp(const std::string& text) {
  ParsedLp p;
  std::istringstream in(text);
  std::string line;
  enum { Header, Objective, Rows, Bins, Gens, Done } section = Header;
  const std::regex ident(R"([A-Za-z_][A-Za-z0-9_]*)");
  const std::regex header_count(R"(^\\\s+(variables|constraints): (\d+))");
  auto collect = [&](const std::string& s) {
    for (std::sregex_iterator it(s.begin(), s.end(), ident), end; it != end; ++it) p.used.insert(it->str());
  };
  while (std::getline(in, line)) {
    if (line.rfind("\\", 0) == 0) {
      std::smatch m;
      if (std::regex_search(line, m, header_count)) p.header[m[1]] = std::stoll(m[2]);
      continue;
    }
    if (line == "Minimize") { section = Objective; continue; }
    if (line == "Subject To") { section = Rows; continue; }
    if (line == "Binaries") { section = Bins; continue; }
    if (line == "Generals") { section = Gens; continue; }
    if (line == "End") { section = Done; continue; }
    switch (section) {
      case Objective:
        collect(line.substr(line.find(':') + 1));
        break;
      case Rows: {
        const auto colon = line.find(':');
        if (line.rfind(" ", 0) == 0 && line.rfind("  ", 0) != 0 && colon != std::string::npos) {
          const std::string name = line.substr(1, colon - 1);
          ++p.rows;
          ++p.rows_by_prefix[family_of(name)];
          collect(line.substr(colon + 1));
        } else {
          collect(line);
        }
        break;
      }
      case Bins:
      case Gens: {
        std::istringstream words(line);
        std::string w;
        while (words >> w) (section == Bins ? p.binaries : p.generals).insert(w);
        break;
      }
      default:
        break;
    }
  }
  return p;
}

}  // namespace lpread
