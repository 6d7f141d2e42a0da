#include "dgff/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace dgff {

namespace {

struct ParseError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

[[noreturn]] void fail(const std::string& origin, int line,
                       const std::string& msg) {
  throw ParseError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& v, const std::string& origin, int line,
                    const std::string& key) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(origin, line, "field '" + key + "': expected a number, got '" + v + "'");
  }
}

std::uint64_t parse_u64(const std::string& v, const std::string& origin,
                        int line, const std::string& key) {
  try {
    std::size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return x;
  } catch (...) {
    fail(origin, line,
         "field '" + key + "': expected a nonnegative integer, got '" + v + "'");
  }
}

// Key registry: section -> allowed keys.
const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"run", {"manifold", "grid", "N", "seed", "out", "draws", "threads"}},
      {"functions", {}},  // free-form function names
      {"bandwidth", {"policy", "t", "safety", "table_j_max", "table_n"}},
      {"semigroup", {"t"}},
      {"sobolev", {"s", "j_max", "probes_per_vertex", "draws"}},
      {"thresholds",
       {"gap_inf_min", "semigroup_abs", "covariance_rel", "sobolev_spread"}},
  };
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::stod(buf) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::shared_ptr<const ManifoldModel> make_model(ManifoldKind kind) {
  switch (kind) {
    case ManifoldKind::kTorus1:
      return ManifoldModel::torus(1);
    case ManifoldKind::kTorus2:
      return ManifoldModel::torus(2);
    case ManifoldKind::kSphere2:
      return ManifoldModel::sphere2();
  }
  throw std::logic_error("make_model: bad kind");
}

ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin) {
  ExperimentConfig c;
  c.semigroup_t.clear();
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool saw_run = false;
  bool saw_semigroup_t = false;
  std::set<std::string> seen_keys;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(origin, line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (schema().find(section) == schema().end()) {
        fail(origin, line, "unknown section '" + section + "'");
      }
      if (section == "run") saw_run = true;
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(origin, line, "expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (section.empty()) fail(origin, line, "key outside of any section");
    if (section != "functions") {
      const auto& allowed = schema().at(section);
      if (allowed.find(key) == allowed.end()) {
        fail(origin, line,
             "unknown key '" + key + "' in section [" + section + "]");
      }
      if (!seen_keys.insert(section + "." + key).second) {
        fail(origin, line, "duplicate key '" + key + "'");
      }
    }

    if (section == "run") {
      if (key == "manifold") {
        if (value == "torus1") {
          c.manifold = ManifoldKind::kTorus1;
        } else if (value == "torus2") {
          c.manifold = ManifoldKind::kTorus2;
        } else if (value == "sphere2") {
          c.manifold = ManifoldKind::kSphere2;
        } else {
          fail(origin, line, "field 'manifold': expected torus1|torus2|sphere2");
        }
      } else if (key == "grid") {
        if (value == "lattice") {
          c.grid = GridType::kLattice;
        } else if (value == "iid") {
          c.grid = GridType::kIid;
        } else {
          fail(origin, line, "field 'grid': expected lattice|iid");
        }
      } else if (key == "N") {
        c.n_values.clear();
        for (const auto& item : split(value, ',')) {
          const auto n = parse_u64(item, origin, line, "N");
          if (!c.n_values.empty() && n <= c.n_values.back()) {
            fail(origin, line, "field 'N': list must be strictly ascending");
          }
          c.n_values.push_back(n);
        }
      } else if (key == "seed") {
        c.seed = parse_u64(value, origin, line, key);
      } else if (key == "out") {
        c.out_dir = value;
      } else if (key == "draws") {
        c.draws = parse_u64(value, origin, line, key);
      } else if (key == "threads") {
        c.threads = static_cast<int>(parse_u64(value, origin, line, key));
        if (c.threads < 1) fail(origin, line, "field 'threads': must be >= 1");
      }
    } else if (section == "functions") {
      FunctionSpec f;
      f.name = key;
      for (const auto& item : split(value, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
          fail(origin, line,
               "function '" + key + "': expected 'mode:coefficient' pairs");
        }
        const auto j =
            parse_u64(trim(item.substr(0, colon)), origin, line, key);
        if (j < 2) {
          fail(origin, line,
               "function '" + key +
                   "': mode 1 is the constant; test functions are zero-mean");
        }
        f.modes.emplace_back(
            j, parse_double(trim(item.substr(colon + 1)), origin, line, key));
      }
      c.functions.push_back(std::move(f));
    } else if (section == "bandwidth") {
      c.has_bandwidth = true;
      if (key == "policy") {
        if (value == "fixed") {
          c.policy = BandwidthPolicy::kFixed;
        } else if (value == "wasserstein") {
          c.policy = BandwidthPolicy::kWasserstein;
        } else if (value == "schedule") {
          c.policy = BandwidthPolicy::kSchedule;
        } else {
          fail(origin, line,
               "field 'policy': expected fixed|wasserstein|schedule");
        }
      } else if (key == "t") {
        c.fixed_t = parse_double(value, origin, line, key);
      } else if (key == "safety") {
        c.safety = parse_double(value, origin, line, key);
        if (!(c.safety > 0.0 && c.safety < 1.0)) {
          fail(origin, line, "field 'safety': must lie in (0, 1)");
        }
      } else if (key == "table_j_max") {
        c.table_j_max = static_cast<int>(parse_u64(value, origin, line, key));
      } else if (key == "table_n") {
        c.table_n.clear();
        for (const auto& item : split(value, ',')) {
          c.table_n.push_back(parse_u64(item, origin, line, key));
        }
      }
    } else if (section == "semigroup") {
      if (key == "t") {
        saw_semigroup_t = true;
        for (const auto& item : split(value, ',')) {
          c.semigroup_t.push_back(parse_double(item, origin, line, key));
        }
      }
    } else if (section == "sobolev") {
      if (key == "s") {
        c.sobolev_s = parse_double(value, origin, line, key);
      } else if (key == "j_max") {
        c.sobolev_j_max = parse_u64(value, origin, line, key);
      } else if (key == "probes_per_vertex") {
        c.probes_per_vertex = parse_u64(value, origin, line, key);
      } else if (key == "draws") {
        c.sobolev_draws = parse_u64(value, origin, line, key);
      }
    } else if (section == "thresholds") {
      const double x = parse_double(value, origin, line, key);
      if (key == "gap_inf_min") c.thresholds.gap_inf_min = x;
      if (key == "semigroup_abs") c.thresholds.semigroup_abs = x;
      if (key == "covariance_rel") c.thresholds.covariance_rel = x;
      if (key == "sobolev_spread") c.thresholds.sobolev_spread = x;
    }
  }
  if (!saw_run) throw ParseError(origin + ": missing [run] section");
  if (!saw_semigroup_t) c.semigroup_t = {0.25, 0.5, 1.0};
  if (c.n_values.empty()) {
    throw ParseError(origin + ": field 'N': at least one grid size required");
  }
  if (c.functions.empty()) {
    throw ParseError(origin + ": section [functions]: at least one test "
                              "function required");
  }
  if (c.grid == GridType::kIid && !c.has_bandwidth) {
    throw ParseError(origin +
                     ": iid grids require a [bandwidth] section with exactly "
                     "one policy");
  }
  if (c.grid == GridType::kLattice &&
      c.manifold == ManifoldKind::kSphere2) {
    throw ParseError(origin + ": no built-in lattice on the sphere");
  }
  // Validate function modes against the model (rejects constants, dups).
  const auto model = make_model(c.manifold);
  for (const auto& f : c.functions) {
    try {
      TestFunction probe(model, f.modes);
    } catch (const std::exception& e) {
      throw ParseError(origin + ": function '" + f.name + "': " + e.what());
    }
  }
  if (c.policy == BandwidthPolicy::kSchedule && c.grid == GridType::kIid) {
    if (c.table_n.empty()) {
      throw ParseError(origin + ": schedule policy requires table_n");
    }
    if (c.table_j_max < 1) {
      throw ParseError(origin + ": schedule policy requires table_j_max >= 1");
    }
  }
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[run]\n";
  out << "manifold = "
      << (c.manifold == ManifoldKind::kTorus1
              ? "torus1"
              : c.manifold == ManifoldKind::kTorus2 ? "torus2" : "sphere2")
      << "\n";
  out << "grid = " << (c.grid == GridType::kLattice ? "lattice" : "iid")
      << "\n";
  out << "N = ";
  for (std::size_t i = 0; i < c.n_values.size(); ++i) {
    out << (i ? "," : "") << c.n_values[i];
  }
  out << "\n";
  out << "seed = " << c.seed << "\n";
  out << "out = " << c.out_dir << "\n";
  out << "draws = " << c.draws << "\n";
  out << "threads = " << c.threads << "\n";
  out << "\n[functions]\n";
  for (const auto& f : c.functions) {
    out << f.name << " = ";
    for (std::size_t i = 0; i < f.modes.size(); ++i) {
      out << (i ? "," : "") << f.modes[i].first << ":"
          << format_double(f.modes[i].second);
    }
    out << "\n";
  }
  if (c.has_bandwidth) {
    out << "\n[bandwidth]\n";
    out << "policy = "
        << (c.policy == BandwidthPolicy::kFixed
                ? "fixed"
                : c.policy == BandwidthPolicy::kWasserstein ? "wasserstein"
                                                            : "schedule")
        << "\n";
    out << "t = " << format_double(c.fixed_t) << "\n";
    out << "safety = " << format_double(c.safety) << "\n";
    out << "table_j_max = " << c.table_j_max << "\n";
    if (!c.table_n.empty()) {
      out << "table_n = ";
      for (std::size_t i = 0; i < c.table_n.size(); ++i) {
        out << (i ? "," : "") << c.table_n[i];
      }
      out << "\n";
    }
  }
  out << "\n[semigroup]\n";
  out << "t = ";
  for (std::size_t i = 0; i < c.semigroup_t.size(); ++i) {
    out << (i ? "," : "") << format_double(c.semigroup_t[i]);
  }
  out << "\n";
  out << "\n[sobolev]\n";
  out << "s = " << format_double(c.sobolev_s) << "\n";
  out << "j_max = " << c.sobolev_j_max << "\n";
  out << "probes_per_vertex = " << c.probes_per_vertex << "\n";
  out << "draws = " << c.sobolev_draws << "\n";
  out << "\n[thresholds]\n";
  out << "gap_inf_min = " << format_double(c.thresholds.gap_inf_min) << "\n";
  out << "semigroup_abs = " << format_double(c.thresholds.semigroup_abs)
      << "\n";
  out << "covariance_rel = " << format_double(c.thresholds.covariance_rel)
      << "\n";
  out << "sobolev_spread = " << format_double(c.thresholds.sobolev_spread)
      << "\n";
  return out.str();
}

}  // namespace dgff
