#pragma once

// Experiment recipes in a small TOML subset: [section] headers, key = value,
// '#' comments, and values that are numbers, booleans, quoted strings or
// (possibly multi-line) flat arrays of those.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <variant>
#include <vector>

#include "hybridsim/analysis.hpp"
#include "hybridsim/circuit.hpp"

namespace hybridsim {

struct TomlScalar {
  std::variant<bool, double, std::string> value;
  bool integral = false;
  std::string text;  // source spelling, for messages
};

struct TomlEntry {
  std::vector<TomlScalar> items;
  bool is_array = false;
  std::size_t line = 0;
};

using TomlTable = std::map<std::string, std::map<std::string, TomlEntry>>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

inline ConfigError toml_error(std::size_t line, const std::string& what) {
  return ConfigError("line " + std::to_string(line) + ": " + what);
}

inline TomlScalar parse_scalar(const std::string& raw, std::size_t line) {
  const std::string s = trim(raw);
  TomlScalar v;
  v.text = s;
  if (s.empty()) throw toml_error(line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"' || s.find('"', 1) != s.size() - 1)
      throw toml_error(line, "malformed string " + s);
    v.value = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.value = s == "true";
    return v;
  }
  std::string digits;
  for (char c : s)
    if (c != '_') digits += c;
  double d = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d);
  if (ec != std::errc() || end != digits.data() + digits.size()) throw toml_error(line, "cannot parse value " + s);
  v.value = d;
  v.integral = digits.find_first_of(".eE") == std::string::npos;
  return v;
}

}  // namespace detail

inline TomlTable parse_toml(std::istream& in) {
  TomlTable table;
  std::string section, line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3) throw detail::toml_error(lineno, "malformed section header");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (table.count(section)) throw detail::toml_error(lineno, "duplicate section [" + section + "]");
      table[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw detail::toml_error(lineno, "expected key = value");
    const std::string key = detail::trim(s.substr(0, eq));
    std::string rhs = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw detail::toml_error(lineno, "empty key");
    if (section.empty()) throw detail::toml_error(lineno, "key '" + key + "' outside any section");
    TomlEntry entry;
    entry.line = lineno;
    if (!rhs.empty() && rhs.front() == '[') {
      while (rhs.find(']') == std::string::npos) {
        if (!std::getline(in, line)) throw detail::toml_error(entry.line, "unterminated array");
        ++lineno;
        rhs += " " + detail::trim(detail::strip_comment(line));
      }
      if (rhs.back() != ']') throw detail::toml_error(entry.line, "trailing text after array");
      entry.is_array = true;
      std::stringstream body(rhs.substr(1, rhs.size() - 2));
      std::string item;
      while (std::getline(body, item, ',')) {
        if (detail::trim(item).empty()) continue;  // trailing comma
        entry.items.push_back(detail::parse_scalar(item, entry.line));
      }
    } else {
      entry.items.push_back(detail::parse_scalar(rhs, lineno));
    }
    auto& sec = table[section];
    if (sec.count(key)) throw detail::toml_error(lineno, "duplicate key '" + key + "'");
    sec[key] = std::move(entry);
  }
  return table;
}

inline constexpr const char* kWorkersEnv = "HYBRIDSIM_WORKERS";

/// A sweep over circuit parameters plus run and analysis settings.
struct ExperimentSpec {
  std::vector<NoiseModel> models{NoiseModel::kBulkNoise};
  std::vector<Boundary> boundaries{Boundary::kPeriodic};
  std::vector<std::size_t> sizes;
  std::vector<double> measure_rates;
  std::vector<double> reset_rates;
  std::vector<std::size_t> t_noise{0};
  std::size_t depth = 0;  // 0: 8L
  bool boundary_resets = true;

  std::size_t trajectories = 300;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;  // 0: environment, then hardware concurrency
  std::string out_dir = "out";
  bool write_trajectories = false;
  bool oracle_check = false;
  bool plots = true;

  double q_max = kDefaultQMax;
  std::vector<FitModel> fits;
  bool collapse = false;
  std::string collapse_observable = "I";
  CollapseOptions collapse_options{0.02, 0.05, 0.6, 1.4};

  /// Sweep cells in (model, boundary, L, p, q, t_noise) order. The bulk model
  /// ignores t_noise, so its cells carry t_noise = 0 once.
  std::vector<CircuitConfig> cells() const {
    std::vector<CircuitConfig> out;
    for (auto m : models)
      for (auto b : boundaries)
        for (auto L : sizes)
          for (double p : measure_rates)
            for (double q : reset_rates) {
              const std::vector<std::size_t> tn =
                  m == NoiseModel::kBulkNoise ? std::vector<std::size_t>{0} : t_noise;
              for (auto t : tn) {
                CircuitConfig c;
                c.model = m;
                c.boundary = b;
                c.n_qubits = L;
                c.measure_rate = p;
                c.reset_rate = q;
                c.t_noise = t;
                c.depth = depth ? depth : default_depth(L);
                c.boundary_resets = boundary_resets;
                out.push_back(c);
              }
            }
    return out;
  }

  void validate() const {
    if (sizes.empty() || measure_rates.empty() || reset_rates.empty() || models.empty() || boundaries.empty() ||
        t_noise.empty())
      throw ConfigError("every sweep axis needs at least one value");
    if (trajectories < 1) throw ConfigError("trajectories must be at least 1");
    for (const auto& c : cells()) c.validate();
    if (collapse && collapse_observable != "I" && collapse_observable != "EN")
      throw ConfigError("collapse observable must be I or EN");
  }

  std::size_t resolved_workers() const {
    if (workers) return workers;
    if (const char* env = std::getenv(kWorkersEnv)) {
      char* end = nullptr;
      const unsigned long n = std::strtoul(env, &end, 10);
      if (end && *end == '\0' && n > 0) return n;
      throw ConfigError(std::string(kWorkersEnv) + " must be a positive integer");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
  }
};

namespace detail {

class SpecReader {
 public:
  explicit SpecReader(const TomlTable& t) : table_(t) {}

  void require_known(const std::map<std::string, std::vector<std::string>>& schema) const {
    for (const auto& [section, keys] : table_) {
      const auto it = schema.find(section);
      if (it == schema.end()) {
        const std::size_t line = keys.empty() ? 0 : keys.begin()->second.line;
        throw ConfigError((line ? "line " + std::to_string(line) + ": " : std::string()) + "unknown section [" +
                          section + "]");
      }
      for (const auto& [key, entry] : keys)
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
          throw toml_error(entry.line, "unknown key '" + key + "' in [" + section + "]");
    }
  }

  const TomlEntry* find(const std::string& section, const std::string& key) const {
    const auto s = table_.find(section);
    if (s == table_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  template <class T, class F>
  void list(const std::string& section, const std::string& key, std::vector<T>& out, F convert) const {
    const TomlEntry* e = find(section, key);
    if (!e) return;
    out.clear();
    for (const auto& item : e->items) out.push_back(convert(item, e->line));
    if (out.empty()) throw toml_error(e->line, "'" + key + "' must not be empty");
  }

  template <class T, class F>
  void scalar(const std::string& section, const std::string& key, T& out, F convert) const {
    const TomlEntry* e = find(section, key);
    if (!e) return;
    if (e->is_array) throw toml_error(e->line, "'" + key + "' must be a single value");
    out = convert(e->items.front(), e->line);
  }

 private:
  const TomlTable& table_;
};

inline double as_number(const TomlScalar& v, std::size_t line) {
  if (const auto* d = std::get_if<double>(&v.value)) return *d;
  throw toml_error(line, "expected a number, got " + v.text);
}
inline std::size_t as_count(const TomlScalar& v, std::size_t line) {
  const double d = as_number(v, line);
  if (!v.integral || d < 0) throw toml_error(line, "expected a non-negative integer, got " + v.text);
  return static_cast<std::size_t>(d);
}
inline std::uint64_t as_seed(const TomlScalar& v, std::size_t line) {
  if (!v.integral) throw toml_error(line, "expected an integer seed, got " + v.text);
  std::uint64_t s = 0;
  std::string digits;
  for (char c : v.text)
    if (c != '_') digits += c;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s);
  if (ec != std::errc() || end != digits.data() + digits.size())
    throw toml_error(line, "seed out of range: " + v.text);
  return s;
}
inline bool as_bool(const TomlScalar& v, std::size_t line) {
  if (const auto* b = std::get_if<bool>(&v.value)) return *b;
  throw toml_error(line, "expected true or false, got " + v.text);
}
inline std::string as_string(const TomlScalar& v, std::size_t line) {
  if (const auto* s = std::get_if<std::string>(&v.value)) return *s;
  throw toml_error(line, "expected a quoted string, got " + v.text);
}
template <class F>
auto with_line(F parse) {
  return [parse](const TomlScalar& v, std::size_t line) {
    try {
      return parse(as_string(v, line));
    } catch (const ConfigError& e) {
      throw toml_error(line, e.what());
    } catch (const AnalysisError& e) {
      throw toml_error(line, e.what());
    }
  };
}
inline std::pair<double, double> as_range(const TomlEntry& e) {
  if (!e.is_array || e.items.size() != 2) throw toml_error(e.line, "expected a two-element range [lo, hi]");
  return {as_number(e.items[0], e.line), as_number(e.items[1], e.line)};
}

}  // namespace detail

inline ExperimentSpec parse_experiment(std::istream& in) {
  const TomlTable table = parse_toml(in);
  detail::SpecReader r(table);
  r.require_known({
      {"sweep", {"model", "boundary", "L", "p", "q", "t_noise", "depth", "boundary_resets"}},
      {"run", {"trajectories", "master_seed", "workers", "out", "write_trajectories", "oracle_check", "plots"}},
      {"analysis", {"q_max", "fits", "collapse", "collapse_observable", "qc_range", "nu_range", "collapse_grid",
                    "collapse_knots"}},
  });
  ExperimentSpec s;
  using namespace detail;
  r.list("sweep", "model", s.models, with_line(parse_noise_model));
  r.list("sweep", "boundary", s.boundaries, with_line(parse_boundary));
  r.list("sweep", "L", s.sizes, as_count);
  r.list("sweep", "p", s.measure_rates, as_number);
  r.list("sweep", "q", s.reset_rates, as_number);
  r.list("sweep", "t_noise", s.t_noise, as_count);
  r.scalar("sweep", "depth", s.depth, as_count);
  r.scalar("sweep", "boundary_resets", s.boundary_resets, as_bool);

  r.scalar("run", "trajectories", s.trajectories, as_count);
  r.scalar("run", "master_seed", s.master_seed, as_seed);
  r.scalar("run", "workers", s.workers, as_count);
  r.scalar("run", "out", s.out_dir, as_string);
  r.scalar("run", "write_trajectories", s.write_trajectories, as_bool);
  r.scalar("run", "oracle_check", s.oracle_check, as_bool);
  r.scalar("run", "plots", s.plots, as_bool);

  r.scalar("analysis", "q_max", s.q_max, as_number);
  r.list("analysis", "fits", s.fits, with_line(parse_fit_model));
  r.scalar("analysis", "collapse", s.collapse, as_bool);
  r.scalar("analysis", "collapse_observable", s.collapse_observable, as_string);
  if (const auto* e = r.find("analysis", "qc_range"))
    std::tie(s.collapse_options.qc_lo, s.collapse_options.qc_hi) = as_range(*e);
  if (const auto* e = r.find("analysis", "nu_range"))
    std::tie(s.collapse_options.nu_lo, s.collapse_options.nu_hi) = as_range(*e);
  r.scalar("analysis", "collapse_grid", s.collapse_options.grid, as_count);
  r.scalar("analysis", "collapse_knots", s.collapse_options.knots, as_count);

  // Attribute sweep-level validation failures to the offending line.
  auto line_of = [&](const char* key) {
    const TomlEntry* e = r.find("sweep", key);
    return e ? e->line : 0;
  };
  try {
    s.validate();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    std::size_t line = 0;
    if (what.find("L ") == 0) line = line_of("L");
    else if (what.find("p ") == 0) line = line_of("p");
    else if (what.find("q ") == 0) line = line_of("q");
    else if (what.find("t_noise") == 0) line = line_of("t_noise");
    else if (what.find("depth") == 0) line = line_of("depth");
    if (line) throw detail::toml_error(line, what);
    throw;
  }
  return s;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_experiment(in);
}

}  // namespace hybridsim
