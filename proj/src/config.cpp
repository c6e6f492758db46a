#include "cornerflow/config.hpp"

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace cornerflow {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strip a trailing comment that is not inside quotes.
std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

std::string unquote(const std::string& s, int line, int col) {
  if (s.size() >= 2 && s.front() == '"') {
    if (s.back() != '"') throw config_error("unterminated string", line, col);
    return s.substr(1, s.size() - 2);
  }
  return s;
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream is(text);
  std::string raw;
  std::string section;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("expected closing ']'", lineno,
                           static_cast<int>(raw.size()));
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw config_error("empty section name", lineno, 1);
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value'", lineno, 1);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("empty key", lineno, 1);
    if (value.empty())
      throw config_error("missing value for '" + key + "'", lineno,
                         static_cast<int>(eq) + 2);
    std::string full = section.empty() ? key : section + "." + key;

    Entry e;
    if (value.front() == '[') {
      if (value.back() != ']')
        throw config_error("unterminated list", lineno,
                           static_cast<int>(eq) + 2);
      e.is_list = true;
      std::string body = value.substr(1, value.size() - 2);
      std::stringstream ss(body);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) e.items.push_back(unquote(item, lineno, 1));
      }
    } else {
      e.items.push_back(unquote(value, lineno, static_cast<int>(eq) + 2));
    }
    cfg.entries_[full] = std::move(e);
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_string(ss.str());
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

double Config::num(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second.items.at(0);
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw config_error("value of '" + key + "' is not a number: " + s);
  return v;
}

long Config::integer(const std::string& key, long fallback) const {
  return static_cast<long>(num(key, static_cast<double>(fallback)));
}

bool Config::flag(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& s = it->second.items.at(0);
  if (s == "true") return true;
  if (s == "false") return false;
  throw config_error("value of '" + key + "' is not true/false: " + s);
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second.items.at(0);
}

std::vector<double> Config::num_list(const std::string& key) const {
  auto it = entries_.find(key);
  std::vector<double> out;
  if (it == entries_.end()) return out;
  for (const auto& s : it->second.items) {
    char* end = nullptr;
    out.push_back(std::strtod(s.c_str(), &end));
    if (end == s.c_str() || *end != '\0')
      throw config_error("list entry of '" + key + "' is not a number: " + s);
  }
  return out;
}

std::vector<std::string> Config::str_list(const std::string& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? std::vector<std::string>{} : it->second.items;
}

void Config::set(const std::string& key, const std::string& value) {
  Config tmp = parse_string(key + " = " + value);
  entries_[key] = tmp.entries_.at(key);
}

RunConfig RunConfig::from(const Config& c) {
  RunConfig r;
  r.family = c.str("metric.family", r.family);
  r.n = static_cast<int>(c.integer("metric.n", r.n));
  r.amplitude = c.num("metric.amplitude", r.amplitude);
  r.eta = c.num("metric.eta", r.eta);

  r.boundary_type = c.str("boundary.type", r.boundary_type);
  r.theta0 = c.num("boundary.theta0", r.theta0);
  r.alpha = c.num("boundary.alpha", r.alpha);
  r.rho_coef = c.num("boundary.rho_coef", r.rho_coef);
  r.rho_x_coef = c.num("boundary.rho_x_coef", r.rho_x_coef);
  r.x_coef = c.num("boundary.x_coef", r.x_coef);

  r.rho_min = c.num("windows.rho_min", r.rho_min);
  r.rho_max = c.num("windows.rho_max", r.rho_max);
  r.x_min = c.num("windows.x_min", r.x_min);
  r.x_max = c.num("windows.x_max", r.x_max);
  r.n_rho = static_cast<int>(c.integer("windows.n_rho", r.n_rho));
  r.n_x = static_cast<int>(c.integer("windows.n_x", r.n_x));
  r.n_param = static_cast<int>(c.integer("windows.n_param", r.n_param));
  r.tau_nodes = static_cast<int>(c.integer("windows.tau_nodes", r.tau_nodes));

  r.tol = c.num("integrate.tol", r.tol);
  r.t_end = c.num("integrate.t_end", r.t_end);
  r.theta_min = c.num("integrate.theta_min", r.theta_min);
  r.handoff = c.num("integrate.handoff", r.handoff);

  if (c.has("geodesic.x")) r.start_x = c.num_list("geodesic.x");
  r.start_rho = c.num("geodesic.rho", r.start_rho);

  r.seed = static_cast<std::uint64_t>(c.integer("run.seed", static_cast<long>(r.seed)));
  r.max_measured = c.num("run.max_measured", r.max_measured);
  r.suites = c.str_list("run.suites");
  r.out_dir = c.str("run.out", r.out_dir);
  r.quiet = c.flag("run.quiet", r.quiet);

  if (r.n < 2) throw config_error("metric.n must be at least 2");
  if (!(r.theta0 > 0.0 && r.theta0 < M_PI))
    throw config_error("boundary.theta0 must lie in (0, pi)");
  if (!(r.rho_max > 0.0) || r.rho_min < 0.0 || r.rho_min >= r.rho_max)
    throw config_error("windows.rho range is empty");
  if (r.x_min >= r.x_max) throw config_error("windows.x range is empty");
  if (r.tol < 1e-12 || r.tol > 1e-4)
    throw config_error("integrate.tol outside [1e-12, 1e-4]");
  return r;
}

AdmissibleMetric RunConfig::make_metric() const {
  if (family == "hyperbolic") return hyperbolic_metric(n);
  if (family == "warped-k") return warped_k_metric(n, eta);
  if (family == "perturbed") return perturbed_metric(n, amplitude);
  throw config_error("unknown metric family '" + family + "'");
}

BoundaryQ RunConfig::make_boundary() const {
  if (boundary_type == "constant") return BoundaryQ::constant(theta0);
  if (boundary_type == "plane") return BoundaryQ::plane(alpha);
  if (boundary_type == "tilted")
    return BoundaryQ::tilted(theta0, rho_coef, rho_x_coef);
  if (boundary_type == "graph")
    return BoundaryQ::graph(theta0, x_coef, rho_coef);
  throw config_error("unknown boundary type '" + boundary_type + "'");
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << contents;
    if (!f) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("rename to '" + path + "' failed: " +
                             std::strerror(errno));
}

}  // namespace cornerflow
