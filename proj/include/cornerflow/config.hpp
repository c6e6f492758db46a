#ifndef CORNERFLOW_CONFIG_HPP_
#define CORNERFLOW_CONFIG_HPP_

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "cornerflow/boundary.hpp"

namespace cornerflow {

/// Key-value/tables run configuration.
///
/// Grammar (one entry per line):
///   [section]            -- table header; keys below are section.key
///   key = value          -- value: number | true | false | string | [v, ...]
///   # comment            -- also allowed after a value
/// Strings may be bare words or double-quoted. Parse errors carry
/// line/column. CLI flags override entries one-for-one.
class Config {
 public:
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  bool has(const std::string& key) const;
  double num(const std::string& key, double fallback) const;
  long integer(const std::string& key, long fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string str(const std::string& key, const std::string& fallback) const;
  std::vector<double> num_list(const std::string& key) const;
  std::vector<std::string> str_list(const std::string& key) const;

  /// CLI override: value in the same syntax as a config entry.
  void set(const std::string& key, const std::string& value);

 private:
  struct Entry {
    std::vector<std::string> items;  // singletons hold one element
    bool is_list = false;
  };
  std::map<std::string, Entry> entries_;
};

/// Typed run configuration shared by the CLI and the verification suites.
struct RunConfig {
  // [metric]
  std::string family = "hyperbolic";  // hyperbolic | warped-k | perturbed
  int n = 2;
  double amplitude = 0.1;
  double eta = 0.3;

  // [boundary]
  std::string boundary_type = "constant";  // constant | plane | tilted
  double theta0 = M_PI / 2;
  double alpha = 0.0;       // plane
  double rho_coef = 0.0;    // tilted / graph
  double rho_x_coef = 0.0;  // tilted
  double x_coef = 0.0;      // graph

  // [windows]
  double rho_min = 0.05, rho_max = 0.25;
  double x_min = -0.5, x_max = 0.5;
  int n_rho = 9, n_x = 5, n_param = 9, tau_nodes = 11;

  // [integrate]
  double tol = 1e-10;
  double t_end = 20.0;
  double theta_min = 1e-6;
  double handoff = 0.1;

  // [geodesic]
  std::vector<double> start_x{0.0};
  double start_rho = 1.0;

  // [run]
  std::uint64_t seed = 0;
  std::vector<std::string> suites;
  std::string out_dir = "out";
  bool quiet = false;
  // Debug knob: any check whose measured value exceeds this fails, exposing
  // the failure path of `verify` on demand.
  double max_measured = std::numeric_limits<double>::infinity();

  static RunConfig from(const Config& c);

  AdmissibleMetric make_metric() const;
  BoundaryQ make_boundary() const;
};

/// Atomic write: contents go to a temp file first, renamed on success.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace cornerflow

#endif  // CORNERFLOW_CONFIG_HPP_
