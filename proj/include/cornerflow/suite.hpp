#ifndef CORNERFLOW_SUITE_HPP_
#define CORNERFLOW_SUITE_HPP_

#include "cornerflow/config.hpp"

namespace cornerflow {

struct CheckResult {
  std::string suite;
  std::string anchor;   // stable slug identifying the invariant
  std::string claim;    // one-line statement of what was checked
  double measured = 0.0;
  double target = 0.0;
  bool pass = false;
  std::string detail;   // optional extra numbers, human-readable
};

struct SuiteReport {
  std::vector<CheckResult> entries;

  bool all_pass() const;
  /// Deterministic JSON ("report_version": 1); no clocks, fixed ordering.
  std::string to_json() const;
  /// One CSV per suite under dir: anchor,claim,measured,target,pass.
  void write_csv_summaries(const std::string& dir) const;
};

/// The suite groups in their canonical order.
std::vector<std::string> suite_names();

/// Executes the groups named in cfg.suites (must be known names; an empty
/// list produces an empty report). Sampling is driven by cfg.seed, so equal
/// configs give byte-identical reports.
SuiteReport run_suites(const RunConfig& cfg);

}  // namespace cornerflow

#endif  // CORNERFLOW_SUITE_HPP_
