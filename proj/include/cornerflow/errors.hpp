#ifndef CORNERFLOW_ERRORS_HPP_
#define CORNERFLOW_ERRORS_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace cornerflow {

/// Bad input values (points outside the chart, malformed samples).
class domain_error : public std::runtime_error {
 public:
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Evaluation requested at a point where the quantity is singular
/// (theta = 0 or rho = 0 for non-compactified tensors).
class singular_evaluation_error : public domain_error {
 public:
  explicit singular_evaluation_error(const std::string& msg) : domain_error(msg) {}
};

/// A stated precondition of an operation does not hold.
class precondition_error : public domain_error {
 public:
  explicit precondition_error(const std::string& msg) : domain_error(msg) {}
};

/// The requested accuracy cannot be reached (step underflow, stencil
/// disagreement under halving, grid too coarse).
class accuracy_error : public std::runtime_error {
 public:
  explicit accuracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Adaptive integration failed; carries the last accepted time (or the
/// independent variable of the run) and, when available, the last good
/// state vector.
class integration_error : public std::runtime_error {
 public:
  integration_error(const std::string& msg, double last_time,
                    std::vector<double> last_state = {})
      : std::runtime_error(msg + " (at " + std::to_string(last_time) + ")"),
        last_time_(last_time),
        last_state_(std::move(last_state)) {}
  double last_time() const { return last_time_; }
  const std::vector<double>& last_state() const { return last_state_; }

 private:
  double last_time_;
  std::vector<double> last_state_;
};

/// Config file syntax or validation problem; carries line/column.
class config_error : public std::runtime_error {
 public:
  config_error(const std::string& msg, int line = 0, int col = 0)
      : std::runtime_error(line > 0 ? msg + " (line " + std::to_string(line) +
                                          ", col " + std::to_string(col) + ")"
                                    : msg),
        line_(line),
        col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

}  // namespace cornerflow

#endif  // CORNERFLOW_ERRORS_HPP_
