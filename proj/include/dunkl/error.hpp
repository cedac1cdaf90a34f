#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dunkl {

enum class ErrorCode : int {
  invalid_parameter = 1,
  domain = 2,
  validation = 3,
  contract_violation = 4,
  convergence = 5,
  configuration = 6,
  schema = 7,
  io = 8,
  path_failure = 9,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Iterative solver gave up; carries the last iterate for diagnostics.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> last_iterate, double residual)
      : Error(ErrorCode::convergence, what), last_iterate_(std::move(last_iterate)), residual_(residual) {}
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  double residual() const noexcept { return residual_; }

 private:
  std::vector<double> last_iterate_;
  double residual_;
};

// A per-step failure inside a simulated path, tagged with where it happened.
class PathError : public Error {
 public:
  PathError(const std::string& what, std::int64_t path_index, std::int64_t step)
      : Error(ErrorCode::path_failure, what), path_index_(path_index), step_(step) {}
  std::int64_t path_index() const noexcept { return path_index_; }
  std::int64_t step() const noexcept { return step_; }

 private:
  std::int64_t path_index_;
  std::int64_t step_;
};

}  // namespace dunkl
