#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace varapprox {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible (row counts, schedules, factors).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (empty vector, zero variance).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A check was called on data that violates the hypothesis of the statement it verifies.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A bound's stated assumption is violated by the supplied constants (e.g. K2 <= 2).
class HypothesisError : public Error {
 public:
  HypothesisError(std::string hypothesis, const std::string& detail)
      : Error(hypothesis + ": " + detail), hypothesis_(std::move(hypothesis)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Power iteration did not settle; carries the last estimate for diagnosis.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_estimate, double residual,
                   std::vector<double> last_iterate)
      : Error(what),
        last_estimate_(last_estimate),
        residual_(residual),
        last_iterate_(std::move(last_iterate)) {}

  double last_estimate() const noexcept { return last_estimate_; }
  double residual() const noexcept { return residual_; }
  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

 private:
  double last_estimate_;
  double residual_;
  std::vector<double> last_iterate_;
};

/// Non-finite value produced mid-computation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed JSON configuration; `path` locates the offending field (e.g. "$.levels[1].attn.w_q").
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& detail)
      : Error(path + ": " + detail), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace varapprox
