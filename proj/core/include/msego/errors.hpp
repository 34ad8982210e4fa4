#pragma once

#include <stdexcept>
#include <string>

namespace msego {

/// Training data cannot support the requested fit (constant response,
/// exhausted deflation, empty sample).
class DegenerateDataError : public std::runtime_error {
 public:
  explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

/// Correlation matrix stayed non-positive-definite after jitter escalation.
class IllConditionedError : public std::runtime_error {
 public:
  explicit IllConditionedError(const std::string& what) : std::runtime_error(what) {}
};

/// A black-box evaluation failed (child process died, malformed reply, timeout).
class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid study/run configuration (unknown problem, missing reference, bad method).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace msego
