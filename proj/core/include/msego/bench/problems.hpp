#pragma once

#include <string>
#include <vector>

#include "msego/sego.hpp"

namespace msego::bench {

/// Standard Branin function on (x1, x2).
double branin(double x1, double x2);

/// Branin with the cosine term flipped/shifted per categorical level:
/// sign -1 when flip_sign, phase shift pi/2 when shift_phase.
double branin_variant(double x1, double x2, bool flip_sign, bool shift_phase);

/// One registered benchmark problem plus the oracle that pins its reference
/// optimum (exhaustive enumeration over levels with dense/zoomed continuous
/// grids, or multistart local search in 10-D).
struct RegisteredProblem {
  Problem problem;
  bool constrained = false;
  std::string oracle_note;
  double (*oracle)() = nullptr;
};

/// Names of the built-in problems ("branin5", "set1", "branin3", "branin4").
std::vector<std::string> problem_names();

bool is_registered(const std::string& name);

/// Throws ConfigError for unknown names.
const RegisteredProblem& find_problem(const std::string& name);

/// Reference optimum computed by the registered oracle; memoized per name.
double reference_value(const std::string& name);

}  // namespace msego::bench
