#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

namespace msego::dfo {

using BoxObjective = std::function<double(const Eigen::VectorXd&)>;

struct TrustRegionResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

struct TrustRegionOptions {
  int max_evaluations = 200;
  /// Initial trust radius as a fraction of the smallest box width.
  double initial_radius_fraction = 0.1;
  /// Stop once the radius falls below this fraction of the smallest width.
  double final_radius_fraction = 1e-9;
};

/// Derivative-free local minimization over a box using successive linear
/// interpolation models on a simplex and a trust-region step rule.  Never
/// returns a point worse than the start.
TrustRegionResult minimize_trust_region(const BoxObjective& objective, const Eigen::VectorXd& start,
                                        const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                        const TrustRegionOptions& options);

/// Objective value plus aggregate constraint violation (0 when feasible).
struct RankedPoint {
  Eigen::VectorXd x;
  double value = 0.0;
  double violation = 0.0;
};

using ConstrainedObjective = std::function<RankedPoint(const Eigen::VectorXd&)>;

struct SresOptions {
  int population = 60;
  int generations = 100;
  double feasible_compare_probability = 0.45;
  std::uint64_t seed = 0;
  /// How many distinct leading candidates to report back.
  int report_candidates = 3;
};

struct SresResult {
  /// Leading candidates, best first: feasible points ordered by value, then
  /// infeasible points ordered by violation.
  std::vector<RankedPoint> candidates;
  bool feasible_found = false;
  int evaluations = 0;
};

/// Global search over a box with stochastic-ranking constraint handling
/// (evolution strategy with self-adaptive per-coordinate step sizes).
SresResult sres_minimize(const ConstrainedObjective& objective, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const SresOptions& options);

}  // namespace msego::dfo
