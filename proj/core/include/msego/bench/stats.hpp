#pragma once

#include <vector>

#include "msego/sego.hpp"

namespace msego::bench {

/// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> values, double p);

struct BoxplotSummary {
  double minimum = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double maximum = 0.0;
  std::vector<double> outliers;  // beyond 1.5 IQR from the quartiles
};

BoxplotSummary boxplot_summary(std::vector<double> values);

struct ConvergencePoint {
  int eval_index = 0;  // 1-based
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Per-evaluation quantiles across incumbent traces (+inf before the first
/// feasible point).  Traces shorter than the longest are carried forward.
std::vector<ConvergencePoint> convergence_curve(const std::vector<std::vector<double>>& traces);

/// One run reduced to what the data profile needs.
struct ProfileInstance {
  std::vector<double> objective;
  std::vector<bool> feasible;  // violation <= 1e-4 classification
  double reference = 0.0;
};

ProfileInstance profile_instance(const RunRecord& record, double reference);

struct DataProfile {
  double tolerance = 0.0;
  /// solved_fraction[b-1] = fraction of instances solved within b evaluations.
  std::vector<double> solved_fraction;
};

/// Fraction of instances with a feasible evaluation within budget whose
/// relative error to the reference is <= tolerance.
DataProfile data_profile(const std::vector<ProfileInstance>& instances, double tolerance);

/// Relative error of a run's final best-feasible value; +inf when the run
/// never reached feasibility.
double final_relative_error(const RunRecord& record, double reference);

}  // namespace msego::bench
