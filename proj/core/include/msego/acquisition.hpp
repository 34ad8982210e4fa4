#pragma once

#include <vector>

#include "msego/gp.hpp"
#include "msego/mixed_space.hpp"

namespace msego {

/// Expected improvement below f_min for a Gaussian prediction; the
/// deterministic limit max(f_min - mean, 0) applies at std = 0.
double expected_improvement(double mean, double std_dev, double f_min);

/// scale * EI - mean; scale = 1 recovers the WB2 criterion.
double wb2s(double mean, double std_dev, double f_min, double scale);

enum class FeasibilityMode { MeanPrediction, Utb };

struct FeasibilityRule {
  FeasibilityMode mode = FeasibilityMode::Utb;
  double kappa = 3.0;  // Utb only
};

/// Surrogate constraint bound: the mean prediction, or the mean relaxed by
/// kappa standard deviations (Upper Trust Bound).  A point is admitted when
/// the returned value is <= 0.
double feasibility_bound(double g_mean, double g_std, const FeasibilityRule& rule);

/// WB2s scaling from the EI maximizer over a candidate set:
/// s = beta * |mean(x+)| / EI(x+) when EI(x+) > 0 and mean(x+) != 0, else 1.
double compute_wb2s_scale(const GpModel& objective, const std::vector<RelaxedVector>& candidates,
                          double f_min, double beta = 100.0);

}  // namespace msego
