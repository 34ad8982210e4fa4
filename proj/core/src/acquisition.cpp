#include "msego/acquisition.hpp"

#include <cmath>
#include <stdexcept>

namespace msego {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double u) { return 0.5 * std::erfc(-u * kInvSqrt2); }
double normal_pdf(double u) { return kInvSqrt2Pi * std::exp(-0.5 * u * u); }

}  // namespace

double expected_improvement(double mean, double std_dev, double f_min) {
  if (std_dev < 0.0) throw std::invalid_argument("expected_improvement: std must be >= 0");
  const double delta = f_min - mean;
  if (std_dev == 0.0) return std::max(delta, 0.0);
  const double u = delta / std_dev;
  const double ei = delta * normal_cdf(u) + std_dev * normal_pdf(u);
  return std::max(ei, 0.0);
}

double wb2s(double mean, double std_dev, double f_min, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("wb2s: scale must be positive");
  return scale * expected_improvement(mean, std_dev, f_min) - mean;
}

double feasibility_bound(double g_mean, double g_std, const FeasibilityRule& rule) {
  if (g_std < 0.0) throw std::invalid_argument("feasibility_bound: std must be >= 0");
  if (rule.mode == FeasibilityMode::MeanPrediction) return g_mean;
  return g_mean - rule.kappa * g_std;
}

double compute_wb2s_scale(const GpModel& objective, const std::vector<RelaxedVector>& candidates,
                          double f_min, double beta) {
  if (candidates.empty()) throw std::invalid_argument("compute_wb2s_scale: no candidates");
  double best_ei = -1.0;
  double mean_at_best = 0.0;
  for (const RelaxedVector& x : candidates) {
    const Prediction p = objective.predict(x);
    const double ei = expected_improvement(p.mean, std::sqrt(std::max(p.variance, 0.0)), f_min);
    if (ei > best_ei) {
      best_ei = ei;
      mean_at_best = p.mean;
    }
  }
  if (best_ei <= 0.0 || mean_at_best == 0.0) return 1.0;
  return beta * std::abs(mean_at_best) / best_ei;
}

}  // namespace msego
