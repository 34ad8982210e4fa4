#include "msego/bench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace msego::bench {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRefDenomFloor = 1e-12;
}  // namespace

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p must lie in [0,1]");
  std::sort(values.begin(), values.end());
  const double h = p * (static_cast<double>(values.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= values.size()) return values.back();
  const double frac = h - static_cast<double>(i);
  // equal endpoints guard also keeps inf columns finite-safe (inf - inf)
  if (frac == 0.0 || values[i] == values[i + 1]) return values[i];
  return values[i] + frac * (values[i + 1] - values[i]);
}

BoxplotSummary boxplot_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("boxplot_summary: empty sample");
  BoxplotSummary s;
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  std::sort(values.begin(), values.end());
  s.minimum = values.front();
  s.maximum = values.back();
  const double iqr = s.q3 - s.q1;
  const double lo = s.q1 - 1.5 * iqr;
  const double hi = s.q3 + 1.5 * iqr;
  for (double v : values) {
    if (v < lo || v > hi) s.outliers.push_back(v);
  }
  return s;
}

std::vector<ConvergencePoint> convergence_curve(const std::vector<std::vector<double>>& traces) {
  if (traces.empty()) return {};
  std::size_t len = 0;
  for (const auto& t : traces) len = std::max(len, t.size());
  std::vector<ConvergencePoint> curve;
  curve.reserve(len);
  std::vector<double> column(traces.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const auto& t = traces[r];
      column[r] = t.empty() ? kInf : t[std::min(i, t.size() - 1)];
    }
    ConvergencePoint p;
    p.eval_index = static_cast<int>(i) + 1;
    p.median = quantile(column, 0.5);
    p.q25 = quantile(column, 0.25);
    p.q75 = quantile(column, 0.75);
    curve.push_back(p);
  }
  return curve;
}

ProfileInstance profile_instance(const RunRecord& record, double reference) {
  ProfileInstance inst;
  inst.reference = reference;
  inst.objective.reserve(record.evaluations.size());
  inst.feasible.reserve(record.evaluations.size());
  for (const Evaluation& ev : record.evaluations) {
    inst.objective.push_back(ev.objective);
    inst.feasible.push_back(!ev.failed && ev.feasible);
  }
  return inst;
}

DataProfile data_profile(const std::vector<ProfileInstance>& instances, double tolerance) {
  if (instances.empty()) throw std::invalid_argument("data_profile: no instances");
  std::size_t max_budget = 0;
  for (const auto& inst : instances) max_budget = std::max(max_budget, inst.objective.size());

  DataProfile profile;
  profile.tolerance = tolerance;
  profile.solved_fraction.assign(max_budget, 0.0);

  for (const auto& inst : instances) {
    const double denom = std::max(std::abs(inst.reference), kRefDenomFloor);
    std::size_t solved_at = max_budget + 1;
    for (std::size_t i = 0; i < inst.objective.size(); ++i) {
      if (!inst.feasible[i]) continue;
      if ((inst.objective[i] - inst.reference) / denom <= tolerance) {
        solved_at = i + 1;
        break;
      }
    }
    for (std::size_t b = solved_at; b <= max_budget; ++b) {
      profile.solved_fraction[b - 1] += 1.0;
    }
  }
  for (double& v : profile.solved_fraction) v /= static_cast<double>(instances.size());
  return profile;
}

double final_relative_error(const RunRecord& record, double reference) {
  if (!record.has_feasible()) return kInf;
  const double denom = std::max(std::abs(reference), kRefDenomFloor);
  return (record.best_feasible() - reference) / denom;
}

}  // namespace msego::bench
