#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msego/acquisition.hpp"
#include "msego/gp.hpp"
#include "msego/kpls_adaptive.hpp"
#include "msego/mixed_space.hpp"

namespace msego {

/// Constrained black-box problem over a mixed space.  Constraints are
/// inequalities, feasible iff g(w) <= 0.  Black boxes signal failure by
/// throwing EvaluationError.
struct Problem {
  std::string name;
  MixedSpace space;
  std::function<double(const MixedPoint&)> objective;
  std::vector<std::function<double(const MixedPoint&)>> constraints;
  /// Optional joint evaluator returning (f, g) in one call; used instead of
  /// objective/constraints when set (e.g. the child-process protocol).
  std::function<std::pair<double, std::vector<double>>(const MixedPoint&)> joint_evaluator;
  int joint_constraint_count = 0;
  std::optional<double> reference_value;
  std::optional<MixedPoint> reference_point;

  int constraint_count() const {
    return joint_evaluator ? joint_constraint_count : static_cast<int>(constraints.size());
  }
};

/// Registers h(w) = 0 as the inequality pair |h(w)| - tolerance <= 0.
void add_equality_constraint(Problem& problem, std::function<double(const MixedPoint&)> h,
                             double tolerance);

enum class KernelMode { FullSe, KplsFixed, KplsAuto };
enum class AcquisitionType { Ei, Wb2, Wb2s };

struct SegoConfig {
  int doe_size = 5;
  int budget = 50;  // enrichment iterations, one evaluation each
  KernelMode kernel_mode = KernelMode::FullSe;
  int kpls_components = 2;  // KplsFixed
  AdaptiveConfig adaptive;  // KplsAuto
  FeasibilityRule feasibility{};
  double violation_tol = 1e-4;
  AcquisitionType acquisition = AcquisitionType::Wb2s;
  double wb2s_beta = 100.0;
  int scale_candidates = 512;
  /// Inner global search; population 0 means round(50 sqrt(n')).
  int inner_population = 0;
  int inner_generations = 100;
  int refine_starts = 3;
  int refine_evals = 500;
  /// Hyperparameter likelihood search budget (0: 200 per dimension).
  int mle_starts = 5;
  int mle_evals_per_start = 0;
  std::uint64_t seed = 0;
};

struct Evaluation {
  MixedPoint point;
  double objective = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> constraints;
  double violation = 0.0;  // max over constraints of max(0, g_i)
  bool feasible = false;   // violation <= violation_tol
  bool failed = false;
  int iteration = 0;  // 0 for DoE points
  std::int64_t wall_ns = 0;  // wall time spent inside the black box
};

struct IterationInfo {
  int iteration = 0;
  int d_objective = 0;  // components used (relaxed dim for FullSe)
  std::vector<int> d_constraints;
  double objective_cll = 0.0;
  std::vector<double> constraint_cll;
  double acquisition_value = std::numeric_limits<double>::quiet_NaN();
  double wb2s_scale = 1.0;
  bool exploration_fallback = false;  // no candidate met the surrogate bounds
  bool duplicate_fallback = false;    // proposal collided with the DoE
  bool random_fallback = false;       // surrogate fit failed or all candidates duplicated
  bool fmin_from_least_violation = false;
  /// Adaptive selection traces per output ("f", "g0", "g1", ...).
  std::vector<std::pair<std::string, std::vector<ComponentTraceEntry>>> press_traces;
};

struct RunRecord {
  std::string problem;
  std::string method;
  std::uint64_t seed = 0;
  int doe_size = 0;
  std::vector<Evaluation> evaluations;
  /// Best feasible objective after each evaluation; +inf until feasible.
  std::vector<double> incumbent;
  std::vector<IterationInfo> iterations;

  bool has_feasible() const;
  double best_feasible() const;  // +inf when no feasible point
};

struct AcquisitionSpec {
  AcquisitionType type = AcquisitionType::Wb2s;
  double f_min = 0.0;
  double wb2s_scale = 1.0;
  FeasibilityRule feasibility{};
};

struct AcquisitionDiagnostics {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool exploration_fallback = false;
  /// Distinct candidates, best first, for duplicate resolution.
  std::vector<RelaxedVector> ranked;
};

/// Two-phase constrained maximization of the acquisition over the relaxed
/// box: stochastic-ranking evolutionary search, then derivative-free local
/// refinement of the leading candidates.  Always returns a point; when no
/// candidate satisfies every surrogate bound the least-violating one is
/// returned and flagged.
RelaxedVector maximize_acquisition(const GpModel& objective, const std::vector<GpModel>& constraints,
                                   const MixedSpace& space, const SegoConfig& cfg,
                                   const AcquisitionSpec& spec, std::uint64_t seed,
                                   AcquisitionDiagnostics* diag = nullptr);

/// The SEGO loop: project-relaxed DoE, per-output surrogates (with adaptive
/// component selection when configured), feasibility-restricted acquisition
/// maximization, projection, evaluation, enrichment.
RunRecord optimize(const Problem& problem, const SegoConfig& cfg);

/// Evaluates a point, classifying feasibility at `violation_tol`; failures
/// (EvaluationError) are recorded, not thrown.
Evaluation evaluate_point(const Problem& problem, const MixedPoint& w, double violation_tol,
                          int iteration);

}  // namespace msego
