#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "msego/gp.hpp"

namespace msego {

/// Configuration of the adaptive component-count selection.
/// d_max is additionally capped at call time by min(n', n_t - ceil(n_t/K) - 1)
/// so that every training fold can support the fit.
struct AdaptiveConfig {
  int d_min = 1;
  int d_max = 5;
  double threshold = 0.95;  // stop once PRESS(d+1)/PRESS(d) >= threshold
  int folds = 4;
  std::uint64_t seed = 0;
  /// Reduced-budget hyperparameter search for the fold fits.
  int fold_fit_starts = 2;
  int fold_fit_evals_per_start = 50;
  /// Bounds forwarded to the fold fits ([0,1] mapping of the relaxed box).
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> input_bounds;
};

/// K-fold PRESS of a KPLS GP with `components` latent directions, computed on
/// standardized outputs so values are scale-free.  Fold assignment is a
/// seeded random permutation; folds partition the rows with sizes differing
/// by at most one.  Deterministic per seed.
double press_kfold(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, int components,
                   int folds, std::uint64_t seed, const AdaptiveConfig& cfg = {});

/// PRESS(d+1)/PRESS(d); +inf when PRESS(d) == 0 (a perfect model cannot be
/// improved by adding components).
double wold_ratio(double press_next, double press_cur);

struct ComponentTraceEntry {
  int components = 0;
  double press = 0.0;
  double wold_r = 0.0;  // NaN when PRESS(d+1) was never evaluated
};

struct SelectionResult {
  int components = 1;
  std::vector<ComponentTraceEntry> trace;
  /// True when PRESS(d) values were carried over between steps (folds fixed
  /// within this call); recomputation would only happen if folds changed.
  bool press_carried = true;
};

/// Adaptive choice of the component count: start at d_min, add components
/// while PRESS(d+1)/PRESS(d) < threshold, stop at d_max.  One fold division
/// per call (callers re-seed per enrichment iteration).
SelectionResult select_components(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                                  const AdaptiveConfig& cfg);

}  // namespace msego
