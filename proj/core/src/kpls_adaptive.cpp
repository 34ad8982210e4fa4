#include "msego/kpls_adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "msego/errors.hpp"
#include "msego/pls.hpp"
#include "msego/rng.hpp"

namespace msego {

namespace {

std::vector<std::vector<Eigen::Index>> assign_folds(Eigen::Index n, int folds, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0xf01d));
  rng.shuffle(order);
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < order.size(); ++i) {
    out[i % static_cast<std::size_t>(folds)].push_back(order[i]);
  }
  return out;
}

int capped_d_max(const AdaptiveConfig& cfg, Eigen::Index n, Eigen::Index dim) {
  const int fold_size = static_cast<int>((n + cfg.folds - 1) / cfg.folds);  // ceil
  return std::min<int>({cfg.d_max, static_cast<int>(dim), static_cast<int>(n) - fold_size - 1});
}

}  // namespace

double press_kfold(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, int components,
                   int folds, std::uint64_t seed, const AdaptiveConfig& cfg) {
  const Eigen::Index n = inputs.rows();
  if (folds < 2) throw std::invalid_argument("press_kfold: need at least two folds");
  if (n < folds) throw std::invalid_argument("press_kfold: need at least one row per fold");
  if (components < 1) throw std::invalid_argument("press_kfold: components must be positive");

  // Standardize outputs once so the PRESS is scale-free.
  const double mean = outputs.mean();
  const double sd = std::sqrt((outputs.array() - mean).square().sum() / static_cast<double>(n));
  if (sd <= 0.0) throw DegenerateDataError("press_kfold: outputs have zero variance");
  const Eigen::VectorXd y = (outputs.array() - mean) / sd;

  const auto fold_rows = assign_folds(n, folds, seed);
  double press = 0.0;
  for (std::size_t k = 0; k < fold_rows.size(); ++k) {
    const auto& held = fold_rows[k];
    const Eigen::Index n_train = n - static_cast<Eigen::Index>(held.size());
    Eigen::MatrixXd xt(n_train, inputs.cols());
    Eigen::VectorXd yt(n_train);
    Eigen::Index r = 0;
    std::vector<char> is_held(static_cast<std::size_t>(n), 0);
    for (Eigen::Index i : held) is_held[static_cast<std::size_t>(i)] = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!is_held[static_cast<std::size_t>(i)]) {
        xt.row(r) = inputs.row(i);
        yt[r] = y[i];
        ++r;
      }
    }

    try {
      // Loadings are fit in the same coordinates the kernel sees.
      Eigen::MatrixXd xt_kernel = xt;
      if (cfg.input_bounds) {
        const auto& [lo, hi] = *cfg.input_bounds;
        Eigen::VectorXd scale = (hi - lo).cwiseMax(0.0);
        for (Eigen::Index i = 0; i < scale.size(); ++i) {
          if (scale[i] <= 0.0) scale[i] = 1.0;
        }
        xt_kernel = (xt.rowwise() - lo.transpose()).array().rowwise() / scale.transpose().array();
      }
      const PlsLoadings loadings = pls_fit(xt_kernel, yt, components);

      FitOptions fit;
      fit.starts = cfg.fold_fit_starts;
      fit.evals_per_start = cfg.fold_fit_evals_per_start;
      fit.input_bounds = cfg.input_bounds;
      fit.seed = mix_seed(seed, 0xa11 + k);
      const GpModel model = fit_gp(xt, yt, KernelConfig::kpls(loadings), fit);

      for (Eigen::Index i : held) {
        const Prediction p = model.predict(inputs.row(i).transpose());
        const double err = y[i] - p.mean;
        press += err * err;
      }
    } catch (const IllConditionedError& e) {
      throw IllConditionedError("press_kfold: fold " + std::to_string(k + 1) + " of " +
                                std::to_string(folds) + " failed: " + e.what());
    } catch (const DegenerateDataError& e) {
      throw IllConditionedError("press_kfold: fold " + std::to_string(k + 1) + " of " +
                                std::to_string(folds) + " failed: " + e.what());
    }
  }
  return press;
}

double wold_ratio(double press_next, double press_cur) {
  if (press_cur < 0.0 || press_next < 0.0) throw std::invalid_argument("wold_ratio: PRESS must be >= 0");
  if (press_cur == 0.0) return std::numeric_limits<double>::infinity();
  return press_next / press_cur;
}

SelectionResult select_components(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                                  const AdaptiveConfig& cfg) {
  if (cfg.d_min < 1 || cfg.d_max < cfg.d_min) throw std::invalid_argument("select_components: bad d range");
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0)) {
    throw std::invalid_argument("select_components: threshold must lie in [0,1]");
  }
  const int d_max = capped_d_max(cfg, inputs.rows(), inputs.cols());
  if (d_max < cfg.d_min) {
    throw std::invalid_argument("select_components: data too small for d_min components per fold");
  }

  SelectionResult result;
  int d = cfg.d_min;
  double press_cur = press_kfold(inputs, outputs, d, cfg.folds, cfg.seed, cfg);
  result.trace.push_back({d, press_cur, std::numeric_limits<double>::quiet_NaN()});

  while (d < d_max) {
    const double press_next = press_kfold(inputs, outputs, d + 1, cfg.folds, cfg.seed, cfg);
    const double ratio = wold_ratio(press_next, press_cur);
    result.trace.back().wold_r = ratio;
    result.trace.push_back({d + 1, press_next, std::numeric_limits<double>::quiet_NaN()});
    if (ratio >= cfg.threshold) break;
    ++d;
    press_cur = press_next;  // folds unchanged within this call
  }

  result.components = d;
  return result;
}

}  // namespace msego
