#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>

#include <nlohmann/json_fwd.hpp>

#include "msego/mixed_space.hpp"
#include "msego/pls.hpp"

namespace msego {

enum class KernelVariant { FullSe, KplsSe };

/// Kernel selection: full squared-exponential (one length-scale per relaxed
/// dimension) or the PLS-reduced variant (one length-scale per latent
/// component, spread over dimensions by the loading coefficients).
struct KernelConfig {
  KernelVariant variant = KernelVariant::FullSe;
  PlsLoadings loadings;  // KplsSe only

  static KernelConfig full_se() { return {}; }
  static KernelConfig kpls(PlsLoadings b) { return {KernelVariant::KplsSe, std::move(b)}; }

  int hyperparameter_count(int relaxed_dim) const {
    return variant == KernelVariant::FullSe ? relaxed_dim : loadings.components();
  }
};

/// exp(-sum_p theta_p (a_p - b_p)^2).  Throws std::domain_error on
/// non-positive theta or length mismatch.
double kernel_se(const RelaxedVector& a, const RelaxedVector& b, const Eigen::VectorXd& theta);

/// exp(-sum_q theta_q sum_p (b^q_p)^2 (a_p - b_p)^2).
double kernel_kpls(const RelaxedVector& a, const RelaxedVector& b, const Eigen::VectorXd& theta,
                   const PlsLoadings& loadings);

enum class NuggetMode {
  JitterFloor,  ///< fixed 1e-10, x10 escalation up to 1e-6 on Cholesky failure
  MleNugget,    ///< log-parameterized eta in [1e-12, 1e-2], optimized with theta
};

struct FitOptions {
  /// Skip the likelihood search and use these length-scales as-is.
  std::optional<Eigen::VectorXd> fixed_theta;
  /// Pin the nugget (0 allowed); disables nugget optimization and escalation.
  std::optional<double> fixed_nugget;
  /// Default: JitterFloor for FullSe, MleNugget for KplsSe.
  std::optional<NuggetMode> nugget_mode;
  /// Relaxed-box bounds used to map every input coordinate to [0,1].
  /// Absent: inputs are used as given.
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> input_bounds;
  int starts = 5;
  /// Likelihood evaluations per start; 0 means 200 per hyperparameter dimension.
  int evals_per_start = 0;
  std::uint64_t seed = 0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Fitted Gaussian-process surrogate with constant regression term.
/// Immutable after fit; predict() is safe to call concurrently.
class GpModel {
 public:
  Prediction predict(const RelaxedVector& point) const;
  Prediction predict(const MixedPoint& w, const MixedSpace& space) const;

  int training_size() const { return static_cast<int>(outputs_.size()); }
  const Eigen::MatrixXd& training_inputs() const { return inputs_norm_; }
  const Eigen::VectorXd& training_outputs() const { return outputs_; }
  const KernelConfig& kernel() const { return kernel_; }
  const Eigen::VectorXd& theta() const { return theta_; }
  double nugget() const { return nugget_; }
  /// Process mean / variance MLE on the original output scale.
  double mu_hat() const { return y_mean_ + y_scale_ * mu_std_; }
  double sigma2_hat() const { return y_scale_ * y_scale_ * sigma2_std_; }
  /// Concentrated log-likelihood attained by the fit (standardized scale).
  double log_likelihood() const { return cll_; }
  bool constant_response() const { return constant_; }
  bool jitter_escalated() const { return jitter_escalated_; }

  nlohmann::json to_json() const;
  static GpModel from_json(const nlohmann::json& j);

 private:
  friend GpModel fit_gp(const Eigen::MatrixXd&, const Eigen::VectorXd&, KernelConfig, const FitOptions&);

  Eigen::VectorXd normalize_query(const RelaxedVector& point) const;
  void factorize();  // builds chol/alpha/v from inputs, theta, nugget

  Eigen::MatrixXd inputs_norm_;  // n_t x n', duplicate rows merged
  Eigen::VectorXd outputs_;      // merged raw outputs
  Eigen::VectorXd y_std_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::VectorXd norm_lo_, norm_scale_;  // size 0 -> identity mapping
  KernelConfig kernel_;
  Eigen::VectorXd theta_;      // n' (FullSe) or d (KplsSe)
  Eigen::VectorXd theta_eff_;  // per relaxed dimension
  double nugget_ = 0.0;
  double mu_std_ = 0.0;
  double sigma2_std_ = 1.0;
  Eigen::MatrixXd chol_;   // lower factor of R + eta I
  Eigen::VectorXd alpha_;  // R^{-1}(y_std - 1 mu)
  Eigen::VectorXd v_;      // L^{-1} 1
  double one_R_one_ = 1.0;
  double cll_ = 0.0;
  bool constant_ = false;
  bool jitter_escalated_ = false;
};

/// Concentrated maximum-likelihood fit over log10(theta) in [-6, 2] (and
/// log10(nugget) in [-12, -2] when the nugget is optimized), multi-start
/// derivative-free local search.  Duplicate input rows are merged by
/// averaging outputs; a constant response yields a flagged constant model.
GpModel fit_gp(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs, KernelConfig kernel,
               const FitOptions& options = {});

/// Concentrated log-likelihood of the given hyperparameters on the prepared
/// (normalized, deduplicated, standardized) data; -inf when R + eta I is not
/// positive definite.  Exposed for tests and diagnostics.
double concentrated_log_likelihood(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& outputs,
                                   const KernelConfig& kernel, const Eigen::VectorXd& theta,
                                   double nugget,
                                   const std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>>&
                                       input_bounds = std::nullopt);

}  // namespace msego
