#pragma once

#include <Eigen/Dense>

namespace msego {

/// Rotated PLS1 weights.  Column q of `coefficients` holds the influence
/// coefficients b^q mapping original (centered) inputs to the q-th latent
/// score; `input_means` are the column means removed before fitting.
struct PlsLoadings {
  Eigen::MatrixXd coefficients;  // n' x d
  Eigen::VectorXd input_means;   // n'

  int components() const { return static_cast<int>(coefficients.cols()); }
  int input_dim() const { return static_cast<int>(coefficients.rows()); }
};

/// PLS1 fit (single response, X-deflation only); returns the rotated weights
/// W (P^T W)^{-1}.  Each column's entry of largest magnitude is made
/// non-negative.
///
/// Throws DegenerateDataError when y has zero variance or the residual input
/// matrix is exhausted before `components` columns are built, and
/// std::invalid_argument when `components` is outside [1, min(n', n_t - 1)].
PlsLoadings pls_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response, int components);

}  // namespace msego
