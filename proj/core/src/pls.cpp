#include "msego/pls.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "msego/errors.hpp"

namespace msego {

PlsLoadings pls_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& response, int components) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index p = inputs.cols();
  if (n != response.size()) throw std::invalid_argument("pls_fit: inputs/response row mismatch");
  if (n < 2) throw std::invalid_argument("pls_fit: need at least two samples");
  const int d_cap = static_cast<int>(std::min<Eigen::Index>(p, n - 1));
  if (components < 1 || components > d_cap) {
    throw std::invalid_argument("pls_fit: components must lie in [1, min(n', n_t - 1)] = [1, " +
                                std::to_string(d_cap) + "]");
  }

  const Eigen::VectorXd means = inputs.colwise().mean();
  Eigen::MatrixXd X = inputs.rowwise() - means.transpose();
  Eigen::VectorXd y = response.array() - response.mean();
  if (y.norm() == 0.0) throw DegenerateDataError("pls_fit: response has zero variance");

  const double initial_norm = X.norm();
  Eigen::MatrixXd W(p, components);
  Eigen::MatrixXd P(p, components);

  for (int q = 0; q < components; ++q) {
    if (X.norm() <= 1e-12 * initial_norm) {
      throw DegenerateDataError("pls_fit: input matrix deflated to zero after " + std::to_string(q) +
                                " components; " + std::to_string(components) + " requested");
    }
    Eigen::VectorXd w = X.transpose() * y;
    const double wn = w.norm();
    if (wn == 0.0) {
      throw DegenerateDataError("pls_fit: residual inputs uncorrelated with response at component " +
                                std::to_string(q + 1));
    }
    w /= wn;
    const Eigen::VectorXd t = X * w;
    const double tt = t.squaredNorm();
    if (tt <= 0.0) throw DegenerateDataError("pls_fit: zero score vector at component " + std::to_string(q + 1));
    const Eigen::VectorXd pq = X.transpose() * t / tt;
    X -= t * pq.transpose();
    W.col(q) = w;
    P.col(q) = pq;
  }

  // Rotated weights map original centered inputs to latent scores.
  const Eigen::MatrixXd PtW = P.transpose() * W;
  Eigen::MatrixXd B = W * PtW.partialPivLu().solve(Eigen::MatrixXd::Identity(components, components));

  for (int q = 0; q < components; ++q) {
    Eigen::Index arg = 0;
    B.col(q).cwiseAbs().maxCoeff(&arg);
    if (B(arg, q) < 0.0) B.col(q) = -B.col(q);
    if (B.col(q).norm() == 0.0) {
      throw DegenerateDataError("pls_fit: zero loading column at component " + std::to_string(q + 1));
    }
  }

  return PlsLoadings{std::move(B), means};
}

}  // namespace msego
