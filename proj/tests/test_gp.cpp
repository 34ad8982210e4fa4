#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>

#include "common/gp_oracle.hpp"
#include "msego/gp.hpp"
#include "msego/rng.hpp"

using namespace msego;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace

TEST_CASE("squared-exponential kernel values") {
  CHECK(kernel_se(vec({0.3, -1.0}), vec({0.3, -1.0}), vec({2.0, 5.0})) == 1.0);
  CHECK(kernel_se(vec({0.0}), vec({1.0}), vec({1.0})) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(kernel_se(vec({0.0, 0.0}), vec({1.0, 2.0}), vec({0.5, 0.25})) ==
        doctest::Approx(std::exp(-1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(kernel_se(vec({0.0}), vec({1.0}), vec({0.0})), std::domain_error);
  CHECK_THROWS_AS(kernel_se(vec({0.0}), vec({1.0, 2.0}), vec({1.0})), std::domain_error);
}

TEST_CASE("kernel symmetry and monotone decay") {
  Rng rng(5);
  const Eigen::VectorXd theta = vec({0.7, 1.3, 0.2});
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd a(3), b(3);
    for (int i = 0; i < 3; ++i) {
      a[i] = rng.uniform(-2.0, 2.0);
      b[i] = rng.uniform(-2.0, 2.0);
    }
    const double kab = kernel_se(a, b, theta);
    CHECK(kab == kernel_se(b, a, theta));
    CHECK(kab > 0.0);
    CHECK(kab <= 1.0);
    // moving further along the same direction can only decrease correlation
    const Eigen::VectorXd c = a + 2.0 * (b - a);
    CHECK(kernel_se(a, c, theta) <= kab + 1e-15);
  }
}

TEST_CASE("KPLS kernel: identity with tied length-scales and inert zero loadings") {
  PlsLoadings ones;
  ones.coefficients = Eigen::MatrixXd::Ones(4, 1);
  ones.input_means = Eigen::VectorXd::Zero(4);
  Rng rng(17);
  for (int t = 0; t < 200; ++t) {
    Eigen::VectorXd a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      a[i] = rng.uniform(-1.0, 1.0);
      b[i] = rng.uniform(-1.0, 1.0);
    }
    const double th = rng.uniform(0.05, 3.0);
    const double lhs = kernel_kpls(a, b, vec({th}), ones);
    const double rhs = kernel_se(a, b, Eigen::VectorXd::Constant(4, th));
    CHECK(std::abs(lhs - rhs) <= 1e-14);
  }

  PlsLoadings axis;
  axis.coefficients = Eigen::MatrixXd::Zero(2, 1);
  axis.coefficients(0, 0) = 1.0;
  axis.input_means = Eigen::VectorXd::Zero(2);
  CHECK(kernel_kpls(vec({0.0, 5.0}), vec({1.0, 9.0}), vec({2.0}), axis) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(kernel_kpls(vec({0.0, 5.0}), vec({0.0, 5.0}), vec({2.0}), axis) == 1.0);
  CHECK_THROWS_AS(kernel_kpls(vec({0.0, 5.0}), vec({1.0, 9.0}), vec({2.0, 1.0}), axis),
                  std::domain_error);
}

TEST_CASE("constant response yields a flagged constant model") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 1.0, 2.0;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(3, 7.0);
  const GpModel m = fit_gp(x, y, KernelConfig::full_se());
  CHECK(m.constant_response());
  for (double q : {-5.0, 0.5, 42.0}) {
    const Prediction p = m.predict(vec({q}));
    CHECK(p.mean == 7.0);
    CHECK(p.variance >= 0.0);
  }
}

TEST_CASE("interpolation with a fixed theta and zero nugget") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 1.0, 2.0;
  const Eigen::VectorXd y = vec({0.0, 1.0, 0.0});
  FitOptions opts;
  opts.fixed_theta = vec({1.0});
  opts.fixed_nugget = 0.0;
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);

  const Prediction at1 = m.predict(vec({1.0}));
  CHECK(at1.mean == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(at1.variance <= 1e-10 * m.sigma2_hat());

  SUBCASE("dense-algebra oracle agreement at x = 0.5") {
    const test::DenseGpOracle oracle(x, y, vec({1.0}), 0.0);
    const auto [om, ov] = oracle.predict(vec({0.5}));
    const Prediction p = m.predict(vec({0.5}));
    CHECK(std::abs(p.mean - om) < 1e-10);
    CHECK(std::abs(p.variance - ov) < 1e-10);
  }

  SUBCASE("far from the data the prediction reverts to the process mean") {
    // r underflows to zero at x = 150, leaving mu and sigma^2 (1 + 1/(1'R^-1 1))
    const test::DenseGpOracle oracle(x, y, vec({1.0}), 0.0);
    const Prediction far = m.predict(vec({150.0}));
    CHECK(far.mean == doctest::Approx(m.mu_hat()).epsilon(1e-12));
    const auto [om, ov] = oracle.predict(vec({150.0}));
    CHECK(far.variance == doctest::Approx(ov).epsilon(1e-10));
    CHECK(far.variance > m.sigma2_hat());  // mean-estimation term inflates it
    CHECK(std::abs(oracle.mu() - m.mu_hat()) < 1e-12);
  }
}

TEST_CASE("random small designs match the dense oracle to 1e-10") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(4));  // 2..5 points
    const int dim = 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i) {
      // keep rows separated so both routes stay well-conditioned
      for (int attempt = 0; attempt < 100; ++attempt) {
        for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform(0.0, 2.0);
        double min_dist = 1e30;
        for (int k = 0; k < i; ++k) min_dist = std::min(min_dist, (x.row(i) - x.row(k)).norm());
        if (min_dist > 0.4) break;
      }
    }
    // O(1) outputs and moderate length-scales keep both routes well inside
    // the 1e-10 comparison band
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-1.5, 1.5);
    Eigen::VectorXd theta(dim);
    for (int j = 0; j < dim; ++j) theta[j] = rng.uniform(0.5, 2.0);

    FitOptions opts;
    opts.fixed_theta = theta;
    opts.fixed_nugget = 0.0;
    GpModel m;
    test::DenseGpOracle oracle(x, y, theta, 0.0);
    try {
      m = fit_gp(x, y, KernelConfig::full_se(), opts);
    } catch (const std::exception&) {
      continue;  // ill-conditioned draw; the oracle would be meaningless too
    }
    for (int q = 0; q < 5; ++q) {
      Eigen::VectorXd query(dim);
      for (int j = 0; j < dim; ++j) query[j] = rng.uniform(-0.5, 2.5);
      const auto [om, ov] = oracle.predict(query);
      const Prediction p = m.predict(query);
      CHECK(std::abs(p.mean - om) < 1e-10);
      CHECK(std::abs(p.variance - ov) < 1e-10);
    }
  }
}

TEST_CASE("fitted length-scales never lose to the unit start") {
  Rng rng(29);
  Eigen::MatrixXd x(12, 2);
  Eigen::VectorXd y(12);
  for (int i = 0; i < 12; ++i) {
    x(i, 0) = rng.uniform(0.0, 1.0);
    x(i, 1) = rng.uniform(0.0, 1.0);
    y[i] = std::sin(3.0 * x(i, 0)) + 0.1 * x(i, 1);
  }
  FitOptions opts;
  opts.evals_per_start = 120;
  opts.seed = 9;
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);
  const double at_unit =
      concentrated_log_likelihood(x, y, KernelConfig::full_se(), vec({1.0, 1.0}), 1e-10);
  CHECK(m.log_likelihood() >= at_unit - 1e-9);
}

TEST_CASE("duplicate rows are merged by averaging the outputs") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 1.0, 2.0;
  const Eigen::VectorXd y = vec({0.0, 2.0, 4.0, 1.0});
  FitOptions opts;
  opts.fixed_theta = vec({1.0});
  opts.fixed_nugget = 0.0;
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);
  CHECK(m.training_size() == 3);
  CHECK(m.predict(vec({1.0})).mean == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("variance is non-negative everywhere sampled") {
  Rng rng(31);
  Eigen::MatrixXd x(15, 2);
  Eigen::VectorXd y(15);
  for (int i = 0; i < 15; ++i) {
    x(i, 0) = rng.uniform(0.0, 1.0);
    x(i, 1) = rng.uniform(0.0, 1.0);
    y[i] = std::cos(5.0 * x(i, 0)) * x(i, 1);
  }
  FitOptions opts;
  opts.evals_per_start = 80;
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);
  for (int t = 0; t < 200; ++t) {
    const Prediction p = m.predict(vec({rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2)}));
    CHECK(p.variance >= 0.0);
  }
}

TEST_CASE("KPLS fit with a nugget smooths and stays close to the data") {
  Rng rng(37);
  const int n = 20;
  Eigen::MatrixXd x(n, 5);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = rng.uniform(0.0, 1.0);
    y[i] = 3.0 * x(i, 0) - 2.0 * x(i, 2);
  }
  const PlsLoadings b = pls_fit(x, y, 2);
  FitOptions opts;
  opts.evals_per_start = 100;
  const GpModel m = fit_gp(x, y, KernelConfig::kpls(b), opts);
  CHECK(m.nugget() >= 1e-12);
  CHECK(m.nugget() <= 1e-2);
  double max_err = 0.0;
  for (int i = 0; i < n; ++i) {
    max_err = std::max(max_err, std::abs(m.predict(x.row(i).transpose()).mean - y[i]));
  }
  const double range = y.maxCoeff() - y.minCoeff();
  CHECK(max_err < 0.05 * range);
}

TEST_CASE("input normalization maps the box to the unit cube") {
  // Wildly different scales; with bounds the fit normalizes internally.
  Eigen::MatrixXd x(5, 2);
  x << 30000, 0.1, 32000, 0.9, 34000, 0.4, 36000, 0.7, 31000, 0.2;
  Eigen::VectorXd y(5);
  y << 1.0, 2.0, 0.5, 1.5, 0.8;
  FitOptions opts;
  opts.input_bounds = {vec({30000.0, 0.0}), vec({36000.0, 1.0})};
  opts.fixed_theta = vec({1.0, 1.0});
  opts.fixed_nugget = 0.0;
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);
  // training inputs are stored normalized
  CHECK(m.training_inputs().minCoeff() >= 0.0);
  CHECK(m.training_inputs().maxCoeff() <= 1.0);
  // interpolation still holds at the raw coordinates
  CHECK(m.predict(vec({34000.0, 0.4})).mean == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("mixed-point predictions go through relax") {
  const MixedSpace space{{{0.0, 2.0}}, {{1, 3, 5}}, {3}};
  const auto points = lhs_sample(space, 8, 5);
  Eigen::MatrixXd x(8, space.relaxed_dim());
  Eigen::VectorXd y(8);
  for (int i = 0; i < 8; ++i) {
    const MixedPoint& w = points[static_cast<std::size_t>(i)];
    x.row(i) = space.relax(w).transpose();
    y[i] = w.x[0] + static_cast<double>(w.z[0]) + w.c[0];
  }
  FitOptions opts;
  opts.fixed_theta = Eigen::VectorXd::Constant(space.relaxed_dim(), 1.0);
  opts.input_bounds = space.relaxed_bounds();
  const GpModel m = fit_gp(x, y, KernelConfig::full_se(), opts);
  const MixedPoint probe{{1.3}, {3}, {2}};
  const Prediction a = m.predict(probe, space);
  const Prediction b = m.predict(space.relax(probe));
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
}

TEST_CASE("model JSON round trip is numerically exact") {
  Rng rng(41);
  Eigen::MatrixXd x(10, 3);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = rng.uniform(0.0, 1.0);
    y[i] = x(i, 0) * x(i, 1) - x(i, 2);
  }
  const PlsLoadings b = pls_fit(x, y, 2);
  FitOptions opts;
  opts.evals_per_start = 60;
  const GpModel m = fit_gp(x, y, KernelConfig::kpls(b), opts);
  const GpModel back = GpModel::from_json(m.to_json());
  CHECK(back.theta() == m.theta());
  CHECK(back.nugget() == m.nugget());
  CHECK(back.training_inputs() == m.training_inputs());
  CHECK(back.training_outputs() == m.training_outputs());
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd q(3);
    for (int j = 0; j < 3; ++j) q[j] = rng.uniform(0.0, 1.0);
    const Prediction p1 = m.predict(q);
    const Prediction p2 = back.predict(q);
    CHECK(p1.mean == p2.mean);
    CHECK(p1.variance == p2.variance);
  }
}
