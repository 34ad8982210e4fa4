#include <benchmark/benchmark.h>

#include <cmath>

#include "msego/bench/problems.hpp"
#include "msego/gp.hpp"
#include "msego/kpls_adaptive.hpp"
#include "msego/mixed_space.hpp"
#include "msego/pls.hpp"
#include "msego/rng.hpp"
#include "msego/sego.hpp"

namespace {

using namespace msego;

MixedSpace mixed_space_12() {
  return MixedSpace{{{16., 18.}, {5., 11.}, {1.5, 6.}, {1.5, 6.}, {0., 1.}, {20., 30.}},
                    {{30000, 32000, 34000, 36000}, {2, 3, 4}},
                    {2, 2}};
}

Eigen::MatrixXd training_inputs(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform01();
  }
  return x;
}

Eigen::VectorXd training_outputs(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    y[i] = std::sin(3.0 * x(i, 0)) + x(i, 1) * x(i, 1);
  }
  return y;
}

void BM_KernelSe(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(1);
  Eigen::VectorXd a(dim), b(dim), theta(dim);
  for (int i = 0; i < dim; ++i) {
    a[i] = rng.uniform01();
    b[i] = rng.uniform01();
    theta[i] = rng.uniform(0.1, 2.0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_se(a, b, theta));
  }
}
BENCHMARK(BM_KernelSe)->Arg(2)->Arg(12)->Arg(29);

void BM_KernelKpls(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  Rng rng(2);
  Eigen::VectorXd a(dim), b(dim);
  for (int i = 0; i < dim; ++i) {
    a[i] = rng.uniform01();
    b[i] = rng.uniform01();
  }
  PlsLoadings loadings;
  loadings.coefficients = Eigen::MatrixXd::Random(dim, 2);
  loadings.input_means = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd theta(2);
  theta << 0.8, 1.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_kpls(a, b, theta, loadings));
  }
}
BENCHMARK(BM_KernelKpls)->Arg(12)->Arg(29);

void BM_RelaxProject(benchmark::State& state) {
  const MixedSpace space = mixed_space_12();
  const MixedPoint w{{17.0, 8.0, 3.0, 2.0, 0.5, 25.0}, {32000, 2}, {1, 0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(space.project(space.relax(w)));
  }
}
BENCHMARK(BM_RelaxProject);

void BM_LhsSample(benchmark::State& state) {
  const MixedSpace space = mixed_space_12();
  for (auto _ : state) {
    benchmark::DoNotOptimize(lhs_sample(space, static_cast<int>(state.range(0)), 7));
  }
}
BENCHMARK(BM_LhsSample)->Arg(5)->Arg(50);

void BM_PlsFit(benchmark::State& state) {
  const Eigen::MatrixXd x = training_inputs(40, static_cast<int>(state.range(0)), 3);
  const Eigen::VectorXd y = training_outputs(x);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pls_fit(x, y, 2));
  }
}
BENCHMARK(BM_PlsFit)->Arg(12)->Arg(29);

void BM_FitGpFixedTheta(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd x = training_inputs(n, 6, 4);
  const Eigen::VectorXd y = training_outputs(x);
  FitOptions opts;
  opts.fixed_theta = Eigen::VectorXd::Constant(6, 1.0);
  opts.fixed_nugget = 1e-10;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gp(x, y, KernelConfig::full_se(), opts));
  }
}
BENCHMARK(BM_FitGpFixedTheta)->Arg(20)->Arg(55);

void BM_FitGpMle(benchmark::State& state) {
  const Eigen::MatrixXd x = training_inputs(30, 6, 5);
  const Eigen::VectorXd y = training_outputs(x);
  FitOptions opts;
  opts.starts = 2;
  opts.evals_per_start = 100;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_gp(x, y, KernelConfig::full_se(), opts));
  }
}
BENCHMARK(BM_FitGpMle);

void BM_Predict(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Eigen::MatrixXd x = training_inputs(n, 6, 6);
  const Eigen::VectorXd y = training_outputs(x);
  FitOptions opts;
  opts.fixed_theta = Eigen::VectorXd::Constant(6, 1.0);
  const GpModel model = fit_gp(x, y, KernelConfig::full_se(), opts);
  Rng rng(7);
  Eigen::VectorXd q(6);
  for (int i = 0; i < 6; ++i) q[i] = rng.uniform01();
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.predict(q));
  }
}
BENCHMARK(BM_Predict)->Arg(20)->Arg(55);

void BM_PressKfold(benchmark::State& state) {
  const Eigen::MatrixXd x = training_inputs(32, 11, 8);
  const Eigen::VectorXd y = training_outputs(x);
  AdaptiveConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(press_kfold(x, y, 2, 4, 1, cfg));
  }
}
BENCHMARK(BM_PressKfold);

void BM_SegoIterationBranin5(benchmark::State& state) {
  const bench::RegisteredProblem& rp = bench::find_problem("branin5");
  for (auto _ : state) {
    SegoConfig cfg;
    cfg.doe_size = 5;
    cfg.budget = 1;
    cfg.seed = 11;
    benchmark::DoNotOptimize(optimize(rp.problem, cfg));
  }
}
BENCHMARK(BM_SegoIterationBranin5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
