// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure.  Usage: acceptance [--cli <path-to-mixed-sego>] [--only <n>]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "common/gp_oracle.hpp"
#include "msego/bench/baselines.hpp"
#include "msego/bench/problems.hpp"
#include "msego/bench/stats.hpp"
#include "msego/bench/study.hpp"
#include "msego/kpls_adaptive.hpp"
#include "msego/rng.hpp"
#include "msego/sego.hpp"

using namespace msego;
namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string message;
};

void require(bool condition, const std::string& message) {
  if (!condition) throw Failure{message};
}

std::string g_cli_path;

Eigen::MatrixXd lhs_unit(int n, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, dim);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < dim; ++j) {
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    for (int i = 0; i < n; ++i) x(i, j) = (perm[static_cast<std::size_t>(i)] + 0.5) / n;
  }
  return x;
}

/// Parallel map of seeds to run records, bounded by the shared worker cap.
std::vector<RunRecord> run_seeds(const std::function<RunRecord(std::uint64_t)>& job, int n_seeds,
                                 std::uint64_t seed0) {
  std::vector<RunRecord> out(static_cast<std::size_t>(n_seeds));
  std::atomic<int> next{0};
  const int width = std::min(bench::worker_count(0), n_seeds);
  std::vector<std::thread> threads;
  for (int t = 0; t < width; ++t) {
    threads.emplace_back([&]() {
      for (;;) {
        const int k = next.fetch_add(1);
        if (k >= n_seeds) return;
        out[static_cast<std::size_t>(k)] = job(seed0 + static_cast<std::uint64_t>(k));
      }
    });
  }
  for (auto& t : threads) t.join();
  return out;
}

double median_of(std::vector<double> v) { return bench::quantile(std::move(v), 0.5); }

// --- criterion bodies -------------------------------------------------------

void criterion_gp_oracle() {
  Rng rng(1001);
  int designs = 0;
  for (int trial = 0; designs < 40; ++trial) {
    require(trial < 500, "could not generate enough designs");
    const int n = 2 + static_cast<int>(rng.below(4));
    const int dim = 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd x(n, dim);
    for (int i = 0; i < n; ++i) {
      for (int attempt = 0; attempt < 100; ++attempt) {
        for (int j = 0; j < dim; ++j) x(i, j) = rng.uniform(0.0, 2.0);
        double min_dist = 1e30;
        for (int k = 0; k < i; ++k) min_dist = std::min(min_dist, (x.row(i) - x.row(k)).norm());
        if (min_dist > 0.4) break;
      }
    }
    Eigen::VectorXd y(n), theta(dim);
    for (int i = 0; i < n; ++i) y[i] = rng.uniform(-1.5, 1.5);
    for (int j = 0; j < dim; ++j) theta[j] = rng.uniform(0.5, 2.0);

    FitOptions opts;
    opts.fixed_theta = theta;
    opts.fixed_nugget = 0.0;
    GpModel m;
    try {
      m = fit_gp(x, y, KernelConfig::full_se(), opts);
    } catch (const std::exception&) {
      continue;
    }
    const test::DenseGpOracle oracle(x, y, theta, 0.0);
    for (int q = 0; q < 6; ++q) {
      Eigen::VectorXd query(dim);
      for (int j = 0; j < dim; ++j) query[j] = rng.uniform(-0.5, 2.5);
      const auto [om, ov] = oracle.predict(query);
      const Prediction p = m.predict(query);
      require(std::abs(p.mean - om) <= 1e-10,
              "mean mismatch vs dense oracle: " + std::to_string(std::abs(p.mean - om)));
      require(std::abs(p.variance - ov) <= 1e-10,
              "variance mismatch vs dense oracle: " + std::to_string(std::abs(p.variance - ov)));
    }
    ++designs;
  }
}

void criterion_interpolation() {
  Rng rng(2002);
  int checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    // random mixed space with at least one continuous dimension
    const int nc = 1 + static_cast<int>(rng.below(2));
    const int ni = static_cast<int>(rng.below(2));
    const int ncat = static_cast<int>(rng.below(2));
    std::vector<std::pair<double, double>> cont;
    for (int i = 0; i < nc; ++i) {
      const double lo = rng.uniform(-2.0, 0.0);
      cont.push_back({lo, lo + rng.uniform(0.5, 3.0)});
    }
    std::vector<std::vector<std::int64_t>> ints;
    for (int i = 0; i < ni; ++i) ints.push_back({0, 2, 5});
    std::vector<int> cats;
    for (int i = 0; i < ncat; ++i) cats.push_back(3);
    const MixedSpace space(cont, ints, cats);

    const int n_t = 4 + static_cast<int>(rng.below(5));
    const auto points = lhs_sample(space, n_t, rng.next_u64());
    Eigen::MatrixXd x(n_t, space.relaxed_dim());
    Eigen::VectorXd y(n_t);
    for (int i = 0; i < n_t; ++i) {
      x.row(i) = space.relax(points[static_cast<std::size_t>(i)]).transpose();
      y[i] = rng.uniform(-5.0, 5.0);
    }
    // only rows that stay unique after projection interpolate their own y
    std::vector<bool> unique_row(static_cast<std::size_t>(n_t), true);
    for (int i = 0; i < n_t; ++i) {
      for (int j = 0; j < n_t; ++j) {
        if (i != j && x.row(i) == x.row(j)) unique_row[static_cast<std::size_t>(i)] = false;
      }
    }

    // length-scales sized for the normalized unit box: tight enough that a
    // zero-nugget correlation matrix of stratified points stays numerically
    // invertible
    Eigen::VectorXd theta(space.relaxed_dim());
    for (int j = 0; j < space.relaxed_dim(); ++j) theta[j] = rng.uniform(20.0, 100.0);
    FitOptions opts;
    opts.fixed_theta = theta;
    opts.fixed_nugget = 0.0;
    opts.input_bounds = space.relaxed_bounds();
    GpModel m;
    try {
      m = fit_gp(x, y, KernelConfig::full_se(), opts);
    } catch (const std::exception&) {
      continue;  // near-singular draw
    }
    const double range = y.maxCoeff() - y.minCoeff();
    for (int i = 0; i < n_t; ++i) {
      if (!unique_row[static_cast<std::size_t>(i)]) continue;
      const Prediction p = m.predict(x.row(i).transpose());
      require(std::abs(p.mean - y[i]) <= 1e-8 * range, "training mean not interpolated");
      require(p.variance <= 1e-8 * m.sigma2_hat(), "training variance not collapsed");
      ++checked;
    }
  }
  require(checked >= 100, "too few interpolation checks executed");
}

void criterion_kpls_identity() {
  Rng rng(3003);
  for (int t = 0; t < 10000; ++t) {
    const int dim = 1 + static_cast<int>(rng.below(8));
    Eigen::VectorXd a(dim), b(dim);
    for (int i = 0; i < dim; ++i) {
      a[i] = rng.uniform(-2.0, 2.0);
      b[i] = rng.uniform(-2.0, 2.0);
    }
    const double th = rng.uniform(0.01, 5.0);
    PlsLoadings ones;
    ones.coefficients = Eigen::MatrixXd::Ones(dim, 1);
    ones.input_means = Eigen::VectorXd::Zero(dim);
    const double k1 = kernel_kpls(a, b, Eigen::VectorXd::Constant(1, th), ones);
    const double k2 = kernel_se(a, b, Eigen::VectorXd::Constant(dim, th));
    require(std::abs(k1 - k2) <= 1e-14, "KPLS/SE identity violated");
  }
}

void criterion_relax_project() {
  const MixedSpace space{{{0.0, 2.0}}, {{-2, 0, 3, 7}}, {3, 4}};
  int combos = 0;
  for (int xi = 0; xi <= 20; ++xi) {
    for (std::int64_t z : {-2, 0, 3, 7}) {
      for (int c0 = 0; c0 < 3; ++c0) {
        for (int c1 = 0; c1 < 4; ++c1) {
          const MixedPoint w{{2.0 * xi / 20.0}, {z}, {c0, c1}};
          require(space.project(space.relax(w)) == w, "relax/project round trip failed");
          ++combos;
        }
      }
    }
  }
  require(combos == 1008, "expected 1008 combinations");

  const MixedSpace ceras{{{16., 18.}, {5., 11.}, {1.5, 6.}, {1.5, 6.}, {0., 1.}, {20., 30.}},
                        {{30000, 32000, 34000, 36000}, {2, 3, 4}},
                        {2, 2}};
  require(ceras.relaxed_dim() == 12, "CERAS relaxed dimension must be 12");
  std::vector<std::pair<double, double>> cont10(10, {0.0, 1.0});
  const MixedSpace dragon{cont10, {}, {17, 2}};
  require(dragon.relaxed_dim() == 29, "DRAGON relaxed dimension must be 29");
}

void criterion_adaptive_selection() {
  AdaptiveConfig cfg;
  cfg.d_min = 1;
  cfg.d_max = 5;
  cfg.threshold = 0.95;
  cfg.folds = 4;
  cfg.fold_fit_starts = 2;
  cfg.fold_fit_evals_per_start = 60;

  int one_direction_hits = 0;
  int two_direction_hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Eigen::MatrixXd x1 = lhs_unit(40, 5, 9000 + seed);
    Rng noise(100 + seed);
    Eigen::VectorXd y1(40);
    for (int i = 0; i < 40; ++i) y1[i] = 3.0 * x1(i, 0) + 0.01 * noise.normal();
    // two directions with incompatible length-scales: a slow trend and a
    // faster resolvable wiggle; one length-scale dial cannot serve both
    const Eigen::MatrixXd x2 = lhs_unit(60, 3, 9500 + seed);
    Eigen::VectorXd y2(60);
    for (int i = 0; i < 60; ++i) y2[i] = 2.0 * x2(i, 1) + 2.0 * std::sin(9.0 * x2(i, 0));
    cfg.seed = seed;
    const SelectionResult s1 = select_components(x1, y1, cfg);
    const SelectionResult s2 = select_components(x2, y2, cfg);
    require(s1.components >= cfg.d_min && s1.components <= cfg.d_max, "d outside [d_min, d_max]");
    require(s2.components >= cfg.d_min && s2.components <= cfg.d_max, "d outside [d_min, d_max]");
    if (s1.components == 1) ++one_direction_hits;
    if (s2.components >= 2) ++two_direction_hits;
  }
  require(one_direction_hits >= 9, "single dominant direction: d = 1 in only " +
                                       std::to_string(one_direction_hits) + "/10 seeds");
  require(two_direction_hits >= 9, "two-direction construction: d >= 2 in only " +
                                       std::to_string(two_direction_hits) + "/10 seeds");

  // distinct outputs may select distinct d (objective vs constraint)
  const Eigen::MatrixXd x = lhs_unit(60, 3, 9999);
  Eigen::VectorXd y_obj(60), y_con(60);
  for (int i = 0; i < 60; ++i) {
    y_obj[i] = 2.0 * x(i, 1) + 2.0 * std::sin(9.0 * x(i, 0));
    y_con[i] = 2.0 * x(i, 2);
  }
  cfg.seed = 5;
  require(select_components(x, y_obj, cfg).components !=
              select_components(x, y_con, cfg).components,
          "objective and constraint should be able to select different d");
}

void criterion_branin5_desk() {
  const bench::RegisteredProblem& rp = bench::find_problem("branin5");
  const double ref = bench::reference_value("branin5");

  const auto sego_runs = run_seeds(
      [&](std::uint64_t seed) {
        SegoConfig cfg;
        cfg.doe_size = 5;
        cfg.budget = 50;
        cfg.seed = seed;
        cfg.kernel_mode = KernelMode::FullSe;
        return optimize(rp.problem, cfg);
      },
      10, 0);
  const auto random_runs = run_seeds(
      [&](std::uint64_t seed) { return bench::random_search(rp.problem, 5, 50, seed); }, 10, 0);

  std::vector<double> sego_err, random_err;
  for (const auto& r : sego_runs) sego_err.push_back(bench::final_relative_error(r, ref));
  for (const auto& r : random_runs) random_err.push_back(bench::final_relative_error(r, ref));
  const double sego_median = median_of(sego_err);
  const double random_median = median_of(random_err);
  require(sego_median <= 0.05, "SEGO+KRG median error " + std::to_string(sego_median) + " > 5%");
  require(sego_median < random_median,
          "SEGO+KRG (" + std::to_string(sego_median) + ") did not beat random search (" +
              std::to_string(random_median) + ")");
}

void criterion_branin3_desk() {
  const bench::RegisteredProblem& rp = bench::find_problem("branin3");
  const double ref = bench::reference_value("branin3");

  const auto runs = run_seeds(
      [&](std::uint64_t seed) {
        SegoConfig cfg;
        cfg.doe_size = 5;
        cfg.budget = 50;
        cfg.seed = seed;
        cfg.kernel_mode = KernelMode::FullSe;
        cfg.feasibility = {FeasibilityMode::Utb, 3.0};
        cfg.violation_tol = 1e-4;
        return optimize(rp.problem, cfg);
      },
      10, 0);

  std::vector<double> errors;
  for (const auto& r : runs) {
    // every incumbent value must be witnessed by an evaluation within tolerance
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < r.evaluations.size(); ++i) {
      const Evaluation& ev = r.evaluations[i];
      if (!ev.failed && ev.violation <= 1e-4) running = std::min(running, ev.objective);
      require(r.incumbent[i] == running, "incumbent not restricted to violation <= 1e-4");
    }
    require(r.has_feasible(), "run ended with no feasible incumbent");
    errors.push_back(bench::final_relative_error(r, ref));
  }
  const double med = median_of(errors);
  require(med <= 0.10, "constrained median error " + std::to_string(med) + " > 10%");
}

void criterion_statistics() {
  // profiles: monotone, bounded, and tighter tolerance never ahead
  Rng rng(8008);
  std::vector<bench::ProfileInstance> instances;
  for (int k = 0; k < 20; ++k) {
    bench::ProfileInstance inst;
    inst.reference = 1.0;
    for (int i = 0; i < 40; ++i) {
      inst.objective.push_back(1.0 + rng.uniform(0.0, 0.2));
      inst.feasible.push_back(rng.uniform01() < 0.7);
    }
    instances.push_back(std::move(inst));
  }
  const bench::DataProfile loose = bench::data_profile(instances, 0.02);
  const bench::DataProfile tight = bench::data_profile(instances, 0.005);
  for (std::size_t b = 0; b < loose.solved_fraction.size(); ++b) {
    require(loose.solved_fraction[b] >= 0.0 && loose.solved_fraction[b] <= 1.0, "profile out of [0,1]");
    if (b > 0) {
      require(loose.solved_fraction[b] >= loose.solved_fraction[b - 1], "profile not monotone");
    }
    require(tight.solved_fraction[b] <= loose.solved_fraction[b] + 1e-15,
            "0.5% profile above 2% profile");
  }

  // quartiles and boxplots against a brute-force reimplementation
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(25));
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& x : v) x = rng.uniform(-5.0, 5.0);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    auto brute_q = [&](double p) {
      const double h = p * (n - 1);
      const int lo = static_cast<int>(std::floor(h));
      const int hi = std::min(lo + 1, n - 1);
      return sorted[static_cast<std::size_t>(lo)] +
             (h - lo) * (sorted[static_cast<std::size_t>(hi)] - sorted[static_cast<std::size_t>(lo)]);
    };
    for (double p : {0.25, 0.5, 0.75}) {
      require(std::abs(bench::quantile(v, p) - brute_q(p)) <= 1e-12, "quantile mismatch");
    }
    const bench::BoxplotSummary box = bench::boxplot_summary(v);
    require(box.minimum == sorted.front() && box.maximum == sorted.back(), "boxplot extremes wrong");
    const double iqr = brute_q(0.75) - brute_q(0.25);
    int expected = 0;
    for (double x : sorted) {
      if (x < brute_q(0.25) - 1.5 * iqr || x > brute_q(0.75) + 1.5 * iqr) ++expected;
    }
    require(static_cast<int>(box.outliers.size()) == expected, "outlier count mismatch");
  }
}

void criterion_determinism() {
  require(!g_cli_path.empty(), "pass --cli <path to mixed-sego> for the determinism criterion");
  const fs::path base = fs::temp_directory_path() / "msego_acceptance_det";
  fs::remove_all(base);
  const fs::path dir_a = base / "a";
  const fs::path dir_b = base / "b";
  const std::string args =
      " optimize --problem branin5 --method krg --doe 5 --budget 15 --seed 33 --out ";
  for (const fs::path& d : {dir_a, dir_b}) {
    const std::string cmd = g_cli_path + args + d.string() + " > /dev/null";
    require(std::system(cmd.c_str()) == 0, "optimize invocation failed");
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };
  const std::string name = "branin5__krg__seed33.csv";
  const std::string a = slurp(dir_a / name);
  const std::string b = slurp(dir_b / name);
  require(!a.empty(), "run CSV missing or empty");
  require(a == b, "per-run CSVs differ between identical executions");
  fs::remove_all(base);
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void()> body;
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "GP mean/variance match the dense-algebra oracle to 1e-10", 1.0, criterion_gp_oracle},
      {2, "zero-nugget interpolation on 50 random mixed designs", 10.0, criterion_interpolation},
      {3, "KPLS kernel equals tied-length-scale SE kernel to 1e-14", 1.0, criterion_kpls_identity},
      {4, "relax/project round trip and relaxed dimension counts", 1.0, criterion_relax_project},
      {5, "adaptive component selection on synthetic directions", 120.0, criterion_adaptive_selection},
      {6, "integer-Branin desk study: median error <= 5%, beats random", 600.0, criterion_branin5_desk},
      {7, "constrained categorical desk study: feasible, error <= 10%", 900.0, criterion_branin3_desk},
      {8, "data profiles and boxplots match brute-force recomputation", 1.0, criterion_statistics},
      {9, "byte-identical run CSVs for identical config and seed", 120.0, criterion_determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string error;
    try {
      c.body();
    } catch (const Failure& f) {
      error = f.message;
    } catch (const std::exception& e) {
      error = std::string("exception: ") + e.what();
    }
    const double dt =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
            .count() /
        1000.0;
    if (error.empty() && dt > c.limit_seconds) {
      error = "runtime " + std::to_string(dt) + "s exceeds " + std::to_string(c.limit_seconds) + "s";
    }
    if (error.empty()) {
      std::printf("[PASS] criterion %d: %s (%.2fs)\n", c.id, c.name.c_str(), dt);
    } else {
      std::printf("[FAIL] criterion %d: %s (%.2fs): %s\n", c.id, c.name.c_str(), dt, error.c_str());
      ++failures;
    }
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
