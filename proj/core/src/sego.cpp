#include "msego/sego.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "msego/dfo.hpp"
#include "msego/errors.hpp"
#include "msego/rng.hpp"

namespace msego {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool ranked_better(const dfo::RankedPoint& a, const dfo::RankedPoint& b) {
  if ((a.violation == 0.0) != (b.violation == 0.0)) return a.violation == 0.0;
  if (a.violation == 0.0) return a.value < b.value;
  if (a.violation != b.violation) return a.violation < b.violation;
  return a.value < b.value;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& x, const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
  Eigen::VectorXd scale = (hi - lo).cwiseMax(0.0);
  for (Eigen::Index i = 0; i < scale.size(); ++i) {
    if (scale[i] <= 0.0) scale[i] = 1.0;
  }
  return (x.rowwise() - lo.transpose()).array().rowwise() / scale.transpose().array();
}

/// Uniform point of the relaxed box, projected to the mixed space.
MixedPoint random_projected_point(const MixedSpace& space, Rng& rng) {
  const auto [lo, hi] = space.relaxed_bounds();
  RelaxedVector v(space.relaxed_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(lo[i], hi[i]);
  return space.project(v);
}

struct TrainingData {
  Eigen::MatrixXd inputs;               // distinct relaxed rows
  Eigen::VectorXd objective;            // merged objective values
  std::vector<Eigen::VectorXd> constraints;
  Eigen::Index rows = 0;
};

TrainingData collect_training(const std::vector<Evaluation>& evaluations, const MixedSpace& space,
                              int n_constraints) {
  std::vector<RelaxedVector> xs;
  std::vector<double> f_sum;
  std::vector<std::vector<double>> g_sum(static_cast<std::size_t>(n_constraints));
  std::vector<int> counts;

  for (const Evaluation& ev : evaluations) {
    if (ev.failed) continue;
    const RelaxedVector v = space.relax(ev.point);
    Eigen::Index found = -1;
    for (std::size_t u = 0; u < xs.size(); ++u) {
      if (xs[u] == v) {
        found = static_cast<Eigen::Index>(u);
        break;
      }
    }
    if (found < 0) {
      xs.push_back(v);
      f_sum.push_back(ev.objective);
      counts.push_back(1);
      for (int j = 0; j < n_constraints; ++j) {
        g_sum[static_cast<std::size_t>(j)].push_back(ev.constraints[static_cast<std::size_t>(j)]);
      }
    } else {
      f_sum[static_cast<std::size_t>(found)] += ev.objective;
      counts[static_cast<std::size_t>(found)] += 1;
      for (int j = 0; j < n_constraints; ++j) {
        g_sum[static_cast<std::size_t>(j)][static_cast<std::size_t>(found)] +=
            ev.constraints[static_cast<std::size_t>(j)];
      }
    }
  }

  TrainingData td;
  td.rows = static_cast<Eigen::Index>(xs.size());
  td.inputs.resize(td.rows, space.relaxed_dim());
  td.objective.resize(td.rows);
  td.constraints.assign(static_cast<std::size_t>(n_constraints), Eigen::VectorXd(td.rows));
  for (Eigen::Index i = 0; i < td.rows; ++i) {
    td.inputs.row(i) = xs[static_cast<std::size_t>(i)].transpose();
    td.objective[i] = f_sum[static_cast<std::size_t>(i)] / counts[static_cast<std::size_t>(i)];
    for (int j = 0; j < n_constraints; ++j) {
      td.constraints[static_cast<std::size_t>(j)][i] =
          g_sum[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] /
          counts[static_cast<std::size_t>(i)];
    }
  }
  return td;
}

bool output_is_constant(const Eigen::VectorXd& y) {
  const double range = y.maxCoeff() - y.minCoeff();
  return range <= 1e-14 * std::max(1.0, y.cwiseAbs().maxCoeff());
}

struct FittedOutput {
  GpModel model;
  int components = 0;
  std::vector<ComponentTraceEntry> trace;
};

FittedOutput fit_output(const TrainingData& td, const Eigen::VectorXd& y, const SegoConfig& cfg,
                        const std::pair<Eigen::VectorXd, Eigen::VectorXd>& bounds,
                        std::uint64_t seed) {
  const int n_prime = static_cast<int>(td.inputs.cols());
  FitOptions fit;
  fit.input_bounds = bounds;
  fit.seed = seed;
  fit.starts = cfg.mle_starts;
  fit.evals_per_start = cfg.mle_evals_per_start;

  FittedOutput out;
  if (cfg.kernel_mode == KernelMode::FullSe || output_is_constant(y)) {
    out.model = fit_gp(td.inputs, y, KernelConfig::full_se(), fit);
    out.components = n_prime;
    return out;
  }

  const int d_cap = std::min<int>(n_prime, static_cast<int>(td.rows) - 1);
  int d = 1;
  if (cfg.kernel_mode == KernelMode::KplsFixed) {
    d = std::clamp(cfg.kpls_components, 1, d_cap);
  } else {
    AdaptiveConfig ac = cfg.adaptive;
    ac.seed = mix_seed(seed, 0xf01d5);
    ac.input_bounds = bounds;
    try {
      SelectionResult sel = select_components(td.inputs, y, ac);
      d = std::clamp(sel.components, 1, d_cap);
      out.trace = std::move(sel.trace);
    } catch (const std::invalid_argument&) {
      // Not enough data yet for cross-validated selection.
      d = std::clamp(ac.d_min, 1, d_cap);
    }
  }

  const Eigen::MatrixXd xn = normalize_rows(td.inputs, bounds.first, bounds.second);
  const PlsLoadings loadings = pls_fit(xn, y, d);
  out.model = fit_gp(td.inputs, y, KernelConfig::kpls(loadings), fit);
  out.components = d;
  return out;
}

/// Stratified sample of the relaxed box (no projection), for WB2s scaling.
std::vector<RelaxedVector> relaxed_lhs(const MixedSpace& space, int count, std::uint64_t seed) {
  const auto [lo, hi] = space.relaxed_bounds();
  const int dim = space.relaxed_dim();
  Rng rng(mix_seed(seed, 0x11c5));
  std::vector<int> perm(static_cast<std::size_t>(count));
  Eigen::MatrixXd unit(count, dim);
  for (int d = 0; d < dim; ++d) {
    for (int i = 0; i < count; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);
    for (int i = 0; i < count; ++i) {
      unit(i, d) = (perm[static_cast<std::size_t>(i)] + 0.5) / count;
    }
  }
  std::vector<RelaxedVector> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RelaxedVector v(dim);
    for (int d = 0; d < dim; ++d) v[d] = lo[d] + unit(i, d) * (hi[d] - lo[d]);
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

void add_equality_constraint(Problem& problem, std::function<double(const MixedPoint&)> h,
                             double tolerance) {
  if (tolerance <= 0.0) throw std::invalid_argument("add_equality_constraint: tolerance must be > 0");
  problem.constraints.push_back([h, tolerance](const MixedPoint& w) { return h(w) - tolerance; });
  problem.constraints.push_back([h = std::move(h), tolerance](const MixedPoint& w) { return -h(w) - tolerance; });
}

bool RunRecord::has_feasible() const { return !incumbent.empty() && std::isfinite(incumbent.back()); }

double RunRecord::best_feasible() const { return incumbent.empty() ? kInf : incumbent.back(); }

Evaluation evaluate_point(const Problem& problem, const MixedPoint& w, double violation_tol,
                          int iteration) {
  Evaluation ev;
  ev.point = w;
  ev.iteration = iteration;
  const int n_con = problem.constraint_count();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (problem.joint_evaluator) {
      auto [f, g] = problem.joint_evaluator(w);
      if (static_cast<int>(g.size()) != n_con) {
        throw EvaluationError("joint evaluator returned wrong constraint count");
      }
      ev.objective = f;
      ev.constraints = std::move(g);
    } else {
      ev.objective = problem.objective(w);
      ev.constraints.reserve(static_cast<std::size_t>(n_con));
      for (const auto& g : problem.constraints) ev.constraints.push_back(g(w));
    }
    if (!std::isfinite(ev.objective)) throw EvaluationError("objective is not finite");
    for (double gv : ev.constraints) {
      if (!std::isfinite(gv)) throw EvaluationError("constraint value is not finite");
    }
  } catch (const EvaluationError&) {
    ev.failed = true;
    ev.objective = std::numeric_limits<double>::quiet_NaN();
    ev.constraints.assign(static_cast<std::size_t>(n_con), std::numeric_limits<double>::quiet_NaN());
    ev.violation = std::numeric_limits<double>::quiet_NaN();
    ev.feasible = false;
  }
  ev.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0)
                   .count();
  if (!ev.failed) {
    double viol = 0.0;
    for (double gv : ev.constraints) viol = std::max(viol, std::max(gv, 0.0));
    ev.violation = viol;
    ev.feasible = viol <= violation_tol;
  }
  return ev;
}

RelaxedVector maximize_acquisition(const GpModel& objective, const std::vector<GpModel>& constraints,
                                   const MixedSpace& space, const SegoConfig& cfg,
                                   const AcquisitionSpec& spec, std::uint64_t seed,
                                   AcquisitionDiagnostics* diag) {
  const auto [lo, hi] = space.relaxed_bounds();
  const int n_prime = space.relaxed_dim();

  auto acq_value = [&](const RelaxedVector& x) -> double {
    const Prediction p = objective.predict(x);
    const double sd = std::sqrt(std::max(p.variance, 0.0));
    switch (spec.type) {
      case AcquisitionType::Ei:
        return expected_improvement(p.mean, sd, spec.f_min);
      case AcquisitionType::Wb2:
        return wb2s(p.mean, sd, spec.f_min, 1.0);
      default:
        return wb2s(p.mean, sd, spec.f_min, spec.wb2s_scale);
    }
  };
  auto surrogate_violation = [&](const RelaxedVector& x) -> double {
    double v = 0.0;
    for (const GpModel& m : constraints) {
      const Prediction p = m.predict(x);
      const double b = feasibility_bound(p.mean, std::sqrt(std::max(p.variance, 0.0)), spec.feasibility);
      if (b > 0.0) v += b * b;
    }
    return v;
  };

  dfo::SresOptions so;
  so.population = cfg.inner_population > 0
                      ? cfg.inner_population
                      : static_cast<int>(std::lround(50.0 * std::sqrt(static_cast<double>(n_prime))));
  so.generations = cfg.inner_generations;
  so.seed = mix_seed(seed, 0x9105);
  so.report_candidates = std::max(cfg.refine_starts, 3);
  const auto ranked_eval = [&](const Eigen::VectorXd& x) {
    return dfo::RankedPoint{x, -acq_value(x), surrogate_violation(x)};
  };
  dfo::SresResult global = dfo::sres_minimize(ranked_eval, lo, hi, so);

  std::vector<dfo::RankedPoint> pool = global.candidates;
  const double ref_mag = pool.empty() ? 1.0 : std::abs(pool.front().value);
  const double penalty = 1e6 * (1.0 + ref_mag);
  const int n_refine = std::min<int>(cfg.refine_starts, static_cast<int>(pool.size()));
  for (int i = 0; i < n_refine; ++i) {
    const auto penalized = [&](const Eigen::VectorXd& x) {
      return -acq_value(x) + penalty * surrogate_violation(x);
    };
    dfo::TrustRegionOptions tro;
    tro.max_evaluations = cfg.refine_evals;
    tro.initial_radius_fraction = 0.05;
    const dfo::TrustRegionResult r = dfo::minimize_trust_region(penalized, pool[static_cast<std::size_t>(i)].x, lo, hi, tro);
    pool.push_back(ranked_eval(r.x));
  }

  std::stable_sort(pool.begin(), pool.end(), ranked_better);
  std::vector<dfo::RankedPoint> unique;
  for (const auto& p : pool) {
    bool dup = false;
    for (const auto& u : unique) {
      if ((p.x - u.x).norm() <= 1e-12 * (1.0 + u.x.norm())) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(p);
  }

  const dfo::RankedPoint& best = unique.front();
  if (diag) {
    diag->value = -best.value;
    diag->exploration_fallback = best.violation > 0.0;
    diag->ranked.clear();
    for (const auto& u : unique) diag->ranked.push_back(u.x);
  }
  return best.x;
}

RunRecord optimize(const Problem& problem, const SegoConfig& cfg) {
  if (cfg.doe_size < 2) throw std::invalid_argument("optimize: initial DoE size must be >= 2");
  if (cfg.budget < 0) throw std::invalid_argument("optimize: budget must be >= 0");
  if (!(cfg.violation_tol > 0.0)) throw std::invalid_argument("optimize: violation tolerance must be > 0");
  if (!problem.objective && !problem.joint_evaluator) {
    throw std::invalid_argument("optimize: problem has no objective");
  }

  const MixedSpace& space = problem.space;
  const auto bounds = space.relaxed_bounds();
  const int n_con = problem.constraint_count();

  RunRecord rec;
  rec.problem = problem.name;
  rec.seed = cfg.seed;
  rec.doe_size = cfg.doe_size;

  auto append = [&](Evaluation ev) {
    const double prev = rec.incumbent.empty() ? kInf : rec.incumbent.back();
    double inc = prev;
    if (!ev.failed && ev.feasible) inc = std::min(inc, ev.objective);
    rec.evaluations.push_back(std::move(ev));
    rec.incumbent.push_back(inc);
  };

  auto already_evaluated = [&](const MixedPoint& w) {
    for (const Evaluation& ev : rec.evaluations) {
      if (ev.point == w) return true;
    }
    return false;
  };

  for (const MixedPoint& w : lhs_sample(space, cfg.doe_size, mix_seed(cfg.seed, 0xd0e))) {
    append(evaluate_point(problem, w, cfg.violation_tol, 0));
  }

  for (int iter = 1; iter <= cfg.budget; ++iter) {
    const std::uint64_t iter_seed = mix_seed(cfg.seed, 0x17e40000ULL + static_cast<std::uint64_t>(iter));
    IterationInfo info;
    info.iteration = iter;
    info.d_constraints.assign(static_cast<std::size_t>(n_con), 0);
    info.constraint_cll.assign(static_cast<std::size_t>(n_con), 0.0);

    MixedPoint next;
    bool have_next = false;

    const TrainingData td = collect_training(rec.evaluations, space, n_con);
    if (td.rows >= 2) {
      try {
        FittedOutput obj_fit = fit_output(td, td.objective, cfg, bounds, mix_seed(iter_seed, 0xf));
        info.d_objective = obj_fit.components;
        info.objective_cll = obj_fit.model.log_likelihood();
        if (!obj_fit.trace.empty()) info.press_traces.emplace_back("f", obj_fit.trace);

        std::vector<GpModel> con_models;
        con_models.reserve(static_cast<std::size_t>(n_con));
        for (int j = 0; j < n_con; ++j) {
          FittedOutput g_fit = fit_output(td, td.constraints[static_cast<std::size_t>(j)], cfg, bounds,
                                          mix_seed(iter_seed, 0x90 + static_cast<std::uint64_t>(j)));
          info.d_constraints[static_cast<std::size_t>(j)] = g_fit.components;
          info.constraint_cll[static_cast<std::size_t>(j)] = g_fit.model.log_likelihood();
          if (!g_fit.trace.empty()) {
            info.press_traces.emplace_back("g" + std::to_string(j), g_fit.trace);
          }
          con_models.push_back(std::move(g_fit.model));
        }

        // f_min: best feasible observation, else the least-violating point.
        double f_min = kInf;
        for (const Evaluation& ev : rec.evaluations) {
          if (!ev.failed && ev.feasible) f_min = std::min(f_min, ev.objective);
        }
        if (!std::isfinite(f_min)) {
          info.fmin_from_least_violation = true;
          double best_viol = kInf;
          for (const Evaluation& ev : rec.evaluations) {
            if (ev.failed) continue;
            if (ev.violation < best_viol ||
                (ev.violation == best_viol && ev.objective < f_min)) {
              best_viol = ev.violation;
              f_min = ev.objective;
            }
          }
        }

        AcquisitionSpec spec;
        spec.type = cfg.acquisition;
        spec.f_min = f_min;
        spec.feasibility = cfg.feasibility;
        if (cfg.acquisition == AcquisitionType::Wb2s) {
          const auto candidates = relaxed_lhs(space, std::max(cfg.scale_candidates, 8),
                                              mix_seed(iter_seed, 0x5ca1e));
          spec.wb2s_scale = compute_wb2s_scale(obj_fit.model, candidates, f_min, cfg.wb2s_beta);
        }
        info.wb2s_scale = spec.wb2s_scale;

        AcquisitionDiagnostics diag;
        maximize_acquisition(obj_fit.model, con_models, space, cfg, spec, mix_seed(iter_seed, 0xac0),
                             &diag);
        info.acquisition_value = diag.value;
        info.exploration_fallback = diag.exploration_fallback;

        // Projection can collapse distinct relaxed optima onto an existing
        // point; fall through the ranked candidates, then random draws.
        for (const RelaxedVector& cand : diag.ranked) {
          const MixedPoint w = space.project(cand);
          if (!already_evaluated(w)) {
            next = w;
            have_next = true;
            break;
          }
          info.duplicate_fallback = true;
        }
        if (!have_next) {
          Rng rng(mix_seed(iter_seed, 0xd1a3));
          for (int attempt = 0; attempt < 200 && !have_next; ++attempt) {
            const MixedPoint w = random_projected_point(space, rng);
            if (!already_evaluated(w)) {
              next = w;
              have_next = true;
            }
          }
          if (!have_next) {
            // Space exhausted; re-evaluate the best candidate (merged in fit).
            next = space.project(diag.ranked.front());
            have_next = true;
          }
          info.random_fallback = true;
        }
      } catch (const DegenerateDataError&) {
        info.random_fallback = true;
      } catch (const IllConditionedError&) {
        info.random_fallback = true;
      }
    } else {
      info.random_fallback = true;
    }

    if (!have_next) {
      Rng rng(mix_seed(iter_seed, 0xfa11));
      next = random_projected_point(space, rng);
      for (int attempt = 0; attempt < 200 && already_evaluated(next); ++attempt) {
        next = random_projected_point(space, rng);
      }
      have_next = true;
    }

    append(evaluate_point(problem, next, cfg.violation_tol, iter));
    rec.iterations.push_back(std::move(info));
  }

  return rec;
}

}  // namespace msego
