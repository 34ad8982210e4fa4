#include "msego/dfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "msego/rng.hpp"

namespace msego::dfo {

namespace {

Eigen::VectorXd clip_to_box(Eigen::VectorXd v, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
  return v;
}

}  // namespace

TrustRegionResult minimize_trust_region(const BoxObjective& objective, const Eigen::VectorXd& start,
                                        const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                        const TrustRegionOptions& options) {
  const Eigen::Index n = start.size();
  if (lower.size() != n || upper.size() != n) throw std::invalid_argument("minimize_trust_region: bound size mismatch");

  const double min_width = (upper - lower).minCoeff();
  double radius = std::max(options.initial_radius_fraction * min_width, 1e-300);
  const double radius_floor = std::max(options.final_radius_fraction * min_width, 1e-300);

  TrustRegionResult result;
  result.x = clip_to_box(start, lower, upper);
  result.value = objective(result.x);
  result.evaluations = 1;

  if (n == 0) return result;

  // Interpolation set: the incumbent plus n offset points.
  Eigen::MatrixXd pts(n, n + 1);
  Eigen::VectorXd vals(n + 1);
  for (Eigen::Index j = 0; j < n + 1; ++j) {
    pts.col(j) = result.x;
    vals[j] = result.value;
  }

  auto rebuild_simplex = [&](double scale) {
    pts.col(0) = result.x;
    vals[0] = result.value;
    for (Eigen::Index i = 0; i < n && result.evaluations < options.max_evaluations; ++i) {
      Eigen::VectorXd p = result.x;
      const double step = (p[i] + scale <= upper[i]) ? scale : -scale;
      p[i] = std::clamp(p[i] + step, lower[i], upper[i]);
      if (p[i] == result.x[i]) p[i] = std::clamp(p[i] - step, lower[i], upper[i]);
      pts.col(i + 1) = p;
      vals[i + 1] = objective(p);
      ++result.evaluations;
    }
  };
  rebuild_simplex(radius);

  while (result.evaluations < options.max_evaluations && radius > radius_floor) {
    // Best point of the interpolation set anchors the linear model.
    Eigen::Index best_col = 0;
    vals.minCoeff(&best_col);
    if (vals[best_col] < result.value) {
      result.value = vals[best_col];
      result.x = pts.col(best_col);
    }

    Eigen::MatrixXd offsets(n, n);
    Eigen::VectorXd deltas(n);
    {
      Eigen::Index k = 0;
      for (Eigen::Index j = 0; j < n + 1; ++j) {
        if (j == best_col) continue;
        offsets.col(k) = pts.col(j) - pts.col(best_col);
        deltas[k] = vals[j] - vals[best_col];
        ++k;
      }
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(offsets.transpose());
    if (!lu.isInvertible()) {
      rebuild_simplex(radius);
      continue;
    }
    const Eigen::VectorXd grad = lu.solve(deltas);
    const double gnorm = grad.norm();
    if (!(gnorm > 0.0) || !std::isfinite(gnorm)) {
      radius *= 0.5;
      rebuild_simplex(radius);
      continue;
    }

    const Eigen::VectorXd candidate =
        clip_to_box(pts.col(best_col) - (radius / gnorm) * grad, lower, upper);
    const double step_norm = (candidate - pts.col(best_col)).norm();
    if (step_norm <= 1e-14 * std::max(1.0, pts.col(best_col).norm())) {
      radius *= 0.5;
      rebuild_simplex(radius);
      continue;
    }

    const double predicted = -grad.dot(candidate - pts.col(best_col));
    const double cand_val = objective(candidate);
    ++result.evaluations;

    if (cand_val < result.value) {
      result.value = cand_val;
      result.x = candidate;
    }

    // Replace the worst interpolation point.
    Eigen::Index worst_col = 0;
    vals.maxCoeff(&worst_col);
    pts.col(worst_col) = candidate;
    vals[worst_col] = cand_val;

    const double actual = vals[best_col] - cand_val;
    if (predicted > 0.0 && actual > 0.7 * predicted) {
      radius = std::min(2.0 * radius, 0.5 * min_width);
    } else if (actual <= 0.1 * predicted) {
      radius *= 0.5;
      if ((pts.col(worst_col) - pts.col(best_col)).norm() < 0.1 * radius) rebuild_simplex(radius);
    }
  }

  Eigen::Index best_col = 0;
  vals.minCoeff(&best_col);
  if (vals[best_col] < result.value) {
    result.value = vals[best_col];
    result.x = pts.col(best_col);
  }
  return result;
}

namespace {

/// Stochastic-ranking bubble sort (Runarsson & Yao).  Feasible comparisons
/// use the objective; otherwise with probability pf the objective, else the
/// violation.
void stochastic_rank(std::vector<int>& order, const std::vector<RankedPoint>& pop, double pf, Rng& rng) {
  const int n = static_cast<int>(order.size());
  for (int sweep = 0; sweep < n; ++sweep) {
    bool swapped = false;
    for (int i = 0; i + 1 < n; ++i) {
      const RankedPoint& a = pop[static_cast<std::size_t>(order[i])];
      const RankedPoint& b = pop[static_cast<std::size_t>(order[i + 1])];
      bool swap;
      if ((a.violation == 0.0 && b.violation == 0.0) || rng.uniform01() < pf) {
        swap = a.value > b.value;
      } else {
        swap = a.violation > b.violation;
      }
      if (swap) {
        std::swap(order[i], order[i + 1]);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
}

bool better(const RankedPoint& a, const RankedPoint& b) {
  if ((a.violation == 0.0) != (b.violation == 0.0)) return a.violation == 0.0;
  if (a.violation == 0.0) return a.value < b.value;
  if (a.violation != b.violation) return a.violation < b.violation;
  return a.value < b.value;
}

}  // namespace

SresResult sres_minimize(const ConstrainedObjective& objective, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const SresOptions& options) {
  const Eigen::Index n = lower.size();
  if (upper.size() != n) throw std::invalid_argument("sres_minimize: bound size mismatch");
  const int lambda = std::max(options.population, 8);
  const int mu = std::max(lambda / 7, 2);

  Rng rng(mix_seed(options.seed, 0x5e5));
  const double tau = 1.0 / std::sqrt(2.0 * std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1))));
  const double tau_prime = 1.0 / std::sqrt(2.0 * static_cast<double>(std::max<Eigen::Index>(n, 1)));
  const Eigen::VectorXd widths = upper - lower;
  const Eigen::VectorXd sigma_init = widths / std::sqrt(static_cast<double>(std::max<Eigen::Index>(n, 1)));

  std::vector<RankedPoint> pop(static_cast<std::size_t>(lambda));
  std::vector<Eigen::VectorXd> sigma(static_cast<std::size_t>(lambda), sigma_init);
  SresResult result;

  for (int k = 0; k < lambda; ++k) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.uniform(lower[i], upper[i]);
    pop[static_cast<std::size_t>(k)] = objective(x);
    ++result.evaluations;
  }

  std::vector<RankedPoint> elite;  // best seen ever, small pool
  auto offer_elite = [&](const RankedPoint& p) {
    elite.push_back(p);
    std::sort(elite.begin(), elite.end(), better);
    // Keep a few distinct leaders.
    std::vector<RankedPoint> kept;
    for (const auto& e : elite) {
      bool dup = false;
      for (const auto& k2 : kept) {
        if ((e.x - k2.x).norm() <= 1e-12 * (1.0 + k2.x.norm())) {
          dup = true;
          break;
        }
      }
      if (!dup) kept.push_back(e);
      if (static_cast<int>(kept.size()) >= std::max(options.report_candidates, 1)) break;
    }
    elite = std::move(kept);
  };
  for (const auto& p : pop) offer_elite(p);

  std::vector<int> order(static_cast<std::size_t>(lambda));
  for (int g = 0; g < options.generations; ++g) {
    for (int i = 0; i < lambda; ++i) order[static_cast<std::size_t>(i)] = i;
    stochastic_rank(order, pop, options.feasible_compare_probability, rng);

    std::vector<RankedPoint> next(static_cast<std::size_t>(lambda));
    std::vector<Eigen::VectorXd> next_sigma(static_cast<std::size_t>(lambda));
    for (int k = 0; k < lambda; ++k) {
      const int parent = order[static_cast<std::size_t>(k % mu)];
      const Eigen::VectorXd& px = pop[static_cast<std::size_t>(parent)].x;
      const Eigen::VectorXd& ps = sigma[static_cast<std::size_t>(parent)];
      const double global = tau_prime * rng.normal();
      Eigen::VectorXd s(n), x(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        s[i] = ps[i] * std::exp(global + tau * rng.normal());
        s[i] = std::clamp(s[i], 1e-12 * widths[i], widths[i]);
        x[i] = std::clamp(px[i] + s[i] * rng.normal(), lower[i], upper[i]);
      }
      next[static_cast<std::size_t>(k)] = objective(x);
      next_sigma[static_cast<std::size_t>(k)] = std::move(s);
      ++result.evaluations;
      offer_elite(next[static_cast<std::size_t>(k)]);
    }
    pop = std::move(next);
    sigma = std::move(next_sigma);
  }

  result.candidates = elite;
  result.feasible_found = !elite.empty() && elite.front().violation == 0.0;
  return result;
}

}  // namespace msego::dfo
