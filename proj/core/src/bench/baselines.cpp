#include "msego/bench/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "msego/rng.hpp"

namespace msego::bench {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Individual {
  Eigen::VectorXd genome;  // relaxed coordinates
  double fitness = kInf;   // objective + penalty
};

double penalized_fitness(const Evaluation& ev, double weight) {
  if (ev.failed) return kInf;
  double sum_viol = 0.0;
  for (double g : ev.constraints) sum_viol += std::max(g, 0.0);
  return ev.objective + weight * sum_viol;
}

void sbx_crossover(const Eigen::VectorXd& p1, const Eigen::VectorXd& p2, double eta, Rng& rng,
                   Eigen::VectorXd& c1, Eigen::VectorXd& c2) {
  c1 = p1;
  c2 = p2;
  for (Eigen::Index i = 0; i < p1.size(); ++i) {
    if (rng.uniform01() > 0.5) continue;
    const double u = rng.uniform01();
    const double beta = u <= 0.5 ? std::pow(2.0 * u, 1.0 / (eta + 1.0))
                                 : std::pow(1.0 / (2.0 * (1.0 - u)), 1.0 / (eta + 1.0));
    const double a = p1[i], b = p2[i];
    c1[i] = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
    c2[i] = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
  }
}

void polynomial_mutation(Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         double eta, double rate, Rng& rng) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (rng.uniform01() >= rate) continue;
    const double u = rng.uniform01();
    const double delta = u < 0.5 ? std::pow(2.0 * u, 1.0 / (1.0 + eta)) - 1.0
                                 : 1.0 - std::pow(2.0 * (1.0 - u), 1.0 / (1.0 + eta));
    x[i] += delta * (hi[i] - lo[i]);
  }
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
}

}  // namespace

RunRecord ga_baseline(const Problem& problem, int budget, std::uint64_t seed,
                      const GaOptions& options) {
  if (budget < 0) throw std::invalid_argument("ga_baseline: budget must be >= 0");
  if (options.population < 2) throw std::invalid_argument("ga_baseline: population must be >= 2");

  const MixedSpace& space = problem.space;
  const auto [lo, hi] = space.relaxed_bounds();
  const int dim = space.relaxed_dim();
  Rng rng(mix_seed(seed, 0x6a6a));

  RunRecord rec;
  rec.problem = problem.name;
  rec.method = "ga";
  rec.seed = seed;
  rec.doe_size = options.population;

  auto append = [&](Evaluation ev) {
    const double prev = rec.incumbent.empty() ? kInf : rec.incumbent.back();
    double inc = prev;
    if (!ev.failed && ev.feasible) inc = std::min(inc, ev.objective);
    rec.evaluations.push_back(std::move(ev));
    rec.incumbent.push_back(inc);
  };

  auto evaluate_genome = [&](const Eigen::VectorXd& genome, int generation) {
    const MixedPoint w = space.project(genome);
    Evaluation ev = evaluate_point(problem, w, options.violation_tol, generation);
    const double fit = penalized_fitness(ev, options.penalty_weight);
    append(std::move(ev));
    return fit;
  };

  // Initial population: projected Latin hypercube, like the optimizer DoEs.
  std::vector<Individual> pop;
  pop.reserve(static_cast<std::size_t>(options.population));
  {
    const auto points = lhs_sample(space, options.population, mix_seed(seed, 0x6a0e));
    for (const MixedPoint& w : points) {
      Individual ind;
      ind.genome = space.relax(w);
      ind.fitness = evaluate_genome(ind.genome, 0);
      pop.push_back(std::move(ind));
    }
  }
  std::stable_sort(pop.begin(), pop.end(),
                   [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });

  int used = 0;
  int generation = 0;
  const double mutation_rate = 1.0 / std::max(dim, 1);
  while (used < budget) {
    ++generation;
    std::vector<Individual> offspring;
    const int lambda = std::min(options.population, budget - used);
    while (static_cast<int>(offspring.size()) < lambda) {
      auto tournament = [&]() -> const Individual& {
        const std::size_t a = static_cast<std::size_t>(rng.below(pop.size()));
        const std::size_t b = static_cast<std::size_t>(rng.below(pop.size()));
        return pop[a].fitness <= pop[b].fitness ? pop[a] : pop[b];
      };
      const Individual& p1 = tournament();
      const Individual& p2 = tournament();
      Eigen::VectorXd c1, c2;
      sbx_crossover(p1.genome, p2.genome, options.crossover_eta, rng, c1, c2);
      for (Eigen::VectorXd* c : {&c1, &c2}) {
        if (static_cast<int>(offspring.size()) >= lambda) break;
        polynomial_mutation(*c, lo, hi, options.mutation_eta, mutation_rate, rng);
        Individual ind;
        ind.genome = *c;
        ind.fitness = evaluate_genome(ind.genome, generation);
        ++used;
        offspring.push_back(std::move(ind));
      }
    }
    // (mu + lambda) survival.
    for (auto& ind : offspring) pop.push_back(std::move(ind));
    std::stable_sort(pop.begin(), pop.end(),
                     [](const Individual& a, const Individual& b) { return a.fitness < b.fitness; });
    pop.resize(static_cast<std::size_t>(options.population));
  }

  return rec;
}

RunRecord random_search(const Problem& problem, int doe_size, int budget, std::uint64_t seed,
                        double violation_tol) {
  if (doe_size < 0 || budget < 0) throw std::invalid_argument("random_search: negative budget");
  const MixedSpace& space = problem.space;
  const auto [lo, hi] = space.relaxed_bounds();
  Rng rng(mix_seed(seed, 0x7a2d));

  RunRecord rec;
  rec.problem = problem.name;
  rec.method = "random";
  rec.seed = seed;
  rec.doe_size = doe_size;

  const int total = doe_size + budget;
  for (int i = 0; i < total; ++i) {
    RelaxedVector v(space.relaxed_dim());
    for (Eigen::Index d = 0; d < v.size(); ++d) v[d] = rng.uniform(lo[d], hi[d]);
    Evaluation ev = evaluate_point(problem, space.project(v), violation_tol,
                                   i < doe_size ? 0 : i - doe_size + 1);
    const double prev = rec.incumbent.empty() ? kInf : rec.incumbent.back();
    double inc = prev;
    if (!ev.failed && ev.feasible) inc = std::min(inc, ev.objective);
    rec.evaluations.push_back(std::move(ev));
    rec.incumbent.push_back(inc);
  }
  return rec;
}

}  // namespace msego::bench
