#pragma once

#include <cstdint>

#include "msego/sego.hpp"

namespace msego::bench {

struct GaOptions {
  int population = 20;
  double crossover_eta = 3.0;
  double mutation_eta = 20.0;
  double penalty_weight = 1e6;
  double violation_tol = 1e-4;
};

/// (mu+lambda) real-coded GA over the relaxed box with projection before
/// every evaluation and a static penalty on constraint violation.  `budget`
/// counts evaluations after the initial population.  Deterministic per seed.
RunRecord ga_baseline(const Problem& problem, int budget, std::uint64_t seed,
                      const GaOptions& options = {});

/// Uniform sampling of the relaxed box, projected before evaluation.
/// Performs doe_size + budget evaluations, mirroring the SEGO accounting.
RunRecord random_search(const Problem& problem, int doe_size, int budget, std::uint64_t seed,
                        double violation_tol = 1e-4);

}  // namespace msego::bench
