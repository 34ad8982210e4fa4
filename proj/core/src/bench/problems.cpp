#include "msego/bench/problems.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "msego/errors.hpp"

namespace msego::bench {

namespace {

constexpr double kPi = std::numbers::pi;

/// Set 1: ten one-dimensional trigonometric/quadratic profiles on [0,1],
/// one per categorical level.  Coefficients: amplitude, frequency, phase,
/// parabola center, parabola weight, offset.
struct Set1Coeff {
  double a, w, p, m, b, c;
};
constexpr Set1Coeff kSet1[10] = {
    {1.0, 2.0, 0.00, 0.30, 4.0, 0.0},  {1.5, 3.0, 0.50, 0.60, 3.0, 0.5},
    {0.8, 4.0, 1.00, 0.20, 5.0, -0.2}, {2.0, 2.0, 1.50, 0.80, 2.0, 0.3},
    {1.2, 5.0, 0.25, 0.50, 6.0, -0.5}, {0.6, 3.0, 2.00, 0.40, 3.5, 0.8},
    {1.8, 4.0, 0.75, 0.70, 2.5, 0.1},  {0.9, 6.0, 1.25, 0.10, 4.5, 0.6},
    {1.4, 2.0, 2.50, 0.90, 3.0, -0.1}, {1.1, 5.0, 1.75, 0.35, 5.5, 0.4},
};

double set1_value(int level, double x) {
  const Set1Coeff& k = kSet1[level];
  return k.a * std::cos(k.w * kPi * x + k.p) + k.b * (x - k.m) * (x - k.m) + k.c;
}

double branin4_value(const MixedPoint& w) {
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < 5; ++i) m1 += w.x[static_cast<std::size_t>(i)];
  for (int i = 5; i < 10; ++i) m2 += w.x[static_cast<std::size_t>(i)];
  m1 /= 5.0;
  m2 /= 5.0;
  double quad = 0.0;
  for (double xi : w.x) quad += (xi - 0.5) * (xi - 0.5);
  return branin_variant(15.0 * m1 - 5.0, 15.0 * m2, w.c[0] == 1, w.c[1] == 1) + 2.0 * quad;
}

/// Golden-section refinement of a 1-D minimum inside [lo, hi].
double golden_refine(const std::function<double(double)>& f, double lo, double hi, int iters = 80) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

/// Dense 1-D grid plus golden refinement of the best bracket.
double grid_min_1d(const std::function<double(double)>& f, double lo, double hi, int points = 20001) {
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    const double v = f(x);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double h = (hi - lo) / (points - 1);
  const double a = std::max(lo, lo + h * (best_i - 1));
  const double b = std::min(hi, lo + h * (best_i + 1));
  return std::min(best, golden_refine(f, a, b));
}

/// Zoomed feasible grid minimization over [0,1]^2; `g` <= 0 marks feasible.
double zoomed_min_2d(const std::function<double(double, double)>& f,
                     const std::function<double(double, double)>& g, int points = 401, int stages = 3) {
  double lo0 = 0.0, hi0 = 1.0, lo1 = 0.0, hi1 = 1.0;
  double best = std::numeric_limits<double>::infinity();
  double bx0 = 0.0, bx1 = 0.0;
  for (int s = 0; s < stages; ++s) {
    bool found = false;
    double slo0 = lo0, shi0 = hi0, slo1 = lo1, shi1 = hi1;
    for (int i = 0; i < points; ++i) {
      const double x0 = slo0 + (shi0 - slo0) * i / (points - 1);
      for (int j = 0; j < points; ++j) {
        const double x1 = slo1 + (shi1 - slo1) * j / (points - 1);
        if (g(x0, x1) > 0.0) continue;
        const double v = f(x0, x1);
        if (v < best) {
          best = v;
          bx0 = x0;
          bx1 = x1;
          found = true;
        }
      }
    }
    if (!found && s == 0) throw std::logic_error("zoomed_min_2d: no feasible grid point");
    const double h0 = 2.0 * (shi0 - slo0) / (points - 1);
    const double h1 = 2.0 * (shi1 - slo1) / (points - 1);
    lo0 = std::max(0.0, bx0 - h0);
    hi0 = std::min(1.0, bx0 + h0);
    lo1 = std::max(0.0, bx1 - h1);
    hi1 = std::min(1.0, bx1 + h1);
  }
  return best;
}

double branin5_oracle() {
  double best = std::numeric_limits<double>::infinity();
  for (int z = -5; z <= 10; ++z) {
    best = std::min(best, grid_min_1d([z](double x2) { return branin(z, x2); }, 0.0, 10.0));
  }
  return best;
}

double set1_oracle() {
  double best = std::numeric_limits<double>::infinity();
  for (int level = 0; level < 10; ++level) {
    best = std::min(best, grid_min_1d([level](double x) { return set1_value(level, x); }, 0.0, 1.0));
  }
  return best;
}

double branin3_constraint(double x0, double x1) { return 0.75 - x0 - x1; }

double branin3_oracle() {
  double best = std::numeric_limits<double>::infinity();
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      best = std::min(best, zoomed_min_2d(
                                [=](double x0, double x1) {
                                  return branin_variant(15.0 * x0 - 5.0, 15.0 * x1, c0 == 1, c1 == 1);
                                },
                                branin3_constraint));
    }
  }
  return best;
}

double branin4_oracle() {
  // f depends on x only through the two block means plus a separable
  // quadratic that, for fixed means, is minimized by equal coordinates
  // (2*5*(m-0.5)^2 per block); the 10-D problem reduces exactly to 2-D.
  double best = std::numeric_limits<double>::infinity();
  for (int c0 = 0; c0 < 2; ++c0) {
    for (int c1 = 0; c1 < 2; ++c1) {
      best = std::min(best, zoomed_min_2d(
                                [=](double m1, double m2) {
                                  return branin_variant(15.0 * m1 - 5.0, 15.0 * m2, c0 == 1, c1 == 1) +
                                         10.0 * ((m1 - 0.5) * (m1 - 0.5) + (m2 - 0.5) * (m2 - 0.5));
                                },
                                branin3_constraint));
    }
  }
  return best;
}

std::vector<RegisteredProblem> build_registry() {
  std::vector<RegisteredProblem> reg;

  {
    RegisteredProblem rp;
    rp.problem.name = "branin5";
    std::vector<std::int64_t> levels;
    for (int z = -5; z <= 10; ++z) levels.push_back(z);
    rp.problem.space = MixedSpace{{{0.0, 10.0}}, {levels}, {}};
    rp.problem.objective = [](const MixedPoint& w) {
      return branin(static_cast<double>(w.z[0]), w.x[0]);
    };
    rp.constrained = false;
    rp.oracle = &branin5_oracle;
    rp.oracle_note = "enumeration over 16 integer levels x 20001-point grid on [0,10] + golden refinement";
    reg.push_back(std::move(rp));
  }
  {
    RegisteredProblem rp;
    rp.problem.name = "set1";
    rp.problem.space = MixedSpace{{{0.0, 1.0}}, {}, {10}};
    rp.problem.objective = [](const MixedPoint& w) { return set1_value(w.c[0], w.x[0]); };
    rp.constrained = false;
    rp.oracle = &set1_oracle;
    rp.oracle_note = "enumeration over 10 levels x 20001-point grid on [0,1] + golden refinement";
    reg.push_back(std::move(rp));
  }
  {
    RegisteredProblem rp;
    rp.problem.name = "branin3";
    rp.problem.space = MixedSpace{{{0.0, 1.0}, {0.0, 1.0}}, {}, {2, 2}};
    rp.problem.objective = [](const MixedPoint& w) {
      return branin_variant(15.0 * w.x[0] - 5.0, 15.0 * w.x[1], w.c[0] == 1, w.c[1] == 1);
    };
    rp.problem.constraints = {[](const MixedPoint& w) { return branin3_constraint(w.x[0], w.x[1]); }};
    rp.constrained = true;
    rp.oracle = &branin3_oracle;
    rp.oracle_note = "enumeration over 4 variants x zoomed 401^2 feasible grid (3 stages)";
    reg.push_back(std::move(rp));
  }
  {
    RegisteredProblem rp;
    rp.problem.name = "branin4";
    std::vector<std::pair<double, double>> cont(10, {0.0, 1.0});
    rp.problem.space = MixedSpace{cont, {}, {2, 2}};
    rp.problem.objective = branin4_value;
    rp.problem.constraints = {[](const MixedPoint& w) {
      double m1 = 0.0, m2 = 0.0;
      for (int i = 0; i < 5; ++i) m1 += w.x[static_cast<std::size_t>(i)];
      for (int i = 5; i < 10; ++i) m2 += w.x[static_cast<std::size_t>(i)];
      return branin3_constraint(m1 / 5.0, m2 / 5.0);
    }};
    rp.constrained = true;
    rp.oracle = &branin4_oracle;
    rp.oracle_note = "exact reduction to block means, then 4 variants x zoomed 401^2 feasible grid";
    reg.push_back(std::move(rp));
  }
  return reg;
}

const std::vector<RegisteredProblem>& registry() {
  static const std::vector<RegisteredProblem> reg = build_registry();
  return reg;
}

}  // namespace

double branin(double x1, double x2) {
  const double a = x2 - 5.1 / (4.0 * kPi * kPi) * x1 * x1 + 5.0 / kPi * x1 - 6.0;
  return a * a + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * std::cos(x1) + 10.0;
}

double branin_variant(double x1, double x2, bool flip_sign, bool shift_phase) {
  const double a = x2 - 5.1 / (4.0 * kPi * kPi) * x1 * x1 + 5.0 / kPi * x1 - 6.0;
  const double sign = flip_sign ? -1.0 : 1.0;
  const double phase = shift_phase ? 0.5 * kPi : 0.0;
  return a * a + 10.0 * (1.0 - 1.0 / (8.0 * kPi)) * sign * std::cos(x1 - phase) + 10.0;
}

std::vector<std::string> problem_names() {
  std::vector<std::string> names;
  for (const auto& rp : registry()) names.push_back(rp.problem.name);
  return names;
}

bool is_registered(const std::string& name) {
  for (const auto& rp : registry()) {
    if (rp.problem.name == name) return true;
  }
  return false;
}

const RegisteredProblem& find_problem(const std::string& name) {
  for (const auto& rp : registry()) {
    if (rp.problem.name == name) return rp;
  }
  throw ConfigError("unknown problem: " + name);
}

double reference_value(const std::string& name) {
  static std::map<std::string, double> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(name);
  if (it != cache.end()) return it->second;
  const RegisteredProblem& rp = find_problem(name);
  const double value = rp.oracle();
  cache.emplace(name, value);
  return value;
}

}  // namespace msego::bench
