#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace msego {

/// A point in the relaxed box.  Layout: [continuous block | integer block
/// (one real per integer variable) | categorical blocks (L_j reals per
/// categorical variable, one-hot after relax())].
using RelaxedVector = Eigen::VectorXd;

/// A point of the mixed design space: continuous values, integer values
/// (members of their level sets) and categorical level indices.
struct MixedPoint {
  std::vector<double> x;
  std::vector<std::int64_t> z;
  std::vector<int> c;

  bool operator==(const MixedPoint&) const = default;
};

/// Mixed design space: a continuous box, ordered integer level sets and
/// categorical level counts.  Immutable after construction.
class MixedSpace {
 public:
  MixedSpace() = default;  // empty space
  MixedSpace(std::vector<std::pair<double, double>> continuous_bounds,
             std::vector<std::vector<std::int64_t>> integer_levels,
             std::vector<int> categorical_levels);

  int n_continuous() const { return static_cast<int>(continuous_.size()); }
  int n_integer() const { return static_cast<int>(integers_.size()); }
  int n_categorical() const { return static_cast<int>(categoricals_.size()); }

  const std::vector<std::pair<double, double>>& continuous_bounds() const { return continuous_; }
  const std::vector<std::vector<std::int64_t>>& integer_levels() const { return integers_; }
  const std::vector<int>& categorical_levels() const { return categoricals_; }

  /// n' = n + m + sum_j L_j.
  int relaxed_dim() const { return relaxed_dim_; }

  /// Offset of categorical block j inside a relaxed vector.
  int categorical_offset(int j) const { return cat_offsets_[static_cast<std::size_t>(j)]; }

  bool contains(const MixedPoint& w) const;

  /// Continuous embedding; categorical variables become one-hot blocks.
  /// Throws std::domain_error if the point does not belong to the space.
  RelaxedVector relax(const MixedPoint& w) const;

  /// Inverse of relax: clips the continuous block, rounds integers to the
  /// nearest level (ties toward the lower level) and takes the categorical
  /// argmax (ties toward the lowest index).
  MixedPoint project(const RelaxedVector& v) const;

  /// Box bounds of the relaxed space: continuous bounds, [min,max] level per
  /// integer variable, [0,1] per categorical coordinate.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> relaxed_bounds() const;

  nlohmann::json to_json() const;
  static MixedSpace from_json(const nlohmann::json& j);

  bool operator==(const MixedSpace& other) const;

 private:
  std::vector<std::pair<double, double>> continuous_;
  std::vector<std::vector<std::int64_t>> integers_;
  std::vector<int> categoricals_;
  std::vector<int> cat_offsets_;
  int relaxed_dim_ = 0;
};

/// Centered Latin hypercube sample of the relaxed box, projected back to the
/// mixed space.  Deterministic for a given seed.
std::vector<MixedPoint> lhs_sample(const MixedSpace& space, int count, std::uint64_t seed);

/// One evaluated design: point, objective value and constraint values.
struct DoeRow {
  MixedPoint point;
  double objective = 0.0;
  std::vector<double> constraints;
};

using Doe = std::vector<DoeRow>;

}  // namespace msego
