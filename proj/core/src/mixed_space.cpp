#include "msego/mixed_space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "msego/rng.hpp"

namespace msego {

MixedSpace::MixedSpace(std::vector<std::pair<double, double>> continuous_bounds,
                       std::vector<std::vector<std::int64_t>> integer_levels,
                       std::vector<int> categorical_levels)
    : continuous_(std::move(continuous_bounds)),
      integers_(std::move(integer_levels)),
      categoricals_(std::move(categorical_levels)) {
  for (const auto& [lo, hi] : continuous_) {
    if (!(lo < hi)) throw std::invalid_argument("MixedSpace: continuous bound must have lower < upper");
  }
  for (const auto& levels : integers_) {
    if (levels.empty()) throw std::invalid_argument("MixedSpace: integer level set must be non-empty");
    if (!std::is_sorted(levels.begin(), levels.end()) ||
        std::adjacent_find(levels.begin(), levels.end()) != levels.end()) {
      throw std::invalid_argument("MixedSpace: integer levels must be sorted ascending and distinct");
    }
  }
  for (int L : categoricals_) {
    if (L < 2) throw std::invalid_argument("MixedSpace: categorical level count must be >= 2");
  }
  relaxed_dim_ = n_continuous() + n_integer();
  cat_offsets_.reserve(categoricals_.size());
  for (int L : categoricals_) {
    cat_offsets_.push_back(relaxed_dim_);
    relaxed_dim_ += L;
  }
}

bool MixedSpace::contains(const MixedPoint& w) const {
  if (static_cast<int>(w.x.size()) != n_continuous() || static_cast<int>(w.z.size()) != n_integer() ||
      static_cast<int>(w.c.size()) != n_categorical()) {
    return false;
  }
  for (int i = 0; i < n_continuous(); ++i) {
    if (!(w.x[i] >= continuous_[i].first && w.x[i] <= continuous_[i].second)) return false;
  }
  for (int i = 0; i < n_integer(); ++i) {
    const auto& levels = integers_[i];
    if (!std::binary_search(levels.begin(), levels.end(), w.z[i])) return false;
  }
  for (int j = 0; j < n_categorical(); ++j) {
    if (w.c[j] < 0 || w.c[j] >= categoricals_[j]) return false;
  }
  return true;
}

RelaxedVector MixedSpace::relax(const MixedPoint& w) const {
  if (!contains(w)) throw std::domain_error("relax: point does not belong to the space");
  RelaxedVector v = RelaxedVector::Zero(relaxed_dim_);
  int k = 0;
  for (int i = 0; i < n_continuous(); ++i) v[k++] = w.x[i];
  for (int i = 0; i < n_integer(); ++i) v[k++] = static_cast<double>(w.z[i]);
  for (int j = 0; j < n_categorical(); ++j) {
    v[cat_offsets_[static_cast<std::size_t>(j)] + w.c[j]] = 1.0;
  }
  return v;
}

MixedPoint MixedSpace::project(const RelaxedVector& v) const {
  if (v.size() != relaxed_dim_) throw std::domain_error("project: relaxed vector has wrong length");
  MixedPoint w;
  w.x.resize(static_cast<std::size_t>(n_continuous()));
  w.z.resize(static_cast<std::size_t>(n_integer()));
  w.c.resize(static_cast<std::size_t>(n_categorical()));
  int k = 0;
  for (int i = 0; i < n_continuous(); ++i, ++k) {
    w.x[static_cast<std::size_t>(i)] = std::clamp(v[k], continuous_[i].first, continuous_[i].second);
  }
  for (int i = 0; i < n_integer(); ++i, ++k) {
    const auto& levels = integers_[i];
    std::int64_t best = levels.front();
    double best_dist = std::abs(v[k] - static_cast<double>(best));
    for (std::int64_t level : levels) {
      const double dist = std::abs(v[k] - static_cast<double>(level));
      // strict < keeps the lower level on exact midpoints (levels ascend)
      if (dist < best_dist) {
        best = level;
        best_dist = dist;
      }
    }
    w.z[static_cast<std::size_t>(i)] = best;
  }
  for (int j = 0; j < n_categorical(); ++j) {
    const int off = cat_offsets_[static_cast<std::size_t>(j)];
    int arg = 0;
    double best = v[off];
    for (int a = 1; a < categoricals_[j]; ++a) {
      if (v[off + a] > best) {
        best = v[off + a];
        arg = a;
      }
    }
    w.c[static_cast<std::size_t>(j)] = arg;
  }
  return w;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> MixedSpace::relaxed_bounds() const {
  Eigen::VectorXd lo(relaxed_dim_), hi(relaxed_dim_);
  int k = 0;
  for (const auto& [l, h] : continuous_) {
    lo[k] = l;
    hi[k] = h;
    ++k;
  }
  for (const auto& levels : integers_) {
    lo[k] = static_cast<double>(levels.front());
    hi[k] = static_cast<double>(levels.back());
    ++k;
  }
  for (int L : categoricals_) {
    for (int a = 0; a < L; ++a) {
      lo[k] = 0.0;
      hi[k] = 1.0;
      ++k;
    }
  }
  return {lo, hi};
}

nlohmann::json MixedSpace::to_json() const {
  nlohmann::json j;
  j["continuous"] = nlohmann::json::array();
  for (const auto& [lo, hi] : continuous_) j["continuous"].push_back({lo, hi});
  j["integers"] = integers_;
  j["categoricals"] = categoricals_;
  return j;
}

MixedSpace MixedSpace::from_json(const nlohmann::json& j) {
  std::vector<std::pair<double, double>> cont;
  for (const auto& b : j.at("continuous")) {
    cont.emplace_back(b.at(0).get<double>(), b.at(1).get<double>());
  }
  auto ints = j.value("integers", std::vector<std::vector<std::int64_t>>{});
  auto cats = j.value("categoricals", std::vector<int>{});
  return MixedSpace(std::move(cont), std::move(ints), std::move(cats));
}

bool MixedSpace::operator==(const MixedSpace& other) const {
  return continuous_ == other.continuous_ && integers_ == other.integers_ &&
         categoricals_ == other.categoricals_;
}

std::vector<MixedPoint> lhs_sample(const MixedSpace& space, int count, std::uint64_t seed) {
  if (count < 1) throw std::invalid_argument("lhs_sample: count must be >= 1");
  const int dim = space.relaxed_dim();
  const auto [lo, hi] = space.relaxed_bounds();
  Rng rng(mix_seed(seed, 0x1b5));

  // Centered stratified LHS in the unit cube, one permutation per dimension.
  Eigen::MatrixXd unit(count, dim);
  std::vector<int> perm(static_cast<std::size_t>(count));
  for (int d = 0; d < dim; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    for (int i = 0; i < count; ++i) {
      unit(i, d) = (static_cast<double>(perm[static_cast<std::size_t>(i)]) + 0.5) / static_cast<double>(count);
    }
  }

  std::vector<MixedPoint> points;
  points.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    RelaxedVector v(dim);
    for (int d = 0; d < dim; ++d) v[d] = lo[d] + unit(i, d) * (hi[d] - lo[d]);
    points.push_back(space.project(v));
  }
  return points;
}

}  // namespace msego
