#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>
#include <vector>

#include "msego/mixed_space.hpp"
#include "msego/rng.hpp"

using namespace msego;

namespace {

MixedSpace small_space() {
  // n=1, m=1 (levels {1,3,5}), l=1 (3 levels)
  return MixedSpace{{{0.0, 1.0}}, {{1, 3, 5}}, {3}};
}

}  // namespace

TEST_CASE("relaxed_dim matches the aircraft design-space shapes") {
  // CERAS: 6 continuous, 2 integer, categoricals {2,2} -> 12 relaxed
  const MixedSpace ceras{{{16., 18.}, {5., 11.}, {1.5, 6.}, {1.5, 6.}, {0., 1.}, {20., 30.}},
                         {{30000, 32000, 34000, 36000}, {2, 3, 4}},
                         {2, 2}};
  CHECK(ceras.relaxed_dim() == 12);

  // DRAGON: 10 continuous, categoricals {17,2} -> 29 relaxed
  std::vector<std::pair<double, double>> cont(10, {0.0, 1.0});
  const MixedSpace dragon{cont, {}, {17, 2}};
  CHECK(dragon.relaxed_dim() == 29);

  const MixedSpace pure{{{0., 1.}, {0., 1.}, {0., 1.}}, {}, {}};
  CHECK(pure.relaxed_dim() == 3);
}

TEST_CASE("space invariants are validated") {
  CHECK_THROWS_AS((MixedSpace{{{1.0, 1.0}}, {}, {}}), std::invalid_argument);
  CHECK_THROWS_AS((MixedSpace{{{2.0, 1.0}}, {}, {}}), std::invalid_argument);
  CHECK_THROWS_AS((MixedSpace{{}, {{}}, {}}), std::invalid_argument);
  CHECK_THROWS_AS((MixedSpace{{}, {{3, 1}}, {}}), std::invalid_argument);
  CHECK_THROWS_AS((MixedSpace{{}, {{1, 1}}, {}}), std::invalid_argument);
  CHECK_THROWS_AS((MixedSpace{{}, {}, {1}}), std::invalid_argument);
}

TEST_CASE("relax builds one-hot blocks") {
  const MixedSpace space = small_space();
  const MixedPoint w{{0.5}, {3}, {1}};
  const RelaxedVector v = space.relax(w);
  REQUIRE(v.size() == 5);
  CHECK(v[0] == 0.5);
  CHECK(v[1] == 3.0);
  CHECK(v[2] == 0.0);
  CHECK(v[3] == 1.0);
  CHECK(v[4] == 0.0);

  const MixedSpace pure{{{0., 2.}, {-1., 1.}}, {}, {}};
  const MixedPoint wp{{1.5, -0.25}, {}, {}};
  const RelaxedVector vp = pure.relax(wp);
  CHECK(vp[0] == 1.5);
  CHECK(vp[1] == -0.25);

  const MixedSpace cats{{}, {}, {2}};
  const RelaxedVector vc = cats.relax(MixedPoint{{}, {}, {0}});
  CHECK(vc[0] == 1.0);
  CHECK(vc[1] == 0.0);

  CHECK_THROWS_AS(space.relax(MixedPoint{{2.0}, {3}, {1}}), std::domain_error);
  CHECK_THROWS_AS(space.relax(MixedPoint{{0.5}, {2}, {1}}), std::domain_error);
  CHECK_THROWS_AS(space.relax(MixedPoint{{0.5}, {3}, {3}}), std::domain_error);
}

TEST_CASE("project clips, rounds to the nearest level and takes the argmax") {
  const MixedSpace space = small_space();

  // nearest-level oracle by linear scan
  auto nearest = [](double v, const std::vector<std::int64_t>& levels) {
    std::int64_t best = levels[0];
    for (std::int64_t l : levels) {
      if (std::abs(v - static_cast<double>(l)) < std::abs(v - static_cast<double>(best))) best = l;
    }
    return best;
  };
  RelaxedVector v(5);
  v << 0.25, 3.7, 0.2, 0.9, 0.1;
  const MixedPoint w = space.project(v);
  CHECK(w.z[0] == nearest(3.7, {1, 3, 5}));
  CHECK(w.z[0] == 3);
  CHECK(w.c[0] == 1);

  v << 2.0, 4.0, 0.3, 0.3, 0.1;  // clip + exact midpoint + argmax tie
  const MixedPoint w2 = space.project(v);
  CHECK(w2.x[0] == 1.0);
  CHECK(w2.z[0] == 3);  // midpoint between 3 and 5 breaks low
  CHECK(w2.c[0] == 0);  // argmax tie breaks to the lowest index

  CHECK_THROWS_AS(space.project(Eigen::VectorXd::Zero(4)), std::domain_error);
}

TEST_CASE("project after relax is the identity on an exhaustive space") {
  // n=1 over a 21-point grid, m=1 with 4 levels, l=2 with 3 and 4 levels
  const MixedSpace space{{{0.0, 2.0}}, {{-2, 0, 3, 7}}, {3, 4}};
  int combos = 0;
  for (int xi = 0; xi <= 20; ++xi) {
    for (std::int64_t z : {-2, 0, 3, 7}) {
      for (int c0 = 0; c0 < 3; ++c0) {
        for (int c1 = 0; c1 < 4; ++c1) {
          const MixedPoint w{{2.0 * xi / 20.0}, {z}, {c0, c1}};
          const MixedPoint back = space.project(space.relax(w));
          REQUIRE(back == w);
          ++combos;
        }
      }
    }
  }
  CHECK(combos == 21 * 4 * 3 * 4);
}

TEST_CASE("relax one-hot blocks sum to one with 0/1 entries") {
  const MixedSpace space{{{-1.0, 1.0}}, {{0, 5}}, {3, 5}};
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const MixedPoint w{{rng.uniform(-1.0, 1.0)},
                       {rng.uniform01() < 0.5 ? std::int64_t{0} : std::int64_t{5}},
                       {static_cast<int>(rng.below(3)), static_cast<int>(rng.below(5))}};
    const RelaxedVector v = space.relax(w);
    for (int j = 0; j < space.n_categorical(); ++j) {
      double sum = 0.0;
      const int off = space.categorical_offset(j);
      for (int a = 0; a < space.categorical_levels()[static_cast<size_t>(j)]; ++a) {
        CHECK((v[off + a] == 0.0 || v[off + a] == 1.0));
        sum += v[off + a];
      }
      CHECK(sum == 1.0);
    }
  }
}

TEST_CASE("lhs_sample: validity, determinism and stratification") {
  const MixedSpace space = small_space();
  const auto pts = lhs_sample(space, 5, 42);
  REQUIRE(pts.size() == 5);
  for (const auto& w : pts) CHECK(space.contains(w));

  const auto again = lhs_sample(space, 5, 42);
  CHECK(pts == again);
  const auto other = lhs_sample(space, 5, 43);
  CHECK(pts != other);

  // 1-D continuous: every stratum holds exactly one point
  const MixedSpace line{{{0.0, 1.0}}, {}, {}};
  const auto sample = lhs_sample(line, 100, 3);
  std::set<int> bins;
  for (const auto& w : sample) {
    const int bin = static_cast<int>(w.x[0] * 100.0);
    CHECK(!bins.count(bin));
    bins.insert(bin);
  }
  CHECK(bins.size() == 100);

  CHECK_THROWS_AS(lhs_sample(space, 0, 1), std::invalid_argument);
}

TEST_CASE("relaxed dimension exceeds the variable count once categoricals appear") {
  const MixedSpace no_cats{{{0., 1.}}, {{1, 2}}, {}};
  CHECK(no_cats.relaxed_dim() == no_cats.n_continuous() + no_cats.n_integer());
  const MixedSpace with_cats{{{0., 1.}}, {{1, 2}}, {2, 5}};
  CHECK(with_cats.relaxed_dim() >
        with_cats.n_continuous() + with_cats.n_integer() + with_cats.n_categorical());
  CHECK(with_cats.relaxed_dim() == 1 + 1 + 2 + 5);
}

TEST_CASE("MixedSpace JSON round trip") {
  const MixedSpace space{{{0.0, 2.0}, {-1.0, 4.0}}, {{1, 3, 5}}, {3, 2}};
  const nlohmann::json j = space.to_json();
  CHECK(j["continuous"].size() == 2);
  CHECK(j["integers"][0] == nlohmann::json({1, 3, 5}));
  CHECK(j["categoricals"] == nlohmann::json({3, 2}));
  const MixedSpace back = MixedSpace::from_json(j);
  CHECK(back == space);
  CHECK(back.relaxed_dim() == space.relaxed_dim());
}
