#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "plknn/core.hpp"

using namespace plknn;

namespace {

FeatureVector random_vector(std::mt19937_64& rng, std::size_t d, double spread = 10.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  FeatureVector v(d);
  for (auto& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST(Distances, HandValues) {
  const FeatureVector o{0.0, 0.0};
  const FeatureVector p{3.0, 4.0};
  EXPECT_DOUBLE_EQ(euclidean_distance(o, p), 5.0);
  EXPECT_DOUBLE_EQ(manhattan_distance(o, p), 7.0);

  const FeatureVector a{1.0, 1.0, 1.0};
  const FeatureVector z{0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(euclidean_distance(a, z), std::sqrt(3.0));
  EXPECT_DOUBLE_EQ(manhattan_distance(a, z), 3.0);
  EXPECT_EQ(euclidean_distance(a, a), 0.0);
  EXPECT_EQ(manhattan_distance(a, a), 0.0);
}

TEST(Distances, DimensionMismatchThrows) {
  const FeatureVector a{1.0, 2.0};
  const FeatureVector b{1.0, 2.0, 3.0};
  EXPECT_THROW(euclidean_distance(a, b), ContractError);
  EXPECT_THROW(manhattan_distance(a, b), ContractError);
  EXPECT_THROW(halfspace_side(a, a, b), ContractError);
}

TEST(Distances, MetricAxiomsOnRandomTriples) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 12000; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 7);
    const auto x = random_vector(rng, d);
    const auto y = random_vector(rng, d);
    const auto z = random_vector(rng, d);
    for (auto dist : {&euclidean_distance, &manhattan_distance}) {
      const double xy = dist(x, y);
      ASSERT_GE(xy, 0.0);
      ASSERT_EQ(xy, dist(y, x));
      ASSERT_LE(xy, dist(x, z) + dist(z, y) + 1e-12 * (1.0 + xy));
    }
    ASSERT_GE(manhattan_distance(x, y), euclidean_distance(x, y));
  }
}

TEST(Halfspace, BoundaryAndDegenerateDirectionsCountAsInside) {
  const FeatureVector s{0.0, 0.0};
  const FeatureVector c{1.0, 0.0};
  EXPECT_EQ(halfspace_side(s, c, FeatureVector{0.0, 1.0}), 0.0);   // exactly 90 degrees
  EXPECT_GT(halfspace_side(s, c, FeatureVector{1.0, 1.0}), 0.0);   // 45 degrees
  EXPECT_LT(halfspace_side(s, c, FeatureVector{-1.0, 1.0}), 0.0);  // 135 degrees
  EXPECT_EQ(halfspace_side(s, c, s), 0.0);
  EXPECT_EQ(halfspace_side(s, s, c), 0.0);
}

TEST(Halfspace, AgreesWithArccosOracle) {
  std::mt19937_64 rng(5);
  int compared = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 5);
    const auto s = random_vector(rng, d);
    const auto c = random_vector(rng, d);
    const auto t = random_vector(rng, d);
    double dot = 0.0, nc = 0.0, nt = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      dot += (c[k] - s[k]) * (t[k] - s[k]);
      nc += (c[k] - s[k]) * (c[k] - s[k]);
      nt += (t[k] - s[k]) * (t[k] - s[k]);
    }
    const double cosine = std::clamp(dot / std::sqrt(nc * nt), -1.0, 1.0);
    const double angle = std::acos(cosine);
    const double right = std::numbers::pi / 2.0;
    if (std::abs(angle - right) < 1e-9) continue;
    ++compared;
    ASSERT_EQ(halfspace_side(s, c, t) >= 0.0, angle <= right + 1e-9) << "trial " << trial;
  }
  EXPECT_GT(compared, 19000);
}

TEST(DatasetModel, ValidateAndSubset) {
  Dataset d;
  d.samples = {{1.0, 2.0}, {3.0, 4.0}, {5.0, 6.0}};
  d.labels = {0, 1, 0};
  d.class_count = 2;
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.class_counts(), (std::vector<std::size_t>{2, 1}));

  const std::vector<std::size_t> pick{2, 0};
  const Dataset s = d.subset(pick);
  EXPECT_EQ(s.samples[0], d.samples[2]);
  EXPECT_EQ(s.labels, (std::vector<Label>{0, 0}));
  EXPECT_THROW(s.validate(), ContractError);
  EXPECT_NO_THROW(s.validate(false));

  Dataset bad = d;
  bad.samples[1] = {1.0};
  EXPECT_THROW(bad.validate(), ContractError);
  bad = d;
  bad.samples[0][0] = std::nan("");
  EXPECT_THROW(bad.validate(), ContractError);
  bad = d;
  bad.labels[0] = 2;
  EXPECT_THROW(bad.validate(), ContractError);
}
