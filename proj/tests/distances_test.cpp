#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gece/distances.hpp"
#include "gece/error.hpp"
#include "gece/random.hpp"

namespace gece {
namespace {

using V = std::vector<double>;

TEST(Distance, TvdExample) {
  EXPECT_NEAR(distance(TvdDistance{}, V{0.7, 0.2, 0.1}, V{1, 0, 0}), 0.3, 1e-15);
}

TEST(Distance, TvdOnScalarIsAbsoluteDifference) {
  EXPECT_NEAR(distance(TvdDistance{}, V{0.9}, V{0.5}), 0.4, 1e-15);
}

TEST(Distance, InterIntervalExamples) {
  EXPECT_EQ(distance(InterIntervalDistance{0.0, 0.33}, V{0.9}, V{0.2}), 0.0);
  EXPECT_NEAR(distance(InterIntervalDistance{0.0, 0.33}, V{0.1}, V{0.5}), 0.17, 1e-12);
  EXPECT_NEAR(distance(InterIntervalDistance{0.66, 1.0}, V{0.1}, V{0.5}), 0.16, 1e-12);
}

TEST(Distance, InterIntervalRejectsVectors) {
  try {
    distance(InterIntervalDistance{0.0, 0.5}, V{0.5, 0.5}, V{1, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInterIntervalOnNonScalar);
  }
  EXPECT_THROW(validate_distance(InterIntervalDistance{0.5, 0.5}), Error);
  EXPECT_THROW(validate_distance(InterIntervalDistance{-0.1, 0.5}), Error);
}

TEST(Distance, DimensionMismatch) {
  try {
    distance(L2Distance{}, V{0.5, 0.5}, V{1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  const auto w = validate_weight_matrix(V{1, 0, 0, 1}, 2);
  EXPECT_THROW(distance(w, V{0.2, 0.3, 0.5}, V{0, 0, 1}), Error);
}

TEST(WeightMatrix, Validation) {
  EXPECT_NO_THROW(validate_weight_matrix(V{1, 0, 0, 0, 2, 0, 0, 0, 3}, 3));
  try {
    validate_weight_matrix(V{1, 2, 2, 1}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonPSDMatrix);
    EXPECT_NE(std::string(e.what()).find("eigenvalue -"), std::string::npos) << e.what();
  }
  const auto zero = validate_weight_matrix(V{0, 0, 0, 0}, 2);
  EXPECT_EQ(distance(zero, V{0.9, 0.1}, V{0, 1}), 0.0);
  // Asymmetric input is symmetrized before the check.
  const auto sym = validate_weight_matrix(V{2, 1, -1, 2}, 2);
  EXPECT_EQ(sym.matrix()[1], 0.0);
  EXPECT_THROW(validate_weight_matrix(V{1, 0, 0}, 2), Error);
}

TEST(Distance, RandomizedProperties) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(5);
    V a(k), b(k);
    for (auto& x : a) x = rng.uniform();
    for (auto& x : b) x = rng.uniform();
    for (const DistanceSpec& d : {DistanceSpec(TvdDistance{}), DistanceSpec(L2Distance{})}) {
      EXPECT_GE(distance(d, a, b), 0.0);
      EXPECT_EQ(distance(d, a, b), distance(d, b, a));
      EXPECT_EQ(distance(d, a, a), 0.0);
    }
    V identity(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i) identity[i * k + i] = 1.0;
    EXPECT_NEAR(distance(validate_weight_matrix(identity, k), a, b), distance(L2Distance{}, a, b), 1e-12);

    // Inter-interval: zero iff inside, 1-Lipschitz in the mean target.
    const double l = 0.5 * rng.uniform();
    const double h = l + 0.01 + (1.0 - l - 0.01) * rng.uniform();
    const InterIntervalDistance iv{l, h};
    const double y1 = rng.uniform();
    const double y2 = rng.uniform();
    const double d1 = distance(iv, V{0.0}, V{y1});
    EXPECT_EQ(d1 == 0.0, y1 >= l && y1 <= h);
    EXPECT_LE(std::abs(d1 - distance(iv, V{0.0}, V{y2})), std::abs(y1 - y2) + 1e-15);
    EXPECT_EQ(d1, distance(iv, V{rng.uniform()}, V{y1}));
  }
}

TEST(Distance, TvdBoundedOnSimplex) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(5);
    V a(k), b(k, 0.0);
    double s = 0.0;
    for (auto& x : a) s += (x = rng.gamma(1.0));
    for (auto& x : a) x /= s;
    b[rng.uniform_index(k)] = 1.0;
    EXPECT_LE(distance(TvdDistance{}, a, b), 1.0 + 1e-15);
  }
}

}  // namespace
}  // namespace gece
