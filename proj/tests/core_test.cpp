#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gece/core.hpp"
#include "gece/random.hpp"

namespace gece {
namespace {

TEST(ValidateSimplex, AcceptsSimplexPointUnchanged) {
  const std::vector<double> v{0.7, 0.2, 0.1};
  const auto p = validate_simplex(v, kSimplexTolerance);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 0.7, 1e-15);
  EXPECT_NEAR(p[1], 0.2, 1e-15);
  EXPECT_NEAR(p[2], 0.1, 1e-15);
}

TEST(ValidateSimplex, RenormalizesWithinTolerance) {
  const std::vector<double> v{0.5, 0.5, 1e-10};
  const auto p = validate_simplex(v, kSimplexTolerance);
  double sum = 0.0;
  for (double x : p.values()) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(ValidateSimplex, RejectsBadSum) {
  const std::vector<double> v{0.9, 0.3};
  try {
    validate_simplex(v, kSimplexTolerance);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSumOutOfTolerance);
  }
}

TEST(ValidateSimplex, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(validate_simplex(std::vector<double>{1.2, -0.2}, kSimplexTolerance), Error);
  EXPECT_THROW(validate_simplex(std::vector<double>{NAN, 1.0}, kSimplexTolerance), Error);
  EXPECT_THROW(validate_simplex(std::vector<double>{}, kSimplexTolerance), Error);
}

TEST(OneHot, Basics) {
  const auto a = one_hot(0, 3);
  EXPECT_EQ(std::vector<double>(a.values().begin(), a.values().end()), (std::vector<double>{1, 0, 0}));
  const auto b = one_hot(2, 3);
  EXPECT_EQ(std::vector<double>(b.values().begin(), b.values().end()), (std::vector<double>{0, 0, 1}));
  try {
    one_hot(3, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexOutOfRange);
  }
}

TEST(Softmax, ClosedForms) {
  const auto a = softmax(std::vector<double>{0.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);
  const auto b = softmax(std::vector<double>{2.0, 0.0});
  EXPECT_NEAR(b[0], 0.8808, 1e-4);
  EXPECT_NEAR(b[1], 0.1192, 1e-4);
  const auto c = softmax(std::vector<double>{1000.0, 0.0});
  EXPECT_EQ(c[0], 1.0);
  EXPECT_GE(c[1], 0.0);
  EXPECT_LT(c[1], 1e-300);
}

TEST(Softmax, RejectsNonFinite) {
  try {
    softmax(std::vector<double>{INFINITY, 0.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteInput);
  }
}

TEST(Softmax, PropertyShiftInvarianceAndClosure) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(6);
    std::vector<double> z(k);
    for (double& v : z) v = 10.0 * rng.normal();
    const double shift = 20.0 * (rng.uniform() - 0.5);
    std::vector<double> zs = z;
    for (double& v : zs) v += shift;
    const auto p = softmax(z);
    const auto q = softmax(zs);
    EXPECT_NO_THROW(validate_simplex(p.values(), kSimplexTolerance));
    for (std::size_t i = 0; i < k; ++i) EXPECT_NEAR(p[i], q[i], 1e-12);
  }
}

TEST(PredictionRecord, BothMustAgree) {
  const std::vector<double> z{2.0, 0.0};
  const auto p = softmax(z);
  EXPECT_NO_THROW(PredictionRecord::from_both(p.values(), z, 0));
  const std::vector<double> wrong{0.5, 0.5};
  EXPECT_THROW(PredictionRecord::from_both(wrong, z, 0), Error);
}

TEST(PredictionRecord, BinaryScoreConvention) {
  const auto r = PredictionRecord::from_binary_score(0.8, 1);
  EXPECT_NEAR(r.probs()[0], 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(r.probs()[1], 0.8);
  EXPECT_THROW(PredictionRecord::from_binary_score(0.5, 2), Error);
}

TEST(Dataset, RejectsMixedWidths) {
  std::vector<PredictionRecord> records{PredictionRecord::from_binary_score(0.3, 0),
                                        PredictionRecord::from_probs(std::vector<double>{0.2, 0.3, 0.5}, 1)};
  EXPECT_THROW(Dataset(2, records), Error);
}

TEST(DescendingOrder, TiesKeepLowerIndexFirst) {
  const std::vector<double> p{0.3, 0.4, 0.3};
  EXPECT_EQ(descending_order(p), (std::vector<std::size_t>{1, 0, 2}));
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  Rng a(42, 1, 2);
  Rng b(42, 1, 2);
  Rng c(42, 2, 1);
  bool differ = false;
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differ = differ || x != c.next_u64();
  }
  EXPECT_TRUE(differ);
}

TEST(Rng, GammaMomentsMatch) {
  Rng rng(3);
  for (double shape : {0.5, 1.0, 4.0}) {
    double sum = 0.0;
    double sq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double g = rng.gamma(shape);
      sum += g;
      sq += g * g;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_NEAR(mean, shape, 0.02 * std::max(1.0, shape)) << shape;
    EXPECT_NEAR(var, shape, 0.05 * std::max(1.0, shape)) << shape;
  }
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(11);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[rng.uniform_index(7)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

}  // namespace
}  // namespace gece
