#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gece/synth.hpp"
#include "support/random_instances.hpp"

namespace gece {
namespace {

TEST(Generate, SeedDeterministic) {
  for (const GeneratorVariant& v :
       {GeneratorVariant(CalibratedGenerator{1.0, 4, 100}), GeneratorVariant(TwoPointBinaryGenerator{50}),
        GeneratorVariant(SharpenedGenerator{{0.7, 3, 80}, 3.0}), GeneratorVariant(ConstantBinaryGenerator{0.8, 0.6, 60})}) {
    const auto a = generate({v, 42});
    const auto b = generate({v, 42});
    const auto c = generate({v, 43});
    ASSERT_EQ(a.size(), b.size());
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].probs(), b[i].probs());
      EXPECT_EQ(a[i].label(), b[i].label());
      differs = differs || !(a[i].probs() == c[i].probs()) || a[i].label() != c[i].label();
    }
    EXPECT_TRUE(differs) << to_string(v);
  }
}

TEST(Generate, Shapes) {
  const auto two = generate({TwoPointBinaryGenerator{10}, 1});
  for (std::size_t i = 0; i < two.size(); ++i) EXPECT_DOUBLE_EQ(two[i].probs()[1], i % 2 == 0 ? 0.3 : 0.7);
  const auto cal = generate({CalibratedGenerator{1.0, 5, 500}, 2});
  EXPECT_EQ(cal.num_classes(), 5u);
  for (std::size_t i = 0; i < cal.size(); ++i) {
    EXPECT_NO_THROW(validate_simplex(cal[i].probs().values(), kSimplexTolerance));
    EXPECT_LT(cal[i].label(), 5u);
  }
  const auto sharp = generate({SharpenedGenerator{{1.0, 3, 200}, 2.0}, 2});
  double sharp_conf = 0.0, cal_conf = 0.0;
  const auto base = generate({CalibratedGenerator{1.0, 3, 200}, 2});
  for (std::size_t i = 0; i < 200; ++i) {
    sharp_conf += *std::max_element(sharp[i].probs().values().begin(), sharp[i].probs().values().end());
    cal_conf += *std::max_element(base[i].probs().values().begin(), base[i].probs().values().end());
  }
  EXPECT_GT(sharp_conf, cal_conf);
}

TEST(Generate, Validation) {
  EXPECT_THROW(validate_generator({CalibratedGenerator{0.0, 3, 10}, 0}), Error);
  EXPECT_THROW(validate_generator({CalibratedGenerator{1.0, 1, 10}, 0}), Error);
  EXPECT_THROW(validate_generator({TwoPointBinaryGenerator{0}, 0}), Error);
  EXPECT_THROW(validate_generator({SharpenedGenerator{{1.0, 3, 10}, 1.0}, 0}), Error);
  EXPECT_THROW(validate_generator({ConstantBinaryGenerator{1.2, 0.5, 10}, 0}), Error);
}

TEST(Generate, ConstantBinaryEce) {
  const auto d = generate({ConstantBinaryGenerator{0.8, 0.6, 10000}, 7});
  EXPECT_NEAR(traditional_ece(d).value, 0.2, 0.01);
  const auto matched = generate({ConstantBinaryGenerator{0.7, 0.7, 100000}, 8});
  EXPECT_LT(traditional_ece(matched).value, 0.01);
}

TEST(Generate, TwoPointBiasModes) {
  const auto d = generate({TwoPointBinaryGenerator{10000}, 9});
  EXPECT_LT(gece(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, AdaptiveBinning{1.0}).value, 0.02);
  EXPECT_NEAR(gece(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, AdaptiveBinning{0.5}).value, 0.2, 0.02);
}

TEST(Oracle, HandFixture) {
  const Dataset d(2, {PredictionRecord::from_binary_score(0.9, 1), PredictionRecord::from_binary_score(0.9, 0),
                      PredictionRecord::from_binary_score(0.7, 1), PredictionRecord::from_binary_score(0.7, 1)});
  EXPECT_NEAR(oracle_gece(d, TopKLens{1}, SelectorSpec::all(), TvdDistance{}, UniformBinning{2, 0.5, 1.0}), 0.35, 1e-12);
  EXPECT_NEAR(oracle_gece(d, TopKLens{1}, SelectorSpec::all(), TvdDistance{}, UniformBinning{15, 0.0, 1.0}), 0.35, 1e-12);
}

TEST(Oracle, SingleRecord) {
  const std::vector<double> g{0.6, 0.3, 0.1};
  const Dataset d(3, {PredictionRecord::from_probs(g, 1)});
  const double expected = distance(TvdDistance{}, g, one_hot(1, 3).values());
  EXPECT_NEAR(oracle_gece(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, AdaptiveBinning{0.01}), expected, 1e-15);
  EXPECT_NEAR(oracle_gece(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, UniformBinning{4, 0.0, 1.0}), expected, 1e-15);
}

TEST(Oracle, MatchesEstimatorOnRandomInstances) {
  Rng rng(2024);
  std::size_t compared = 0;
  for (int trial = 0; trial < 1500; ++trial) {
    const auto inst = fixtures::random_instance(rng);
    double expected = -1.0;
    double actual = -2.0;
    try {
      expected = oracle_gece(inst.dataset, inst.lens, inst.selector, inst.distance, inst.binning);
    } catch (const Error& e) {
      ASSERT_EQ(e.code(), ErrorCode::kEmptySelection);
      try {
        gece(inst.dataset, inst.lens, inst.selector, inst.distance, inst.binning);
        FAIL() << "estimator accepted an empty selection";
      } catch (const Error& e2) {
        EXPECT_EQ(e2.code(), ErrorCode::kEmptySelection);
      }
      continue;
    }
    actual = gece(inst.dataset, inst.lens, inst.selector, inst.distance, inst.binning).value;
    ++compared;
    EXPECT_NEAR(actual, expected, 1e-9) << "trial " << trial << " lens " << to_string(inst.lens) << " distance "
                                        << to_string(inst.distance) << " binning " << to_string(inst.binning);
  }
  EXPECT_GE(compared, 1000u);
}

}  // namespace
}  // namespace gece
