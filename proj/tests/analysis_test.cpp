#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gece/analysis.hpp"
#include "gece/random.hpp"
#include "gece/synth.hpp"

namespace gece {
namespace {

Dataset calibrated(std::size_t n, std::uint64_t seed) {
  return generate({CalibratedGenerator{1.0, 3, n}, seed});
}

TEST(GammaSweep, SingleGammaMeanIsAverageOfResamples) {
  const auto d = calibrated(200, 1);
  const std::vector<double> grid{0.25};
  const auto r = gamma_sweep(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, grid, 20, 9);
  ASSERT_EQ(r.gammas.size(), 1u);
  ASSERT_EQ(r.mean_ece.size(), 1u);
  EXPECT_GE(r.std_ece[0], 0.0);
  EXPECT_FALSE(r.plateau_found);
  EXPECT_EQ(r.recommended_gamma, kBaselineGamma);
  EXPECT_EQ(r.n_points, 200u);

  // Same streams by hand.
  std::vector<double> values;
  for (std::size_t s = 0; s < 20; ++s) {
    Rng rng(9, 0, s);
    std::vector<PredictionRecord> records;
    for (std::size_t i = 0; i < d.size(); ++i) records.push_back(d[rng.uniform_index(d.size())]);
    values.push_back(gece(d.with_records(records), FullLens{}, SelectorSpec::all(), TvdDistance{},
                          AdaptiveBinning{0.25}).value);
  }
  const auto ms = mean_std(values);
  EXPECT_NEAR(r.mean_ece[0], ms.mean, 1e-12);
  EXPECT_NEAR(r.std_ece[0], ms.std, 1e-12);
}

TEST(GammaSweep, Reproducible) {
  const auto d = calibrated(300, 2);
  const auto grid = default_gamma_grid();
  const auto a = gamma_sweep(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, grid, 10, 4);
  const auto b = gamma_sweep(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, grid, 10, 4);
  EXPECT_EQ(a.mean_ece, b.mean_ece);
  EXPECT_EQ(a.std_ece, b.std_ece);
  EXPECT_EQ(a.recommended_gamma, b.recommended_gamma);
}

TEST(GammaSweep, TwoPointBiasModes) {
  const auto d = generate({TwoPointBinaryGenerator{2000}, 5});
  const std::vector<double> grid{1.0, 2.0 / 2000.0};
  const auto r = gamma_sweep(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, grid, 5, 6);
  EXPECT_LT(r.mean_ece[0], 0.05);
  EXPECT_GT(r.mean_ece[1], 0.15);
}

TEST(GammaSweep, GridMustDescend) {
  const auto d = calibrated(50, 1);
  const std::vector<double> grid{0.1, 0.5};
  EXPECT_THROW(gamma_sweep(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, grid, 2, 1), Error);
  try {
    gamma_sweep(d, FullLens{}, SelectorSpec{{SelectorTerm(LabelEquals{0}), SelectorTerm(LabelEquals{1})}}, TvdDistance{}, default_gamma_grid(), 2, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySelection);
  }
}

TEST(VarianceProfile, SingleResampleHasZeroStd) {
  const auto d = calibrated(100, 3);
  const std::vector<double> fractions{0.1, 0.5, 1.0};
  const auto p = variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.1, fractions, 1, 2);
  ASSERT_EQ(p.std_ece.size(), 3u);
  for (double s : p.std_ece) EXPECT_EQ(s, 0.0);
  EXPECT_EQ(p.sample_sizes, (std::vector<std::size_t>{10, 50, 100}));
}

TEST(VarianceProfile, SmallerSamplesVaryMore) {
  const std::vector<double> fractions{0.1, 1.0};
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto d = calibrated(1000, 100 + seed);
    const auto p = variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.1, fractions, 30, seed);
    if (p.std_ece[0] >= p.std_ece[1]) ++wins;
  }
  EXPECT_GE(wins, 6);
}

TEST(VarianceProfile, ErrorsAndDeterminism) {
  const auto d = calibrated(20, 3);
  const std::vector<double> tiny{0.01};
  try {
    variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.1, tiny, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFractionTooSmall);
  }
  const std::vector<double> bad{1.5};
  EXPECT_THROW(variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.1, bad, 3, 1), Error);
  const std::vector<double> ok{0.5};
  const auto a = variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.2, ok, 7, 8);
  const auto b = variance_profile(d, FullLens{}, SelectorSpec::all(), TvdDistance{}, 0.2, ok, 7, 8);
  EXPECT_EQ(a.std_ece, b.std_ece);
  EXPECT_EQ(a.mean_ece, b.mean_ece);
}

TEST(BinStats, Examples) {
  Binning b;
  for (std::size_t i = 0; i < 4; ++i) b.bins.push_back(Bin{{2 * i, 2 * i + 1}, {}, {}, {}});
  auto s = bin_stats(b);
  EXPECT_EQ(s.median, 2.0);
  EXPECT_EQ(s.min, 2u);
  EXPECT_EQ(s.max, 2u);
  b.bins = {Bin{{0}, {}, {}, {}}, Bin{{1, 2}, {}, {}, {}}, Bin{{3, 4, 5}, {}, {}, {}}};
  s = bin_stats(b);
  EXPECT_EQ(s.median, 2.0);
  EXPECT_EQ(s.min, 1u);
  EXPECT_EQ(s.max, 3u);
}

TEST(Profiles, ConfidenceProfile) {
  const Dataset one(3, {PredictionRecord::from_probs(std::vector<double>{0.5, 0.3, 0.2}, 0)});
  const std::vector<std::size_t> ks{1, 2, 3};
  const auto p = confidence_profile(one, ks);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.3);
  EXPECT_DOUBLE_EQ(p[2], 0.2);
  const Dataset two(2, {PredictionRecord::from_probs(std::vector<double>{0.5, 0.5}, 0),
                        PredictionRecord::from_probs(std::vector<double>{1.0, 0.0}, 0)});
  const std::vector<std::size_t> k1{1};
  EXPECT_DOUBLE_EQ(confidence_profile(two, k1)[0], 0.75);
  const auto big = calibrated(300, 4);
  const auto q = confidence_profile(big, ks);
  EXPECT_GE(q[0], q[1]);
  EXPECT_GE(q[1], q[2]);
}

TEST(Profiles, TopkAccuracy) {
  const Dataset d(3, {PredictionRecord::from_probs(std::vector<double>{0.5, 0.3, 0.2}, 1)});
  const std::vector<std::size_t> ks{1, 2, 3};
  EXPECT_EQ(topk_accuracy(d, ks), (std::vector<double>{0.0, 1.0, 1.0}));
  EXPECT_TRUE(topk_accuracy(d, std::vector<std::size_t>{}).empty());
  const auto acc = topk_accuracy(calibrated(300, 5), ks);
  EXPECT_LE(acc[0], acc[1]);
  EXPECT_LE(acc[1], acc[2]);
  EXPECT_EQ(acc[2], 1.0);
}

TEST(Profiles, MeanEntropy) {
  const std::vector<double> u{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> h{1.0, 0.0, 0.0, 0.0};
  const Dataset uniform(4, {PredictionRecord::from_probs(u, 0)});
  const Dataset onehot(4, {PredictionRecord::from_probs(h, 0)});
  const Dataset mix(4, {PredictionRecord::from_probs(u, 0), PredictionRecord::from_probs(h, 0)});
  EXPECT_NEAR(mean_entropy(uniform), std::log(4.0), 1e-12);
  EXPECT_EQ(mean_entropy(onehot), 0.0);
  EXPECT_NEAR(mean_entropy(mix), 0.6931471805599453, 1e-12);
}

TEST(Profiles, GroupConditionalConfidence) {
  const std::vector<double> g{0.5, 0.3, 0.2};
  const Dataset d(3, {PredictionRecord::from_probs(g, 0), PredictionRecord::from_probs(g, 1)});
  const auto grouping = std::get<GroupingLens>(make_grouping({{0, 0}, {1, 0}, {2, 1}}, 3));
  const auto c = group_conditional_confidence(d, grouping, 0);
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(c[0], 0.8, 1e-15);
  EXPECT_NEAR(c[1], 0.2, 1e-15);
  try {
    group_conditional_confidence(d, grouping, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySelection);
  }
  const auto single = std::get<GroupingLens>(make_grouping({{0, 0}, {1, 1}, {2, 2}}, 3));
  const auto s = group_conditional_confidence(d, single, 1);
  EXPECT_EQ(s, g);
}

TEST(MeanStd, ConstantValuesHaveZeroStd) {
  const std::vector<double> v(7, 0.1);
  const auto ms = mean_std(v);
  EXPECT_EQ(ms.std, 0.0);
  EXPECT_NEAR(ms.mean, 0.1, 1e-16);
}

}  // namespace
}  // namespace gece
