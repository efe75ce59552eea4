#include <vector>

#include <gtest/gtest.h>

#include "gece/random.hpp"
#include "gece/selectors.hpp"
#include "gece/spec_text.hpp"

namespace gece {
namespace {

Dataset three_class(const std::vector<std::size_t>& labels) {
  std::vector<PredictionRecord> records;
  for (std::size_t l : labels) {
    records.push_back(PredictionRecord::from_probs(std::vector<double>{0.5, 0.3, 0.2}, l));
  }
  return Dataset(3, records);
}

TEST(Select, LabelEquals) {
  const auto d = three_class({0, 1, 1, 2, 0});
  const auto s = select({{LabelEquals{1}}}, d);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].label(), 1u);
  EXPECT_EQ(s[1].label(), 1u);
}

TEST(Select, LowLikertBandOnBinaryScores) {
  std::vector<PredictionRecord> records;
  for (double p : {0.2, 0.5, 0.9}) records.push_back(PredictionRecord::from_binary_score(p, 1));
  const Dataset d(2, records);
  const auto s = select(parse_selector("score>=0.0,score<0.33"), d);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].probs()[1], 0.2);
}

TEST(Select, AllIsIdentity) {
  const auto d = three_class({2, 0, 1});
  const auto s = select(SelectorSpec::all(), d);
  ASSERT_EQ(s.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(s[i].label(), d[i].label());
}

TEST(Select, InvalidClassIndex) {
  const auto d = three_class({0});
  try {
    select({{LabelEquals{3}}}, d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidClassIndex);
  }
  EXPECT_THROW(select({{OutputCompare{Projection::kScalarBinary, 0, Comparator::kLess, 0.5}}}, d), Error);
}

TEST(Select, EmptyResultIsNotAnError) {
  const auto d = three_class({0, 0});
  EXPECT_TRUE(select({{LabelEquals{2}}}, d).empty());
}

TEST(Select, EqualityUsesTolerance) {
  const Dataset d(2, {PredictionRecord::from_binary_score(0.3, 0)});
  EXPECT_EQ(select({{OutputCompare{Projection::kClassProb, 1, Comparator::kEqual, 0.3 + 1e-12}}}, d).size(), 1u);
  EXPECT_EQ(select({{OutputCompare{Projection::kClassProb, 1, Comparator::kEqual, 0.3 + 1e-6}}}, d).size(), 0u);
}

TEST(Select, RandomizedProperties) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + rng.uniform_index(4);
    std::vector<PredictionRecord> records;
    const std::size_t n = 1 + rng.uniform_index(40);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> p(k);
      double s = 0.0;
      for (double& x : p) s += (x = rng.gamma(1.0));
      for (double& x : p) x /= s;
      records.push_back(PredictionRecord::from_probs(p, rng.uniform_index(k)));
    }
    const Dataset d(k, records);
    SelectorSpec sel;
    sel.terms.push_back(OutputCompare{Projection::kMaxProb, 0, Comparator::kGreaterEqual, rng.uniform()});
    if (rng.bernoulli(0.5)) sel.terms.push_back(LabelInGroup{{rng.uniform_index(k), rng.uniform_index(k)}});
    const auto once = select(sel, d);
    const auto twice = select(sel, once);
    EXPECT_LE(once.size(), d.size());
    ASSERT_EQ(once.size(), twice.size());
    for (std::size_t i = 0; i < once.size(); ++i) {
      EXPECT_EQ(once[i].probs(), twice[i].probs());
      EXPECT_EQ(once[i].label(), twice[i].label());
    }
    std::size_t total = 0;
    for (std::size_t c = 0; c < k; ++c) total += select({{LabelEquals{c}}}, d).size();
    EXPECT_EQ(total, d.size());
  }
}

TEST(ParseSelector, TextualForms) {
  EXPECT_EQ(parse_selector("all"), SelectorSpec::all());
  EXPECT_EQ(parse_selector("label=3"), (SelectorSpec{{LabelEquals{3}}}));
  EXPECT_EQ(parse_selector("label-in=1,4,5"), (SelectorSpec{{LabelInGroup{{1, 4, 5}}}}));
  EXPECT_EQ(parse_selector("maxprob>=0.66"),
            (SelectorSpec{{OutputCompare{Projection::kMaxProb, 0, Comparator::kGreaterEqual, 0.66}}}));
  const auto conj = parse_selector("label-in=1,2,maxprob<0.5,p2=0.25");
  ASSERT_EQ(conj.terms.size(), 3u);
  EXPECT_EQ(conj.terms[0], SelectorTerm(LabelInGroup{{1, 2}}));
  EXPECT_EQ(conj.terms[2], SelectorTerm(OutputCompare{Projection::kClassProb, 2, Comparator::kEqual, 0.25}));
  EXPECT_THROW(parse_selector("maxprob>=1.5"), Error);
  EXPECT_THROW(parse_selector("bogus"), Error);
  EXPECT_THROW(parse_selector("3"), Error);
  for (const char* text : {"all", "label=3", "label-in=1,4,5", "maxprob>=0.66", "score<0.33,p1<=0.5"}) {
    EXPECT_EQ(to_string(parse_selector(text)), text);
  }
}

}  // namespace
}  // namespace gece
