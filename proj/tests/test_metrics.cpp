#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "unmix/metrics.hpp"
#include "unmix/random.hpp"

using namespace unmix;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  std::copy(xs.begin(), xs.end(), v.data());
  return v;
}

EndmemberSet set_from(std::initializer_list<std::initializer_list<double>> cols) {
  const auto p = static_cast<Eigen::Index>(cols.size());
  const auto l = static_cast<Eigen::Index>(cols.begin()->size());
  Matrix m(l, p);
  Eigen::Index j = 0;
  for (auto c : cols)
    m.col(j++) = vec(c);
  return EndmemberSet(m);
}

} // namespace

TEST(Sam, IdenticalSpectraGiveZero) {
  const Vector t = vec({0.3, 0.7, 0.1});
  EXPECT_DOUBLE_EQ(sam(t, t), 0.0);
}

TEST(Sam, OrthogonalSpectraGiveRightAngle) {
  EXPECT_DOUBLE_EQ(sam(vec({1, 0}), vec({0, 1})), std::numbers::pi / 2);
}

TEST(Sam, MatchesHighPrecisionValue) {
  // mpmath, 50 digits: acos(1/sqrt(2))
  EXPECT_NEAR(sam(vec({1, 0}), vec({1, 1})), 0.78539816339744830962, 1e-15);
}

TEST(Sam, SpanOverloadAgrees) {
  const std::vector<double> a{1, 2, 3}, b{3, 2, 1};
  EXPECT_DOUBLE_EQ(sam(a, b), sam(vec({1, 2, 3}), vec({3, 2, 1})));
}

TEST(Sam, RejectsZeroNormAndLengthMismatch) {
  try {
    sam(vec({0, 0}), vec({1, 0}));
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_STREQ(e.what(), "degenerate spectrum");
  }
  EXPECT_THROW(sam(vec({1, 0}), vec({1, 0, 0})), ValidationError);
}

TEST(Sam, AntiparallelIsPi) { EXPECT_DOUBLE_EQ(sam(vec({1, 2}), vec({-2, -4})), std::numbers::pi); }

TEST(Sid, IdenticalDistributionsGiveZero) { EXPECT_EQ(sid(vec({0.2, 0.8}), vec({0.2, 0.8})), 0.0); }

TEST(Sid, SymmetricAndMatchesOracle) {
  const Vector x = vec({1, 1}), y = vec({1, 3});
  EXPECT_EQ(sid(x, y), sid(y, x));
  // mpmath: sum p log(p/q) + sum q log(q/p), p = (.5, .5), q = (.25, .75)
  EXPECT_NEAR(sid(x, y), 0.27465307216702742285, 1e-15);
}

TEST(Sid, ScaleFreeAfterNormalisation) { EXPECT_NEAR(sid(vec({1, 1}), vec({1, 3})), sid(vec({5, 5}), vec({2, 6})), 1e-15); }

TEST(Sid, ZeroEntriesAreFloored) {
  const double v = sid(vec({0, 1}), vec({1, 1}));
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 0.0);
}

TEST(Sid, RejectsNegativeAndZeroSum) {
  try {
    sid(vec({-0.1, 1}), vec({1, 1}));
    FAIL();
  } catch (const ValidationError &e) {
    EXPECT_STREQ(e.what(), "negative reflectance");
  }
  EXPECT_THROW(sid(vec({0, 0}), vec({1, 1})), ValidationError);
}

TEST(Sid, ShiftedVariantLiftsNegativeSpectra) {
  bool shifted = false;
  const double v = sid_shifted(vec({-0.1, 0.5, 1.0}), vec({0.0, 0.6, 1.1}), &shifted);
  EXPECT_TRUE(shifted);
  EXPECT_NEAR(v, sid(vec({0.0, 0.6, 1.1}), vec({0.0, 0.6, 1.1})), 1e-15);
  sid_shifted(vec({0.1, 0.5}), vec({0.2, 0.6}), &shifted);
  EXPECT_FALSE(shifted);
}

TEST(Match, IdentityUnderPermutationGivesZeroScores) {
  const EndmemberSet ref = set_from({{1, 0, 0, 0.1}, {0, 1, 0, 0.2}, {0, 0, 1, 0.3}});
  Matrix permuted(4, 3);
  permuted.col(0) = ref.spectrum(2);
  permuted.col(1) = ref.spectrum(0);
  permuted.col(2) = ref.spectrum(1);
  const auto pairs = match_endmembers(EndmemberSet(permuted), ref, Metric::SAM);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(pairs[0], (MatchedPair{0, 1, 0.0}));
  EXPECT_EQ(pairs[1], (MatchedPair{1, 2, 0.0}));
  EXPECT_EQ(pairs[2], (MatchedPair{2, 0, 0.0}));
}

TEST(Match, GreedyPicksGlobalMinimumFirst) {
  Matrix cost(2, 2);
  cost << 0.1, 0.5, 0.4, 0.2;
  const auto pairs = greedy_assignment(cost);
  EXPECT_EQ(pairs[0], (MatchedPair{0, 0, 0.1}));
  EXPECT_EQ(pairs[1], (MatchedPair{1, 1, 0.2}));
}

TEST(Match, RejectsCountOrBandMismatch) {
  const EndmemberSet a = set_from({{1, 0}, {0, 1}});
  const EndmemberSet b = set_from({{1, 0}, {0, 1}, {1, 1}});
  const EndmemberSet c = set_from({{1, 0, 0}, {0, 1, 0}});
  EXPECT_THROW(match_endmembers(a, b, Metric::SAM), ValidationError);
  EXPECT_THROW(match_endmembers(a, c, Metric::SAM), ValidationError);
}

TEST(Match, GreedyAgreesWithExhaustiveOptimumOnRandomTriples) {
  // Exhaustive 3! oracle. Greedy is not always optimal; disagreements are
  // counted and must stay a small minority, and greedy is never better.
  Rng rng(99);
  int agree = 0, disagree = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Matrix ref(8, 3), ext(8, 3);
    for (Eigen::Index i = 0; i < ref.size(); ++i) {
      ref.data()[i] = rng.uniform() + 0.01;
      ext.data()[i] = rng.uniform() + 0.01;
    }
    const auto pairs = match_endmembers(EndmemberSet(ext), EndmemberSet(ref), Metric::SAM);
    double greedy = 0.0;
    std::vector<bool> used(3, false);
    for (const auto &m : pairs) {
      greedy += m.score;
      EXPECT_FALSE(used[m.extracted]);
      used[m.extracted] = true;
    }
    std::array<int, 3> perm{0, 1, 2};
    double best = 1e300;
    do {
      double total = 0.0;
      for (int i = 0; i < 3; ++i)
        total += sam(ref.col(i), ext.col(perm[static_cast<std::size_t>(i)]));
      best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    EXPECT_GE(greedy, best - 1e-12);
    (std::abs(greedy - best) < 1e-12 ? agree : disagree)++;
  }
  RecordProperty("greedy_optimal_disagreements", disagree);
  EXPECT_GT(agree, disagree);
}

TEST(Rms, Definition) {
  const std::vector<double> zeros{0, 0, 0}, pair{3, 4}, single{-2.5}, constant{1.5, 1.5, 1.5, 1.5};
  EXPECT_EQ(rms(zeros), 0.0);
  EXPECT_NEAR(rms(pair), std::sqrt(12.5), 1e-15);
  EXPECT_EQ(rms(single), 2.5);
  EXPECT_DOUBLE_EQ(rms(constant), 1.5);
  EXPECT_THROW(rms(std::span<const double>{}), ValidationError);
}
