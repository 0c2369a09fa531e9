#include "sigspline/tensor_algebra.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include <gtest/gtest.h>

#include "sigspline/rng.hpp"

namespace sigspline {
namespace {

TruncatedTensor random_tensor(Rng& rng, std::size_t e, std::size_t level) {
  TruncatedTensor t(e, level);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 2.0 * rng.uniform() - 1.0;
  return t;
}

// Independent route: enumerate every word and every factorisation w = u.v.
TruncatedTensor brute_force_product(const TruncatedTensor& a, const TruncatedTensor& b) {
  const std::size_t e = a.alphabet_size();
  const std::size_t level = a.level();
  TruncatedTensor c(e, level);
  for (std::size_t idx = 0; idx < c.size(); ++idx) {
    const Word w = index_to_word(idx, e, level);
    double acc = 0.0;
    for (std::size_t cut = 0; cut <= w.size(); ++cut) {
      Word u{{w.letters.begin(), w.letters.begin() + static_cast<std::ptrdiff_t>(cut)}};
      Word v{{w.letters.begin() + static_cast<std::ptrdiff_t>(cut), w.letters.end()}};
      acc += a.at(u) * b.at(v);
    }
    c[idx] = acc;
  }
  return c;
}

TEST(FeatureCount, SmallCases) {
  EXPECT_EQ(feature_count(2, 2), 7u);
  EXPECT_EQ(feature_count(3, 4), 121u);
  EXPECT_EQ(feature_count(3, 1), 4u);
  EXPECT_EQ(feature_count(1, 5), 6u);
  EXPECT_EQ(feature_count(5, 0), 1u);
}

TEST(FeatureCount, ClosedFormForLargerAlphabets) {
  for (std::size_t e = 2; e <= 6; ++e) {
    for (std::size_t level = 0; level <= 6; ++level) {
      std::size_t pow = 1;
      for (std::size_t k = 0; k <= level; ++k) pow *= e;
      EXPECT_EQ(feature_count(e, level), (pow - 1) / (e - 1));
    }
  }
}

TEST(FeatureCount, OverflowIsReported) {
  EXPECT_THROW(feature_count(1000, 10), std::overflow_error);
  EXPECT_THROW(feature_count(2, 64), std::overflow_error);
  EXPECT_NO_THROW(feature_count(2, 62));
}

TEST(WordIndex, FixedOrdering) {
  EXPECT_EQ(word_to_index(Word{}, 2, 2), 0u);
  EXPECT_EQ(word_to_index(Word{{1}}, 2, 2), 1u);
  EXPECT_EQ(word_to_index(Word{{2}}, 2, 2), 2u);
  EXPECT_EQ(word_to_index(Word{{1, 1}}, 2, 2), 3u);
  EXPECT_EQ(word_to_index(Word{{1, 2}}, 2, 2), 4u);
  EXPECT_EQ(word_to_index(Word{{2, 1}}, 2, 2), 5u);
  EXPECT_EQ(word_to_index(Word{{2, 2}}, 2, 2), 6u);
}

TEST(WordIndex, Errors) {
  EXPECT_THROW(word_to_index(Word{{3}}, 2, 2), std::out_of_range);
  EXPECT_THROW(word_to_index(Word{{0}}, 2, 2), std::out_of_range);
  EXPECT_THROW(word_to_index(Word{{1, 1, 1}}, 2, 2), std::out_of_range);
  EXPECT_THROW(index_to_word(7, 2, 2), std::out_of_range);
}

TEST(WordIndex, RoundTripIsABijection) {
  for (std::size_t e = 1; e <= 4; ++e) {
    for (std::size_t level = 0; level <= 4; ++level) {
      std::set<std::vector<int>> seen;
      const std::size_t count = feature_count(e, level);
      for (std::size_t i = 0; i < count; ++i) {
        const Word w = index_to_word(i, e, level);
        ASSERT_LE(w.size(), level);
        ASSERT_EQ(word_to_index(w, e, level), i);
        seen.insert(w.letters);
      }
      EXPECT_EQ(seen.size(), count);
    }
  }
}

TEST(TensorProduct, UnitIsIdentityExactly) {
  Rng rng(1);
  const TruncatedTensor b = random_tensor(rng, 3, 3);
  const TruncatedTensor one = TruncatedTensor::unit(3, 3);
  const TruncatedTensor left = tensor_product(one, b);
  const TruncatedTensor right = tensor_product(b, one);
  for (std::size_t i = 0; i < b.size(); ++i) {
    EXPECT_EQ(left[i], b[i]);
    EXPECT_EQ(right[i], b[i]);
  }
}

TEST(TensorProduct, OneDimensionalExponentials) {
  const double x = 0.7, y = -0.3;
  const TruncatedTensor a(1, 2, {1.0, x, x * x / 2});
  const TruncatedTensor b(1, 2, {1.0, y, y * y / 2});
  const TruncatedTensor c = tensor_product(a, b);
  EXPECT_DOUBLE_EQ(c[0], 1.0);
  EXPECT_NEAR(c[1], x + y, 1e-15);
  EXPECT_NEAR(c[2], (x + y) * (x + y) / 2, 1e-15);
}

TEST(TensorProduct, MatchesBruteForceFactorisation) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const TruncatedTensor a = random_tensor(rng, 2, 3);
    const TruncatedTensor b = random_tensor(rng, 2, 3);
    const TruncatedTensor fast = tensor_product(a, b);
    const TruncatedTensor slow = brute_force_product(a, b);
    for (std::size_t i = 0; i < fast.size(); ++i) EXPECT_NEAR(fast[i], slow[i], 1e-12);
  }
}

TEST(TensorProduct, Associativity) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t e = 1 + rng.below(3);
    const std::size_t level = rng.below(5);
    const auto a = random_tensor(rng, e, level);
    const auto b = random_tensor(rng, e, level);
    const auto c = random_tensor(rng, e, level);
    const auto lhs = tensor_product(a, tensor_product(b, c));
    const auto rhs = tensor_product(tensor_product(a, b), c);
    for (std::size_t i = 0; i < lhs.size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
  }
}

TEST(TensorProduct, RejectsMismatchedAlgebras) {
  EXPECT_THROW(tensor_product(TruncatedTensor(2, 2), TruncatedTensor(3, 2)), std::invalid_argument);
  EXPECT_THROW(tensor_product(TruncatedTensor(2, 2), TruncatedTensor(2, 3)), std::invalid_argument);
}

TEST(InnerProduct, Basics) {
  Rng rng(4);
  TruncatedTensor t = random_tensor(rng, 2, 2);
  t[0] = 1.0;
  std::vector<double> w(7, 0.0);
  EXPECT_EQ(inner_product(w, t), 0.0);
  w[0] = 1.0;
  EXPECT_EQ(inner_product(w, t), 1.0);
  EXPECT_THROW(inner_product(std::vector<double>(6, 0.0), t), std::invalid_argument);
}

TEST(TruncatedTensor, LevelBlocks) {
  const TruncatedTensor t(2, 2, {0, 1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.level_block(0).size(), 1u);
  EXPECT_EQ(t.level_block(2)[0], 3.0);
  EXPECT_EQ(t.level_block(2).size(), 4u);
  EXPECT_THROW(TruncatedTensor(2, 2, {1.0, 2.0}), std::invalid_argument);
}

}  // namespace
}  // namespace sigspline
