#include "sigspline/evaluation.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sigspline/errors.hpp"
#include "test_helpers.hpp"

namespace sigspline {
namespace {

using testing::random_sequence;
using testing::rows;

const std::vector<std::size_t> kLag0{0};
const std::vector<std::size_t> kLag1{1};
const std::vector<std::size_t> kLags12{1, 2};

TEST(Acf, TrivialCases) {
  const std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
  EXPECT_DOUBLE_EQ(acf(alt, kLag0)[0], 1.0);
  // Mean is zero, so lag-1 gives -(n-1)/n with 1/n normalisation of both.
  EXPECT_NEAR(acf(alt, kLag1)[0], -7.0 / 8.0, 1e-15);
  std::vector<double> longer(10000);
  for (std::size_t t = 0; t < longer.size(); ++t) longer[t] = (t % 2 == 0) ? 1.0 : -1.0;
  EXPECT_NEAR(acf(longer, kLag1)[0], -1.0, 1e-3);
  EXPECT_THROW(acf(std::vector<double>{2, 2, 2}, kLag1), DataError);
  EXPECT_THROW(acf(std::vector<double>{1, 2}, std::vector<std::size_t>{2}), DataError);
}

TEST(Acf, IidUniformIsUncorrelated) {
  Rng rng(81);
  std::vector<double> x(10000);
  for (double& v : x) v = rng.uniform();
  EXPECT_NEAR(acf(x, kLag1)[0], 0.0, 0.03);
  EXPECT_DOUBLE_EQ(acf(x, kLag0)[0], 1.0);
}

TEST(Moments, TwoPointAndNormal) {
  const std::vector<double> two{-1, 1};
  EXPECT_DOUBLE_EQ(skewness(two), 0.0);
  EXPECT_DOUBLE_EQ(kurtosis(two), 1.0);
  Rng rng(82);
  std::vector<double> z(100000);
  for (double& v : z) v = rng.normal();
  EXPECT_NEAR(kurtosis(z), 3.0, 0.1);
  EXPECT_NEAR(skewness(z), 0.0, 0.05);
  // Exponential(1): skewness 2.
  std::vector<double> e(100000);
  for (double& v : e) v = -std::log(1.0 - rng.uniform());
  EXPECT_NEAR(skewness(e), 2.0, 0.15);
  EXPECT_THROW(skewness(std::vector<double>{3, 3}), DataError);
  EXPECT_THROW(kurtosis(std::vector<double>{}), DataError);
}

TEST(CrossCorrelation, Properties) {
  Rng rng(83);
  Eigen::MatrixXd v(4096, 3);
  for (Eigen::Index t = 0; t < v.rows(); ++t) v.row(t) << rng.normal(), rng.normal(), 0.0;
  v.col(2) = v.col(0);
  const Eigen::MatrixXd c = cross_correlation(Sequence(v));
  for (int k = 0; k < 3; ++k) EXPECT_EQ(c(k, k), 1.0);
  EXPECT_NEAR(c(0, 1), 0.0, 0.05);
  EXPECT_NEAR(c(0, 2), 1.0, 1e-12);
  EXPECT_EQ(c(0, 1), c(1, 0));
  EXPECT_LE(c.cwiseAbs().maxCoeff(), 1.0);
  EXPECT_THROW(cross_correlation(rows({{1, 2}, {1, 3}})), DataError);
}

TEST(AbsReturnAcf, Cases) {
  std::vector<double> line(50);
  for (std::size_t t = 0; t < line.size(); ++t) line[t] = 0.5 * static_cast<double>(t);
  EXPECT_THROW(abs_return_acf(line, kLag1), DataError);

  Rng rng(84);
  std::vector<double> walk{0.0};
  for (int t = 0; t < 10000; ++t) walk.push_back(walk.back() + rng.normal());
  EXPECT_NEAR(abs_return_acf(walk, kLag1)[0], 0.0, 0.05);

  // Fixture: return magnitudes alternate between 1 and 3 in blocks of ten
  // with random signs, so consecutive absolute returns are strongly related.
  std::vector<double> clustered{0.0};
  for (int t = 0; t < 2000; ++t) {
    const double size = ((t / 10) % 2 == 0) ? 1.0 : 3.0;
    clustered.push_back(clustered.back() + (rng.uniform() < 0.5 ? -size : size));
  }
  EXPECT_GT(abs_return_acf(clustered, kLag1)[0], 0.2);
}

TEST(PooledAcf, MatchesDirectFormula) {
  const std::vector<std::vector<double>> batch{{1, 2, 4}, {0, 3, 1}};
  // Pooled mean 11/6; lag-1 pairs within each sequence.
  const double m = 11.0 / 6.0;
  double c0 = 0.0;
  for (const auto& s : batch) {
    for (double v : s) c0 += (v - m) * (v - m);
  }
  c0 /= 6.0;
  double c1 = 0.0;
  for (const auto& s : batch) {
    for (std::size_t t = 1; t < s.size(); ++t) c1 += (s[t] - m) * (s[t - 1] - m);
  }
  c1 /= 4.0;
  EXPECT_NEAR(pooled_acf(batch, kLag1)[0], c1 / c0, 1e-15);
  EXPECT_THROW(pooled_acf(batch, std::vector<std::size_t>{3}), DataError);
}

TEST(CompareBatches, IdenticalBatchesHaveZeroDiscrepancy) {
  Rng rng(85);
  std::vector<Sequence> batch;
  std::vector<Eigen::RowVectorXd> anchors;
  for (int j = 0; j < 32; ++j) {
    batch.push_back(random_sequence(rng, 4, 2));
    anchors.push_back(random_sequence(rng, 1, 2).row(0));
  }
  const MetricReport r = compare_batches(batch, batch, anchors, true);
  std::vector<std::string> names;
  for (const auto& [name, stat] : r.stats) {
    names.push_back(name);
    EXPECT_EQ(stat.discrepancy, 0.0) << name;
  }
  std::vector<std::string> expected = statistic_names(true);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(names, expected);
}

TEST(CompareBatches, DiscrepancyIsL1) {
  Rng rng(86);
  std::vector<Sequence> a, b;
  std::vector<Eigen::RowVectorXd> anchors;
  for (int j = 0; j < 16; ++j) {
    a.push_back(random_sequence(rng, 4, 2));
    b.push_back(random_sequence(rng, 4, 2));
    anchors.push_back(Eigen::RowVectorXd::Zero(2));
  }
  const MetricReport r = compare_batches(a, b, anchors, false);
  for (const auto& [name, stat] : r.stats) {
    ASSERT_EQ(stat.real.size(), stat.generated.size());
    double l1 = 0.0;
    for (std::size_t k = 0; k < stat.real.size(); ++k) l1 += std::abs(stat.real[k] - stat.generated[k]);
    EXPECT_NEAR(stat.discrepancy, l1, 1e-15) << name;
  }
  EXPECT_EQ(r.stats.at("level/acf_lag1").real.size(), 2u);
  EXPECT_EQ(r.stats.at("level/cross_correlation").real.size(), 4u);
  EXPECT_EQ(r.stats.count("return/abs_acf_lag1"), 0u);
}

TEST(Evaluate, SelfEvaluationIsZero) {
  Rng rng(87);
  const Sequence real = random_sequence(rng, 500, 2, -2, 2);
  EvaluationOptions o;
  o.batch = 128;
  o.seeds = 3;
  o.abs_return_acf = true;
  const EvaluationReport r = evaluate_self(real, 3, o);
  ASSERT_EQ(r.per_seed.size(), 3u);
  for (const auto& [name, agg] : r.aggregated) {
    EXPECT_EQ(agg.discrepancy.mean, 0.0) << name;
    EXPECT_EQ(agg.discrepancy.max, 0.0) << name;
  }
}

TEST(Evaluate, UniformModelOnUniformData) {
  Rng rng(88);
  const Sequence real = random_sequence(rng, 8192, 2);
  const SigSplineModel model(ModelShape{2, 1, 16, 2});
  EvaluationOptions o;
  o.batch = 4096;
  o.seeds = 2;
  const EvaluationReport r = evaluate(model, real, o);
  EXPECT_LE(r.aggregated.at("level/skewness").discrepancy.mean, 0.1);
  EXPECT_EQ(r.aggregated.size(), statistic_names(false).size());
}

TEST(Evaluate, DeterministicAndRequiresWindow) {
  Rng rng(89);
  const Sequence real = random_sequence(rng, 300, 2);
  SigSplineModel model(ModelShape{2, 2, 8, 2});
  model.set_preprocess(Preprocessor::fit(real));
  EvaluationOptions o;
  o.batch = 64;
  o.seeds = 2;
  EXPECT_EQ(evaluation_report_to_json(evaluate(model, real, o)),
            evaluation_report_to_json(evaluate(model, real, o)));
  EXPECT_THROW(evaluate(SigSplineModel(ModelShape{2, 2, 8, 0}), real, o), DataError);
  EXPECT_THROW(evaluate(SigSplineModel(ModelShape{3, 1, 8, 2}), real, o), DataError);
  EXPECT_THROW(evaluate_self(real.slice(0, 5), 3, o), DataError);
}

TEST(RenderTable, FlagsLowestMean) {
  Rng rng(90);
  const Sequence real = random_sequence(rng, 300, 2);
  EvaluationOptions o;
  o.batch = 64;
  o.seeds = 2;
  const EvaluationReport zero = evaluate_self(real, 2, o);
  const EvaluationReport uniform = evaluate(SigSplineModel(ModelShape{2, 1, 8, 2}), real, o);
  const std::string table = render_table({{"self", zero}, {"uniform", uniform}});
  EXPECT_NE(table.find("self"), std::string::npos);
  EXPECT_NE(table.find("level/acf_lag1"), std::string::npos);
  EXPECT_NE(table.find("0.0000 +- 0.0000 *"), std::string::npos);
  EXPECT_THROW(render_table({}), std::invalid_argument);
}

}  // namespace
}  // namespace sigspline
