#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigspline/calibration.hpp"
#include "sigspline/model.hpp"
#include "sigspline/sequence.hpp"

namespace sigspline {

/// Sample autocorrelation, mean removed and normalised by the lag-0
/// autocovariance (both with 1/n). Throws DataError for a constant series or
/// a lag >= length.
std::vector<double> acf(std::span<const double> x, std::span<const std::size_t> lags);

/// Standardised third moment (population normalisation).
double skewness(std::span<const double> x);
/// Raw fourth standardised moment; a normal sample gives about 3.
double kurtosis(std::span<const double> x);

/// Pearson correlation matrix of the channels.
Eigen::MatrixXd cross_correlation(const Sequence& x);

/// acf of |x_t - x_{t-1}| for one channel.
std::vector<double> abs_return_acf(std::span<const double> x, std::span<const std::size_t> lags);

/// Autocorrelation pooled over a batch of short sequences: mean and variance
/// over all values, lag-k covariance averaged over all within-sequence pairs.
/// For a single sequence this differs from acf only in the pair normalisation.
std::vector<double> pooled_acf(const std::vector<std::vector<double>>& batch,
                               std::span<const std::size_t> lags);

struct Statistic {
  std::vector<double> real;
  std::vector<double> generated;
  double discrepancy = 0.0;  // sum_k |real_k - generated_k|
};

/// Statistic name -> values for one batch comparison.
struct MetricReport {
  std::map<std::string, Statistic> stats;
};

/// Level and return statistics of two batches and their l1 discrepancies.
/// Returns of each sequence are differences against its predecessor row,
/// starting with `anchors[j]` (the last conditioning row) when given.
MetricReport compare_batches(const std::vector<Sequence>& real, const std::vector<Sequence>& generated,
                             const std::vector<Eigen::RowVectorXd>& anchors, bool abs_return_acf);

struct EvaluationOptions {
  std::size_t horizon = 4;
  std::size_t batch = 1024;
  std::size_t seeds = 10;
  std::uint64_t rng_seed = 0;
  bool abs_return_acf = false;
};

struct AggregatedMetric {
  Summary discrepancy;
  std::vector<double> per_seed;
};

struct EvaluationReport {
  EvaluationOptions options;
  std::vector<MetricReport> per_seed;
  std::map<std::string, AggregatedMetric> aggregated;
};

/// Samples `batch` conditioning windows from `real` (raw units, sliding,
/// without replacement), generates `horizon` steps after each with the model
/// and compares against the real continuations. Statistics are computed in
/// raw units. Repeated for `seeds` seeds.
EvaluationReport evaluate(const SigSplineModel& model, const Sequence& real,
                          const EvaluationOptions& options);

/// The same protocol with the real continuations standing in for the model.
EvaluationReport evaluate_self(const Sequence& real, std::size_t window,
                               const EvaluationOptions& options);

/// Statistic names produced by compare_batches, in table order.
std::vector<std::string> statistic_names(bool abs_return_acf);

std::string evaluation_report_to_json(const EvaluationReport& report);

/// Aligned text table: one row per statistic, one column per labelled
/// report showing mean +- std; the lowest mean in each row is flagged '*'.
std::string render_table(const std::vector<std::pair<std::string, EvaluationReport>>& columns);

}  // namespace sigspline
