#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigspline/model.hpp"
#include "sigspline/sequence.hpp"

namespace sigspline {

enum class RegKind { none, l1, l2 };
enum class OptimizerKind { gradient_descent, newton };

struct Regularization {
  RegKind kind = RegKind::none;
  double lambda = 0.0;
};

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t max_iters = 5000;
  std::size_t patience = 32;
  Regularization reg;
  OptimizerKind optimizer = OptimizerKind::gradient_descent;
  double train_fraction = 0.8;
  std::uint64_t rng_seed = 0;
  // Stop once the regularised gradient norm drops below this.
  double grad_tol = 1e-10;

  /// Throws std::invalid_argument on out-of-range fields.
  void validate() const;
};

/// Precomputed softmax-regression problem for one coordinate: one row of
/// signature features per sample and the zero-based bin of its target value.
struct Design {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> features;  // M x K
  std::vector<int> targets;                                                         // M
  std::size_t bins = 0;

  std::size_t samples() const { return targets.size(); }
};

/// Features and targets for coordinate i (1-based). Each dataset entry is a
/// model-space sequence whose last row is the observation being explained.
Design build_design(std::span<const Sequence> dataset, std::size_t coordinate,
                    const ModelShape& shape);

/// Restriction of a design to the given sample rows.
Design subset(const Design& design, std::span<const std::size_t> rows);

/// Per-coordinate negative mean log-softmax, -(1/M) sum_m ln Delta_{bin(m)}.
double coordinate_loss(const SplineParams& params, const Design& design);

/// (1/M) sum_m (p_m - c_m) y_m^T, the same shape as `params`.
SplineParams coordinate_gradient(const SplineParams& params, const Design& design);

/// (1/M) sum_m (D(p_m) - p_m p_m^T) kron y_m y_m^T over row-major flattened
/// params. Throws std::invalid_argument when N*K exceeds kMaxHessianSize.
Eigen::MatrixXd coordinate_hessian(const SplineParams& params, const Design& design);

inline constexpr std::size_t kMaxHessianSize = 10000;

double penalty(const SplineParams& params, const Regularization& reg);
/// Gradient (L2) or subgradient with sign(0) = 0 (L1) of the penalty.
SplineParams penalty_gradient(const SplineParams& params, const Regularization& reg);

/// Sum over coordinates of coordinate_loss: J(theta).
double loss(const SigSplineModel& model, std::span<const Sequence> dataset);
std::vector<SplineParams> gradient(const SigSplineModel& model, std::span<const Sequence> dataset);
Eigen::MatrixXd hessian(const SigSplineModel& model, std::span<const Sequence> dataset,
                        std::size_t coordinate);
/// J(theta) + lambda * (||theta||_1 or ||theta||_2^2).
double regularized_loss(const SigSplineModel& model, std::span<const Sequence> dataset,
                        const Regularization& reg);

/// All windows of `window + 1` consecutive rows, in order.
std::vector<Sequence> sliding_windows(const Sequence& series, std::size_t window);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first round(fraction * M) indices train.
/// Throws DataError if either side would be empty.
SplitIndices train_test_split(std::size_t samples, double train_fraction, std::uint64_t seed);

struct CoordinateTrace {
  std::vector<double> train_loss;  // regularised objective per iteration
  std::vector<double> test_loss;   // unregularised test NLL per iteration
  std::size_t stopping_iteration = 0;
  std::size_t best_iteration = 0;
  std::size_t step_halvings = 0;
  double final_learning_rate = 0.0;
};

struct CoordinateFit {
  SplineParams params;
  CoordinateTrace trace;
};

/// Minimises one coordinate's regularised objective on `train`, early
/// stopping on `test`. Returns the best-test parameters.
/// Throws NumericalError if the loss stays non-finite after 5 step halvings.
CoordinateFit fit_coordinate(const Design& train, const Design& test, const TrainConfig& config,
                             SplineParams init);

struct FitReport {
  ModelShape shape;
  TrainConfig config;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  std::vector<CoordinateTrace> coordinates;
  double train_loss = 0.0;  // J at the returned parameters
  double test_loss = 0.0;
  double wall_clock_seconds = 0.0;
};

struct FitResult {
  SigSplineModel model;
  FitReport report;
};

/// Fits every coordinate independently from zero parameters. The returned
/// model carries identity preprocessing.
FitResult fit(std::span<const Sequence> dataset, const ModelShape& shape,
              const TrainConfig& config);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for one value
  double min = 0.0;
  double max = 0.0;
};

Summary summarize(std::span<const double> values);

struct MultiSeedResult {
  std::vector<FitResult> runs;
  Summary train_loss;
  Summary test_loss;
  std::size_t best_run = 0;  // lowest test loss
};

/// Runs `fit` with seeds config.rng_seed, config.rng_seed + 1, ...
MultiSeedResult multi_seed_fit(std::span<const Sequence> dataset, const ModelShape& shape,
                               const TrainConfig& config, std::size_t n_seeds = 10);

/// JSON text (wall-clock time is left out so reports are reproducible).
std::string fit_report_to_json(const FitReport& report);
std::string multi_seed_report_to_json(const MultiSeedResult& result);

const char* to_string(RegKind kind);
const char* to_string(OptimizerKind kind);
RegKind reg_kind_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

}  // namespace sigspline
