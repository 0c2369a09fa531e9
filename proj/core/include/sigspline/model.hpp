#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sigspline/rng.hpp"
#include "sigspline/sequence.hpp"
#include "sigspline/spline_cdf.hpp"

namespace sigspline {

/// Hyperparameters that fix the shape of a model.
struct ModelShape {
  std::size_t dim = 2;     // d, data channels
  std::size_t level = 2;   // L, signature truncation
  std::size_t bins = 64;   // N, spline bins
  std::size_t window = 0;  // r, conditioning rows; 0 keeps the full history

  /// Number of signature features K = f(1 + d, L).
  std::size_t features() const;

  friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// d * N * f(1 + d, L).
std::size_t parameter_count(std::size_t dim, std::size_t level, std::size_t bins);

/// Per-channel min-max rescaling onto [0, 1].
///
/// Forward values are clamped to [kClampEps, 1 - kClampEps] so every
/// model-facing value lies strictly inside the unit cube.
struct Preprocessor {
  static constexpr double kClampEps = 1e-6;

  Eigen::RowVectorXd min;
  Eigen::RowVectorXd max;

  /// Identity map for d channels (min 0, max 1).
  static Preprocessor identity(std::size_t dim);

  /// Fits min and max per channel. Throws DataError for a constant channel.
  static Preprocessor fit(const Sequence& raw);

  Sequence forward(const Sequence& raw) const;
  Sequence inverse(const Sequence& unit) const;

  friend bool operator==(const Preprocessor& a, const Preprocessor& b);
};

/// N x K matrix U_i; row j is the linear functional u_j on signature features.
using SplineParams = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Signature spline flow: one set of spline parameters per data coordinate.
class SigSplineModel {
 public:
  /// Zero parameters (the uniform model) and identity preprocessing.
  explicit SigSplineModel(ModelShape shape);
  SigSplineModel(ModelShape shape, std::vector<SplineParams> params, Preprocessor preprocess);

  const ModelShape& shape() const { return shape_; }
  std::size_t dim() const { return shape_.dim; }

  const SplineParams& params(std::size_t coordinate) const;
  SplineParams& params(std::size_t coordinate);
  const std::vector<SplineParams>& all_params() const { return params_; }

  const Preprocessor& preprocess() const { return preprocess_; }
  void set_preprocess(Preprocessor p);

  std::size_t parameter_count() const;

  /// Rows of `history` the model conditions on (the last `window` rows).
  Sequence condition_window(const Sequence& history) const;

  friend bool operator==(const SigSplineModel& a, const SigSplineModel& b);

 private:
  ModelShape shape_;
  std::vector<SplineParams> params_;
  Preprocessor preprocess_;
};

/// Flat signature features of the augmented path for coordinate i (1-based).
/// `path` ends with the candidate next observation; its channels >= i are masked.
Eigen::VectorXd signature_features(const Sequence& path, std::size_t coordinate,
                                   std::size_t level);

/// H_i(x, U) = U_i * features(x; i).
Eigen::VectorXd feature_map(const Sequence& path, std::size_t coordinate,
                            const SplineParams& params, std::size_t level);

/// Softmax of the feature map for coordinate i given a history and the
/// already-known leading coordinates of the next observation. Entries of
/// `next_partial` beyond i-1 are ignored.
BinIncrements conditional_increments(const SigSplineModel& model, const Sequence& history,
                                     std::span<const double> next_partial,
                                     std::size_t coordinate);

/// log p(x_{t+1} | x_{1..t}) for a model-space sequence of length t + 1 >= 2.
double log_likelihood(const SigSplineModel& model, const Sequence& x);

/// One autoregressive draw by inverse transform of the uniforms `u`.
Eigen::RowVectorXd sample_step(const SigSplineModel& model, const Sequence& history,
                               std::span<const double> u);

/// `history` followed by `horizon` sampled rows; deterministic in `rng_seed`.
Sequence generate(const SigSplineModel& model, const Sequence& history, std::size_t horizon,
                  std::uint64_t rng_seed);

/// JSON persistence. Field names are listed in the README.
std::string model_to_json(const SigSplineModel& model);
SigSplineModel model_from_json(const std::string& text);
void save_model(const SigSplineModel& model, const std::string& path);
SigSplineModel load_model(const std::string& path);

}  // namespace sigspline
