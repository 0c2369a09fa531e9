#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "sigspline/sequence.hpp"

namespace sigspline {

/// y_{t+1} = W1 y_t + W2 y_{t-1} + Sigma^{1/2} z_{t+1}, z standard normal.
struct VarSpec {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;
  Eigen::MatrixXd sigma;
  std::size_t n_lags = 4096;
  std::size_t burn_in = 100;
  std::uint64_t rng_seed = 0;

  /// The two-channel benchmark: W1 = diag(0.1, 0.2), W2 = diag(0.6, 0.3),
  /// Sigma = diag(0.5, 0.5), 4096 lags.
  static VarSpec benchmark(std::uint64_t seed = 0);
};

/// Spectral radius of the companion matrix [[W1, W2], [I, 0]].
double companion_spectral_radius(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2);

/// Starts from y_0 = y_1 = 0, discards `burn_in` steps, returns n_lags rows.
/// Sigma^{1/2} is the symmetric square root; a non-symmetric or indefinite
/// Sigma raises NumericalError. A non-stationary spec is simulated as given
/// (see companion_spectral_radius).
Sequence simulate_var2(const VarSpec& spec);

enum class ObservationMap { identity, fixed_nonlinear };

ObservationMap observation_map_from_string(const std::string& s);
const char* to_string(ObservationMap m);

/// Number of output channels of the fixed nonlinear map.
inline constexpr Eigen::Index kObservedChannels = 8;

/// identity, or the fixed map R^2 -> R^8
///   x_k = tanh(a_k . y + b_k) + 0.1 a_k . y,
///   a_k = (cos(k pi / 8), sin(k pi / 8)),  b_k = 0.1 k - 0.35,  k = 0..7.
/// Every channel is strictly increasing in its projection, and channels 0
/// and 4 recover y_1 and y_2, so the map is injective.
Sequence observe(const Sequence& latent, ObservationMap map);

struct WhitenState {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd transform;  // x_white = (x - mean) * transform
  Eigen::MatrixXd inverse;    // x = x_white * inverse + mean

  Sequence apply(const Sequence& x) const;
  Sequence invert(const Sequence& white) const;
};

struct Whitened {
  Sequence data;
  WhitenState state;
};

/// PCA whitening with the (n-1)-normalised sample covariance. Throws
/// NumericalError naming the eigenvector of a (near-)zero eigenvalue.
Whitened pca_whiten(const Sequence& x);

}  // namespace sigspline
