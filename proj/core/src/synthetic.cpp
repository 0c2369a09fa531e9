#include "sigspline/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "sigspline/errors.hpp"
#include "sigspline/rng.hpp"

namespace sigspline {

VarSpec VarSpec::benchmark(std::uint64_t seed) {
  VarSpec s;
  s.w1 = Eigen::Vector2d(0.1, 0.2).asDiagonal();
  s.w2 = Eigen::Vector2d(0.6, 0.3).asDiagonal();
  s.sigma = Eigen::Vector2d(0.5, 0.5).asDiagonal();
  s.rng_seed = seed;
  return s;
}

double companion_spectral_radius(const Eigen::MatrixXd& w1, const Eigen::MatrixXd& w2) {
  const Eigen::Index d = w1.rows();
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(2 * d, 2 * d);
  companion.topLeftCorner(d, d) = w1;
  companion.topRightCorner(d, d) = w2;
  companion.bottomLeftCorner(d, d) = Eigen::MatrixXd::Identity(d, d);
  return companion.eigenvalues().cwiseAbs().maxCoeff();
}

namespace {

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& sigma) {
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw NumericalError("simulate_var2: Sigma is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  if (eig.info() != Eigen::Success) throw NumericalError("simulate_var2: Sigma factorisation failed");
  const Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -1e-12 * scale) {
    throw NumericalError("simulate_var2: Sigma is not positive semidefinite (eigenvalue " +
                         std::to_string(values.minCoeff()) + ")");
  }
  const Eigen::VectorXd root = values.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Sequence simulate_var2(const VarSpec& spec) {
  const Eigen::Index d = spec.w1.rows();
  if (d < 1 || spec.w1.cols() != d || spec.w2.rows() != d || spec.w2.cols() != d ||
      spec.sigma.rows() != d || spec.sigma.cols() != d) {
    throw DataError("simulate_var2: W1, W2 and Sigma must all be d x d");
  }
  if (spec.n_lags < 1) throw DataError("simulate_var2: n_lags must be >= 1");
  const Eigen::MatrixXd root = symmetric_sqrt(spec.sigma);

  Rng rng(spec.rng_seed);
  Eigen::VectorXd prev = Eigen::VectorXd::Zero(d);  // y_{t-1}
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(d);   // y_t
  Eigen::VectorXd z(d);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.n_lags), d);
  const std::size_t total = spec.burn_in + spec.n_lags;
  for (std::size_t t = 0; t < total; ++t) {
    for (Eigen::Index c = 0; c < d; ++c) z[c] = rng.normal();
    Eigen::VectorXd next = spec.w1 * cur + spec.w2 * prev + root * z;
    prev = cur;
    cur = std::move(next);
    if (t >= spec.burn_in) out.row(static_cast<Eigen::Index>(t - spec.burn_in)) = cur.transpose();
  }
  return Sequence(std::move(out));
}

ObservationMap observation_map_from_string(const std::string& s) {
  if (s == "identity") return ObservationMap::identity;
  if (s == "fixed_nonlinear") return ObservationMap::fixed_nonlinear;
  throw std::invalid_argument("unknown observation map '" + s +
                              "' (expected identity, fixed_nonlinear)");
}

const char* to_string(ObservationMap m) {
  return m == ObservationMap::identity ? "identity" : "fixed_nonlinear";
}

Sequence observe(const Sequence& latent, ObservationMap map) {
  if (map == ObservationMap::identity) return latent;
  if (latent.channels() != 2) {
    throw DataError("observe: fixed_nonlinear expects 2 latent channels, got " +
                    std::to_string(latent.channels()));
  }
  Eigen::MatrixXd out(latent.length(), kObservedChannels);
  for (Eigen::Index k = 0; k < kObservedChannels; ++k) {
    const double angle = static_cast<double>(k) * std::numbers::pi / 8.0;
    const double a1 = std::cos(angle);
    const double a2 = std::sin(angle);
    const double bias = 0.1 * static_cast<double>(k) - 0.35;
    for (Eigen::Index t = 0; t < latent.length(); ++t) {
      const double proj = a1 * latent(t, 0) + a2 * latent(t, 1);
      out(t, k) = std::tanh(proj + bias) + 0.1 * proj;
    }
  }
  return Sequence(std::move(out));
}

Sequence WhitenState::apply(const Sequence& x) const {
  if (x.channels() != mean.size()) throw DataError("whiten: channel count mismatch");
  return Sequence((x.values().rowwise() - mean) * transform);
}

Sequence WhitenState::invert(const Sequence& white) const {
  if (white.channels() != mean.size()) throw DataError("unwhiten: channel count mismatch");
  return Sequence((white.values() * inverse).rowwise() + mean);
}

Whitened pca_whiten(const Sequence& x) {
  if (x.length() < 2) throw DataError("pca_whiten: need at least two rows");
  WhitenState st;
  st.mean = x.values().colwise().mean();
  const Eigen::MatrixXd centered = x.values().rowwise() - st.mean;
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(x.length() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca_whiten: eigensolver failed");
  const Eigen::VectorXd& values = eig.eigenvalues();
  const double top = values.maxCoeff();
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (!(values[k] > 1e-12 * std::max(top, 1e-300))) {
      std::ostringstream msg;
      msg << "pca_whiten: covariance is rank deficient along direction ["
          << eig.eigenvectors().col(k).transpose() << "] (eigenvalue " << values[k] << ")";
      throw NumericalError(msg.str());
    }
  }
  const Eigen::VectorXd root = values.cwiseSqrt();
  st.transform = eig.eigenvectors() * root.cwiseInverse().asDiagonal();
  st.inverse = root.asDiagonal() * eig.eigenvectors().transpose();
  Sequence white(centered * st.transform);
  return Whitened{std::move(white), std::move(st)};
}

}  // namespace sigspline
