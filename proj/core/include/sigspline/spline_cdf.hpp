#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sigspline {

/// Bin heights of a linear spline CDF on the uniform partition k/N.
/// Entries are positive and sum to one.
class BinIncrements {
 public:
  /// Validates positivity and normalisation (tolerance 1e-12).
  explicit BinIncrements(std::vector<double> delta);

  static BinIncrements uniform(std::size_t bins);

  std::size_t bins() const { return delta_.size(); }
  double operator[](std::size_t k) const { return delta_[k]; }
  std::span<const double> values() const { return delta_; }

  /// Sum of the first k heights, i.e. the CDF at k/N.
  double cumulative(std::size_t k) const { return cumulative_[k]; }

 private:
  std::vector<double> delta_;
  std::vector<double> cumulative_;  // N + 1 entries, cumulative_[N] == 1
};

/// Max-subtracted softmax. Throws std::invalid_argument on empty or
/// non-finite input.
BinIncrements softmax(std::span<const double> z);

/// Zero-based bin of x on [0, 1]: [k/N, (k+1)/N) with 1 assigned to the last bin.
std::size_t bin_index(double x, std::size_t bins);

/// One-based bin indicator C(x) in [1, N].
inline std::size_t bin_indicator(double x, std::size_t bins) { return bin_index(x, bins) + 1; }

/// Piecewise-linear CDF. Throws std::out_of_range outside [0, 1].
double spline_cdf(double x, const BinIncrements& delta);

/// Exact inverse of spline_cdf. A u on a knot value resolves to the lower
/// bin's right endpoint. Throws std::out_of_range outside [0, 1].
double spline_inverse(double u, const BinIncrements& delta);

/// Piecewise-constant density N * delta_k on bin k.
double spline_density(double x, const BinIncrements& delta);

}  // namespace sigspline
