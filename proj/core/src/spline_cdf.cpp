#include "sigspline/spline_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sigspline {

BinIncrements::BinIncrements(std::vector<double> delta) : delta_(std::move(delta)) {
  if (delta_.empty()) throw std::invalid_argument("BinIncrements: need at least one bin");
  cumulative_.resize(delta_.size() + 1);
  cumulative_[0] = 0.0;
  for (std::size_t k = 0; k < delta_.size(); ++k) {
    if (!(delta_[k] > 0.0) || !std::isfinite(delta_[k])) {
      throw std::invalid_argument("BinIncrements: bin " + std::to_string(k) +
                                  " has non-positive height");
    }
    cumulative_[k + 1] = cumulative_[k] + delta_[k];
  }
  if (std::abs(cumulative_.back() - 1.0) > 1e-12) {
    throw std::invalid_argument("BinIncrements: heights do not sum to one");
  }
  // The last knot is exactly 1 so F(1) = 1 and F^{-1}(1) = 1.
  cumulative_.back() = 1.0;
}

BinIncrements BinIncrements::uniform(std::size_t bins) {
  return BinIncrements(std::vector<double>(bins, 1.0 / static_cast<double>(bins)));
}

BinIncrements softmax(std::span<const double> z) {
  if (z.empty()) throw std::invalid_argument("softmax: empty input");
  double peak = -INFINITY;
  for (double v : z) {
    if (!std::isfinite(v)) throw std::invalid_argument("softmax: non-finite input");
    peak = std::max(peak, v);
  }
  std::vector<double> out(z.size());
  double total = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] - peak);
    total += out[k];
  }
  for (double& v : out) {
    // Keep heights representable so ln(delta) stays finite.
    v = std::max(v / total, 1e-300);
  }
  return BinIncrements(std::move(out));
}

std::size_t bin_index(double x, std::size_t bins) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("bin_index: x outside [0, 1]");
  const auto k = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
  return std::min(k, bins - 1);
}

double spline_cdf(double x, const BinIncrements& delta) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::out_of_range("spline_cdf: x outside [0, 1]");
  if (x == 1.0) return 1.0;
  const std::size_t n = delta.bins();
  const std::size_t k = bin_index(x, n);
  const double left = static_cast<double>(k) / static_cast<double>(n);
  return delta.cumulative(k) + (x - left) * delta[k] * static_cast<double>(n);
}

double spline_inverse(double u, const BinIncrements& delta) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::out_of_range("spline_inverse: u outside [0, 1]");
  const std::size_t n = delta.bins();
  if (u == 0.0) return 0.0;
  // First knot value >= u; the bin ending there owns u, so ties go to the lower bin.
  std::size_t k = 0;
  {
    std::size_t lo = 1;
    std::size_t hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (delta.cumulative(mid) >= u) {
        hi = mid;
      } else {
        lo = mid + 1;
      }
    }
    k = lo - 1;
  }
  const double x = static_cast<double>(k) / static_cast<double>(n) +
                   (u - delta.cumulative(k)) / (static_cast<double>(n) * delta[k]);
  return std::clamp(x, 0.0, 1.0);
}

double spline_density(double x, const BinIncrements& delta) {
  const std::size_t n = delta.bins();
  return static_cast<double>(n) * delta[bin_index(x, n)];
}

}  // namespace sigspline
