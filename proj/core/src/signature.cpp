#include "sigspline/signature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sigspline {

namespace {

void require_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument("signature: non-finite increment");
  }
}

// dst[u * e + c] += scale * src[u] * h[c]
void outer_accumulate(std::span<const double> src, std::span<const double> h, double scale,
                      double* dst) {
  const std::size_t e = h.size();
  for (std::size_t u = 0; u < src.size(); ++u) {
    const double s = scale * src[u];
    for (std::size_t c = 0; c < e; ++c) dst[u * e + c] += s * h[c];
  }
}

}  // namespace

TruncatedTensor segment_signature(std::span<const double> increment, std::size_t level) {
  require_finite(increment);
  const std::size_t e = increment.size();
  TruncatedTensor out = TruncatedTensor::unit(e, level);
  auto c = out.coeffs();
  for (std::size_t k = 1; k <= level; ++k) {
    const std::size_t prev = level_offset(e, k - 1);
    const std::size_t cur = level_offset(e, k);
    const std::span<const double> src(c.data() + prev, cur - prev);
    outer_accumulate(src, increment, 1.0 / static_cast<double>(k), c.data() + cur);
  }
  return out;
}

void multiply_by_segment(TruncatedTensor& acc, std::span<const double> increment) {
  require_finite(increment);
  const std::size_t e = acc.alphabet_size();
  if (increment.size() != e) {
    throw std::invalid_argument("multiply_by_segment: increment has the wrong channel count");
  }
  const std::size_t depth = acc.level();
  auto c = acc.coeffs();
  std::vector<double> work;
  std::vector<double> next;
  // Level k of acc * exp(h) is acc_k + sum_{i<k} acc_i h^{k-i} / (k-i)!.
  // Horner form: t <- (t + acc_j) h / (k - j) for j = 0..k-1. Levels are
  // rewritten top-down so the lower ones are still the old values.
  for (std::size_t k = depth; k >= 1; --k) {
    work.assign(1, c[0]);
    for (std::size_t j = 0; j < k; ++j) {
      if (j > 0) {
        const auto block = acc.level_block(j);
        for (std::size_t q = 0; q < block.size(); ++q) work[q] += block[q];
      }
      next.assign(work.size() * e, 0.0);
      outer_accumulate(work, increment, 1.0 / static_cast<double>(k - j), next.data());
      work.swap(next);
    }
    double* dst = c.data() + level_offset(e, k);
    for (std::size_t q = 0; q < work.size(); ++q) dst[q] += work[q];
  }
}

TruncatedTensor signature(const Sequence& x, std::size_t level) {
  const std::size_t e = static_cast<std::size_t>(x.channels());
  TruncatedTensor acc = TruncatedTensor::unit(e, level);
  std::vector<double> increment(e);
  for (Eigen::Index t = 1; t < x.length(); ++t) {
    for (std::size_t c = 0; c < e; ++c) {
      increment[c] = x(t, static_cast<Eigen::Index>(c)) - x(t - 1, static_cast<Eigen::Index>(c));
    }
    multiply_by_segment(acc, increment);
  }
  return acc;
}

double signature_oracle(const Sequence& x, const Word& w, std::size_t steps) {
  if (steps < 100) throw std::invalid_argument("signature_oracle: needs at least 100 steps");
  const Eigen::Index n = x.length();
  for (int letter : w.letters) {
    if (letter < 1 || letter > x.channels()) {
      throw std::out_of_range("signature_oracle: letter outside the channel range");
    }
  }
  if (w.empty()) return 1.0;
  if (n == 1) return 0.0;

  // Piecewise-linear embedding with row i at time i / (n - 1), sampled on the grid.
  auto channel_on_grid = [&](int letter) {
    const Eigen::Index c = letter - 1;
    std::vector<double> path(steps + 1);
    for (std::size_t m = 0; m <= steps; ++m) {
      const double s = static_cast<double>(m) / static_cast<double>(steps) *
                       static_cast<double>(n - 1);
      Eigen::Index seg = static_cast<Eigen::Index>(std::floor(s));
      if (seg > n - 2) seg = n - 2;
      const double frac = s - static_cast<double>(seg);
      path[m] = x(seg, c) + frac * (x(seg + 1, c) - x(seg, c));
    }
    return path;
  };

  std::vector<double> inner(steps + 1, 1.0);
  std::vector<double> outer(steps + 1);
  for (int letter : w.letters) {
    const std::vector<double> path = channel_on_grid(letter);
    outer[0] = 0.0;
    for (std::size_t m = 0; m < steps; ++m) {
      outer[m + 1] = outer[m] + 0.5 * (inner[m] + inner[m + 1]) * (path[m + 1] - path[m]);
    }
    inner.swap(outer);
  }
  return inner[steps];
}

}  // namespace sigspline
