#pragma once

#include <cstdint>
#include <random>

namespace sigspline {

/// Seedable generator with a fully specified output stream.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the standard.
/// Library distributions (std::normal_distribution and friends) are
/// implementation-defined, so the conversions are done here by hand:
///
///   uniform()  = (next() >> 11) * 2^-53                 values in [0, 1)
///   normal()   = Box-Muller on u1 = 1 - uniform(), u2 = uniform():
///                r = sqrt(-2 ln u1), returns r cos(2 pi u2) then r sin(2 pi u2)
///
/// Any implementation following these rules reproduces the same draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform();

  double normal();

  /// Uniform integer in [0, n) by rejection on the top bits; n > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace sigspline
