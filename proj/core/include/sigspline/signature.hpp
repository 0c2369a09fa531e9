#pragma once

#include <cstddef>
#include <span>

#include "sigspline/sequence.hpp"
#include "sigspline/tensor_algebra.hpp"

namespace sigspline {

/// Signature of a straight line segment: the truncated tensor exponential of
/// its increment, coefficient prod_j h[w_j] / |w|! at word w.
TruncatedTensor segment_signature(std::span<const double> increment, std::size_t level);

/// Truncated signature of the piecewise-linear path through the rows of `x`.
///
/// Segments are folded left to right with Chen's identity, so the cost is
/// linear in the number of rows. A single-row sequence has the unit signature.
TruncatedTensor signature(const Sequence& x, std::size_t level);

/// Right-multiplies `acc` in place by the exponential of `increment`.
void multiply_by_segment(TruncatedTensor& acc, std::span<const double> increment);

/// Numerical evaluation of one signature coefficient, independent of the
/// exponential / Chen route above.
///
/// The path is sampled on a uniform grid of `steps` cells over [0, 1] (rows
/// sit at (i-1)/(n-1)) and the iterated integral over the simplex is built
/// one letter at a time by cumulative trapezoidal integration against dX.
/// Throws std::invalid_argument if steps < 100.
double signature_oracle(const Sequence& x, const Word& w, std::size_t steps);

}  // namespace sigspline
