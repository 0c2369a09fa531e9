#pragma once

#include <Eigen/Dense>

#include "sigspline/sequence.hpp"

namespace sigspline {

/// Prepends a zero row.
Sequence basepoint(const Sequence& x);

/// Prepends a time channel with stamps (i-1)/(n-1); a single row gets stamp 0.
Sequence time_augment(const Sequence& x);

/// Replaces the last row's channels >= coordinate (1-based) by the previous
/// row's values; coordinate 1 copies the whole previous row.
///
/// Throws std::invalid_argument for fewer than two rows or a coordinate
/// outside [1, channels].
Sequence mask(const Sequence& x, Eigen::Index coordinate);

/// The full conditioning transform for data coordinate i (1-based): time
/// augmentation, then masking of the last row's data channels >= i (the time
/// channel is kept), then a zero basepoint. The output has n+1 rows and
/// 1 + d channels, channel 0 being time.
Sequence augment(const Sequence& x, Eigen::Index coordinate);

}  // namespace sigspline
