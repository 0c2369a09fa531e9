#include "sigspline/augmentations.hpp"

#include <stdexcept>
#include <string>

namespace sigspline {

Sequence basepoint(const Sequence& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.length() + 1, x.channels());
  out.bottomRows(x.length()) = x.values();
  return Sequence(std::move(out));
}

Sequence time_augment(const Sequence& x) {
  const Eigen::Index n = x.length();
  Eigen::MatrixXd out(n, x.channels() + 1);
  for (Eigen::Index t = 0; t < n; ++t) {
    out(t, 0) = n == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(n - 1);
  }
  out.rightCols(x.channels()) = x.values();
  return Sequence(std::move(out));
}

namespace {

// Masks channels [first_channel, end) of the last row, zero-based.
Sequence mask_from(const Sequence& x, Eigen::Index first_channel) {
  const Eigen::Index n = x.length();
  Eigen::MatrixXd out = x.values();
  const Eigen::Index count = x.channels() - first_channel;
  out.row(n - 1).tail(count) = out.row(n - 2).tail(count);
  return Sequence(std::move(out));
}

void check_mask_args(const Sequence& x, Eigen::Index coordinate, Eigen::Index data_channels) {
  if (x.length() < 2) {
    throw std::invalid_argument("mask: needs at least two rows, got " +
                                std::to_string(x.length()));
  }
  if (coordinate < 1 || coordinate > data_channels) {
    throw std::invalid_argument("mask: coordinate " + std::to_string(coordinate) +
                                " outside [1, " + std::to_string(data_channels) + "]");
  }
}

}  // namespace

Sequence mask(const Sequence& x, Eigen::Index coordinate) {
  check_mask_args(x, coordinate, x.channels());
  return mask_from(x, coordinate - 1);
}

Sequence augment(const Sequence& x, Eigen::Index coordinate) {
  check_mask_args(x, coordinate, x.channels());
  // After time augmentation data coordinate i sits in column i; column 0 is time.
  return basepoint(mask_from(time_augment(x), coordinate));
}

}  // namespace sigspline
