#include "sigspline/sequence.hpp"

#include <stdexcept>

namespace sigspline {

Sequence::Sequence(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw std::invalid_argument("Sequence: needs at least one row and one channel");
  }
  if (!values_.allFinite()) {
    throw std::invalid_argument("Sequence: entries must be finite");
  }
}

Sequence Sequence::slice(Eigen::Index first, Eigen::Index count) const {
  if (first < 0 || count < 1 || first + count > length()) {
    throw std::out_of_range("Sequence::slice: range outside sequence");
  }
  return Sequence(values_.middleRows(first, count));
}

Sequence Sequence::appended(const Eigen::RowVectorXd& next_row) const {
  if (next_row.size() != channels()) {
    throw std::invalid_argument("Sequence::appended: channel count mismatch");
  }
  Eigen::MatrixXd out(length() + 1, channels());
  out.topRows(length()) = values_;
  out.row(length()) = next_row;
  return Sequence(std::move(out));
}

bool operator==(const Sequence& a, const Sequence& b) {
  return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
         a.values_ == b.values_;
}

}  // namespace sigspline
