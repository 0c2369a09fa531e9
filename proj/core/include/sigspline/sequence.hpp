#pragma once

#include <Eigen/Dense>

namespace sigspline {

/// An n x e array of observations: rows are time steps, columns are channels.
///
/// Construction checks n >= 1, e >= 1 and that every entry is finite.
class Sequence {
 public:
  Sequence() = default;
  explicit Sequence(Eigen::MatrixXd values);

  Eigen::Index length() const { return values_.rows(); }
  Eigen::Index channels() const { return values_.cols(); }

  double operator()(Eigen::Index t, Eigen::Index c) const { return values_(t, c); }
  auto row(Eigen::Index t) const { return values_.row(t); }

  const Eigen::MatrixXd& values() const { return values_; }

  /// Rows [first, first + count).
  Sequence slice(Eigen::Index first, Eigen::Index count) const;

  /// This sequence followed by one extra row.
  Sequence appended(const Eigen::RowVectorXd& next_row) const;

  friend bool operator==(const Sequence& a, const Sequence& b);

 private:
  Eigen::MatrixXd values_;
};

}  // namespace sigspline
