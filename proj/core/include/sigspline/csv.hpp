#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sigspline/sequence.hpp"

namespace sigspline {

/// Writes `t,ch1,...,chd` then one row per step, doubles at 17 significant digits.
void write_series_csv(std::ostream& out, const Sequence& x);
void write_series_csv(const std::string& path, const Sequence& x);

/// Reads the format above. The first column is the step index and is discarded.
Sequence read_series_csv(std::istream& in);
Sequence read_series_csv(const std::string& path);

/// Batch of sequences as `sequence,t,ch1,...,chd`.
void write_batch_csv(const std::string& path, const std::vector<Sequence>& batch);
std::vector<Sequence> read_batch_csv(const std::string& path);

}  // namespace sigspline
