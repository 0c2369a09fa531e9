#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sigspline {

/// A word over the alphabet {1, ..., e}. The empty word is allowed.
struct Word {
  std::vector<int> letters;

  std::size_t size() const { return letters.size(); }
  bool empty() const { return letters.empty(); }
  friend bool operator==(const Word&, const Word&) = default;
};

/// Number of words of length <= level over an alphabet of the given size,
/// sum_{k=0}^{level} e^k. Throws std::overflow_error past 64 bits.
std::size_t feature_count(std::size_t alphabet_size, std::size_t level);

/// Flat index of the first word of length k (that is, f(e, k-1); 0 for k = 0).
std::size_t level_offset(std::size_t alphabet_size, std::size_t k);

/// Position of `w` in the flat (level, then lexicographic) ordering.
/// Throws std::out_of_range for a bad letter or a word longer than `level`.
std::size_t word_to_index(const Word& w, std::size_t alphabet_size, std::size_t level);

/// Inverse of word_to_index.
Word index_to_word(std::size_t index, std::size_t alphabet_size, std::size_t level);

/// An element of the truncated tensor algebra T^(L)(R^e) in dense flat storage.
class TruncatedTensor {
 public:
  /// The zero tensor.
  TruncatedTensor(std::size_t alphabet_size, std::size_t level);
  TruncatedTensor(std::size_t alphabet_size, std::size_t level, std::vector<double> coeffs);

  /// The multiplicative unit: 1 at the empty word, 0 elsewhere.
  static TruncatedTensor unit(std::size_t alphabet_size, std::size_t level);

  std::size_t alphabet_size() const { return alphabet_size_; }
  std::size_t level() const { return level_; }
  std::size_t size() const { return coeffs_.size(); }

  double operator[](std::size_t i) const { return coeffs_[i]; }
  double& operator[](std::size_t i) { return coeffs_[i]; }
  double at(const Word& w) const { return coeffs_[word_to_index(w, alphabet_size_, level_)]; }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }

  /// Coefficients of level k as a contiguous block of e^k entries.
  std::span<const double> level_block(std::size_t k) const;

 private:
  std::size_t alphabet_size_;
  std::size_t level_;
  std::vector<double> coeffs_;
};

/// Truncated tensor product: c[w] = sum over splittings w = uv of a[u] b[v].
/// Throws std::invalid_argument if alphabet or level differ.
TruncatedTensor tensor_product(const TruncatedTensor& a, const TruncatedTensor& b);

/// Flat dot product <w, t>. Throws std::invalid_argument on length mismatch.
double inner_product(std::span<const double> w, const TruncatedTensor& t);

}  // namespace sigspline
