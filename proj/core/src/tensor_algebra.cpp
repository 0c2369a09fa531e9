#include "sigspline/tensor_algebra.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace sigspline {

namespace {

std::size_t checked_mul(std::size_t a, std::size_t b) {
  std::size_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw std::overflow_error("feature_count: word count exceeds 64-bit range");
  }
  return out;
}

std::size_t checked_add(std::size_t a, std::size_t b) {
  std::size_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw std::overflow_error("feature_count: word count exceeds 64-bit range");
  }
  return out;
}

std::size_t power(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t i = 0; i < exp; ++i) out = checked_mul(out, base);
  return out;
}

}  // namespace

std::size_t feature_count(std::size_t alphabet_size, std::size_t level) {
  if (alphabet_size < 1) throw std::invalid_argument("feature_count: alphabet size must be >= 1");
  std::size_t total = 0;
  std::size_t term = 1;
  for (std::size_t k = 0; k <= level; ++k) {
    total = checked_add(total, term);
    if (k < level) term = checked_mul(term, alphabet_size);
  }
  return total;
}

std::size_t level_offset(std::size_t alphabet_size, std::size_t k) {
  return k == 0 ? 0 : feature_count(alphabet_size, k - 1);
}

std::size_t word_to_index(const Word& w, std::size_t alphabet_size, std::size_t level) {
  if (w.size() > level) {
    throw std::out_of_range("word_to_index: word of length " + std::to_string(w.size()) +
                            " exceeds truncation level " + std::to_string(level));
  }
  std::size_t within = 0;
  for (int letter : w.letters) {
    if (letter < 1 || static_cast<std::size_t>(letter) > alphabet_size) {
      throw std::out_of_range("word_to_index: letter " + std::to_string(letter) +
                              " outside [1, " + std::to_string(alphabet_size) + "]");
    }
    within = within * alphabet_size + static_cast<std::size_t>(letter - 1);
  }
  return level_offset(alphabet_size, w.size()) + within;
}

Word index_to_word(std::size_t index, std::size_t alphabet_size, std::size_t level) {
  if (index >= feature_count(alphabet_size, level)) {
    throw std::out_of_range("index_to_word: index outside the truncated word set");
  }
  std::size_t k = 0;
  while (index >= level_offset(alphabet_size, k + 1)) ++k;
  std::size_t within = index - level_offset(alphabet_size, k);
  Word w;
  w.letters.assign(k, 0);
  for (std::size_t j = k; j-- > 0;) {
    w.letters[j] = static_cast<int>(within % alphabet_size) + 1;
    within /= alphabet_size;
  }
  return w;
}

TruncatedTensor::TruncatedTensor(std::size_t alphabet_size, std::size_t level)
    : alphabet_size_(alphabet_size),
      level_(level),
      coeffs_(feature_count(alphabet_size, level), 0.0) {}

TruncatedTensor::TruncatedTensor(std::size_t alphabet_size, std::size_t level,
                                 std::vector<double> coeffs)
    : alphabet_size_(alphabet_size), level_(level), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != feature_count(alphabet_size, level)) {
    throw std::invalid_argument("TruncatedTensor: coefficient count does not match f(e, L)");
  }
}

TruncatedTensor TruncatedTensor::unit(std::size_t alphabet_size, std::size_t level) {
  TruncatedTensor t(alphabet_size, level);
  t.coeffs_[0] = 1.0;
  return t;
}

std::span<const double> TruncatedTensor::level_block(std::size_t k) const {
  if (k > level_) throw std::out_of_range("level_block: level above truncation");
  const std::size_t offset = level_offset(alphabet_size_, k);
  return std::span<const double>(coeffs_).subspan(offset, power(alphabet_size_, k));
}

TruncatedTensor tensor_product(const TruncatedTensor& a, const TruncatedTensor& b) {
  if (a.alphabet_size() != b.alphabet_size() || a.level() != b.level()) {
    throw std::invalid_argument("tensor_product: operands live in different tensor algebras");
  }
  const std::size_t e = a.alphabet_size();
  const std::size_t depth = a.level();
  TruncatedTensor c(e, depth);
  auto out = c.coeffs();
  for (std::size_t k = 0; k <= depth; ++k) {
    const std::size_t out_offset = level_offset(e, k);
    // Word u.v with |u| = i, |v| = k - i has level-k index idx(u) * e^{k-i} + idx(v).
    for (std::size_t i = 0; i <= k; ++i) {
      const auto left = a.level_block(i);
      const auto right = b.level_block(k - i);
      const std::size_t stride = right.size();
      for (std::size_t u = 0; u < left.size(); ++u) {
        const double au = left[u];
        if (au == 0.0) continue;
        double* dst = out.data() + out_offset + u * stride;
        for (std::size_t v = 0; v < stride; ++v) dst[v] += au * right[v];
      }
    }
  }
  return c;
}

double inner_product(std::span<const double> w, const TruncatedTensor& t) {
  if (w.size() != t.size()) {
    throw std::invalid_argument("inner_product: functional has " + std::to_string(w.size()) +
                                " entries, tensor has " + std::to_string(t.size()));
  }
  double acc = 0.0;
  const auto c = t.coeffs();
  for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * c[i];
  return acc;
}

}  // namespace sigspline
