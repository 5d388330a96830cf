#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace hybridsim {

using word_t = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t n_bits) {
  return (n_bits + kWordBits - 1) / kWordBits;
}

inline bool get_bit(std::span<const word_t> words, std::size_t k) {
  return (words[k / kWordBits] >> (k % kWordBits)) & 1u;
}

inline void set_bit(std::span<word_t> words, std::size_t k, bool v) {
  const word_t mask = word_t{1} << (k % kWordBits);
  word_t& w = words[k / kWordBits];
  w = v ? (w | mask) : (w & ~mask);
}

inline void flip_bit(std::span<word_t> words, std::size_t k) {
  words[k / kWordBits] ^= word_t{1} << (k % kWordBits);
}

inline void xor_into(std::span<word_t> dst, std::span<const word_t> src) {
  for (std::size_t w = 0; w < dst.size(); ++w) dst[w] ^= src[w];
}

/// Dense row-major matrix over GF(2), rows packed into 64-bit words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * stride_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t stride() const { return stride_; }

  bool get(std::size_t r, std::size_t c) const { return get_bit(row(r), c); }
  void set(std::size_t r, std::size_t c, bool v) { set_bit(row(r), c, v); }

  std::span<word_t> row(std::size_t r) { return {data_.data() + r * stride_, stride_}; }
  std::span<const word_t> row(std::size_t r) const {
    return {data_.data() + r * stride_, stride_};
  }

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  static BitMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    BitMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) throw std::invalid_argument("ragged bit matrix");
      for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rows[r][c] != 0);
    }
    return m;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<word_t> data_;
};

/// Rank over GF(2) by forward elimination, in place. Pivots are searched only in
/// the first `pivot_words` words of each row (all of them by default); row
/// operations still act on whole rows, so trailing words can carry bookkeeping
/// such as a record of row combinations. On return rows [0, rank) hold pivots and
/// rows [rank, rows) are zero within the pivot words.
inline std::size_t rank_gf2_inplace(BitMatrix& m, std::size_t pivot_words = static_cast<std::size_t>(-1)) {
  std::size_t rank = 0;
  const std::size_t n_rows = m.rows();
  const std::size_t limit = std::min(pivot_words, m.stride());
  for (std::size_t w = 0; w < limit && rank < n_rows; ++w) {
    for (;;) {
      // pick the row (at or below `rank`) whose word w has the lowest set bit
      std::size_t pivot = n_rows;
      int best = static_cast<int>(kWordBits);
      for (std::size_t r = rank; r < n_rows; ++r) {
        const word_t v = m.row(r)[w];
        if (v != 0) {
          const int tz = std::countr_zero(v);
          if (tz < best) {
            best = tz;
            pivot = r;
            if (tz == 0) break;
          }
        }
      }
      if (pivot == n_rows) break;
      const word_t bit = word_t{1} << best;
      if (pivot != rank) std::swap_ranges(m.row(pivot).begin(), m.row(pivot).end(), m.row(rank).begin());
      auto prow = m.row(rank);
      for (std::size_t r = rank + 1; r < n_rows; ++r) {
        auto rr = m.row(r);
        if (rr[w] & bit) xor_into(rr.subspan(w), prow.subspan(w));
      }
      ++rank;
      if (rank == n_rows) break;
      bool more = false;
      for (std::size_t r = rank; r < n_rows && !more; ++r) more = m.row(r)[w] != 0;
      if (!more) break;
    }
  }
  return rank;
}

inline std::size_t rank_gf2(BitMatrix m) { return rank_gf2_inplace(m); }

}  // namespace hybridsim
