#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hybridsim/bits.hpp"

namespace hybridsim {

namespace detail {

// Multiplies the Pauli words (x1, z1) in place by (x2, z2) and returns the
// exponent k (mod 4) of the scalar i^k produced by the product, for Paulis in
// Hermitian form (Y = iXZ). Counters are bit-sliced: every bit lane keeps its own
// mod-4 tally, summed by popcount at the end.
inline unsigned mul_words_log_i(std::span<word_t> x1, std::span<word_t> z1,
                                std::span<const word_t> x2, std::span<const word_t> z2) {
  word_t cnt1 = 0;
  word_t cnt2 = 0;
  unsigned total = 0;
  for (std::size_t w = 0; w < x1.size(); ++w) {
    const word_t old_x1 = x1[w];
    const word_t old_z1 = z1[w];
    x1[w] ^= x2[w];
    z1[w] ^= z2[w];
    const word_t x1z2 = old_x1 & z2[w];
    const word_t anti = (x2[w] & old_z1) ^ x1z2;
    cnt2 ^= (cnt1 ^ x1[w] ^ z1[w] ^ x1z2) & anti;
    cnt1 ^= anti;
  }
  total += static_cast<unsigned>(std::popcount(cnt1));
  total += 2u * static_cast<unsigned>(std::popcount(cnt2));
  return total & 3u;
}

// Symplectic inner product of (x1|z1) and (x2|z2) over GF(2).
inline bool anticommute_words(std::span<const word_t> x1, std::span<const word_t> z1,
                              std::span<const word_t> x2, std::span<const word_t> z2) {
  word_t acc = 0;
  for (std::size_t w = 0; w < x1.size(); ++w) acc ^= (x1[w] & z2[w]) ^ (z1[w] & x2[w]);
  return std::popcount(acc) & 1;
}

}  // namespace detail

/// Hermitian Pauli operator on n qubits with a real sign: (-1)^sign * P(x, z).
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::size_t n) : n_(n), x_(words_for(n), 0), z_(words_for(n), 0) {}

  /// Parses strings such as "+XIZY", "-ZZ", or "XX" (sign defaults to +).
  static PauliString parse(std::string_view text) {
    bool neg = false;
    if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
      neg = text.front() == '-';
      text.remove_prefix(1);
    }
    PauliString p(text.size());
    p.sign_ = neg;
    for (std::size_t k = 0; k < text.size(); ++k) {
      switch (text[k]) {
        case 'I': case '_': break;
        case 'X': p.set(k, true, false); break;
        case 'Z': p.set(k, false, true); break;
        case 'Y': p.set(k, true, true); break;
        default: throw std::invalid_argument("bad Pauli character in '" + std::string(text) + "'");
      }
    }
    return p;
  }

  static PauliString single(std::size_t n, std::size_t site, char which, bool negative = false) {
    PauliString p(n);
    p.set(site, which == 'X' || which == 'Y', which == 'Z' || which == 'Y');
    p.sign_ = negative;
    return p;
  }

  std::size_t size() const { return n_; }
  bool sign() const { return sign_; }
  void set_sign(bool s) { sign_ = s; }

  bool x(std::size_t k) const { return get_bit(x_, k); }
  bool z(std::size_t k) const { return get_bit(z_, k); }
  void set(std::size_t k, bool xb, bool zb) {
    set_bit(x_, k, xb);
    set_bit(z_, k, zb);
  }

  std::span<word_t> xs() { return x_; }
  std::span<word_t> zs() { return z_; }
  std::span<const word_t> xs() const { return x_; }
  std::span<const word_t> zs() const { return z_; }

  bool is_identity() const {
    for (std::size_t w = 0; w < x_.size(); ++w)
      if (x_[w] | z_[w]) return false;
    return true;
  }

  std::size_t weight() const {
    std::size_t c = 0;
    for (std::size_t w = 0; w < x_.size(); ++w) c += std::popcount(x_[w] | z_[w]);
    return c;
  }

  bool commutes_with(const PauliString& o) const {
    return !detail::anticommute_words(x_, z_, o.x_, o.z_);
  }

  /// this <- this * rhs. Both operands must commute (the product stays Hermitian).
  PauliString& operator*=(const PauliString& rhs) {
    const unsigned k = detail::mul_words_log_i(x_, z_, rhs.x_, rhs.z_);
    if (k & 1u) throw std::logic_error("product of anticommuting Paulis is not Hermitian");
    sign_ ^= rhs.sign_ ^ ((k & 2u) != 0);
    return *this;
  }

  std::string str() const {
    std::string s(1, sign_ ? '-' : '+');
    for (std::size_t k = 0; k < n_; ++k) s += "IXZY"[x(k) + 2 * z(k)];
    return s;
  }

  friend bool operator==(const PauliString&, const PauliString&) = default;
  friend std::ostream& operator<<(std::ostream& os, const PauliString& p) { return os << p.str(); }

 private:
  std::size_t n_ = 0;
  std::vector<word_t> x_;
  std::vector<word_t> z_;
  bool sign_ = false;
};

}  // namespace hybridsim
