#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridsim/pauli.hpp"

namespace hybridsim {

/// Two-qubit Pauli in Hermitian form, packed as bits (x0, z0, x1, z1) = (b0, b1, b2, b3).
struct LocalPauli {
  std::uint8_t bits = 0;
  bool sign = false;

  friend bool operator==(const LocalPauli&, const LocalPauli&) = default;
};

namespace detail {

// Exponent of i produced by P(x1,z1) * P(x2,z2) on a single qubit.
constexpr int single_qubit_log_i(int x1, int z1, int x2, int z2) {
  if (!x1 && !z1) return 0;
  if (x1 && z1) return z2 - x2;
  if (x1) return z2 * (2 * x2 - 1);
  return x2 * (1 - 2 * z2);
}

// (bits, log_i) <- (bits, log_i) * (rhs_bits, rhs_log_i) on two qubits.
constexpr void mul_local(std::uint8_t& bits, int& log_i, std::uint8_t rhs_bits, int rhs_log_i) {
  for (int q = 0; q < 2; ++q) {
    const int x1 = (bits >> (2 * q)) & 1, z1 = (bits >> (2 * q + 1)) & 1;
    const int x2 = (rhs_bits >> (2 * q)) & 1, z2 = (rhs_bits >> (2 * q + 1)) & 1;
    log_i += single_qubit_log_i(x1, z1, x2, z2);
  }
  bits ^= rhs_bits;
  log_i += rhs_log_i;
  log_i = ((log_i % 4) + 4) % 4;
}

constexpr int symplectic_form4(std::uint8_t a, std::uint8_t b) {
  int t = 0;
  for (int q = 0; q < 2; ++q) {
    t += ((a >> (2 * q)) & 1) * ((b >> (2 * q + 1)) & 1);
    t += ((b >> (2 * q)) & 1) * ((a >> (2 * q + 1)) & 1);
  }
  return t & 1;
}

// Symplectic matrices over GF(2) in the interleaved (x0, z0, x1, z1, ...) basis,
// enumerated by index with the transvection construction of Koenig and Smolin.
// Vectors are bit masks; rows[j] is the image of basis vector e_j.
using SympVec = std::uint32_t;

inline int symp_inner(SympVec v, SympVec w, int n) {
  int t = 0;
  for (int i = 0; i < n; ++i) {
    t += ((v >> (2 * i)) & 1) * ((w >> (2 * i + 1)) & 1);
    t += ((w >> (2 * i)) & 1) * ((v >> (2 * i + 1)) & 1);
  }
  return t & 1;
}

inline SympVec transvection(SympVec k, SympVec v, int n) {
  return symp_inner(k, v, n) ? (v ^ k) : v;
}

// Returns (h1, h2) with y = Z_h1 Z_h2 x.
inline std::array<SympVec, 2> find_transvection(SympVec x, SympVec y, int n) {
  if (x == y) return {0, 0};
  if (symp_inner(x, y, n)) return {x ^ y, 0};
  auto pair_of = [](SympVec v, int i) { return (v >> (2 * i)) & 3u; };
  for (int i = 0; i < n; ++i) {
    if (pair_of(x, i) != 0 && pair_of(y, i) != 0) {
      SympVec zp = pair_of(x, i) ^ pair_of(y, i);
      if (zp == 0) {
        zp = 2;  // z[2i+1] = 1
        const unsigned xa = x >> (2 * i) & 1, xb = x >> (2 * i + 1) & 1;
        if (xa != xb) zp |= 1;
      }
      const SympVec z = zp << (2 * i);
      return {x ^ z, y ^ z};
    }
  }
  SympVec z = 0;
  for (int i = 0; i < n; ++i) {
    if (pair_of(x, i) != 0 && pair_of(y, i) == 0) {
      const unsigned xa = x >> (2 * i) & 1, xb = x >> (2 * i + 1) & 1;
      SympVec zp = (xa == xb) ? 2u : ((xa << 1) | xb);
      z |= zp << (2 * i);
      break;
    }
  }
  for (int i = 0; i < n; ++i) {
    if (pair_of(x, i) == 0 && pair_of(y, i) != 0) {
      const unsigned ya = y >> (2 * i) & 1, yb = y >> (2 * i + 1) & 1;
      SympVec zp = (ya == yb) ? 2u : ((ya << 1) | yb);
      z |= zp << (2 * i);
      break;
    }
  }
  return {x ^ z, y ^ z};
}

inline std::uint64_t symplectic_group_order(int n) {
  std::uint64_t order = 1;
  for (int j = 1; j <= n; ++j) order *= ((std::uint64_t{1} << (2 * j)) - 1) * (std::uint64_t{1} << (2 * j - 1));
  return order;
}

inline std::vector<SympVec> symplectic_from_index(std::uint64_t i, int n) {
  const int nn = 2 * n;
  const std::uint64_t s = (std::uint64_t{1} << nn) - 1;
  const SympVec k = static_cast<SympVec>(i % s) + 1;
  i /= s;
  SympVec f1 = k;
  const SympVec e1 = 1;
  const auto t = find_transvection(e1, f1, n);
  const std::uint64_t bits = i % (std::uint64_t{1} << (nn - 1));
  SympVec eprime = e1;
  for (int j = 2; j < nn; ++j) eprime |= static_cast<SympVec>((bits >> (j - 1)) & 1u) << j;
  SympVec h0 = transvection(t[0], eprime, n);
  h0 = transvection(t[1], h0, n);
  if (bits & 1u) f1 = 0;

  std::vector<SympVec> g(nn, 0);
  g[0] = 1;
  g[1] = 2;
  if (n > 1) {
    const auto sub = symplectic_from_index(i >> (nn - 1), n - 1);
    for (int j = 0; j < nn - 2; ++j) g[j + 2] = sub[j] << 2;
  }
  for (int j = 0; j < nn; ++j) {
    g[j] = transvection(t[0], g[j], n);
    g[j] = transvection(t[1], g[j], n);
    g[j] = transvection(h0, g[j], n);
    g[j] = transvection(f1, g[j], n);
  }
  return g;
}

}  // namespace detail

/// A two-qubit Clifford unitary (modulo global phase), given by the conjugation
/// images of X0, Z0, X1, Z1. Qubit 0 of the gate acts on the first site it is
/// applied to, qubit 1 on the second.
class CliffordGate {
 public:
  static constexpr std::size_t kNumSymplectic = 720;
  static constexpr std::size_t kNumElements = kNumSymplectic * 16;

  CliffordGate() : CliffordGate({LocalPauli{0b0001}, LocalPauli{0b0010}, LocalPauli{0b0100}, LocalPauli{0b1000}}) {}

  /// images = {U X0 U+, U Z0 U+, U X1 U+, U Z1 U+}; throws if not symplectic.
  explicit CliffordGate(const std::array<LocalPauli, 4>& images) : images_(images) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) {
        const int expect = (a / 2 == b / 2) ? 1 : 0;  // X_k and Z_k anticommute
        if (detail::symplectic_form4(images_[a].bits, images_[b].bits) != expect)
          throw std::invalid_argument("Clifford images do not preserve commutation relations");
      }
    }
    build_table();
  }

  static CliffordGate from_strings(const std::array<std::string, 4>& images) {
    std::array<LocalPauli, 4> imgs{};
    for (int a = 0; a < 4; ++a) {
      const auto p = PauliString::parse(images[a]);
      if (p.size() != 2) throw std::invalid_argument("Clifford image must act on two qubits");
      imgs[a] = LocalPauli{static_cast<std::uint8_t>(p.x(0) | p.z(0) << 1 | p.x(1) << 2 | p.z(1) << 3), p.sign()};
    }
    return CliffordGate(imgs);
  }

  /// Element `index` in [0, 11520): symplectic class index % 720, sign pattern index / 720.
  static CliffordGate from_index(std::size_t index) {
    if (index >= kNumElements) throw std::out_of_range("Clifford index out of range");
    const auto rows = detail::symplectic_from_index(index % kNumSymplectic, 2);
    const std::size_t signs = index / kNumSymplectic;
    std::array<LocalPauli, 4> imgs{};
    for (int a = 0; a < 4; ++a)
      imgs[a] = LocalPauli{static_cast<std::uint8_t>(rows[a]), ((signs >> a) & 1u) != 0};
    return CliffordGate(imgs);
  }

  /// Cached copy of from_index(index); the full group is tabulated on first use.
  static const CliffordGate& element(std::size_t index) {
    static const std::vector<CliffordGate> all = [] {
      std::vector<CliffordGate> v;
      v.reserve(kNumElements);
      for (std::size_t i = 0; i < kNumElements; ++i) v.push_back(from_index(i));
      return v;
    }();
    return all.at(index);
  }

  static CliffordGate identity() { return CliffordGate(); }
  static CliffordGate hadamard0() { return from_strings({"+ZI", "+XI", "+IX", "+IZ"}); }
  static CliffordGate phase0() { return from_strings({"+YI", "+ZI", "+IX", "+IZ"}); }
  static CliffordGate cnot() { return from_strings({"+XX", "+ZI", "+IX", "+ZZ"}); }
  static CliffordGate cz() { return from_strings({"+XZ", "+ZI", "+ZX", "+IZ"}); }
  static CliffordGate swap() { return from_strings({"+IX", "+IZ", "+XI", "+ZI"}); }

  const std::array<LocalPauli, 4>& images() const { return images_; }

  /// Conjugation image of the Hermitian local Pauli `p`.
  LocalPauli apply(LocalPauli p) const {
    const std::uint8_t e = table_[p.bits];
    return LocalPauli{static_cast<std::uint8_t>(e & 0xF), p.sign != ((e >> 4) != 0)};
  }

  /// Packed lookup: low nibble = image bits, bit 4 = sign flip.
  std::uint8_t table_entry(unsigned bits) const { return table_[bits]; }

  /// Gate that applies `*this` first, then `next`.
  CliffordGate then(const CliffordGate& next) const {
    std::array<LocalPauli, 4> imgs{};
    for (int a = 0; a < 4; ++a) imgs[a] = next.apply(images_[a]);
    return CliffordGate(imgs);
  }

  CliffordGate inverse() const {
    // symplectic inverse: for each basis vector find the preimage
    std::array<LocalPauli, 4> imgs{};
    for (int a = 0; a < 4; ++a) {
      for (std::uint8_t v = 1; v < 16; ++v) {
        if (apply(LocalPauli{v}).bits == (1u << a)) {
          imgs[a] = LocalPauli{v};
          break;
        }
      }
    }
    for (unsigned signs = 0; signs < 16; ++signs) {
      std::array<LocalPauli, 4> trial = imgs;
      for (int a = 0; a < 4; ++a) trial[a].sign = (signs >> a) & 1u;
      const CliffordGate candidate(trial);
      if (then(candidate) == identity()) return candidate;
    }
    throw std::logic_error("no inverse found");
  }

  /// The four image bit patterns packed into 16 bits; identifies the symplectic class.
  std::uint16_t symplectic_key() const {
    return static_cast<std::uint16_t>(images_[0].bits | images_[1].bits << 4 | images_[2].bits << 8 |
                                      images_[3].bits << 12);
  }

  std::string str() const {
    std::string s;
    static constexpr const char* kNames[] = {"X0", "Z0", "X1", "Z1"};
    for (int a = 0; a < 4; ++a) {
      if (a) s += ' ';
      s += kNames[a];
      s += "->";
      s += image_string(a);
    }
    return s;
  }

  /// Image `a` as a signed two-character Pauli string, e.g. "-XZ".
  std::string image_string(int a) const {
    std::string s(1, images_[a].sign ? '-' : '+');
    for (int q = 0; q < 2; ++q) {
      const int xb = (images_[a].bits >> (2 * q)) & 1, zb = (images_[a].bits >> (2 * q + 1)) & 1;
      s += "IXZY"[xb + 2 * zb];
    }
    return s;
  }

  friend bool operator==(const CliffordGate& a, const CliffordGate& b) { return a.images_ == b.images_; }

 private:
  void build_table() {
    for (unsigned v = 0; v < 16; ++v) {
      std::uint8_t bits = 0;
      int log_i = 0;
      for (int q = 0; q < 2; ++q)
        if (((v >> (2 * q)) & 1) && ((v >> (2 * q + 1)) & 1)) log_i += 1;  // Y = iXZ
      // X0^x0 Z0^z0 X1^x1 Z1^z1, in that order
      for (int a = 0; a < 4; ++a) {
        if ((v >> a) & 1u) detail::mul_local(bits, log_i, images_[a].bits, images_[a].sign ? 2 : 0);
      }
      if (log_i & 1) throw std::logic_error("non-Hermitian Clifford image");
      table_[v] = static_cast<std::uint8_t>(bits | ((log_i == 2) ? 0x10 : 0));
    }
  }

  std::array<LocalPauli, 4> images_{};
  std::array<std::uint8_t, 16> table_{};
};

/// Uniform element of the two-qubit Clifford group (modulo phase), one draw per gate.
template <class Rng>
CliffordGate sample_two_qubit_clifford(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, CliffordGate::kNumElements - 1);
  return CliffordGate::element(pick(rng));
}

}  // namespace hybridsim
