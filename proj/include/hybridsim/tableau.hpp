#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsim/bits.hpp"
#include "hybridsim/clifford.hpp"
#include "hybridsim/pauli.hpp"

namespace hybridsim {

/// Thrown by Tableau::validate when a structural invariant is broken.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Which branch of the Z-measurement rule fired.
enum class MeasurementCase {
  kRandom,         // some generator anticommuted with Z; it was replaced
  kDeterministic,  // +-Z already in the group
  kAppended,       // Z commuted with everything but was not in the group
};

struct MeasureResult {
  bool outcome = false;
  MeasurementCase kind = MeasurementCase::kRandom;
};

/// Mixed stabilizer state on n qubits:
///   rho = 2^-n * sum over the group generated by the rows.
/// Rows are Hermitian Pauli strings, stored as x and z bit-planes (64 sites per
/// word, one row after another) plus a packed sign column. The generators
/// commute pairwise and are independent; 0 <= |G| <= n.
class Tableau {
 public:
  /// |0...0>: generator k is +Z_k.
  static Tableau product_state(std::size_t n) {
    Tableau t(n);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t r = t.push_row();
      set_bit(t.z_row(r), k, true);
    }
    return t;
  }

  /// I / 2^n: no generators.
  static Tableau maximally_mixed(std::size_t n) { return Tableau(n); }

  static Tableau from_generators(std::size_t n, const std::vector<PauliString>& gens) {
    Tableau t(n);
    if (gens.size() > n) throw std::invalid_argument("more generators than qubits");
    for (const auto& g : gens) {
      if (g.size() != n) throw std::invalid_argument("generator length differs from qubit count");
      const std::size_t r = t.push_row();
      std::copy(g.xs().begin(), g.xs().end(), t.x_row(r).begin());
      std::copy(g.zs().begin(), g.zs().end(), t.z_row(r).begin());
      t.set_sign(r, g.sign());
    }
    t.validate();
    return t;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t num_generators() const { return rows_; }

  /// log2 Tr(rho^2) = |G| - n.
  int purity_exponent() const { return static_cast<int>(rows_) - static_cast<int>(n_); }

  PauliString generator(std::size_t r) const {
    check_row(r);
    PauliString p(n_);
    std::copy(x_row(r).begin(), x_row(r).end(), p.xs().begin());
    std::copy(z_row(r).begin(), z_row(r).end(), p.zs().begin());
    p.set_sign(sign(r));
    return p;
  }

  std::vector<PauliString> generators() const {
    std::vector<PauliString> out;
    out.reserve(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out.push_back(generator(r));
    return out;
  }

  std::span<const word_t> x_row(std::size_t r) const { return {xs_.data() + r * words_, words_}; }
  std::span<const word_t> z_row(std::size_t r) const { return {zs_.data() + r * words_, words_}; }
  bool sign(std::size_t r) const { return get_bit(signs_, r); }
  std::size_t words_per_row() const { return words_; }

  /// Conjugates every generator by `gate`, with gate qubit 0 on site i and qubit 1 on site j.
  void apply_gate(const CliffordGate& gate, std::size_t i, std::size_t j) {
    check_site(i);
    check_site(j);
    if (i == j) throw std::invalid_argument("two-qubit gate needs distinct sites");
    const std::size_t wi = i / kWordBits, wj = j / kWordBits;
    const unsigned bi = i % kWordBits, bj = j % kWordBits;
    const word_t mi = word_t{1} << bi, mj = word_t{1} << bj;
    for (std::size_t r = 0; r < rows_; ++r) {
      word_t* xr = xs_.data() + r * words_;
      word_t* zr = zs_.data() + r * words_;
      const unsigned v = static_cast<unsigned>((xr[wi] >> bi) & 1u) | static_cast<unsigned>((zr[wi] >> bi) & 1u) << 1 |
                         static_cast<unsigned>((xr[wj] >> bj) & 1u) << 2 | static_cast<unsigned>((zr[wj] >> bj) & 1u) << 3;
      if (v == 0) continue;
      const std::uint8_t e = gate.table_entry(v);
      xr[wi] = (xr[wi] & ~mi) | (static_cast<word_t>(e & 1u) << bi);
      zr[wi] = (zr[wi] & ~mi) | (static_cast<word_t>((e >> 1) & 1u) << bi);
      xr[wj] = (xr[wj] & ~mj) | (static_cast<word_t>((e >> 2) & 1u) << bj);
      zr[wj] = (zr[wj] & ~mj) | (static_cast<word_t>((e >> 3) & 1u) << bj);
      if (e & 0x10u) flip_bit(signs_, r);
    }
  }

  /// Projective Z measurement on `site`. `coin()` supplies an unbiased bit whenever
  /// the outcome is not determined by the state.
  template <class CoinFn>
  MeasureResult measure_z_with(std::size_t site, CoinFn&& coin) {
    check_site(site);
    const std::size_t w = site / kWordBits;
    const word_t m = word_t{1} << (site % kWordBits);

    std::size_t pivot = rows_;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (xs_[r * words_ + w] & m) {
        pivot = r;
        break;
      }
    }
    if (pivot < rows_) {
      for (std::size_t r = pivot + 1; r < rows_; ++r)
        if (xs_[r * words_ + w] & m) mul_row(r, pivot);
      const bool outcome = coin();
      overwrite_with_z(pivot, site, outcome);
      return {outcome, MeasurementCase::kRandom};
    }

    if (const auto sign = group_sign_of_z(site)) return {*sign, MeasurementCase::kDeterministic};

    const bool outcome = coin();
    const std::size_t r = push_row();
    overwrite_with_z(r, site, outcome);
    return {outcome, MeasurementCase::kAppended};
  }

  template <class Rng>
  MeasureResult measure_z(std::size_t site, Rng& rng) {
    return measure_z_with(site, [&rng] { return std::bernoulli_distribution(0.5)(rng); });
  }

  /// Reset channel on `site`: rho -> Tr_site(rho) (x) |0><0|.
  void reset(std::size_t site) {
    check_site(site);
    const std::size_t w = site / kWordBits;
    const word_t m = word_t{1} << (site % kWordBits);

    std::size_t px = rows_;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (xs_[r * words_ + w] & m) {
        if (px == rows_) px = r;
        else mul_row(r, px);
      }
    }
    std::size_t pz = rows_;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == px || !(zs_[r * words_ + w] & m)) continue;
      if (pz == rows_) pz = r;
      else mul_row(r, pz);
    }
    // remove the (at most two) rows touching the site, higher index first
    if (px < rows_ && pz < rows_) {
      remove_row(std::max(px, pz));
      remove_row(std::min(px, pz));
    } else if (px < rows_) {
      remove_row(px);
    } else if (pz < rows_) {
      remove_row(pz);
    }
    const std::size_t r = push_row();
    overwrite_with_z(r, site, false);
  }

  /// Generator matrix (|G| x 2n): columns [0, n) hold x bits, [n, 2n) z bits.
  BitMatrix generator_matrix() const {
    BitMatrix mtx(rows_, 2 * n_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = 0; k < n_; ++k) {
        if (get_bit(x_row(r), k)) mtx.set(r, k, true);
        if (get_bit(z_row(r), k)) mtx.set(r, n_ + k, true);
      }
    return mtx;
  }

  /// Throws InvariantViolation unless the rows commute pairwise, are independent
  /// and number at most n.
  void validate() const {
    if (rows_ > n_) throw InvariantViolation("more generators than qubits");
    for (std::size_t a = 0; a < rows_; ++a)
      for (std::size_t b = a + 1; b < rows_; ++b)
        if (detail::anticommute_words(x_row(a), z_row(a), x_row(b), z_row(b)))
          throw InvariantViolation("generators " + std::to_string(a) + " and " + std::to_string(b) +
                                   " anticommute");
    if (rank_gf2(generator_matrix()) != rows_) throw InvariantViolation("generators are dependent");
  }

  /// Reduced row-echelon generating set (signs tracked), unique for the group.
  std::vector<PauliString> canonical_generators() const {
    std::vector<PauliString> g = generators();
    std::size_t rank = 0;
    // pivot order: x_0, z_0, x_1, z_1, ...
    for (std::size_t col = 0; col < 2 * n_ && rank < g.size(); ++col) {
      const std::size_t site = col / 2;
      const bool is_x = (col % 2) == 0;
      auto bit = [&](const PauliString& p) { return is_x ? p.x(site) : p.z(site); };
      std::size_t piv = rank;
      while (piv < g.size() && !bit(g[piv])) ++piv;
      if (piv == g.size()) continue;
      std::swap(g[piv], g[rank]);
      for (std::size_t r = 0; r < g.size(); ++r)
        if (r != rank && bit(g[r])) g[r] *= g[rank];
      ++rank;
    }
    return g;
  }

  /// True when both tableaux generate the same signed stabilizer group.
  friend bool same_state(const Tableau& a, const Tableau& b) {
    return a.n_ == b.n_ && a.rows_ == b.rows_ && a.canonical_generators() == b.canonical_generators();
  }

 private:
  explicit Tableau(std::size_t n) : n_(n), words_(words_for(n)) {
    if (n == 0) throw std::invalid_argument("tableau needs at least one qubit");
    xs_.assign(n * words_, 0);
    zs_.assign(n * words_, 0);
    signs_.assign(words_for(n), 0);
  }

  std::span<word_t> x_row(std::size_t r) { return {xs_.data() + r * words_, words_}; }
  std::span<word_t> z_row(std::size_t r) { return {zs_.data() + r * words_, words_}; }
  void set_sign(std::size_t r, bool s) { set_bit(signs_, r, s); }

  void check_site(std::size_t k) const {
    if (k >= n_) throw std::out_of_range("site " + std::to_string(k) + " outside [0, " + std::to_string(n_) + ")");
  }
  void check_row(std::size_t r) const {
    if (r >= rows_) throw std::out_of_range("generator index out of range");
  }

  std::size_t push_row() {
    if (rows_ == n_) throw InvariantViolation("tableau is full");
    const std::size_t r = rows_++;
    std::fill(x_row(r).begin(), x_row(r).end(), 0);
    std::fill(z_row(r).begin(), z_row(r).end(), 0);
    set_sign(r, false);
    return r;
  }

  void remove_row(std::size_t r) {
    const std::size_t last = rows_ - 1;
    if (r != last) {
      std::copy(x_row(last).begin(), x_row(last).end(), x_row(r).begin());
      std::copy(z_row(last).begin(), z_row(last).end(), z_row(r).begin());
      set_sign(r, sign(last));
    }
    --rows_;
  }

  // row dst <- row dst * row src (the rows commute)
  void mul_row(std::size_t dst, std::size_t src) {
    const unsigned k = detail::mul_words_log_i(x_row(dst), z_row(dst), x_row(src), z_row(src));
    if (((k & 2u) != 0) != sign(src)) flip_bit(signs_, dst);
  }

  void overwrite_with_z(std::size_t r, std::size_t site, bool negative) {
    std::fill(x_row(r).begin(), x_row(r).end(), 0);
    std::fill(z_row(r).begin(), z_row(r).end(), 0);
    set_bit(z_row(r), site, true);
    set_sign(r, negative);
  }

  // When +-Z_site lies in the group (all rows commute with it), the sign bit of
  // that group element; otherwise nothing. Membership is decided by eliminating
  // every column except z_site: a row that vanishes there must equal +-Z_site.
  // The combination of original rows is carried in trailing words.
  std::optional<bool> group_sign_of_z(std::size_t site) const {
    if (rows_ == 0) return std::nullopt;
    const std::size_t combo_words = words_for(rows_);
    const std::size_t pivot_words = 2 * words_;
    BitMatrix work(rows_, (pivot_words + combo_words) * kWordBits);
    for (std::size_t r = 0; r < rows_; ++r) {
      auto row = work.row(r);
      std::copy(x_row(r).begin(), x_row(r).end(), row.begin());
      std::copy(z_row(r).begin(), z_row(r).end(), row.begin() + words_);
      set_bit(row.subspan(words_), site, false);
      set_bit(row.subspan(pivot_words), r, true);
    }
    const std::size_t rank = rank_gf2_inplace(work, pivot_words);
    if (rank == rows_) return std::nullopt;

    const auto combo = work.row(rank).subspan(pivot_words);
    PauliString acc(n_);
    for (std::size_t r = 0; r < rows_; ++r)
      if (get_bit(combo, r)) acc *= generator(r);
    return acc.sign();
  }

  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::size_t rows_ = 0;
  std::vector<word_t> xs_;
  std::vector<word_t> zs_;
  std::vector<word_t> signs_;
};

}  // namespace hybridsim
