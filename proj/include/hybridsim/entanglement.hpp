#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridsim/bits.hpp"
#include "hybridsim/tableau.hpp"

namespace hybridsim {

/// Half-open site interval [begin, end).
struct Interval {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool contains(std::size_t k) const { return k >= begin && k < end; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Two contiguous regions that together tile [0, n).
struct Bipartition {
  Interval a;
  Interval b;

  /// A = [0, n/2), B = [n/2, n).
  static Bipartition half_chain(std::size_t n) { return {{0, n / 2}, {n / 2, n}}; }

  void validate(std::size_t n) const {
    if (a.begin > a.end || b.begin > b.end || a.end > n || b.end > n)
      throw std::invalid_argument("bipartition interval out of range");
    if (a.size() + b.size() != n) throw std::invalid_argument("bipartition does not cover the chain");
    for (std::size_t k = 0; k < n; ++k)
      if (a.contains(k) == b.contains(k)) throw std::invalid_argument("bipartition regions overlap");
  }
};

/// Per-state entanglement readout. Counts are exact; entropies are in bits.
struct EntanglementReport {
  int s_a = 0;
  int s_b = 0;
  int s_ab = 0;
  int mutual_information = 0;
  /// Twice the log negativity, i.e. rank of the anticommutation matrix.
  int log_negativity_x2 = 0;
  int purity_exponent = 0;

  double log_negativity() const { return 0.5 * log_negativity_x2; }
  friend bool operator==(const EntanglementReport&, const EntanglementReport&) = default;
};

namespace detail {

inline std::vector<word_t> site_mask(std::size_t n, const std::vector<std::size_t>& region) {
  std::vector<word_t> mask(words_for(n), 0);
  for (std::size_t k : region) {
    if (k >= n) throw std::out_of_range("region site " + std::to_string(k) + " out of range");
    set_bit(mask, k, true);
  }
  return mask;
}

inline std::vector<std::size_t> interval_sites(Interval iv) {
  std::vector<std::size_t> s;
  for (std::size_t k = iv.begin; k < iv.end; ++k) s.push_back(k);
  return s;
}

}  // namespace detail

/// |G_A|: number of independent group elements supported inside `region`.
/// Equals |G| minus the rank of the generators restricted to the complement.
inline std::size_t subgroup_generator_count(const Tableau& t, const std::vector<std::size_t>& region) {
  const std::size_t n = t.num_qubits();
  const std::size_t g = t.num_generators();
  if (g == 0 || region.empty()) return 0;
  const auto inside = detail::site_mask(n, region);
  const std::size_t w = t.words_per_row();
  BitMatrix m(g, 2 * w * kWordBits);
  for (std::size_t r = 0; r < g; ++r) {
    auto row = m.row(r);
    const auto xr = t.x_row(r);
    const auto zr = t.z_row(r);
    for (std::size_t k = 0; k < w; ++k) {
      row[k] = xr[k] & ~inside[k];
      row[w + k] = zr[k] & ~inside[k];
    }
  }
  return g - rank_gf2_inplace(m);
}

/// Von Neumann entropy of `region` in bits: |A| - |G_A|.
inline int entropy(const Tableau& t, const std::vector<std::size_t>& region) {
  return static_cast<int>(region.size()) - static_cast<int>(subgroup_generator_count(t, region));
}

inline int entropy(const Tableau& t, Interval region) { return entropy(t, detail::interval_sites(region)); }

/// I(A:B) = S_A + S_B - S_AB in bits.
inline int mutual_information(const Tableau& t, const Bipartition& bp) {
  bp.validate(t.num_qubits());
  const int s_ab = -t.purity_exponent();
  return entropy(t, bp.a) + entropy(t, bp.b) - s_ab;
}

/// GF(2) rank of J, J_ij = 1 iff generators i and j anticommute when restricted to A.
/// The log negativity in bits is half of this.
inline std::size_t negativity_rank(const Tableau& t, const Bipartition& bp) {
  bp.validate(t.num_qubits());
  const std::size_t g = t.num_generators();
  if (g == 0) return 0;
  const auto in_a = detail::site_mask(t.num_qubits(), detail::interval_sites(bp.a));
  const std::size_t w = t.words_per_row();
  std::vector<word_t> xa(g * w), za(g * w);
  for (std::size_t r = 0; r < g; ++r)
    for (std::size_t k = 0; k < w; ++k) {
      xa[r * w + k] = t.x_row(r)[k] & in_a[k];
      za[r * w + k] = t.z_row(r)[k] & in_a[k];
    }
  BitMatrix j(g, g);
  for (std::size_t r = 0; r < g; ++r)
    for (std::size_t c = r + 1; c < g; ++c) {
      const std::span<const word_t> xr(xa.data() + r * w, w), zr(za.data() + r * w, w);
      const std::span<const word_t> xc(xa.data() + c * w, w), zc(za.data() + c * w, w);
      if (detail::anticommute_words(xr, zr, xc, zc)) {
        j.set(r, c, true);
        j.set(c, r, true);
      }
    }
  return rank_gf2_inplace(j);
}

inline double log_negativity(const Tableau& t, const Bipartition& bp) {
  return 0.5 * static_cast<double>(negativity_rank(t, bp));
}

inline EntanglementReport entanglement_report(const Tableau& t, const Bipartition& bp) {
  bp.validate(t.num_qubits());
  EntanglementReport rep;
  rep.purity_exponent = t.purity_exponent();
  rep.s_a = entropy(t, bp.a);
  rep.s_b = entropy(t, bp.b);
  rep.s_ab = -rep.purity_exponent;
  rep.mutual_information = rep.s_a + rep.s_b - rep.s_ab;
  rep.log_negativity_x2 = static_cast<int>(negativity_rank(t, bp));
  return rep;
}

/// Throws InvariantViolation if the report breaks the stabilizer-state relations
/// (non-negative entropies, I = S_A + S_B - S_AB >= 0, E_N <= I/2).
inline void check_report(const EntanglementReport& r) {
  if (r.s_a < 0 || r.s_b < 0 || r.s_ab < 0) throw InvariantViolation("negative entropy");
  if (r.mutual_information != r.s_a + r.s_b - r.s_ab) throw InvariantViolation("inconsistent mutual information");
  if (r.mutual_information < 0) throw InvariantViolation("negative mutual information");
  if (r.log_negativity_x2 > r.mutual_information) throw InvariantViolation("E_N exceeds I/2");
}

}  // namespace hybridsim
