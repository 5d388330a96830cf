#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hybridsim/clifford.hpp"
#include "hybridsim/entanglement.hpp"
#include "hybridsim/event_log.hpp"
#include "hybridsim/pauli.hpp"
#include "hybridsim/tableau.hpp"

namespace hybridsim::oracle {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr std::size_t kMaxQubits = 8;

/// A forced measurement outcome had (numerically) zero probability: the
/// stabilizer engine and the oracle disagree about the state.
class ReplayDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-qubit Hermitian Pauli matrix for bits (x, z).
inline Eigen::Matrix2cd pauli_matrix(bool x, bool z) {
  Eigen::Matrix2cd m;
  const cplx i(0, 1);
  if (!x && !z) m << 1, 0, 0, 1;
  else if (x && !z) m << 0, 1, 1, 0;
  else if (!x && z) m << 1, 0, 0, -1;
  else m << 0, -i, i, 0;
  return m;
}

/// Dense matrix of a Pauli string. Site k is bit k of the basis index.
inline Matrix pauli_matrix(const PauliString& p) {
  const std::size_t n = p.size();
  const std::size_t d = std::size_t{1} << n;
  std::vector<Eigen::Matrix2cd> factors;
  for (std::size_t k = 0; k < n; ++k) factors.push_back(pauli_matrix(p.x(k), p.z(k)));
  Matrix m(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cplx v = p.sign() ? -1.0 : 1.0;
      for (std::size_t k = 0; k < n && v != 0.0; ++k) v *= factors[k]((r >> k) & 1u, (c >> k) & 1u);
      m(r, c) = v;
    }
  return m;
}

inline Eigen::Matrix4cd local_pauli_matrix(LocalPauli p) {
  const Eigen::Matrix2cd q0 = pauli_matrix(p.bits & 1, (p.bits >> 1) & 1);
  const Eigen::Matrix2cd q1 = pauli_matrix((p.bits >> 2) & 1, (p.bits >> 3) & 1);
  Eigen::Matrix4cd m;
  for (int r1 = 0; r1 < 2; ++r1)
    for (int r0 = 0; r0 < 2; ++r0)
      for (int c1 = 0; c1 < 2; ++c1)
        for (int c0 = 0; c0 < 2; ++c0) m(r0 + 2 * r1, c0 + 2 * c1) = q1(r1, c1) * q0(r0, c0);
  return p.sign ? Eigen::Matrix4cd(-m) : m;
}

/// 4x4 unitary U with U P U+ equal to each image of the gate (fixed up to phase).
/// Column |ab> is X0'^a X1'^b applied to the common +1 eigenvector of Z0', Z1'.
inline Eigen::Matrix4cd gate_unitary(const CliffordGate& g) {
  const auto& im = g.images();
  const Eigen::Matrix4cd x0 = local_pauli_matrix(im[0]), z0 = local_pauli_matrix(im[1]);
  const Eigen::Matrix4cd x1 = local_pauli_matrix(im[2]), z1 = local_pauli_matrix(im[3]);
  const Eigen::Matrix4cd id = Eigen::Matrix4cd::Identity();
  const Eigen::Matrix4cd proj = 0.25 * (id + z0) * (id + z1);
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  for (int k = 0; k < 4; ++k) {
    psi = proj.col(k);
    if (psi.norm() > 1e-6) break;
  }
  psi.normalize();
  Eigen::Matrix4cd u;
  u.col(0) = psi;
  u.col(1) = x0 * psi;
  u.col(2) = x1 * psi;
  u.col(3) = x0 * x1 * psi;
  return u;
}

struct DenseReport {
  double s_a = 0, s_b = 0, s_ab = 0;
  double mutual_information = 0;
  double log_negativity = 0;
  double purity_log2 = 0;
};

/// Exact density matrix of up to 8 qubits; basis index bit k is site k.
class DenseState {
 public:
  static DenseState product_state(std::size_t n) {
    DenseState s(n);
    s.rho_(0, 0) = 1.0;
    return s;
  }

  static DenseState from_matrix(std::size_t n, Matrix rho) {
    DenseState s(n);
    if (rho.rows() != s.rho_.rows() || rho.cols() != s.rho_.cols()) throw std::invalid_argument("dimension mismatch");
    s.rho_ = std::move(rho);
    return s;
  }

  /// rho = 2^-n prod_i (1 + g_i) for the tableau's generators.
  static DenseState from_tableau(const Tableau& t) {
    DenseState s(t.num_qubits());
    const std::size_t dim = s.dim();
    Matrix rho = Matrix::Identity(dim, dim);
    for (const auto& g : t.generators()) rho = (rho * (Matrix::Identity(dim, dim) + pauli_matrix(g))).eval();
    s.rho_ = rho / static_cast<double>(dim);
    return s;
  }

  std::size_t num_qubits() const { return n_; }
  std::size_t dim() const { return std::size_t{1} << n_; }
  const Matrix& rho() const { return rho_; }

  void apply_unitary(const Eigen::Matrix4cd& u, std::size_t i, std::size_t j) {
    check_site(i);
    check_site(j);
    if (i == j) throw std::invalid_argument("two-qubit gate needs distinct sites");
    const std::size_t bi = std::size_t{1} << i, bj = std::size_t{1} << j;
    const std::size_t d = dim();
    const Eigen::Matrix4cd ud = u.adjoint();
    Eigen::Matrix<cplx, 4, Eigen::Dynamic> rows(4, d);
    Eigen::Matrix<cplx, Eigen::Dynamic, 4> cols(d, 4);
    // rho <- U rho on each 4-row block, then rho <- rho U+ on each 4-column block.
    for (std::size_t base = 0; base < d; ++base) {
      if (base & (bi | bj)) continue;
      const std::size_t idx[4] = {base, base | bi, base | bj, base | bi | bj};
      for (int k = 0; k < 4; ++k) rows.row(k) = rho_.row(idx[k]);
      rows = (u * rows).eval();
      for (int k = 0; k < 4; ++k) rho_.row(idx[k]) = rows.row(k);
    }
    for (std::size_t base = 0; base < d; ++base) {
      if (base & (bi | bj)) continue;
      const std::size_t idx[4] = {base, base | bi, base | bj, base | bi | bj};
      for (int k = 0; k < 4; ++k) cols.col(k) = rho_.col(idx[k]);
      cols = (cols * ud).eval();
      for (int k = 0; k < 4; ++k) rho_.col(idx[k]) = cols.col(k);
    }
  }

  void apply_gate(const CliffordGate& g, std::size_t i, std::size_t j) { apply_unitary(gate_unitary(g), i, j); }

  /// Probability of reading `outcome` from a Z measurement on `site`.
  double outcome_probability(std::size_t site, bool outcome) const {
    check_site(site);
    double p = 0;
    for (std::size_t s = 0; s < dim(); ++s)
      if ((((s >> site) & 1u) != 0) == outcome) p += rho_(s, s).real();
    return p;
  }

  /// Projects onto the forced outcome and renormalizes.
  void measure_forced(std::size_t site, bool outcome) {
    const double p = outcome_probability(site, outcome);
    if (p < 1e-12)
      throw ReplayDivergence("outcome " + std::to_string(outcome) + " on site " + std::to_string(site) +
                             " has probability " + std::to_string(p));
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) {
        const bool keep = ((((r >> site) & 1u) != 0) == outcome) && ((((c >> site) & 1u) != 0) == outcome);
        rho_(r, c) = keep ? rho_(r, c) / p : cplx(0);
      }
  }

  /// Samples an outcome with Born probabilities, then projects.
  template <class Rng>
  bool measure(std::size_t site, Rng& rng) {
    const double p1 = outcome_probability(site, true);
    const bool outcome = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p1;
    measure_forced(site, outcome);
    return outcome;
  }

  /// Two-Kraus reset E_0 = |0><0|, E_1 = |0><1| on `site`.
  void reset(std::size_t site) {
    check_site(site);
    const std::size_t b = std::size_t{1} << site;
    Matrix out = Matrix::Zero(dim(), dim());
    for (std::size_t r = 0; r < dim(); ++r) {
      if (r & b) continue;
      for (std::size_t c = 0; c < dim(); ++c) {
        if (c & b) continue;
        out(r, c) = rho_(r, c) + rho_(r | b, c | b);
      }
    }
    rho_ = std::move(out);
  }

  /// Reset via a SWAP with a fresh |0> ancilla followed by tracing the ancilla out.
  void reset_via_ancilla(std::size_t site) {
    check_site(site);
    if (n_ + 1 > kMaxQubits + 1) throw std::invalid_argument("too many qubits");
    DenseState big(n_ + 1, /*unchecked=*/true);
    big.rho_.setZero();
    // ancilla is site n_, in |0>: embed rho in the ancilla-0 block
    big.rho_.topLeftCorner(dim(), dim()) = rho_;
    big.apply_gate(CliffordGate::swap(), site, n_);
    rho_ = big.partial_trace_matrix(all_sites());
  }

  std::vector<std::size_t> all_sites() const {
    std::vector<std::size_t> s(n_);
    for (std::size_t k = 0; k < n_; ++k) s[k] = k;
    return s;
  }

  /// Reduced density matrix on `keep` (in increasing site order).
  Matrix partial_trace_matrix(const std::vector<std::size_t>& keep) const {
    std::vector<std::size_t> traced;
    for (std::size_t k = 0; k < n_; ++k)
      if (std::find(keep.begin(), keep.end(), k) == keep.end()) traced.push_back(k);
    const std::size_t dk = std::size_t{1} << keep.size();
    const std::size_t dt = std::size_t{1} << traced.size();
    auto compose = [&](std::size_t a, std::size_t e) {
      std::size_t s = 0;
      for (std::size_t q = 0; q < keep.size(); ++q) s |= ((a >> q) & 1u) << keep[q];
      for (std::size_t q = 0; q < traced.size(); ++q) s |= ((e >> q) & 1u) << traced[q];
      return s;
    };
    Matrix red = Matrix::Zero(dk, dk);
    for (std::size_t a = 0; a < dk; ++a)
      for (std::size_t b = 0; b < dk; ++b) {
        cplx acc = 0;
        for (std::size_t e = 0; e < dt; ++e) acc += rho_(compose(a, e), compose(b, e));
        red(a, b) = acc;
      }
    return red;
  }

  /// Von Neumann entropy of `region` in bits.
  double entropy(const std::vector<std::size_t>& region) const {
    if (region.empty()) return 0.0;
    const Matrix red = partial_trace_matrix(region);
    Eigen::SelfAdjointEigenSolver<Matrix> es(red, Eigen::EigenvaluesOnly);
    double s = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      const double l = es.eigenvalues()(k);
      if (l > 1e-14) s -= l * std::log2(l);
    }
    return s;
  }

  Matrix partial_transpose(const std::vector<std::size_t>& region_b) const {
    std::size_t mask = 0;
    for (std::size_t k : region_b) mask |= std::size_t{1} << k;
    Matrix pt(dim(), dim());
    for (std::size_t r = 0; r < dim(); ++r)
      for (std::size_t c = 0; c < dim(); ++c) {
        const std::size_t r2 = (r & ~mask) | (c & mask);
        const std::size_t c2 = (c & ~mask) | (r & mask);
        pt(r, c) = rho_(r2, c2);
      }
    return pt;
  }

  /// log2 of the trace norm of the partial transpose on B.
  double log_negativity(const Bipartition& bp) const {
    bp.validate(n_);
    std::vector<std::size_t> b;
    for (std::size_t k = bp.b.begin; k < bp.b.end; ++k) b.push_back(k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(partial_transpose(b), Eigen::EigenvaluesOnly);
    return std::log2(es.eigenvalues().cwiseAbs().sum());
  }

  double purity() const { return (rho_ * rho_).trace().real(); }
  double trace() const { return rho_.trace().real(); }

  DenseReport report(const Bipartition& bp) const {
    bp.validate(n_);
    std::vector<std::size_t> a, b;
    for (std::size_t k = bp.a.begin; k < bp.a.end; ++k) a.push_back(k);
    for (std::size_t k = bp.b.begin; k < bp.b.end; ++k) b.push_back(k);
    DenseReport r;
    r.s_a = entropy(a);
    r.s_b = entropy(b);
    r.s_ab = entropy(all_sites());
    r.mutual_information = r.s_a + r.s_b - r.s_ab;
    r.log_negativity = log_negativity(bp);
    r.purity_log2 = std::log2(purity());
    return r;
  }

  /// Throws std::logic_error unless rho is Hermitian, unit-trace (1e-12) and
  /// has no eigenvalue below -1e-10.
  void validate() const {
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw std::logic_error("density matrix not Hermitian");
    if (std::abs(trace() - 1.0) > 1e-12) throw std::logic_error("density matrix trace drifted from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) throw std::logic_error("density matrix not positive semidefinite");
  }

 private:
  explicit DenseState(std::size_t n, bool unchecked = false) : n_(n) {
    if (n == 0) throw std::invalid_argument("dense state needs at least one qubit");
    if (!unchecked && n > kMaxQubits) throw std::invalid_argument("dense oracle is capped at 8 qubits");
    rho_ = Matrix::Zero(dim(), dim());
  }

  void check_site(std::size_t k) const {
    if (k >= n_) throw std::out_of_range("site out of range");
  }

  std::size_t n_;
  Matrix rho_;
};

/// Replays a recorded trajectory from |0...0>, forcing recorded measurement outcomes.
inline DenseState replay(std::size_t n, const EventLog& log, bool validate_each = false) {
  DenseState s = DenseState::product_state(n);
  for (const auto& ev : log.events()) {
    if (const auto* g = std::get_if<GateEvent>(&ev)) s.apply_gate(g->gate, g->i, g->j);
    else if (const auto* m = std::get_if<MeasureEvent>(&ev)) s.measure_forced(m->site, m->outcome);
    else s.reset(std::get<ResetEvent>(ev).site);
    if (validate_each) s.validate();
  }
  return s;
}

}  // namespace hybridsim::oracle
