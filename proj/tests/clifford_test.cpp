#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "hybridsim/clifford.hpp"
#include "hybridsim/dense_oracle.hpp"

namespace {

using hybridsim::CliffordGate;
using hybridsim::LocalPauli;
namespace oracle = hybridsim::oracle;

// Brute-force reference: all 4x4 binary matrices whose rows (images of X0, Z0,
// X1, Z1) satisfy the symplectic commutation relations.
std::set<std::uint16_t> enumerate_symplectic_by_brute_force() {
  std::set<std::uint16_t> out;
  auto form = [](unsigned a, unsigned b) {
    return ((a & 1) * ((b >> 1) & 1) + ((b & 1) * ((a >> 1) & 1)) + ((a >> 2) & 1) * ((b >> 3) & 1) +
            ((b >> 2) & 1) * ((a >> 3) & 1)) & 1;
  };
  for (unsigned key = 0; key < (1u << 16); ++key) {
    const unsigned r[4] = {key & 15, (key >> 4) & 15, (key >> 8) & 15, (key >> 12) & 15};
    bool ok = true;
    for (int a = 0; a < 4 && ok; ++a)
      for (int b = a + 1; b < 4 && ok; ++b) ok = form(r[a], r[b]) == ((a / 2 == b / 2) ? 1u : 0u);
    if (ok) out.insert(static_cast<std::uint16_t>(key));
  }
  return out;
}

TEST(CliffordGate, TransvectionEnumerationCoversTheSymplecticGroup) {
  const auto reference = enumerate_symplectic_by_brute_force();
  ASSERT_EQ(reference.size(), 720u);
  std::set<std::uint16_t> produced;
  for (std::size_t i = 0; i < CliffordGate::kNumSymplectic; ++i)
    produced.insert(CliffordGate::from_index(i).symplectic_key());
  EXPECT_EQ(produced, reference);
  EXPECT_EQ(hybridsim::detail::symplectic_group_order(2), 720u);
}

TEST(CliffordGate, AllElementsDistinct) {
  std::set<std::vector<int>> seen;
  for (std::size_t i = 0; i < CliffordGate::kNumElements; ++i) {
    const auto& g = CliffordGate::element(i);
    std::vector<int> key;
    for (const auto& im : g.images()) {
      key.push_back(im.bits);
      key.push_back(im.sign);
    }
    seen.insert(key);
  }
  EXPECT_EQ(seen.size(), CliffordGate::kNumElements);
}

TEST(CliffordGate, RejectsNonSymplecticImages) {
  EXPECT_THROW(CliffordGate::from_strings({"+XI", "+XI", "+IX", "+IZ"}), std::invalid_argument);
  EXPECT_THROW(CliffordGate::from_strings({"+XI", "+ZI", "+XI", "+IZ"}), std::invalid_argument);
}

TEST(CliffordGate, LookupTableMatchesUnitaryConjugation) {
  std::mt19937_64 rng(3);
  std::vector<CliffordGate> gates = {CliffordGate::hadamard0(), CliffordGate::phase0(), CliffordGate::cnot(),
                                     CliffordGate::cz(), CliffordGate::swap()};
  for (int k = 0; k < 300; ++k) gates.push_back(hybridsim::sample_two_qubit_clifford(rng));
  for (const auto& g : gates) {
    const auto u = oracle::gate_unitary(g);
    ASSERT_LT((u * u.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    for (std::uint8_t v = 0; v < 16; ++v) {
      const LocalPauli p{v, false};
      const auto lhs = (u * oracle::local_pauli_matrix(p) * u.adjoint()).eval();
      const auto rhs = oracle::local_pauli_matrix(g.apply(p));
      EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12) << g.str() << " on " << int(v);
    }
  }
}

TEST(CliffordGate, InverseComposesToIdentity) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto g = hybridsim::sample_two_qubit_clifford(rng);
    EXPECT_EQ(g.then(g.inverse()), CliffordGate::identity());
    EXPECT_EQ(g.inverse().then(g), CliffordGate::identity());
  }
}

TEST(CliffordGate, SamplingIsDeterministicInTheStream) {
  std::mt19937_64 a(99), b(99);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(hybridsim::sample_two_qubit_clifford(a), hybridsim::sample_two_qubit_clifford(b));
}

TEST(CliffordGate, SamplingIsUniformOverSymplecticClassesAndElements) {
  const std::size_t n_samples = CliffordGate::kNumElements * 20;
  std::mt19937_64 rng(2024);
  std::map<std::uint16_t, std::size_t> by_class;
  std::map<std::vector<int>, std::size_t> by_element;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto g = hybridsim::sample_two_qubit_clifford(rng);
    ++by_class[g.symplectic_key()];
    std::vector<int> key;
    for (const auto& im : g.images()) key.push_back(im.bits | (im.sign << 4));
    ++by_element[key];
  }
  ASSERT_EQ(by_class.size(), 720u);

  auto chi_square_p = [](const auto& counts, std::size_t cells, double expected) {
    double chi2 = 0;
    for (const auto& [key, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
    chi2 += static_cast<double>(cells - counts.size()) * expected;  // empty cells
    boost::math::chi_squared dist(static_cast<double>(cells - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
  };
  EXPECT_GT(chi_square_p(by_class, 720, n_samples / 720.0), 0.001);
  EXPECT_GT(chi_square_p(by_element, CliffordGate::kNumElements, 20.0), 0.001);
}

}  // namespace
