#include <random>

#include <gtest/gtest.h>

#include "hybridsim/dense_oracle.hpp"
#include "hybridsim/pauli.hpp"

namespace {

using hybridsim::PauliString;
namespace oracle = hybridsim::oracle;

PauliString random_pauli(std::size_t n, std::mt19937_64& rng) {
  PauliString p(n);
  for (std::size_t k = 0; k < n; ++k) p.set(k, rng() & 1, rng() & 1);
  p.set_sign(rng() & 1);
  return p;
}

TEST(PauliString, ParseAndPrint) {
  const auto p = PauliString::parse("-XIZY");
  EXPECT_EQ(p.size(), 4u);
  EXPECT_TRUE(p.sign());
  EXPECT_TRUE(p.x(0));
  EXPECT_FALSE(p.z(0));
  EXPECT_TRUE(p.z(2));
  EXPECT_TRUE(p.x(3) && p.z(3));
  EXPECT_EQ(p.str(), "-XIZY");
  EXPECT_EQ(PauliString::parse("ZZ").str(), "+ZZ");
  EXPECT_THROW(PauliString::parse("XQ"), std::invalid_argument);
}

TEST(PauliString, CommutationMatchesMatrices) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_pauli(3, rng), b = random_pauli(3, rng);
    const auto ma = oracle::pauli_matrix(a), mb = oracle::pauli_matrix(b);
    const bool commute = (ma * mb - mb * ma).cwiseAbs().maxCoeff() < 1e-12;
    EXPECT_EQ(a.commutes_with(b), commute) << a << " " << b;
  }
}

TEST(PauliString, ProductSignMatchesMatrices) {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int trial = 0; checked < 300; ++trial) {
    // lengths straddle a word boundary to exercise multi-word counting
    const std::size_t n = (trial % 2) ? 4 : 5;
    auto a = random_pauli(n, rng);
    const auto b = random_pauli(n, rng);
    if (!a.commutes_with(b)) continue;
    const auto expected = (oracle::pauli_matrix(a) * oracle::pauli_matrix(b)).eval();
    a *= b;
    EXPECT_LT((oracle::pauli_matrix(a) - expected).cwiseAbs().maxCoeff(), 1e-12);
    ++checked;
  }
}

TEST(PauliString, ProductAcrossManyWords) {
  // Y on site 100 times Z on site 100 is iX: anticommuting, rejected.
  auto y = PauliString::single(130, 100, 'Y');
  EXPECT_THROW(y *= PauliString::single(130, 100, 'Z'), std::logic_error);
  // (X0 Z70)(Z0 X70) = (XZ)(ZX) = (-iY)(iY) = +YY
  PauliString lhs(130), rhs(130);
  lhs.set(0, true, false);
  lhs.set(70, false, true);
  rhs.set(0, false, true);
  rhs.set(70, true, false);
  lhs *= rhs;
  EXPECT_FALSE(lhs.sign());
  EXPECT_TRUE(lhs.x(0) && lhs.z(0) && lhs.x(70) && lhs.z(70));
  EXPECT_EQ(lhs.weight(), 2u);
}

}  // namespace
