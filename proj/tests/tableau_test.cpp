#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hybridsim/tableau.hpp"

namespace {

using hybridsim::CliffordGate;
using hybridsim::MeasurementCase;
using hybridsim::PauliString;
using hybridsim::Tableau;

std::vector<std::string> strs(const Tableau& t) {
  std::vector<std::string> out;
  for (const auto& g : t.generators()) out.push_back(g.str());
  return out;
}

// Random mixed state reached by gates, measurements and resets from |0..0>.
Tableau random_state(std::size_t n, std::mt19937_64& rng, int ops = 60) {
  Tableau t = Tableau::product_state(n);
  std::uniform_int_distribution<std::size_t> site(0, n - 1);
  for (int k = 0; k < ops; ++k) {
    const auto kind = rng() % 6;
    if (kind < 4) {
      const std::size_t i = site(rng);
      std::size_t j = site(rng);
      while (j == i) j = site(rng);
      t.apply_gate(hybridsim::sample_two_qubit_clifford(rng), i, j);
    } else if (kind == 4) {
      t.measure_z(site(rng), rng);
    } else {
      t.reset(site(rng));
    }
  }
  return t;
}

// Same group, different generating set: random invertible row mixing.
Tableau mixed_copy(const Tableau& t, std::mt19937_64& rng) {
  auto gens = t.generators();
  std::shuffle(gens.begin(), gens.end(), rng);
  for (std::size_t a = 0; a < gens.size(); ++a)
    for (std::size_t b = 0; b < gens.size(); ++b)
      if (a != b && (rng() & 1)) gens[a] *= gens[b];
  return Tableau::from_generators(t.num_qubits(), gens);
}

TEST(Tableau, ProductState) {
  const auto one = Tableau::product_state(1);
  EXPECT_EQ(strs(one), std::vector<std::string>{"+Z"});
  EXPECT_EQ(one.purity_exponent(), 0);
  const auto four = Tableau::product_state(4);
  EXPECT_EQ(strs(four), (std::vector<std::string>{"+ZIII", "+IZII", "+IIZI", "+IIIZ"}));
  for (std::size_t n : {1u, 7u, 64u, 130u}) EXPECT_EQ(Tableau::product_state(n).purity_exponent(), 0);
  EXPECT_THROW(Tableau::product_state(0), std::invalid_argument);
}

TEST(Tableau, PurityExponent) {
  EXPECT_EQ(Tableau::maximally_mixed(5).purity_exponent(), -5);
  auto bell = Tableau::from_generators(2, {PauliString::parse("XX"), PauliString::parse("ZZ")});
  EXPECT_EQ(bell.purity_exponent(), 0);
  bell.reset(0);
  EXPECT_EQ(bell.purity_exponent(), -1);
}

TEST(Tableau, FromGeneratorsValidates) {
  EXPECT_THROW(Tableau::from_generators(2, {PauliString::parse("XI"), PauliString::parse("ZI")}),
               hybridsim::InvariantViolation);
  EXPECT_THROW(Tableau::from_generators(2, {PauliString::parse("ZZ"), PauliString::parse("ZZ")}),
               hybridsim::InvariantViolation);
  EXPECT_THROW(Tableau::from_generators(2, {PauliString::parse("ZZZ")}), std::invalid_argument);
}

TEST(Tableau, HadamardMapsZToX) {
  auto t = Tableau::product_state(2);
  t.apply_gate(CliffordGate::hadamard0(), 0, 1);
  EXPECT_EQ(strs(t), (std::vector<std::string>{"+XI", "+IZ"}));
}

TEST(Tableau, CnotConjugation) {
  auto t = Tableau::from_generators(2, {PauliString::parse("XI"), PauliString::parse("IZ")});
  t.apply_gate(CliffordGate::cnot(), 0, 1);
  EXPECT_EQ(strs(t), (std::vector<std::string>{"+XX", "+ZZ"}));
}

TEST(Tableau, GateOnReversedSitesActsOnSecondSiteFirst) {
  auto t = Tableau::product_state(3);
  t.apply_gate(CliffordGate::hadamard0(), 2, 0);
  EXPECT_EQ(strs(t), (std::vector<std::string>{"+ZII", "+IZI", "+IIX"}));
}

TEST(Tableau, GateErrors) {
  auto t = Tableau::product_state(3);
  EXPECT_THROW(t.apply_gate(CliffordGate::cnot(), 1, 1), std::invalid_argument);
  EXPECT_THROW(t.apply_gate(CliffordGate::cnot(), 0, 3), std::out_of_range);
  std::mt19937_64 rng(0);
  EXPECT_THROW(t.measure_z(3, rng), std::out_of_range);
  EXPECT_THROW(t.reset(5), std::out_of_range);
}

TEST(Tableau, GateThenInverseRestoresTheGroup) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 70;
    const Tableau start = random_state(n, rng, 40);
    Tableau t = start;
    const auto g = hybridsim::sample_two_qubit_clifford(rng);
    const std::size_t i = rng() % n;
    std::size_t j = rng() % n;
    while (j == i) j = rng() % n;
    t.apply_gate(g, i, j);
    t.apply_gate(g.inverse(), i, j);
    EXPECT_TRUE(same_state(t, start));
  }
}

TEST(Tableau, MeasureEigenstateIsDeterministic) {
  auto t = Tableau::product_state(3);
  const auto before = t;
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto res = t.measure_z(0, rng);
    EXPECT_FALSE(res.outcome);
    EXPECT_EQ(res.kind, MeasurementCase::kDeterministic);
  }
  EXPECT_TRUE(same_state(t, before));
  // -Z on site 1 after an X flip
  auto flipped = Tableau::from_generators(2, {PauliString::parse("ZI"), PauliString::parse("-ZZ")});
  const auto res = flipped.measure_z(1, rng);
  EXPECT_TRUE(res.outcome);
  EXPECT_EQ(res.kind, MeasurementCase::kDeterministic);
}

TEST(Tableau, MeasurePlusStateReplacesGenerator) {
  std::mt19937_64 rng(6);
  for (int k = 0; k < 20; ++k) {
    auto t = Tableau::from_generators(1, {PauliString::parse("X")});
    const auto res = t.measure_z(0, rng);
    EXPECT_EQ(res.kind, MeasurementCase::kRandom);
    EXPECT_EQ(strs(t), std::vector<std::string>{res.outcome ? "-Z" : "+Z"});
  }
}

TEST(Tableau, MeasureMaximallyMixedAppends) {
  std::mt19937_64 rng(8);
  auto t = Tableau::maximally_mixed(1);
  const auto res = t.measure_z(0, rng);
  EXPECT_EQ(res.kind, MeasurementCase::kAppended);
  EXPECT_EQ(t.num_generators(), 1u);
  EXPECT_EQ(t.purity_exponent(), 0);
}

TEST(Tableau, BornStatisticsOnPlusState) {
  std::mt19937_64 rng(12345);
  int ones = 0;
  for (int k = 0; k < 10000; ++k) {
    auto t = Tableau::from_generators(1, {PauliString::parse("X")});
    ones += t.measure_z(0, rng).outcome;
  }
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(Tableau, DeterministicOutcomeOfEntangledGroupElement) {
  // (-Z0Z1)(Z1) = -Z0, so site 0 reads 1 with certainty
  auto t = Tableau::from_generators(2, {PauliString::parse("-ZZ"), PauliString::parse("IZ")});
  std::mt19937_64 rng(0);
  const auto res = t.measure_z(0, rng);
  EXPECT_EQ(res.kind, MeasurementCase::kDeterministic);
  EXPECT_TRUE(res.outcome);
  // YY anticommutes with Z0
  auto u = Tableau::from_generators(2, {PauliString::parse("YY"), PauliString::parse("XX")});
  EXPECT_TRUE(u.measure_z(0, rng).kind == MeasurementCase::kRandom);
}

TEST(Tableau, ResetBellPairQubit0) {
  auto t = Tableau::from_generators(2, {PauliString::parse("XX"), PauliString::parse("ZZ")});
  t.reset(0);
  EXPECT_EQ(strs(t), std::vector<std::string>{"+ZI"});
  EXPECT_EQ(t.purity_exponent(), -1);
}

TEST(Tableau, ResetFixedPoint) {
  auto t = Tableau::product_state(2);
  t.reset(0);
  EXPECT_TRUE(same_state(t, Tableau::product_state(2)));
}

TEST(Tableau, ResetClearsNegativeSign) {
  auto t = Tableau::from_generators(2, {PauliString::parse("-ZI"), PauliString::parse("IZ")});
  t.reset(0);
  EXPECT_TRUE(same_state(t, Tableau::product_state(2)));
}

TEST(Tableau, ResetEverySiteGivesProductState) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng() % 100;
    auto t = random_state(n, rng, 80);
    for (std::size_t k = 0; k < n; ++k) t.reset(k);
    EXPECT_EQ(t.num_generators(), n);
    EXPECT_TRUE(same_state(t, Tableau::product_state(n)));
  }
}

TEST(Tableau, ResetIsIdempotentAndBoundsGeneratorCount) {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 12;
    auto t = random_state(n, rng);
    const std::size_t site = rng() % n;
    const std::size_t before = t.num_generators();
    t.reset(site);
    EXPECT_LE(t.num_generators(), before + 1);
    EXPECT_GE(t.num_generators() + 1, before);
    auto twice = t;
    twice.reset(site);
    EXPECT_TRUE(same_state(t, twice));
  }
}

TEST(Tableau, ResultDoesNotDependOnTheGeneratingSet) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 10;
    auto a = random_state(n, rng);
    auto b = mixed_copy(a, rng);
    ASSERT_TRUE(same_state(a, b));
    const std::size_t site = rng() % n;
    switch (trial % 3) {
      case 0:
        a.reset(site);
        b.reset(site);
        break;
      case 1: {
        // fix the coin so both copies see the same random outcome
        const bool coin = rng() & 1;
        const auto ra = a.measure_z_with(site, [&] { return coin; });
        const auto rb = b.measure_z_with(site, [&] { return coin; });
        EXPECT_EQ(ra.outcome, rb.outcome);
        EXPECT_EQ(ra.kind, rb.kind);
        break;
      }
      default: {
        const auto g = hybridsim::sample_two_qubit_clifford(rng);
        a.apply_gate(g, site, (site + 1) % n);
        b.apply_gate(g, site, (site + 1) % n);
      }
    }
    EXPECT_TRUE(same_state(a, b));
  }
}

TEST(Tableau, InvariantsHoldAlongRandomHistories) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + rng() % 140;
    Tableau t = Tableau::product_state(n);
    for (int k = 0; k < 200; ++k) {
      const std::size_t i = rng() % n;
      switch (rng() % 4) {
        case 0: t.measure_z(i, rng); break;
        case 1: t.reset(i); break;
        default: t.apply_gate(hybridsim::sample_two_qubit_clifford(rng), i, (i + 1) % n);
      }
      ASSERT_NO_THROW(t.validate());
      ASSERT_LE(t.num_generators(), n);
    }
  }
}

}  // namespace
