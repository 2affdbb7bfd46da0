#include <gtest/gtest.h>

#include <random>

#include "padiq/oracle.hpp"
#include "support.hpp"

namespace padiq {
namespace {

TEST(Oracle, IntegralExamples) {
  FieldConfig f3(3);
  EXPECT_EQ(brute_force_integral(psi_integrand(), everywhere(), CosetGrid{0, 1, 1}, f3), CyclotomicNumber(0));
  std::vector<OracleRegion> r{{{Ball(1, 0, 3)}, 2}};
  EXPECT_EQ(brute_force_integral(psi_integrand(), everywhere(), r, f3), CyclotomicNumber(frac(1, 3)));
  for (long p : {2L, 3L, 5L}) {
    FieldConfig cfg(p);
    EXPECT_EQ(brute_force_integral(constant_integrand(1), everywhere(), CosetGrid{0, 1, 1}, cfg),
              CyclotomicNumber(1));
    EXPECT_EQ(brute_force_integral(constant_integrand(1), everywhere(), CosetGrid{0, 1, 2}, cfg),
              CyclotomicNumber(1));
  }
}

TEST(Oracle, RefinementAndBudget) {
  FieldConfig f3(3);
  Integrand coarse = [](const Point& x, const Rational& w, CyclotomicAccumulator& acc) {
    acc.add_root(psi_exponent(x[0] / 3, 3), w);
  };
  try {
    brute_force_integral(coarse, everywhere(), CosetGrid{0, 1, 1}, f3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientLevel);
  }
  EXPECT_EQ(brute_force_integral(coarse, everywhere(), CosetGrid{0, 2, 1}, f3), CyclotomicNumber(0));
  OracleOptions small;
  small.budget = 100;
  try {
    brute_force_integral(psi_integrand(), everywhere(), CosetGrid{0, 5, 1}, f3, small);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BudgetExceeded);
  }
}

TEST(Oracle, LevelStabilityAndAdditivity) {
  std::mt19937_64 rng(3);
  for (long p : {2L, 3L, 5L}) {
    FieldConfig cfg(p);
    for (int trial = 0; trial < 10; ++trial) {
      Ball b = testing::random_ball(rng, p, std::uniform_int_distribution<long>(-1, 2)(rng));
      Member inside = [&](const Point& x) { return b.contains(x[0]); };
      long M = std::max(0L, -b.radius());
      long N = std::max(b.radius(), 1L);
      auto v1 = brute_force_integral(psi_integrand(), inside, CosetGrid{M, N, 1}, cfg);
      auto v2 = brute_force_integral(psi_integrand(), inside, CosetGrid{M, N + 1, 1}, cfg);
      EXPECT_EQ(v1, v2);
      // Sum over the p sub-cosets of the region.
      CyclotomicNumber parts;
      for (const Ball& c : Ball(-M, 0, p).children())
        parts += brute_force_integral(psi_integrand(), inside, std::vector<OracleRegion>{{{c}, N}}, cfg);
      EXPECT_EQ(parts, v1);
    }
  }
}

TEST(Oracle, PermutationIdentity) {
  // Multiplying a full coset family by a unit g permutes it.
  for (long p : {2L, 3L, 5L}) {
    for (long g = 1; g < p; ++g) {
      CyclotomicNumber sum, shifted;
      for (long b = 0; b < p; ++b) {
        sum += psi_point(b, p);
        shifted += psi_point(g * b, p);
      }
      EXPECT_EQ(sum, shifted);
      EXPECT_EQ(sum, CyclotomicNumber(0));
    }
  }
}

TEST(Oracle, TruncatedZSumExamples) {
  FieldConfig f3(3);
  auto geo = [](long z) { return CyclotomicNumber(rpow(3, -z)); };
  for (long T : {10L, 20L}) {
    auto r = truncated_zsum(geo, 0, std::nullopt, T, ZSumEnvelope{-1, 0, 1}, f3);
    EXPECT_EQ(r.value, CyclotomicNumber(frac(3, 2) - rpow(3, -T) / 2));
    EXPECT_TRUE(within_bound(CyclotomicNumber(frac(3, 2)), r.value, r.tail_bound));
  }
  auto fin = truncated_zsum(geo, 0, 4, 10, std::nullopt, f3);
  EXPECT_EQ(fin.tail_bound, 0);
  auto zero = truncated_zsum([](long) { return CyclotomicNumber(); }, 0, std::nullopt, 10, ZSumEnvelope{-1, 0, 0}, f3);
  EXPECT_EQ(zero.value, CyclotomicNumber(0));
  EXPECT_EQ(zero.tail_bound, 0);
  // zeta^2 3^{-zeta}: closed form 3/2 * (1 + 1/3) / (2/3)^2 * 1/3 = 3/2
  auto quad = [](long z) { return CyclotomicNumber(rpow(3, -z) * z * z); };
  auto rq = truncated_zsum(quad, 0, std::nullopt, 20, ZSumEnvelope{-1, 2, 1}, f3);
  EXPECT_TRUE(within_bound(CyclotomicNumber(frac(3, 2)), rq.value, rq.tail_bound));
  EXPECT_FALSE(rq.tail_bound == 0);
}

TEST(Oracle, SufficiencyLevelExamples) {
  EXPECT_EQ(sufficiency_level(LevelDescriptor{true, {}, {}}), 1);
  ClassicalCell cell;
  cell.m = 2;
  EXPECT_EQ(sufficiency_level(cell, {}, 3, 3), 5);
  EXPECT_EQ(sufficiency_level(LevelDescriptor{}), 1);
}

TEST(Oracle, CellOracleReproducesOneSixth) {
  FieldConfig f3(3);
  ClassicalCell cell;
  cell.alpha = AffineTerm(0);
  for (long T : {8L, 12L}) {
    auto r = oracle_char_cell(cell, {}, T, f3);
    EXPECT_TRUE(within_bound(CyclotomicNumber(frac(1, 6)), r.value, r.tail_bound));
  }
}

}  // namespace
}  // namespace padiq
