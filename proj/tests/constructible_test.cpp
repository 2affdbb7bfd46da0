#include <gtest/gtest.h>

#include <random>

#include "padiq/constructible.hpp"

namespace padiq {
namespace {

using E = ConstructibleExpr;

E var(std::size_t i) { return E::affine(AffineTerm::variable(i)); }

TEST(Constructible, EvalExamples) {
  FieldConfig f3(3);
  EXPECT_EQ(E(Rational(5, 3)).eval({}, f3), Rational(5, 3));
  EXPECT_EQ(E::power(E::ord(AffineTerm::variable(0))).eval({9}, f3), 9);
  EXPECT_EQ((E(2) + E::power(1)).eval({}, f3), 5);
  EXPECT_EQ(E::zdiv(AffineTerm::variable(0) - AffineTerm(1), 3).eval({7}, f3), 2);
  try {
    E::zdiv(AffineTerm::variable(0), 3).eval({7}, f3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfCell);
  }
  EXPECT_THROW(E::ord(AffineTerm::variable(0)).eval({0}, f3), Error);
  TableAtom t{{0}, {{{1}, 4}}, std::nullopt};
  EXPECT_EQ(E::table(t).eval({1, 5}, f3), 4);
  EXPECT_THROW(E::table(t).eval({2}, f3), Error);
}

TEST(GammaPoly, ExpansionExamples) {
  FieldConfig f3(3);
  // Coordinate 0 carries gamma; zeta = gamma with offset 0, modulus 1.
  E z = var(0);
  auto t1 = to_gamma_poly(E::power(E(-1) * z) * z, {0}, 0, 0, 1, f3);
  ASSERT_EQ(t1.size(), 1u);
  EXPECT_EQ(t1[0].slope, -1);
  EXPECT_EQ(t1[0].coeffs, (std::vector<Rational>{0, 1}));
  auto t2 = to_gamma_poly((z + E(1)) * (z - E(1)) * E::power(0), {0}, 0, 0, 1, f3);
  ASSERT_EQ(t2.size(), 1u);
  EXPECT_EQ(t2[0].slope, 0);
  EXPECT_EQ(t2[0].coeffs, (std::vector<Rational>{-1, 0, 1}));
  auto t3 = to_gamma_poly(E::power(E(-1) * z) + E::power(E(-1) * z) * z, {0}, 0, 0, 1, f3);
  ASSERT_EQ(t3.size(), 1u);
  EXPECT_EQ(t3[0].slope, -1);
  EXPECT_EQ(t3[0].coeffs, (std::vector<Rational>{1, 1}));
  // Cancelling slopes disappear.
  EXPECT_TRUE(to_gamma_poly(E::power(z) - E::power(z), {0}, 0, 0, 1, f3).empty());
  EXPECT_THROW(to_gamma_poly(E::power(z * z), {0}, 0, 0, 1, f3), Error);
  EXPECT_THROW(to_gamma_poly(E::ord(AffineTerm::variable(0)), {0}, 0, 0, 1, f3), Error);
}

TEST(GammaPoly, ExpansionMatchesEvaluation) {
  std::mt19937_64 rng(53);
  std::uniform_int_distribution<long> small(-3, 3);
  for (long p : {2L, 3L, 5L}) {
    FieldConfig cfg(p);
    for (int it = 0; it < 100; ++it) {
      // Point (s, gamma) with s at 0 and gamma at 1.
      E s = var(0), g = var(1);
      long l = small(rng), m = 1 + (it % 3);
      long zmod = m * (1 + it % 2);
      E e = E::power(E(small(rng)) * g + s) * (g + E(small(rng))) +
            E(frac(small(rng), 2 + it % 3)) * E::power(E(-2) * g) * g * g +
            E::zdiv(AffineTerm::variable(1) - AffineTerm(l), zmod / m == 1 ? m : m) * E::ord(AffineTerm::variable(0));
      long sv = small(rng);
      if (sv == 0) sv = 1;
      auto terms = to_gamma_poly(e, {sv, 0}, 1, l, m, cfg);
      for (long zeta = -4; zeta <= 4; ++zeta)
        EXPECT_EQ(eval_gamma_poly(terms, zeta, cfg), e.eval({sv, l + m * zeta}, cfg));
    }
  }
}

TEST(SumGammaPoly, Examples) {
  FieldConfig f3(3);
  EXPECT_EQ(sum_gamma_poly({-1, {1}, 0, 1}, {0, std::nullopt}, f3), Rational(3, 2));
  EXPECT_EQ(sum_gamma_poly({-1, {0, 1}, 0, 1}, {0, std::nullopt}, f3), Rational(3, 4));
  EXPECT_EQ(sum_gamma_poly({0, {0, 1}, 0, 1}, {0, 2}, f3), 3);
  EXPECT_EQ(sum_gamma_poly({1, {1}, 0, 1}, {std::nullopt, -1}, f3), Rational(1, 2));
  try {
    sum_gamma_poly({0, {1}, 0, 1}, {0, std::nullopt}, f3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonIntegrable);
  }
  EXPECT_EQ(sum_gamma_poly({2, {0}, 0, 1}, {0, std::nullopt}, f3), 0);
}

TEST(SumGammaPoly, ClosedFormsMatchDirectSums) {
  std::mt19937_64 rng(59);
  std::uniform_int_distribution<long> c(-4, 4);
  for (long p : {2L, 3L}) {
    FieldConfig cfg(p);
    for (long a : {-2L, -1L, 0L, 1L}) {
      GammaPolyTerm t{a, {c(rng), c(rng), c(rng), 1}, 0, 1};
      long lo = -2100, hi = 2500;
      Rational direct = 0;
      for (long z = lo; z <= hi; ++z) direct += t.eval_zeta(z, cfg);
      EXPECT_EQ(sum_gamma_poly(t, {lo, hi}, cfg), direct) << a;
    }
  }
}

TEST(SumGammaPoly, InfiniteSumsAgreeWithTruncations) {
  FieldConfig f2(2);
  for (std::size_t k = 0; k <= 5; ++k) {
    std::vector<Rational> coeffs(k + 1);
    coeffs[k] = 1;
    GammaPolyTerm up{-1, coeffs, 0, 1};
    Rational closed = sum_gamma_poly(up, {3, std::nullopt}, f2);
    Rational partial = sum_gamma_poly(up, {3, 400}, f2);
    Rational diff = closed - partial;
    EXPECT_GT(diff, 0);
    EXPECT_LT(diff, rpow(2, -300));
    GammaPolyTerm down{1, coeffs, 0, 1};
    Rational closed_down = sum_gamma_poly(down, {std::nullopt, -3}, f2);
    Rational partial_down = sum_gamma_poly(down, {-400, -3}, f2);
    EXPECT_LT(abs(closed_down - partial_down), rpow(2, -300));
  }
}

TEST(SumGammaPoly, Linearity) {
  FieldConfig f5(5);
  GammaPolyTerm a{-1, {1, 2}, 0, 1}, b{-1, {0, 0, 3}, 0, 1}, ab{-1, {1, 2, 3}, 0, 1};
  ZetaRange r{2, std::nullopt};
  EXPECT_EQ(sum_gamma_poly(a, r, f5) + sum_gamma_poly(b, r, f5), sum_gamma_poly(ab, r, f5));
}

TEST(Poly, PowerSums) {
  // sum_{u<10} u^3 = 2025
  EXPECT_EQ(poly::power_sum({0, 0, 0, 1}, 10), 2025);
  EXPECT_EQ(poly::power_sum({1}, 7), 7);
  EXPECT_EQ(poly::shift({0, 0, 1}, 2), (poly::Poly{4, 4, 1}));
}

TEST(Constructible, PrintsStructure) {
  E e = E::power(E(-2) * E::ord(AffineTerm::variable(0))) * (var(1) + E(Rational(-1, 3)));
  EXPECT_EQ(e.to_string({"x", "g"}), "q^(-2 * ord(x)) * (g + -1/3)");
  EXPECT_EQ(E::zdiv(AffineTerm::variable(1) - AffineTerm(2), 3).to_string({"x", "g"}), "zdiv(g - 2, 3)");
}

}  // namespace
}  // namespace padiq
