#include <gtest/gtest.h>

#include "padiq/padic.hpp"
#include "support.hpp"

namespace padiq {
namespace {

constexpr int kIterations = 200;

TEST(Valuation, Examples) {
  EXPECT_TRUE(valuation(Rational(0), 2).is_infinite());
  EXPECT_EQ(valuation(Rational(12), 2), Valuation(2));
  EXPECT_EQ(valuation(Rational(1, 3), 3), Valuation(-1));
  EXPECT_LT(Valuation(100), Valuation::infinity());
}

TEST(Valuation, MultiplicativeAndUltrametric) {
  std::mt19937_64 rng(7);
  for (long p : {2L, 3L, 5L}) {
    for (int i = 0; i < kIterations; ++i) {
      Rational x = testing::random_rational(rng, p, -3, 3);
      Rational y = testing::random_rational(rng, p, -3, 3);
      if (x == 0 || y == 0) continue;
      EXPECT_EQ(valuation(x * y, p).value(), valuation(x, p).value() + valuation(y, p).value());
      Valuation vx = valuation(x, p), vy = valuation(y, p), vs = valuation(x + y, p);
      EXPECT_GE(vs, std::min(vx, vy));
      if (vx != vy) {
        EXPECT_EQ(vs, std::min(vx, vy));
      }
    }
  }
}

TEST(AngularComponent, Examples) {
  FieldConfig f3(3);
  EXPECT_EQ(angular_component(6, 1, f3), 2);
  EXPECT_EQ(angular_component(0, 3, f3), 0);
  EXPECT_EQ(angular_component(1, 2, f3), 1);
  EXPECT_EQ(angular_component(Rational(1, 2), 2, f3), 5);  // 1/2 = 5 mod 9
  EXPECT_THROW(angular_component(1, 25, f3), Error);
}

TEST(AngularComponent, Multiplicative) {
  std::mt19937_64 rng(11);
  for (long p : {2L, 3L, 5L}) {
    FieldConfig cfg(p);
    for (int i = 0; i < kIterations; ++i) {
      Rational x = testing::random_rational(rng, p, -2, 2);
      Rational y = testing::random_rational(rng, p, -2, 2);
      if (x == 0 || y == 0) continue;
      long m = 1 + i % 4;
      Integer mod = ipow(p, static_cast<unsigned long>(m));
      Integer prod = angular_component(x, m, cfg) * angular_component(y, m, cfg);
      mpz_fdiv_r(prod.get_mpz_t(), prod.get_mpz_t(), mod.get_mpz_t());
      EXPECT_EQ(angular_component(x * y, m, cfg), prod);
    }
  }
}

TEST(InQnm, Examples) {
  FieldConfig f3(3);
  EXPECT_TRUE(in_Qnm(1, 2, 3, f3));
  EXPECT_FALSE(in_Qnm(0, 1, 1, f3));
  EXPECT_FALSE(in_Qnm(3, 2, 1, f3));
  EXPECT_TRUE(in_Qnm(9, 2, 1, f3));
  EXPECT_FALSE(in_Qnm(2, 1, 1, f3));
  EXPECT_TRUE(in_Qnm(4, 1, 1, f3));
  EXPECT_FALSE(in_Qnm(4, 1, 2, f3));
}

TEST(Ball, CanonicalCenter) {
  EXPECT_EQ(Ball(1, 4, 3).center(), 1);
  EXPECT_EQ(Ball(2, -1, 3).center(), 8);
  EXPECT_EQ(Ball(-1, Rational(7, 9), 3).center(), Rational(1, 9));
  EXPECT_EQ(Ball(0, Rational(1, 2), 3).center(), 0);
  EXPECT_EQ(Ball(1, Rational(1, 2), 3).center(), 2);
}

TEST(Ball, TranslationInvariance) {
  std::mt19937_64 rng(3);
  for (long p : {2L, 3L, 5L}) {
    for (int i = 0; i < kIterations; ++i) {
      long g = i % 7 - 3;
      Rational a = testing::random_rational(rng, p, -3, 3);
      std::uniform_int_distribution<long> t(-100, 100);
      EXPECT_EQ(Ball(g, a, p), Ball(g, a + rpow(p, g) * t(rng), p));
      EXPECT_TRUE(Ball(g, a, p).contains(a));
    }
  }
}

TEST(Ball, ContainmentAndChildren) {
  Ball b(0, 0, 3);
  auto kids = b.children();
  ASSERT_EQ(kids.size(), 3u);
  for (const Ball& k : kids) {
    EXPECT_TRUE(b.contains(k));
    EXPECT_EQ(k.parent(), b);
  }
  EXPECT_TRUE(kids[0].disjoint(kids[1]));
  EXPECT_FALSE(b.disjoint(kids[2]));
  EXPECT_EQ(b.volume(), 1);
  EXPECT_EQ(Ball(2, 0, 3).volume(), Rational(1, 9));
}

TEST(BallSum, Examples) {
  EXPECT_EQ(ball_sum(Ball(1, 0, 3), Ball(1, 1, 3)), Ball(1, 1, 3));
  EXPECT_EQ(ball_sum(Ball(1, 1, 3), Ball(1, 2, 3)), Ball(1, 0, 3));
  EXPECT_EQ(ball_sum(Ball(1, 2, 5), Ball(1, 0, 5)), Ball(1, 2, 5));
  EXPECT_THROW(ball_sum(Ball(1, 0, 3), Ball(2, 0, 3)), Error);
}

TEST(BallSum, CommutativeAssociative) {
  std::mt19937_64 rng(5);
  for (long p : {2L, 3L, 5L}) {
    for (int i = 0; i < kIterations; ++i) {
      long g = i % 5 - 1;
      Ball a = testing::random_ball(rng, p, g), b = testing::random_ball(rng, p, g),
           c = testing::random_ball(rng, p, g);
      EXPECT_EQ(ball_sum(a, b), ball_sum(b, a));
      EXPECT_EQ(ball_sum(ball_sum(a, b), c), ball_sum(a, ball_sum(b, c)));
    }
  }
}

TEST(FieldConfig, RejectsBadInput) {
  EXPECT_THROW(FieldConfig(4), Error);
  EXPECT_THROW(FieldConfig(3, 1), Error);
  EXPECT_NO_THROW(FieldConfig(5, 2));
}

}  // namespace
}  // namespace padiq
