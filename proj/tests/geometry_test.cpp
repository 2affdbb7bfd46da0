#include <gtest/gtest.h>

#include <set>

#include "padiq/geometry.hpp"
#include "support.hpp"

namespace padiq {
namespace {

Fiber balls(long radius, std::initializer_list<long> centers, long p) {
  Fiber f;
  for (long c : centers) f.emplace_back(radius, c, p);
  return f;
}

TEST(MaximalBalls, Examples) {
  for (long p : {2L, 3L}) {
    auto all = Ball(0, 0, p).subdivide(3);
    auto out = maximal_balls(all);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], Ball(0, 0, p));
  }
  EXPECT_EQ(maximal_balls({Ball(2, 5, 3)}), std::vector<Ball>{Ball(2, 5, 3)});
  auto out = maximal_balls(balls(2, {0, 1, 2}, 2));
  EXPECT_EQ(out, (std::vector<Ball>{Ball(1, 0, 2), Ball(2, 1, 2)}));
  EXPECT_TRUE(maximal_balls({}).empty());
}

TEST(MaximalBalls, RandomSubsetsAreExactCovers) {
  std::mt19937_64 rng(41);
  for (long p : {2L, 3L}) {
    auto cosets = Ball(-1, 0, p).subdivide(2);
    for (int it = 0; it < 100; ++it) {
      std::vector<Ball> pick;
      std::bernoulli_distribution coin(it % 2 ? 0.8 : 0.4);
      for (const Ball& c : cosets)
        if (coin(rng)) pick.push_back(c);
      auto out = maximal_balls(pick);
      std::set<Ball> picked(pick.begin(), pick.end());
      for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j) EXPECT_TRUE(out[i].disjoint(out[j]));
      for (const Ball& c : cosets) {
        bool covered = std::any_of(out.begin(), out.end(), [&](const Ball& b) { return b.contains(c); });
        EXPECT_EQ(covered, picked.count(c) == 1);
      }
      for (const Ball& b : out) {
        if (b.radius() <= -1) continue;
        auto sibs = b.parent().subdivide(2);
        bool parent_inside = std::all_of(sibs.begin(), sibs.end(), [&](const Ball& c) { return picked.count(c); });
        EXPECT_FALSE(parent_inside);
      }
    }
  }
}

TEST(Branching, Examples) {
  EXPECT_TRUE(branching_heights(balls(2, {0}, 3)).empty());
  EXPECT_EQ(branching_heights(balls(2, {0, 1}, 3)), (std::vector<long>{0}));
  EXPECT_EQ(branching_heights(balls(3, {0, 9, 1}, 3)), (std::vector<long>{2, 0}));
}

// The tree from the illustrative figure, realized at p = 5.
Fiber figure_tree() { return balls(3, {0, 25, 50, 1, 26, 6, 11, 36, 61, 86}, 5); }

TEST(Signature, FigureTree) {
  Fiber f = figure_tree();
  EXPECT_EQ(branching_heights(f), (std::vector<long>{2, 1, 0}));
  auto idx = [&](long c) {
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i].center() == c) return i;
    return f.size();
  };
  EXPECT_EQ(d_signature(f, idx(0), 3), (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(d_signature(f, idx(1), 3), (std::vector<int>{2, 3, 2}));
  EXPECT_EQ(d_signature(f, idx(1), 1), (std::vector<int>{2}));
  EXPECT_TRUE(d_signature(balls(2, {4}, 5), 0, 0).empty());
  try {
    d_signature(f, 0, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientDepth);
  }
  auto tree = SignatureTree::build(f);
  EXPECT_EQ(tree.heights(), (std::vector<long>{2, 1, 0}));
}

ClusteredCell cell_over(std::map<Point, Fiber> fibers, long radius, long alpha, long beta, long p) {
  std::size_t k = fibers.begin()->second.size();
  return ClusteredCell::make(MultiBall(k, radius, std::move(fibers)), AffineTerm(alpha), AffineTerm(beta), 1, 1, 1,
                             std::nullopt, FieldConfig(p));
}

TEST(PartitionBySignature, Examples) {
  FieldConfig f3(3);
  // Constant signature; single-height cells may branch above alpha.
  auto c1 = cell_over({{{0}, balls(4, {0, 1}, 3)}, {{1}, balls(4, {2, 4}, 3)}}, 4, 1, 3, 3);
  auto out1 = partition_by_signature(c1, f3);
  ASSERT_EQ(out1.size(), 1u);
  EXPECT_EQ(out1[0], c1);
  // Two signatures in every fiber.
  auto c2 = cell_over({{{0}, balls(3, {0, 3, 1}, 3)}, {{1}, balls(3, {1, 4, 2}, 3)}}, 3, 1, 3, 3);
  auto out2 = partition_by_signature(c2, f3);
  ASSERT_EQ(out2.size(), 2u);
  EXPECT_EQ(out2[0].sigma.order() + out2[1].sigma.order(), 3u);
  // Order one.
  auto c3 = cell_over({{{0}, balls(2, {5}, 3)}}, 2, 0, 2, 3);
  auto out3 = partition_by_signature(c3, f3);
  ASSERT_EQ(out3.size(), 1u);
  EXPECT_EQ(out3[0].tree_type, std::vector<int>{});
}

TEST(PartitionBySignature, FigureTreeRefinesToConstantSignatures) {
  FieldConfig f5(5);
  Fiber tree;
  for (const Ball& b : figure_tree()) tree.emplace_back(5, b.center(), 5);
  auto c = cell_over({{{0}, tree}}, 5, 3, 5, 5);
  EXPECT_FALSE(c.large);
  auto pieces = partition_by_signature(c, f5);
  std::size_t total = 0;
  for (const auto& piece : pieces) {
    ASSERT_TRUE(piece.tree_type.has_value());
    for (const auto& sig : signatures(piece.sigma.fiber({0}))) EXPECT_EQ(sig, *piece.tree_type);
    total += piece.sigma.order();
  }
  EXPECT_EQ(total, 10u);
}

TEST(ClusteredCell, Validation) {
  FieldConfig f3(3);
  // A large cell branching at alpha.
  EXPECT_THROW(cell_over({{{0}, balls(4, {0, 1}, 3)}}, 4, 0, 4, 3), Error);
  // Sigma radius too small to resolve leaves.
  EXPECT_THROW(cell_over({{{0}, balls(2, {0, 1}, 3)}}, 2, -2, 4, 3), Error);
  Fiber f{Ball(4, 0, 3), Ball(4, Rational(1, 3), 3)};
  auto ok = cell_over({{{0}, f}}, 4, 0, 4, 3);
  EXPECT_TRUE(ok.large);
  EXPECT_EQ(ok.tree_type, std::vector<int>{2});
  EXPECT_TRUE(ok.contains({0}, 3, f3));
  EXPECT_TRUE(ok.contains({0}, Rational(1, 3) + 9, f3));
  EXPECT_FALSE(ok.contains({0}, 6, f3));
  EXPECT_FALSE(ok.contains({0}, 81, f3));
  EXPECT_EQ(ok.leaves({0}, f3).size(), 6u);
}

TEST(Leaves, Examples) {
  FieldConfig f3(3);
  ClassicalCell c{AffineTerm(0), AffineTerm(0), std::nullopt, 1, 1, 1};
  auto ls = leaves(c, {}, 1, 1, f3);
  ASSERT_EQ(ls.size(), 1u);
  EXPECT_EQ(ls[0], (Leaf{1, Ball(2, 3, 3)}));
  EXPECT_TRUE(leaves(c, {}, -5, 0, f3).empty());
  ClassicalCell degenerate = c;
  degenerate.lambda = 0;
  try {
    leaves(degenerate, {}, 0, 3, f3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCell);
  }
}

TEST(Leaves, LeafIsExactlyTheCellAtItsHeight) {
  std::mt19937_64 rng(43);
  for (long p : {2L, 3L}) {
    FieldConfig cfg(p);
    for (int it = 0; it < 30; ++it) {
      std::uniform_int_distribution<long> small(1, 3);
      ClassicalCell c{AffineTerm(testing::random_padic(rng, p, -1, 2)), AffineTerm(-2), AffineTerm(3),
                      testing::random_nonzero(rng, p, -1, 1), small(rng), small(rng)};
      for (const Leaf& l : leaves(c, {}, -5, 5, cfg)) {
        auto sub = l.ball.parent().parent().subdivide(l.ball.radius());
        Rational center = c.center.eval({});
        for (const Ball& b : sub)
          if (valuation(b.center() - center, p) == Valuation(l.height))
            EXPECT_EQ(c.contains({}, b.center(), cfg), b == l.ball);
      }
    }
  }
}

TEST(TriangleOrder, Examples) {
  EXPECT_TRUE(triangle_less(-1, 1));
  EXPECT_FALSE(triangle_less(2, -2));
  EXPECT_TRUE(triangle_less(-2, 2));
  EXPECT_FALSE(triangle_less(5, 5));
  EXPECT_TRUE(triangle_less(0, -1));
  EXPECT_FALSE(triangle_less(0, 0));
}

TEST(TriangleOrder, StrictTotalOrderWithZeroFirst) {
  for (long t = 0; t <= 6; ++t) {
    std::vector<long> xs;
    for (long x = -t; x <= t; ++x) xs.push_back(x);
    long best = xs[0];
    for (long x : xs)
      if (triangle_less(x, best)) best = x;
    EXPECT_EQ(best, 0);
    for (long a : xs)
      for (long b : xs) {
        EXPECT_FALSE(triangle_less(a, b) && triangle_less(b, a));
        if (a != b) EXPECT_TRUE(triangle_less(a, b) || triangle_less(b, a));
        for (long c : xs)
          if (triangle_less(a, b) && triangle_less(b, c)) EXPECT_TRUE(triangle_less(a, c));
      }
  }
}

TEST(GammaRun, MinTriangle) {
  EXPECT_EQ(GammaRun({1, 2, std::nullopt, std::nullopt}).min_triangle(), -1);
  EXPECT_EQ(GammaRun({0, 3, 4, std::nullopt}).min_triangle(), 6);
  EXPECT_EQ(GammaRun({1, 3, std::nullopt, -3}).min_triangle(), -5);
  EXPECT_EQ(GammaRun({2, 5, -20, 20}).min_triangle(), 2);
  EXPECT_TRUE(GammaRun({0, 4, 1, 3}).empty());
}

GammaMultiBall::Table alternating(long lo, long hi) {
  GammaMultiBall::Table t;
  for (long g = lo; g <= hi; ++g) t[{0}][g] = {Ball(1, mod(g, 2), 3)};
  return t;
}

TEST(PartitionConstantFibers, Examples) {
  GammaMultiBall constant(1, 1, [] {
    GammaMultiBall::Table t;
    for (long g = 0; g <= 9; ++g) t[{0}][g] = {Ball(1, 2, 3)};
    return t;
  }(), std::nullopt);
  GammaCell x{{{0}}, AffineTerm(-1), AffineTerm(10), 0, 1};
  auto p1 = partition_constant_fibers(constant, x);
  ASSERT_EQ(p1.at({0}).size(), 1u);
  EXPECT_EQ(p1.at({0})[0].delta, 0);

  GammaMultiBall alt(1, 1, alternating(0, 9), std::nullopt);
  auto p2 = partition_constant_fibers(alt, x).at({0});
  ASSERT_EQ(p2.size(), 2u);
  EXPECT_EQ(p2[0].delta, 0);
  EXPECT_EQ(p2[1].delta, 1);
  for (long g = 0; g <= 9; ++g) EXPECT_EQ(contains(p2[0].gammas, g), g % 2 == 0);

  GammaCell empty{{{0}}, AffineTerm(5), AffineTerm(5), 0, 1};
  EXPECT_TRUE(partition_constant_fibers(alt, empty).empty());
}

TEST(PartitionConstantFibers, CertifiedInfiniteDomain) {
  auto rule = [](const Point&, long g) -> Fiber {
    if (g < 0) return {Ball(1, 4, 5)};
    return {Ball(1, mod(g, 3), 5)};
  };
  auto a = GammaMultiBall::from_rule(1, 1, {{0}}, rule, -4, 6, StabilityCertificate{0, std::nullopt, 3});
  // Downward part is not certified.
  GammaCell up{{{0}}, AffineTerm(-3), std::nullopt, 0, 1};
  auto pieces = partition_constant_fibers(a, {0}, up.fiber({0}));
  ASSERT_EQ(pieces.size(), 4u);
  EXPECT_EQ(pieces[0].delta, 0);
  EXPECT_EQ(pieces[1].delta, -1);
  EXPECT_EQ(pieces[2].delta, 1);
  EXPECT_EQ(pieces[3].delta, 2);
  for (long g = -2; g <= 40; ++g) {
    int hits = 0;
    for (const auto& pc : pieces)
      if (contains(pc.gammas, g)) {
        ++hits;
        EXPECT_EQ(pc.value, rule({0}, g));
      }
    EXPECT_EQ(hits, 1) << g;
  }
  GammaCell down{{{0}}, std::nullopt, AffineTerm(3), 0, 1};
  EXPECT_THROW(partition_constant_fibers(a, {0}, down.fiber({0})), Error);
}

TEST(PartitionConstantFibers, CertificateViolation) {
  auto t = alternating(0, 9);
  t[{0}][7] = {Ball(1, 2, 3)};
  try {
    GammaMultiBall bad(1, 1, t, StabilityCertificate{2, std::nullopt, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidParametricMultiball);
  }
}

TEST(CountB1Cover, Examples) {
  GammaMultiBall::Table t;
  for (long g = 0; g <= 5; ++g) t[{0}][g] = {Ball(1, 1, 5), Ball(1, 2, 5)};
  EXPECT_EQ(count_b1_cover(GammaMultiBall(2, 1, t, std::nullopt), {0}), 2u);
  GammaMultiBall::Table cyc;
  for (long g = 0; g < 3; ++g) cyc[{0}][g] = {Ball(1, 2 * g, 7), Ball(1, 2 * g + 1, 7)};
  GammaMultiBall c(2, 1, cyc, StabilityCertificate{0, std::nullopt, 3});
  EXPECT_EQ(count_b1_cover(c, {0}), 6u);
  EXPECT_EQ(count_b1_cover(c, {0}, -10, 50), 6u);
  GammaMultiBall::Table big;
  big[{0}][0] = {Ball(0, 0, 3)};
  EXPECT_EQ(count_b1_cover(GammaMultiBall(1, 0, big, std::nullopt), {0}), 3u);
}

}  // namespace
}  // namespace padiq
