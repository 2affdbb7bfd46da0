#pragma once

// Random inputs shared by the unit tests and the acceptance runner.

#include <random>
#include <set>

#include "padiq/integrator.hpp"
#include "padiq/oracle.hpp"
#include "support.hpp"

namespace padiq::testing {

inline long uniform(std::mt19937_64& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

// Bounded classical cell over a one-point base.
inline ClassicalCell random_bounded_cell(std::mt19937_64& rng, long p) {
  ClassicalCell c;
  c.center = AffineTerm(random_padic(rng, p, -2, 2));
  long a = uniform(rng, -3, 2);
  c.alpha = AffineTerm(a);
  c.beta = AffineTerm(a + uniform(rng, 2, 6));
  c.lambda = random_nonzero(rng, p, 0, 1);
  c.n = uniform(rng, 1, 2);
  c.m = uniform(rng, 1, 2);
  return c;
}

inline ClassicalCell random_unbounded_cell(std::mt19937_64& rng, long p) {
  ClassicalCell c = random_bounded_cell(rng, p);
  c.beta.reset();
  return c;
}

// Clustered cell with k <= 4 centers per fiber over a base of 1-3 points.
// Retries until valid.
inline ClusteredCell random_clustered_cell(std::mt19937_64& rng, long p) {
  for (;;) {
    long m = uniform(rng, 1, 2);
    long alpha = uniform(rng, -2, 2);
    long beta = alpha + uniform(rng, 2, 4);
    long radius = beta - 1 + m;
    std::map<Point, Fiber> fibers;
    std::size_t k = static_cast<std::size_t>(uniform(rng, 1, 4));
    long points = uniform(rng, 1, 3);
    for (long s = 0; s < points; ++s) {
      std::set<Ball> balls;
      // Centers spread out below alpha for large cells, or close for small ones.
      bool spread = uniform(rng, 0, 1) == 0;
      long top = spread ? alpha - 1 : radius;
      while (balls.size() < k) balls.insert(Ball(radius, random_padic(rng, p, alpha - 3, std::max(top, alpha - 2)), p));
      fibers[{s}] = Fiber(balls.begin(), balls.end());
    }
    try {
      return ClusteredCell::make(MultiBall(k, radius, fibers), AffineTerm(alpha), AffineTerm(beta),
                                 random_nonzero(rng, p, 0, 1), 1, m, std::nullopt, FieldConfig(p));
    } catch (const Error&) {
    }
  }
}

// Radius-1 balls with no complete sibling family among them.
inline Fiber random_fiber(std::mt19937_64& rng, long p, std::size_t k) {
  std::set<Ball> s;
  std::map<Ball, std::size_t> family;
  while (s.size() < k) {
    Ball b(1, random_padic(rng, p, -2, 0), p);
    if (s.count(b) || family[b.parent()] + 1 >= static_cast<std::size_t>(p)) continue;
    ++family[b.parent()];
    s.insert(b);
  }
  return Fiber(s.begin(), s.end());
}

// Up to three terms over a one-coordinate base table.
inline ExpStarExpr random_expr(std::mt19937_64& rng, long p, const std::vector<Point>& base) {
  using E = ConstructibleExpr;
  std::uniform_int_distribution<int> nterms(1, 3), kind(0, 2), ord(1, 3), small(-3, 3);
  std::vector<ExpStarTerm> terms;
  int n = nterms(rng);
  for (int i = 0; i < n; ++i) {
    E h;
    switch (kind(rng)) {
      case 0: h = E(frac(small(rng), 2)); break;
      case 1: {
        TableAtom t{{0}, {}, std::nullopt};
        for (const Point& x : base) t.values[x] = small(rng);
        h = E::table(t);
        break;
      }
      default: h = E::power(E::ord(AffineTerm::variable(0))) * E(small(rng));
    }
    if (kind(rng) == 0) {
      terms.push_back({h, AffineMultiBall{{AffineTerm::variable(0, frac(small(rng), p)) + AffineTerm(frac(1, p))}}});
      continue;
    }
    std::size_t k = ord(rng);
    std::map<Point, Fiber> fibers;
    for (const Point& x : base) fibers[x] = random_fiber(rng, p, k);
    terms.push_back({h, TabulatedMultiBall{MultiBall(k, 1, std::move(fibers)), 1}});
  }
  return ExpStarExpr(std::move(terms));
}

// Ten nonzero points.
inline std::vector<Point> random_base(std::mt19937_64& rng, long p) {
  std::set<Point> s;
  while (s.size() < 10) s.insert({random_nonzero(rng, p, -2, 3)});
  return {s.begin(), s.end()};
}

// The same, partitioned into cells with a fixed tree type.
inline std::vector<ClusteredCell> random_clustered_cells(std::mt19937_64& rng, long p) {
  return partition_by_signature(random_clustered_cell(rng, p), FieldConfig(p));
}

// psi integrated over a clustered cell by coset enumeration.
inline CyclotomicNumber clustered_oracle(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg) {
  return oracle_char_cell(cell, s, cfg);
}

}  // namespace padiq::testing
