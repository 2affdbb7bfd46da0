#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "padiq/cyclotomic.hpp"
#include "padiq/geometry.hpp"

namespace padiq {

// Region p^{-M} Z_p in each of `dim` coordinates, cut into level-N cosets.
struct CosetGrid {
  long M = 0;
  long N = 1;
  std::size_t dim = 1;
};

// A box of balls (one per coordinate) enumerated at a common level.
struct OracleRegion {
  std::vector<Ball> box;
  long level;
};

struct OracleOptions {
  bool check_refinement = true;
  std::size_t refinement_samples = 48;
  unsigned threads = 0;  // 0: hardware concurrency
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> budget;  // default: oracle_budget()
};

// Adds weight * f(x) to acc.
using Integrand = std::function<void(const Point& x, const Rational& weight, CyclotomicAccumulator& acc)>;
using Member = std::function<bool(const Point& x)>;

// PADIQ_ORACLE_BUDGET, default 10^7 representative evaluations.
std::uint64_t oracle_budget();

Integrand psi_integrand(std::size_t index = 0);
Integrand constant_integrand(const Rational& c);
Integrand value_integrand(std::function<CyclotomicNumber(const Point&)> f);
Member everywhere();

// q^{-nN} * sum over level-N coset representatives x with member(x) of f(x).
// With check_refinement, sampled cosets are split one level further and every
// child must agree with its parent, else InsufficientLevel.
CyclotomicNumber brute_force_integral(const Integrand& f, const Member& member, const CosetGrid& grid,
                                      const FieldConfig& cfg, const OracleOptions& opts = {});
CyclotomicNumber brute_force_integral(const Integrand& f, const Member& member,
                                      const std::vector<OracleRegion>& regions, const FieldConfig& cfg,
                                      const OracleOptions& opts = {});

// Shells {ord(x - c) = gamma} for gamma in [from, to], each as p - 1 balls of
// radius gamma + 1 enumerated at level max(gamma + depth, 1).
std::vector<OracleRegion> annular_tiling(const Rational& c, long from, long to, long depth, long p);

// Distinct balls reduced to the maximal ones, one region each.
std::vector<OracleRegion> ball_regions(const std::vector<Ball>& balls, long level);

struct OracleValue {
  CyclotomicNumber value;
  Rational tail_bound;  // |exact - value| <= tail_bound
};

// psi over a classical cell with a lower bound, truncated at height T when the
// cell is unbounded above. Tail bound q^{-(T+m)} q/(q-1).
OracleValue oracle_char_cell(const ClassicalCell& cell, const Point& s, long T, const FieldConfig& cfg,
                             const OracleOptions& opts = {});
CyclotomicNumber oracle_char_cell(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg,
                                  const OracleOptions& opts = {});

// |f(zeta)| <= coefficient * zeta^degree * q^{slope*zeta} for zeta >= 1.
struct ZSumEnvelope {
  long slope;
  int degree = 0;
  Rational coefficient = 1;
};

// Sum of f(zeta) over start <= zeta <= min(end, T), plus a bound on what is
// left out (0 for a range ending at or before T).
OracleValue truncated_zsum(const std::function<CyclotomicNumber(long)>& f, long start, std::optional<long> end,
                           long T, const std::optional<ZSumEnvelope>& envelope, const FieldConfig& cfg);

// |a - b| <= bound, via complex approximations with a small slack.
bool within_bound(const CyclotomicNumber& a, const CyclotomicNumber& b, const Rational& bound);

// Level descriptor: psi on B_1 sums, leaf radii gamma + m, declared ord depths.
struct LevelDescriptor {
  bool psi = false;
  std::vector<long> leaf_radii;
  std::vector<long> ord_depths;
};

long sufficiency_level(const LevelDescriptor& d);
long sufficiency_level(const ClassicalCell& cell, const Point& s, long top_height, long p);
long sufficiency_level(const ClusteredCell& cell, const Point& s, long p);

}  // namespace padiq
