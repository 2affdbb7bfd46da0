#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "padiq/constructible.hpp"
#include "padiq/expstar.hpp"
#include "padiq/geometry.hpp"

namespace padiq {

enum class Method { BallFormula, CellLeafsum, ClusteredCell, ZSum, FubiniPipeline };
std::string_view to_string(Method m);

struct IntegrationResult {
  std::map<Point, CyclotomicNumber> values;  // per parameter point
  std::optional<ExpStarExpr> symbolic;       // over S, agrees with values
  Method method = Method::BallFormula;
  std::string certificate;

  // The value at the only parameter point.
  const CyclotomicNumber& value() const;
};

// ---------------------------------------------------------------- psi integrals

CyclotomicNumber integrate_char_ball(const Ball& b);
// Sum over the maximal balls of a finite coset union.
CyclotomicNumber integrate_char_set(const std::vector<Ball>& cosets);

// Radius-1 balls with the volume of the integration set inside each; psi is
// constant on them, so the integral of psi is sum volume * psi(B).
using BallVolumes = std::map<Ball, Rational>;

// Groups balls by volume (largest first) and drops complete sibling families,
// which integrate to 0. Each stratum is (volume, maximal radius-1 balls).
std::vector<std::pair<Rational, Fiber>> volume_strata(const BallVolumes& v, long p);

BallVolumes char_cell_volumes(const ClassicalCell& cell, const Point& s, const FieldConfig& cfg);
BallVolumes char_cell_volumes(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg);

CyclotomicNumber integrate_char_cell(const ClassicalCell& cell, const Point& s, const FieldConfig& cfg);
CyclotomicNumber integrate_char_cell(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg);

// Over every point of the base, with an ExpStarExpr over S built from the strata.
IntegrationResult integrate_cell(const ClassicalCell& cell, const std::vector<Point>& base,
                                      const FieldConfig& cfg);
IntegrationResult integrate_cell(const ClusteredCell& cell, const FieldConfig& cfg);

// ---------------------------------------------------------------- Z-variables

// f over S x Z with gamma at coordinate |s|; X given by a Gamma-cell. Fibers
// of f's multi-balls are split into constant-fiber pieces, e_i(s) pulled out,
// and the remaining Gamma-polynomials summed in closed form.
IntegrationResult integrate_Z(const ExpStarExpr& f, const GammaCell& x, const FieldConfig& cfg);

// Iterated integrate_Z: gamma_1 innermost. Each cell is over the previous
// coordinates plus its own.
IntegrationResult integrate_Z(const ExpStarExpr& f, const std::vector<GammaCell>& cells, const FieldConfig& cfg);

// Closed-form sum of e * h(s, gamma) over gamma in run, for constant e; the
// slope >= 0 parts of infinite tails must cancel across all contributions.
struct ZContribution {
  CyclotomicNumber e;
  ConstructibleExpr h;
  GammaRun run;
  std::size_t tag;  // caller's grouping key
};
// Per tag, the rational factor multiplying e (e * factor summed over tags is
// the integral). Throws NonIntegrable on divergent tails that do not cancel.
std::map<std::size_t, Rational> sum_z_contributions(const std::vector<ZContribution>& parts, const Point& s,
                                                     const FieldConfig& cfg);

// ---------------------------------------------------------------- integrability

struct Attestation {
  std::string reason;
};

// Region for the check: a bounded coset union, or a classical cell (tail exponents).
using IntegrabilityRegion = std::variant<std::vector<Ball>, ClassicalCell>;

// Attests finite coset-union integrands on bounded regions and cell tails
// whose exponents are all negative; anything else is refused (nullopt).
std::optional<Attestation> check_integrability(const ConstructibleExpr& h, const IntegrabilityRegion& region,
                                               const Point& s, std::size_t x_index, const FieldConfig& cfg,
                                               std::string* refusal = nullptr);

// ---------------------------------------------------------------- K-variables

struct BundleTerm {
  ConstructibleExpr h;  // over (s, x)
  MultiBallSource balls;
  std::optional<Attestation> attestation;
};

// K-fiber of a piece: tabulated bounded coset unions, or one classical cell.
using BundleRegion = std::variant<std::map<Point, std::vector<Ball>>, ClassicalCell>;

struct BundlePiece {
  BundleRegion region;
  std::vector<BundleTerm> terms;
  std::optional<long> level;  // x-coset level for enumeration; default automatic
};

// f(s, x) = sum over pieces and terms of 1_{X_w}(s, x) h(s, x) charsum(A_{s, x}), n = 1.
struct NormalFormBundle {
  std::vector<Point> base;
  std::vector<BundlePiece> pieces;

  // Fills every missing attestation from check_integrability; returns false if
  // some term is refused.
  bool attest(const FieldConfig& cfg, std::string* refusal = nullptr);
  CyclotomicNumber eval(const Point& s, const Rational& x, const FieldConfig& cfg) const;
};

// Attained values C of b -> int_{Y_{s,b}} h and their level sets D (radius-1
// balls, all bounded here).
struct LevelSetFamily {
  std::vector<Rational> values;
  std::vector<std::vector<Ball>> pieces;
  std::vector<bool> bounded;
  long radius_bound = 0;  // every piece lies in B_radius_bound(0)
};

LevelSetFamily level_sets(const BundleTerm& term, const std::vector<Ball>& region, const Point& s, long level,
                          const FieldConfig& cfg);

IntegrationResult integrate_K(const NormalFormBundle& f, const FieldConfig& cfg);

}  // namespace padiq
