#pragma once

#include <string>
#include <variant>
#include <vector>

#include "padiq/constructible.hpp"
#include "padiq/cyclotomic.hpp"
#include "padiq/geometry.hpp"

namespace padiq {

// Fibers keyed by the first `arity` coordinates of the point.
struct TabulatedMultiBall {
  MultiBall balls;
  std::size_t arity;
  friend bool operator==(const TabulatedMultiBall&, const TabulatedMultiBall&) = default;
};

// Fibers keyed by (s, gamma): s is the first `arity` coordinates and gamma the
// coordinate right after them.
struct ParametricMultiBall {
  GammaMultiBall balls;
  std::size_t arity;
  friend bool operator==(const ParametricMultiBall&, const ParametricMultiBall&) = default;
};

// Fibers {B_1(f_1(x)), ..., B_1(f_k(x))}; the balls must be distinct.
struct AffineMultiBall {
  std::vector<AffineTerm> centers;
  friend bool operator==(const AffineMultiBall&, const AffineMultiBall&) = default;
};

using MultiBallSource = std::variant<TabulatedMultiBall, ParametricMultiBall, AffineMultiBall>;

std::size_t order(const MultiBallSource& a);
long radius(const MultiBallSource& a);
Fiber source_fiber(const MultiBallSource& a, const Point& x, const FieldConfig& cfg);
bool depends_on(const MultiBallSource& a, std::size_t index);

CyclotomicNumber char_sum(const Fiber& fiber);
CyclotomicNumber char_sum(const MultiBall& a, const Point& key);

struct ExpStarTerm {
  ConstructibleExpr coefficient;
  MultiBallSource balls;
  friend bool operator==(const ExpStarTerm&, const ExpStarTerm&) = default;
};

// x -> sum_i h_i(x) * sum_{B in A^i_x} psi(B)
class ExpStarExpr {
 public:
  ExpStarExpr() = default;
  explicit ExpStarExpr(std::vector<ExpStarTerm> terms);

  const std::vector<ExpStarTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  CyclotomicNumber eval(const Point& x, const FieldConfig& cfg) const;
  ExpStarExpr scaled(const Rational& r) const;

  friend ExpStarExpr operator+(const ExpStarExpr& a, const ExpStarExpr& b);
  friend bool operator==(const ExpStarExpr&, const ExpStarExpr&) = default;

 private:
  std::vector<ExpStarTerm> terms_;
};

// Order-1 term psi(f(x)) for a tabulated f.
ExpStarExpr lift_char_of_function(const std::map<Point, Rational>& f, const FieldConfig& cfg);
// Order-1 term psi(f(x)) for affine f.
ExpStarExpr lift_char_of_affine(const AffineTerm& f);

// t maximal radius-1 balls with no complete sibling family.
Fiber filler(std::size_t t, long p);

// Closure under products on the base table, following the multiplicity
// stratification of balls B + B'.
ExpStarExpr multiply(const ExpStarExpr& a, const ExpStarExpr& b, const std::vector<Point>& base,
                     const FieldConfig& cfg);

// Extends e from U to X: coefficient h * 1_U, filler fibers off U.
ExpStarExpr extend_by_zero(const ExpStarExpr& e, const std::vector<Point>& U, const std::vector<Point>& X,
                           const FieldConfig& cfg);

// Empty string when every fiber on the base consists of exactly order(A)
// disjoint radius-1 balls that are maximal in their union; else a description.
std::string multiball_invariant_violation(const ExpStarExpr& e, const std::vector<Point>& base,
                                          const FieldConfig& cfg);

// Collects per-point strata (key, coefficient, fiber) into an ExpStarExpr over
// a tabulated base: one term per (key, order), Table coefficients with default
// 0 and filler fibers where a point has no stratum.
class ExpStarBuilder {
 public:
  ExpStarBuilder(std::size_t arity, long p) : arity_(arity), p_(p) {}

  void add(const std::string& key, const Point& s, const Rational& coefficient, Fiber fiber);
  ExpStarExpr build(const std::vector<Point>& base) const;

 private:
  struct Entry {
    Rational coefficient;
    Fiber fiber;
  };
  std::size_t arity_;
  long p_;
  std::map<std::pair<std::string, std::size_t>, std::map<Point, Entry>> strata_;
};

}  // namespace padiq
