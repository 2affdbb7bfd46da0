#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "padiq/rational.hpp"

namespace padiq {

// Points of S x K^n x Z^m are tuples of rationals; Z-coordinates hold integers.
using Point = std::vector<Rational>;

std::string point_string(const Point& x);
Point prefix(const Point& x, std::size_t arity);
Point append(Point x, const Rational& v);

// c + sum_i a_i x_i over point coordinates.
class AffineTerm {
 public:
  AffineTerm() = default;
  AffineTerm(const Rational& c) : constant_(c) {}  // NOLINT(google-explicit-constructor)
  AffineTerm(long c) : constant_(c) {}              // NOLINT(google-explicit-constructor)

  static AffineTerm variable(std::size_t index, const Rational& coeff = 1);

  const Rational& constant() const { return constant_; }
  const std::map<std::size_t, Rational>& coefficients() const { return coeffs_; }
  Rational coefficient(std::size_t index) const;
  bool is_constant() const { return coeffs_.empty(); }
  bool depends_on(std::size_t index) const { return coeffs_.count(index) != 0; }
  std::size_t arity_needed() const;

  Rational eval(const Point& x) const;
  long eval_integer(const Point& x) const;
  // Drops the dependence on index, substituting value.
  AffineTerm substitute(std::size_t index, const Rational& value) const;

  AffineTerm& operator+=(const AffineTerm& o);
  AffineTerm operator-() const;
  AffineTerm scaled(const Rational& r) const;
  friend AffineTerm operator+(AffineTerm a, const AffineTerm& b) { return a += b; }
  friend AffineTerm operator-(AffineTerm a, const AffineTerm& b) { return a += -b; }
  friend bool operator==(const AffineTerm&, const AffineTerm&) = default;

  std::string to_string(const std::vector<std::string>& names = {}) const;

 private:
  Rational constant_;
  std::map<std::size_t, Rational> coeffs_;

  void prune();
};

// A parameter-indexed value: an affine term or an explicit table over S.
struct ParamTable {
  std::map<Point, Rational> values;
  friend bool operator==(const ParamTable&, const ParamTable&) = default;
};

class ParamTerm {
 public:
  ParamTerm(AffineTerm t) : repr_(std::move(t)) {}  // NOLINT(google-explicit-constructor)
  ParamTerm(ParamTable t) : repr_(std::move(t)) {}  // NOLINT(google-explicit-constructor)
  ParamTerm(long c) : repr_(AffineTerm(c)) {}       // NOLINT(google-explicit-constructor)

  Rational eval(const Point& s) const;
  long eval_integer(const Point& s) const;
  const std::variant<AffineTerm, ParamTable>& repr() const { return repr_; }
  friend bool operator==(const ParamTerm&, const ParamTerm&) = default;

 private:
  std::variant<AffineTerm, ParamTable> repr_;
};

}  // namespace padiq
