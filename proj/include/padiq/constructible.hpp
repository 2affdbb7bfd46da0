#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "padiq/padic.hpp"
#include "padiq/terms.hpp"

namespace padiq {

// Extensional atom: value looked up by the coordinates `vars` of the point.
struct TableAtom {
  std::vector<std::size_t> vars;
  std::map<Point, Rational> values;
  std::optional<Rational> fallback;

  Rational lookup(const Point& x) const;
  friend bool operator==(const TableAtom&, const TableAtom&) = default;
};

// Expression tree for constructible functions: rationals, Z-valued atoms and
// powers q^(Z-valued), closed under sums and products. Immutable; copies share.
class ConstructibleExpr {
 public:
  enum class Kind { Constant, Affine, Ord, ZDiv, Power, Sum, Product, Table };

  ConstructibleExpr();  // constant 0
  ConstructibleExpr(const Rational& c);  // NOLINT(google-explicit-constructor)
  ConstructibleExpr(long c);             // NOLINT(google-explicit-constructor)

  static ConstructibleExpr constant(const Rational& c);
  // Affine Presburger term; integer-valued on its domain.
  static ConstructibleExpr affine(AffineTerm t);
  // ord of an affine term in the K-coordinates.
  static ConstructibleExpr ord(AffineTerm t);
  // t / modulus, defined where modulus divides t.
  static ConstructibleExpr zdiv(AffineTerm t, long modulus);
  // q^(exponent)
  static ConstructibleExpr power(ConstructibleExpr exponent);
  static ConstructibleExpr sum(std::vector<ConstructibleExpr> terms);
  static ConstructibleExpr product(std::vector<ConstructibleExpr> factors);
  static ConstructibleExpr table(TableAtom t);

  Kind kind() const;
  const Rational& value() const;                       // Constant
  const AffineTerm& term() const;                      // Affine, Ord, ZDiv
  long modulus() const;                                // ZDiv
  const std::vector<ConstructibleExpr>& children() const;  // Power (1), Sum, Product
  const TableAtom& table_atom() const;                 // Table

  Rational eval(const Point& x, const FieldConfig& cfg) const;
  bool depends_on(std::size_t index) const;
  bool is_constant_zero() const { return kind() == Kind::Constant && value() == 0; }

  // Every ZDiv modulus in the tree.
  std::vector<long> zdiv_moduli() const;

  friend ConstructibleExpr operator+(const ConstructibleExpr& a, const ConstructibleExpr& b);
  friend ConstructibleExpr operator*(const ConstructibleExpr& a, const ConstructibleExpr& b);
  friend ConstructibleExpr operator-(const ConstructibleExpr& a, const ConstructibleExpr& b);
  friend bool operator==(const ConstructibleExpr& a, const ConstructibleExpr& b);

  std::string to_string(const std::vector<std::string>& names = {}) const;

 private:
  struct Node;
  std::shared_ptr<const Node> node_;
  explicit ConstructibleExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
};

Rational eval_constructible(const ConstructibleExpr& e, const Point& x, const FieldConfig& cfg);

// q^(slope*zeta) * sum_k coeffs[k] zeta^k on zeta = (gamma - offset)/modulus.
// Any parameter factor q^delta(s) is already merged into coeffs.
struct GammaPolyTerm {
  long slope = 0;
  std::vector<Rational> coeffs;
  long offset = 0;
  long modulus = 1;

  bool is_zero() const;
  Rational eval_zeta(long zeta, const FieldConfig& cfg) const;
  std::string to_string() const;
  friend bool operator==(const GammaPolyTerm&, const GammaPolyTerm&) = default;
};

// Expansion of e as a function of zeta, where gamma = offset + modulus*zeta sits
// at coordinate gamma_index and the remaining coordinates are fixed by point.
// Distinct slopes, zero terms dropped, ascending slope.
std::vector<GammaPolyTerm> to_gamma_poly(const ConstructibleExpr& e, const Point& point, std::size_t gamma_index,
                                         long offset, long modulus, const FieldConfig& cfg);

Rational eval_gamma_poly(const std::vector<GammaPolyTerm>& terms, long zeta, const FieldConfig& cfg);

// Integer zeta range; missing ends are infinite.
struct ZetaRange {
  std::optional<long> lo;
  std::optional<long> hi;
  bool finite() const { return lo && hi; }
  bool empty() const { return lo && hi && *lo > *hi; }
};

// Exact sum over the range; NonIntegrable for divergent configurations.
Rational sum_gamma_poly(const GammaPolyTerm& t, const ZetaRange& range, const FieldConfig& cfg);

namespace poly {

using Poly = std::vector<Rational>;

void trim(Poly& p);
Rational eval(const Poly& p, const Rational& x);
Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
// P(u + c)
Poly shift(const Poly& p, const Rational& c);
// P(-u)
Poly reflect(const Poly& p);
// sum_{u >= 0} P(u) t^u for |t| < 1.
Rational geometric_moment_sum(const Poly& p, const Rational& t);
// sum_{u = 0}^{n-1} P(u)
Rational power_sum(const Poly& p, long n);

}  // namespace poly

}  // namespace padiq
