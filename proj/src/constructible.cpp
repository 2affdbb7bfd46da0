#include "padiq/constructible.hpp"

#include <sstream>

#include "padiq/error.hpp"

namespace padiq {

struct ConstructibleExpr::Node {
  Kind kind = Kind::Constant;
  Rational value;
  AffineTerm term;
  long modulus = 1;
  std::vector<ConstructibleExpr> children;
  TableAtom table;
};

Rational TableAtom::lookup(const Point& x) const {
  Point key;
  key.reserve(vars.size());
  for (std::size_t v : vars) {
    require(v < x.size(), ErrorKind::OutOfDomain, "table refers to coordinate " + std::to_string(v));
    key.push_back(x[v]);
  }
  auto it = values.find(key);
  if (it != values.end()) return it->second;
  if (fallback) return *fallback;
  fail(ErrorKind::OutOfDomain, "table has no entry at " + point_string(key));
}

ConstructibleExpr::ConstructibleExpr() : ConstructibleExpr(Rational(0)) {}
ConstructibleExpr::ConstructibleExpr(long c) : ConstructibleExpr(Rational(c)) {}
ConstructibleExpr::ConstructibleExpr(const Rational& c) {
  auto n = std::make_shared<Node>();
  n->value = c;
  node_ = std::move(n);
}

ConstructibleExpr ConstructibleExpr::constant(const Rational& c) { return ConstructibleExpr(c); }

ConstructibleExpr ConstructibleExpr::affine(AffineTerm t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Affine;
  n->term = std::move(t);
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::ord(AffineTerm t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Ord;
  n->term = std::move(t);
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::zdiv(AffineTerm t, long modulus) {
  require(modulus >= 1, ErrorKind::InvalidInput, "zdiv modulus must be positive");
  auto n = std::make_shared<Node>();
  n->kind = Kind::ZDiv;
  n->term = std::move(t);
  n->modulus = modulus;
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::power(ConstructibleExpr exponent) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Power;
  n->children.push_back(std::move(exponent));
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::sum(std::vector<ConstructibleExpr> terms) {
  if (terms.empty()) return ConstructibleExpr(0);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Sum;
  n->children = std::move(terms);
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::product(std::vector<ConstructibleExpr> factors) {
  if (factors.empty()) return ConstructibleExpr(1);
  auto n = std::make_shared<Node>();
  n->kind = Kind::Product;
  n->children = std::move(factors);
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr ConstructibleExpr::table(TableAtom t) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Table;
  n->table = std::move(t);
  return ConstructibleExpr(std::shared_ptr<const Node>(std::move(n)));
}

ConstructibleExpr::Kind ConstructibleExpr::kind() const { return node_->kind; }
const Rational& ConstructibleExpr::value() const { return node_->value; }
const AffineTerm& ConstructibleExpr::term() const { return node_->term; }
long ConstructibleExpr::modulus() const { return node_->modulus; }
const std::vector<ConstructibleExpr>& ConstructibleExpr::children() const { return node_->children; }
const TableAtom& ConstructibleExpr::table_atom() const { return node_->table; }

namespace {

long integer_value(const Rational& v, const char* what) {
  if (!is_integer(v)) fail(ErrorKind::OutOfDomain, std::string(what) + " is not integral: " + v.get_str());
  return to_long(v);
}

}  // namespace

Rational ConstructibleExpr::eval(const Point& x, const FieldConfig& cfg) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value;
    case Kind::Affine:
      return integer_value(n.term.eval(x), "affine atom");
    case Kind::Ord: {
      Rational v = n.term.eval(x);
      if (v == 0) fail(ErrorKind::OutOfDomain, "ord of zero at " + point_string(x));
      return valuation(v, cfg.p).value();
    }
    case Kind::ZDiv: {
      long v = integer_value(n.term.eval(x), "zdiv argument");
      if (mod(v, n.modulus) != 0)
        fail(ErrorKind::OutOfCell, "zdiv guard: " + std::to_string(n.modulus) + " does not divide " + std::to_string(v));
      return v / n.modulus;
    }
    case Kind::Power:
      return cfg.q_power(integer_value(n.children[0].eval(x, cfg), "power exponent"));
    case Kind::Sum: {
      Rational s = 0;
      for (const auto& c : n.children) s += c.eval(x, cfg);
      return s;
    }
    case Kind::Product: {
      Rational s = 1;
      for (const auto& c : n.children) {
        s *= c.eval(x, cfg);
        if (s == 0) break;
      }
      return s;
    }
    case Kind::Table:
      return n.table.lookup(x);
  }
  return 0;
}

bool ConstructibleExpr::depends_on(std::size_t index) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return false;
    case Kind::Affine:
    case Kind::Ord:
    case Kind::ZDiv:
      return n.term.depends_on(index);
    case Kind::Table:
      return std::find(n.table.vars.begin(), n.table.vars.end(), index) != n.table.vars.end();
    default:
      for (const auto& c : n.children)
        if (c.depends_on(index)) return true;
      return false;
  }
}

std::vector<long> ConstructibleExpr::zdiv_moduli() const {
  std::vector<long> out;
  if (kind() == Kind::ZDiv) out.push_back(modulus());
  for (const auto& c : children())
    for (long m : c.zdiv_moduli()) out.push_back(m);
  return out;
}

ConstructibleExpr operator+(const ConstructibleExpr& a, const ConstructibleExpr& b) {
  std::vector<ConstructibleExpr> terms;
  for (const auto* e : {&a, &b}) {
    if (e->kind() == ConstructibleExpr::Kind::Sum)
      terms.insert(terms.end(), e->children().begin(), e->children().end());
    else
      terms.push_back(*e);
  }
  return ConstructibleExpr::sum(std::move(terms));
}

ConstructibleExpr operator*(const ConstructibleExpr& a, const ConstructibleExpr& b) {
  std::vector<ConstructibleExpr> factors;
  for (const auto* e : {&a, &b}) {
    if (e->kind() == ConstructibleExpr::Kind::Product)
      factors.insert(factors.end(), e->children().begin(), e->children().end());
    else
      factors.push_back(*e);
  }
  return ConstructibleExpr::product(std::move(factors));
}

ConstructibleExpr operator-(const ConstructibleExpr& a, const ConstructibleExpr& b) {
  return a + ConstructibleExpr(-1) * b;
}

bool operator==(const ConstructibleExpr& a, const ConstructibleExpr& b) {
  if (a.node_ == b.node_) return true;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case ConstructibleExpr::Kind::Constant:
      return x.value == y.value;
    case ConstructibleExpr::Kind::Affine:
    case ConstructibleExpr::Kind::Ord:
      return x.term == y.term;
    case ConstructibleExpr::Kind::ZDiv:
      return x.term == y.term && x.modulus == y.modulus;
    case ConstructibleExpr::Kind::Table:
      return x.table == y.table;
    default:
      return x.children == y.children;
  }
}

namespace {

std::string var_name(std::size_t i, const std::vector<std::string>& names) {
  return i < names.size() ? names[i] : "x" + std::to_string(i);
}

}  // namespace

std::string ConstructibleExpr::to_string(const std::vector<std::string>& names) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Constant:
      return n.value.get_str();
    case Kind::Affine: {
      if (n.term.constant() == 0 && n.term.coefficients().size() == 1 && n.term.coefficients().begin()->second == 1)
        return var_name(n.term.coefficients().begin()->first, names);
      return "lin(" + n.term.to_string(names) + ")";
    }
    case Kind::Ord:
      return "ord(" + n.term.to_string(names) + ")";
    case Kind::ZDiv:
      return "zdiv(" + n.term.to_string(names) + ", " + std::to_string(n.modulus) + ")";
    case Kind::Power:
      return "q^(" + n.children[0].to_string(names) + ")";
    case Kind::Sum: {
      std::string out;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const auto& c = n.children[i];
        std::string s = c.to_string(names);
        if (c.kind() == Kind::Sum) s = "(" + s + ")";
        out += (i ? " + " : "") + s;
      }
      return out;
    }
    case Kind::Product: {
      std::string out;
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        const auto& c = n.children[i];
        std::string s = c.to_string(names);
        if (c.kind() == Kind::Sum || c.kind() == Kind::Product) s = "(" + s + ")";
        out += (i ? " * " : "") + s;
      }
      return out;
    }
    case Kind::Table: {
      std::ostringstream out;
      out << "table((";
      for (std::size_t i = 0; i < n.table.vars.size(); ++i) out << (i ? ", " : "") << var_name(n.table.vars[i], names);
      out << "), {";
      bool first = true;
      for (const auto& [k, v] : n.table.values) {
        out << (first ? "" : "; ") << point_string(k) << ": " << v.get_str();
        first = false;
      }
      out << "}";
      if (n.table.fallback) out << ", default=" << n.table.fallback->get_str();
      out << ")";
      return out.str();
    }
  }
  return "?";
}

Rational eval_constructible(const ConstructibleExpr& e, const Point& x, const FieldConfig& cfg) {
  return e.eval(x, cfg);
}

// ------------------------------------------------------------------ polynomials

namespace poly {

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Rational eval(const Poly& p, const Rational& x) {
  Rational v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

Poly add(const Poly& a, const Poly& b) {
  Poly out(std::max(a.size(), b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  trim(out);
  return out;
}

Poly mul(const Poly& a, const Poly& b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  trim(out);
  return out;
}

Poly shift(const Poly& p, const Rational& c) {
  // Horner in the polynomial ring: ((p_r)(u+c) + p_{r-1})(u+c) + ...
  Poly out;
  Poly lin{c, 1};
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    out = mul(out, lin);
    out = add(out, Poly{*it});
  }
  trim(out);
  return out;
}

Poly reflect(const Poly& p) {
  Poly out = p;
  for (std::size_t k = 1; k < out.size(); k += 2) out[k] = -out[k];
  return out;
}

namespace {

// Numerators N_k(t) of sum_u u^k t^u = N_k(t)/(1-t)^{k+1}.
std::vector<Poly> eulerian_numerators(std::size_t kmax) {
  std::vector<Poly> n{Poly{1}};
  for (std::size_t k = 1; k <= kmax; ++k) {
    const Poly& prev = n.back();
    Poly deriv;
    for (std::size_t i = 1; i < prev.size(); ++i) deriv.push_back(prev[i] * static_cast<long>(i));
    Poly next = add(mul(deriv, Poly{1, -1}), mul(prev, Poly{static_cast<long>(k)}));
    n.push_back(mul(next, Poly{0, 1}));
  }
  return n;
}

// Akiyama-Tanigawa; gives B_1 = +1/2, flipped to the -1/2 convention.
std::vector<Rational> bernoulli(std::size_t n) {
  std::vector<Rational> out(n + 1);
  std::vector<Rational> a(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    a[m] = Rational(Integer(1), Integer(static_cast<unsigned long>(m + 1)));
    for (std::size_t j = m; j >= 1; --j) a[j - 1] = (a[j - 1] - a[j]) * static_cast<long>(j);
    out[m] = a[0];
  }
  if (n >= 1) out[1] = Rational(-1, 2);
  return out;
}

Integer binomial(long n, long k) {
  Integer r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  return r;
}

}  // namespace

Rational geometric_moment_sum(const Poly& p, const Rational& t) {
  require(abs(t) < 1, ErrorKind::NonIntegrable, "geometric ratio " + t.get_str() + " is not below 1");
  if (p.empty()) return 0;
  auto n = eulerian_numerators(p.size() - 1);
  Rational total = 0;
  Rational one_minus = 1 - t;
  Rational denom = one_minus;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] != 0) total += p[k] * eval(n[k], t) / denom;
    denom *= one_minus;
  }
  return total;
}

Rational power_sum(const Poly& p, long count) {
  if (count <= 0 || p.empty()) return 0;
  auto b = bernoulli(p.size());
  Rational total = 0;
  Rational nn = count;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0) continue;
    // sum_{u=0}^{n-1} u^k = 1/(k+1) sum_j C(k+1, j) B_j n^{k+1-j}
    Rational s = 0;
    for (std::size_t j = 0; j <= k; ++j) {
      Rational term = Rational(binomial(static_cast<long>(k + 1), static_cast<long>(j))) * b[j];
      Rational pw = 1;
      for (std::size_t e = 0; e < k + 1 - j; ++e) pw *= nn;
      s += term * pw;
    }
    s /= static_cast<long>(k + 1);
    total += p[k] * s;
  }
  return total;
}

}  // namespace poly

// --------------------------------------------------------------- gamma polynomials

namespace {

using Expansion = std::map<long, poly::Poly>;

void prune(Expansion& e) {
  for (auto it = e.begin(); it != e.end();) {
    poly::trim(it->second);
    it = it->second.empty() ? e.erase(it) : std::next(it);
  }
}

Expansion add(const Expansion& a, const Expansion& b) {
  Expansion out = a;
  for (const auto& [s, p] : b) out[s] = poly::add(out[s], p);
  prune(out);
  return out;
}

Expansion mul(const Expansion& a, const Expansion& b) {
  Expansion out;
  for (const auto& [s1, p1] : a)
    for (const auto& [s2, p2] : b) out[s1 + s2] = poly::add(out[s1 + s2], poly::mul(p1, p2));
  prune(out);
  return out;
}

Expansion constant_expansion(const Rational& c) {
  Expansion e;
  if (c != 0) e[0] = {c};
  return e;
}

struct Expander {
  const Point& point;
  std::size_t gi;
  long offset;
  long modulus;
  const FieldConfig& cfg;

  // (c0, c1) with term = c0 + c1 * zeta.
  std::pair<Rational, Rational> linear(const AffineTerm& t) const {
    Rational a = t.coefficient(gi);
    Rational c0 = t.substitute(gi, offset).eval(point);
    return {c0, a * modulus};
  }

  Expansion run(const ConstructibleExpr& e) const {
    using K = ConstructibleExpr::Kind;
    switch (e.kind()) {
      case K::Constant:
        return constant_expansion(e.value());
      case K::Affine: {
        auto [c0, c1] = linear(e.term());
        Expansion out;
        out[0] = {c0, c1};
        prune(out);
        return out;
      }
      case K::Ord:
        if (e.term().depends_on(gi))
          fail(ErrorKind::UnsupportedInput, "ord atom depends on the summation variable");
        return constant_expansion(e.eval(point, cfg));
      case K::ZDiv: {
        auto [c0, c1] = linear(e.term());
        long m = e.modulus();
        if (!is_integer(c1 / m))
          fail(ErrorKind::UnsupportedInput, "zdiv step not aligned with the progression");
        if (!is_integer(c0 / m)) fail(ErrorKind::OutOfCell, "zdiv guard fails on the progression");
        Expansion out;
        out[0] = {c0 / m, c1 / m};
        prune(out);
        return out;
      }
      case K::Table:
        if (e.depends_on(gi)) fail(ErrorKind::UnsupportedInput, "table atom depends on the summation variable");
        return constant_expansion(e.eval(point, cfg));
      case K::Power: {
        Expansion ex = run(e.children()[0]);
        Rational c0 = 0, c1 = 0;
        for (const auto& [s, p] : ex) {
          if (s != 0 || p.size() > 2) fail(ErrorKind::UnsupportedInput, "power exponent is not affine in zeta");
          c0 = p.size() > 0 ? p[0] : Rational(0);
          c1 = p.size() > 1 ? p[1] : Rational(0);
        }
        if (!is_integer(c0) || !is_integer(c1)) fail(ErrorKind::OutOfDomain, "power exponent is not integral");
        Expansion out;
        out[to_long(c1)] = {cfg.q_power(to_long(c0))};
        return out;
      }
      case K::Sum: {
        Expansion out;
        for (const auto& c : e.children()) out = add(out, run(c));
        return out;
      }
      case K::Product: {
        Expansion out = constant_expansion(1);
        for (const auto& c : e.children()) {
          out = mul(out, run(c));
          if (out.empty()) break;
        }
        return out;
      }
    }
    return {};
  }
};

}  // namespace

bool GammaPolyTerm::is_zero() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](const Rational& c) { return c == 0; });
}

Rational GammaPolyTerm::eval_zeta(long zeta, const FieldConfig& cfg) const {
  return cfg.q_power(slope * zeta) * poly::eval(coeffs, zeta);
}

std::string GammaPolyTerm::to_string() const {
  std::ostringstream out;
  out << "q^(" << slope << "*z) * [";
  for (std::size_t i = 0; i < coeffs.size(); ++i) out << (i ? ", " : "") << coeffs[i].get_str();
  out << "] on z = (g - " << offset << ")/" << modulus;
  return out.str();
}

std::vector<GammaPolyTerm> to_gamma_poly(const ConstructibleExpr& e, const Point& point, std::size_t gamma_index,
                                         long offset, long modulus, const FieldConfig& cfg) {
  require(modulus >= 1, ErrorKind::ContractViolation, "progression modulus must be positive");
  Expander ex{point, gamma_index, offset, modulus, cfg};
  std::vector<GammaPolyTerm> out;
  for (auto& [slope, p] : ex.run(e)) out.push_back({slope, p, offset, modulus});
  return out;
}

Rational eval_gamma_poly(const std::vector<GammaPolyTerm>& terms, long zeta, const FieldConfig& cfg) {
  Rational v = 0;
  for (const auto& t : terms) v += t.eval_zeta(zeta, cfg);
  return v;
}

namespace {

constexpr long kDirectSumLimit = 4096;

// sum_{zeta >= lo} t^zeta P(zeta), |t| < 1
Rational upward_sum(const poly::Poly& p, const Rational& t, long lo, long slope, const FieldConfig& cfg) {
  return cfg.q_power(slope * lo) * poly::geometric_moment_sum(poly::shift(p, lo), t);
}

// sum_{zeta <= hi} t^zeta P(zeta), |t| > 1
Rational downward_sum(const poly::Poly& p, const Rational& t, long hi, long slope, const FieldConfig& cfg) {
  return cfg.q_power(slope * hi) * poly::geometric_moment_sum(poly::reflect(poly::shift(p, hi)), 1 / t);
}

}  // namespace

Rational sum_gamma_poly(const GammaPolyTerm& term, const ZetaRange& range, const FieldConfig& cfg) {
  poly::Poly p = term.coeffs;
  poly::trim(p);
  if (p.empty() || range.empty()) return 0;
  long a = term.slope;
  Rational t = cfg.q_power(a);
  if (!range.lo && !range.hi)
    fail(ErrorKind::NonIntegrable, "nonzero term summed over all of Z");
  if (!range.hi) {
    if (a >= 0) fail(ErrorKind::NonIntegrable, "slope " + std::to_string(a) + " on an upward-infinite range");
    return upward_sum(p, t, *range.lo, a, cfg);
  }
  if (!range.lo) {
    if (a <= 0) fail(ErrorKind::NonIntegrable, "slope " + std::to_string(a) + " on a downward-infinite range");
    return downward_sum(p, t, *range.hi, a, cfg);
  }
  long lo = *range.lo, hi = *range.hi;
  if (hi - lo < kDirectSumLimit) {
    Rational s = 0;
    for (long z = lo; z <= hi; ++z) s += term.eval_zeta(z, cfg);
    return s;
  }
  if (a == 0) return poly::power_sum(poly::shift(p, lo), hi - lo + 1);
  if (a < 0) return upward_sum(p, t, lo, a, cfg) - upward_sum(p, t, hi + 1, a, cfg);
  return downward_sum(p, t, hi, a, cfg) - downward_sum(p, t, lo - 1, a, cfg);
}

}  // namespace padiq
