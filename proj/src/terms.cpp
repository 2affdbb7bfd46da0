#include "padiq/terms.hpp"

#include <sstream>

#include "padiq/error.hpp"

namespace padiq {

std::string point_string(const Point& x) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ", ";
    out += x[i].get_str();
  }
  return out + ")";
}

Point prefix(const Point& x, std::size_t arity) {
  require(arity <= x.size(), ErrorKind::OutOfDomain, "point " + point_string(x) + " shorter than arity");
  return Point(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(arity));
}

Point append(Point x, const Rational& v) {
  x.push_back(v);
  return x;
}

AffineTerm AffineTerm::variable(std::size_t index, const Rational& coeff) {
  AffineTerm t;
  if (coeff != 0) t.coeffs_[index] = coeff;
  return t;
}

Rational AffineTerm::coefficient(std::size_t index) const {
  auto it = coeffs_.find(index);
  return it == coeffs_.end() ? Rational(0) : it->second;
}

std::size_t AffineTerm::arity_needed() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first + 1; }

Rational AffineTerm::eval(const Point& x) const {
  Rational v = constant_;
  for (const auto& [i, a] : coeffs_) {
    require(i < x.size(), ErrorKind::OutOfDomain,
            "term refers to coordinate " + std::to_string(i) + " of " + point_string(x));
    v += a * x[i];
  }
  return v;
}

long AffineTerm::eval_integer(const Point& x) const {
  Rational v = eval(x);
  require(is_integer(v), ErrorKind::OutOfDomain, "integer term evaluates to " + v.get_str());
  return to_long(v);
}

AffineTerm AffineTerm::substitute(std::size_t index, const Rational& value) const {
  AffineTerm t = *this;
  auto it = t.coeffs_.find(index);
  if (it != t.coeffs_.end()) {
    t.constant_ += it->second * value;
    t.coeffs_.erase(it);
  }
  return t;
}

void AffineTerm::prune() {
  for (auto it = coeffs_.begin(); it != coeffs_.end();) it = it->second == 0 ? coeffs_.erase(it) : std::next(it);
}

AffineTerm& AffineTerm::operator+=(const AffineTerm& o) {
  constant_ += o.constant_;
  for (const auto& [i, a] : o.coeffs_) coeffs_[i] += a;
  prune();
  return *this;
}

AffineTerm AffineTerm::operator-() const { return scaled(-1); }

AffineTerm AffineTerm::scaled(const Rational& r) const {
  AffineTerm t;
  t.constant_ = constant_ * r;
  if (r != 0)
    for (const auto& [i, a] : coeffs_) t.coeffs_[i] = a * r;
  return t;
}

std::string AffineTerm::to_string(const std::vector<std::string>& names) const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [i, a] : coeffs_) {
    std::string name = i < names.size() ? names[i] : "x" + std::to_string(i);
    if (a < 0) {
      out << (first ? "-" : " - ");
    } else if (!first) {
      out << " + ";
    }
    Rational mag = abs(a);
    if (mag != 1) out << mag.get_str() << "*";
    out << name;
    first = false;
  }
  if (first) return constant_.get_str();
  if (constant_ > 0) out << " + " << constant_.get_str();
  if (constant_ < 0) out << " - " << Rational(-constant_).get_str();
  return out.str();
}

Rational ParamTerm::eval(const Point& s) const {
  if (const auto* t = std::get_if<AffineTerm>(&repr_)) return t->eval(s);
  const auto& table = std::get<ParamTable>(repr_);
  auto it = table.values.find(s);
  require(it != table.values.end(), ErrorKind::OutOfDomain, "no table entry at " + point_string(s));
  return it->second;
}

long ParamTerm::eval_integer(const Point& s) const {
  Rational v = eval(s);
  require(is_integer(v), ErrorKind::OutOfDomain, "integer term evaluates to " + v.get_str());
  return to_long(v);
}

}  // namespace padiq
