#include "padiq/cyclotomic.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace padiq {

namespace {

constexpr long kMaxDense = 1L << 21;

long power(long p, int k) { return to_long(ipow(p, static_cast<unsigned long>(k))); }

}  // namespace

int max_cyclotomic_level(long p) {
  int k = 0;
  long n = 1;
  while (n * p <= kMaxDense) {
    n *= p;
    ++k;
  }
  return k;
}

RootOfUnityExponent::RootOfUnityExponent(const Rational& e, long p) : p_(p), level_(0) {
  Integer den = e.get_den();
  Integer rest;
  Integer prime = p;
  level_ = static_cast<int>(mpz_remove(rest.get_mpz_t(), den.get_mpz_t(), prime.get_mpz_t()));
  require(rest == 1, ErrorKind::ContractViolation, "root of unity exponent must have p-power denominator");
  Integer num = e.get_num();
  mpz_fdiv_r(num.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  value_ = Rational(num, den);
  value_.canonicalize();
}

CyclotomicNumber CyclotomicNumber::root_of_unity(const RootOfUnityExponent& e) {
  if (e.level() == 0) return CyclotomicNumber(1);
  return zeta(e.prime(), e.level(), to_long(e.value().get_num()));
}

CyclotomicNumber CyclotomicNumber::zeta(long p, int k, long a) {
  if (k == 0) return CyclotomicNumber(1);
  if (k > max_cyclotomic_level(p))
    fail(ErrorKind::PrecisionExceeded, "cyclotomic conductor " + std::to_string(p) + "^" + std::to_string(k) + " too large");
  long n = power(p, k);
  std::vector<Rational> v(static_cast<std::size_t>(n));
  v[static_cast<std::size_t>(mod(a, n))] = 1;
  return from_exponents(p, k, std::move(v));
}

CyclotomicNumber CyclotomicNumber::from_exponents(long p, int k, std::vector<Rational> by_exponent) {
  CyclotomicNumber z;
  z.assign_reduced(p, k, std::move(by_exponent));
  return z;
}

Integer CyclotomicNumber::conductor() const {
  return k_ == 0 ? Integer(1) : ipow(p_, static_cast<unsigned long>(k_));
}

const Rational& CyclotomicNumber::rational_value() const {
  require(k_ == 0, ErrorKind::ContractViolation, "value is not rational: " + to_string());
  return coeffs_[0];
}

void CyclotomicNumber::assign_reduced(long p, int k, std::vector<Rational> v) {
  // Reduce zeta^e for e >= phi using zeta^e = -sum_{j<p-1} zeta^{e - phi + j p^{k-1}}.
  while (k > 0) {
    long n = power(p, k);
    long block = n / p;
    long phi = n - block;
    for (long e = n - 1; e >= phi; --e) {
      Rational& c = v[static_cast<std::size_t>(e)];
      if (c == 0) continue;
      long t = e - phi;
      for (long j = 0; j < p - 1; ++j) v[static_cast<std::size_t>(t + j * block)] -= c;
      c = 0;
    }
    v.resize(static_cast<std::size_t>(phi));
    // Minimize conductor: the value lies in Q(zeta_{p^{k-1}}) iff only
    // coefficients at multiples of p survive (k >= 2) or only the constant (k = 1).
    bool descends = true;
    if (k == 1) {
      for (long i = 1; i < phi && descends; ++i) descends = v[static_cast<std::size_t>(i)] == 0;
    } else {
      for (long i = 0; i < phi && descends; ++i)
        if (i % p != 0) descends = v[static_cast<std::size_t>(i)] == 0;
    }
    if (!descends) {
      p_ = p;
      k_ = k;
      coeffs_ = std::move(v);
      return;
    }
    if (k == 1) {
      v.resize(1);
    } else {
      std::vector<Rational> w(static_cast<std::size_t>(phi / p));
      for (std::size_t a = 0; a < w.size(); ++a) w[a] = v[a * static_cast<std::size_t>(p)];
      // Re-expand into group-ring form at level k-1; all entries sit below phi(p^{k-1}).
      w.resize(static_cast<std::size_t>(n / p));
      v = std::move(w);
    }
    --k;
    if (k == 0) break;
  }
  p_ = 0;
  k_ = 0;
  coeffs_ = {v.empty() ? Rational(0) : v[0]};
}

std::vector<Rational> CyclotomicNumber::expanded(int level) const {
  long n = level == 0 ? 1 : power(p_ == 0 ? 2 : p_, level);
  std::vector<Rational> v(static_cast<std::size_t>(n));
  if (k_ == 0) {
    v[0] = coeffs_[0];
    return v;
  }
  long stride = power(p_, level - k_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) v[i * static_cast<std::size_t>(stride)] = coeffs_[i];
  return v;
}

long CyclotomicNumber::common_prime(const CyclotomicNumber& a, const CyclotomicNumber& b) {
  if (a.p_ != 0 && b.p_ != 0 && a.p_ != b.p_)
    fail(ErrorKind::ContractViolation, "cyclotomic numbers over different primes");
  return a.p_ != 0 ? a.p_ : b.p_;
}

CyclotomicNumber CyclotomicNumber::operator-() const {
  CyclotomicNumber z = *this;
  for (auto& c : z.coeffs_) c = -c;
  return z;
}

CyclotomicNumber& CyclotomicNumber::operator+=(const CyclotomicNumber& o) {
  long p = common_prime(*this, o);
  if (p == 0) {
    coeffs_[0] += o.coeffs_[0];
    return *this;
  }
  int k = std::max(k_, o.k_);
  if (k_ == k && o.k_ == k) {
    std::vector<Rational> v = coeffs_;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.coeffs_[i];
    v.resize(static_cast<std::size_t>(power(p, k)));
    assign_reduced(p, k, std::move(v));
    return *this;
  }
  CyclotomicNumber a = *this;
  a.p_ = p;
  CyclotomicNumber b = o;
  b.p_ = p;
  std::vector<Rational> v = a.expanded(k);
  std::vector<Rational> w = b.expanded(k);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  assign_reduced(p, k, std::move(v));
  return *this;
}

CyclotomicNumber& CyclotomicNumber::operator-=(const CyclotomicNumber& o) { return *this += -o; }

CyclotomicNumber& CyclotomicNumber::operator*=(const CyclotomicNumber& o) {
  if (o.k_ == 0) return *this = scaled(o.coeffs_[0]);
  if (k_ == 0) return *this = o.scaled(coeffs_[0]);
  long p = common_prime(*this, o);
  int k = std::max(k_, o.k_);
  long n = power(p, k);
  long sa = power(p, k - k_);
  long sb = power(p, k - o.k_);
  std::vector<Rational> v(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    for (std::size_t j = 0; j < o.coeffs_.size(); ++j) {
      if (o.coeffs_[j] == 0) continue;
      long e = (static_cast<long>(i) * sa + static_cast<long>(j) * sb) % n;
      v[static_cast<std::size_t>(e)] += coeffs_[i] * o.coeffs_[j];
    }
  }
  assign_reduced(p, k, std::move(v));
  return *this;
}

CyclotomicNumber CyclotomicNumber::scaled(const Rational& r) const {
  if (r == 0) return CyclotomicNumber();
  CyclotomicNumber z = *this;
  for (auto& c : z.coeffs_) c *= r;
  return z;
}

CyclotomicNumber CyclotomicNumber::canonicalized() const {
  if (k_ == 0) return *this;
  std::vector<Rational> v = coeffs_;
  v.resize(static_cast<std::size_t>(power(p_, k_)));
  return from_exponents(p_, k_, std::move(v));
}

std::complex<double> CyclotomicNumber::approx(int digits) const {
  require(digits >= 0 && digits <= 15, ErrorKind::ContractViolation, "approx supports at most 15 digits");
  if (k_ == 0) return {coeffs_[0].get_d(), 0.0};
  long n = power(p_, k_);
  long double re = 0, im = 0;
  const long double tau = 2.0L * std::numbers::pi_v<long double>;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    long double c = coeffs_[i].get_d();
    long double angle = tau * static_cast<long double>(i) / static_cast<long double>(n);
    re += c * std::cos(angle);
    im += c * std::sin(angle);
  }
  return {static_cast<double>(re), static_cast<double>(im)};
}

std::string CyclotomicNumber::to_string() const {
  if (k_ == 0) return coeffs_[0].get_str();
  std::ostringstream out;
  bool first = true;
  std::string z = "z" + conductor().get_str();
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (coeffs_[i] == 0) continue;
    if (!first) out << " + ";
    first = false;
    out << coeffs_[i].get_str();
    if (i > 0) out << "*" << z << "^" << i;
  }
  if (first) out << "0";
  return out.str();
}

void CyclotomicAccumulator::raise_to(int level) {
  if (level <= level_) return;
  if (level > max_cyclotomic_level(p_))
    fail(ErrorKind::PrecisionExceeded, "cyclotomic conductor too large");
  long stride = power(p_, level - level_);
  std::map<long, Rational> v;
  for (auto& [i, c] : sums_) v.emplace_hint(v.end(), i * stride, std::move(c));
  sums_ = std::move(v);
  level_ = level;
}

void CyclotomicAccumulator::add(const CyclotomicNumber& z) {
  if (z.is_zero()) return;
  if (z.level() == 0) {
    sums_[0] += z.coeffs()[0];
    return;
  }
  require(z.prime() == p_, ErrorKind::ContractViolation, "accumulator prime mismatch");
  raise_to(z.level());
  long stride = power(p_, level_ - z.level());
  for (std::size_t i = 0; i < z.coeffs().size(); ++i)
    if (z.coeffs()[i] != 0) sums_[static_cast<long>(i) * stride] += z.coeffs()[i];
}

void CyclotomicAccumulator::add_root(const RootOfUnityExponent& e, const Rational& coeff) {
  require(e.level() == 0 || e.prime() == p_, ErrorKind::ContractViolation, "accumulator prime mismatch");
  raise_to(e.level());
  Rational idx = e.value() * Rational(ipow(p_, static_cast<unsigned long>(level_)));
  sums_[to_long(idx)] += coeff;
}

void CyclotomicAccumulator::merge(const CyclotomicAccumulator& other) {
  require(other.p_ == p_, ErrorKind::ContractViolation, "accumulator prime mismatch");
  raise_to(other.level_);
  long stride = power(p_, level_ - other.level_);
  for (const auto& [i, c] : other.sums_)
    if (c != 0) sums_[i * stride] += c;
}

CyclotomicNumber CyclotomicAccumulator::result() const {
  auto at = [&](long i) {
    auto it = sums_.find(i);
    return it == sums_.end() ? Rational(0) : it->second;
  };
  if (level_ == 0) return CyclotomicNumber(at(0));
  std::vector<Rational> dense(static_cast<std::size_t>(power(p_, level_)));
  for (const auto& [i, c] : sums_) dense[static_cast<std::size_t>(i)] = c;
  return CyclotomicNumber::from_exponents(p_, level_, std::move(dense));
}

bool CyclotomicAccumulator::same_terms(const CyclotomicAccumulator& other) const {
  int level = std::max(level_, other.level_);
  auto terms = [level](const CyclotomicAccumulator& a) {
    std::map<long, Rational> out;
    long stride = power(a.p_, level - a.level_);
    for (const auto& [i, c] : a.sums_)
      if (c != 0) out.emplace_hint(out.end(), i * stride, c);
    return out;
  };
  return p_ == other.p_ && terms(*this) == terms(other);
}

RootOfUnityExponent psi_exponent(const Rational& x, long p) {
  Rational xp = canonical_representative(x, 1, p);
  return RootOfUnityExponent(xp / p, p);
}

CyclotomicNumber psi_point(const Rational& x, long p) {
  return CyclotomicNumber::root_of_unity(psi_exponent(x, p));
}

CyclotomicNumber psi_ball(const Ball& b) {
  if (b.radius() < 1)
    fail(ErrorKind::NotConstantOnBall, "psi is not constant on " + b.to_string());
  return psi_point(b.center(), b.prime());
}

}  // namespace padiq
