#include "padiq/padic.hpp"

#include <algorithm>

namespace padiq {

bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

FieldConfig::FieldConfig(long prime, int cap) : p(prime), level_cap(cap) {
  require(is_prime(prime), ErrorKind::InvalidInput, "p must be prime, got " + std::to_string(prime));
  require(cap >= 2, ErrorKind::InvalidInput, "level_cap must be at least 2");
}

void FieldConfig::check_level(long level, const char* what) const {
  if (level > level_cap)
    fail(ErrorKind::PrecisionExceeded, std::string(what) + " needs level " + std::to_string(level) +
                                           " beyond level_cap " + std::to_string(level_cap));
}

long Valuation::value() const {
  if (!finite_) fail(ErrorKind::ContractViolation, "valuation of zero is infinite");
  return value_;
}

std::string Valuation::to_string() const { return finite_ ? std::to_string(value_) : "inf"; }

Valuation valuation(const Integer& x, long p) {
  if (x == 0) return Valuation::infinity();
  Integer rest;
  Integer prime = p;
  auto v = mpz_remove(rest.get_mpz_t(), x.get_mpz_t(), prime.get_mpz_t());
  return Valuation(static_cast<long>(v));
}

Valuation valuation(const Rational& x, long p) {
  if (x == 0) return Valuation::infinity();
  return Valuation(valuation(x.get_num(), p).value() - valuation(x.get_den(), p).value());
}

PadicRational::PadicRational(Rational value, long p)
    : value_(std::move(value)), p_(p), valuation_(padiq::valuation(value_, p)) {}

Rational PadicRational::unit_part() const {
  require(!is_zero(), ErrorKind::ContractViolation, "unit part of zero");
  return value_ * rpow(p_, -valuation_.value());
}

Integer reduce_unit(const Rational& u, long p, long m) {
  Integer modulus = ipow(p, static_cast<unsigned long>(m));
  Integer inv;
  Integer den = u.get_den();
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), modulus.get_mpz_t()) == 0)
    fail(ErrorKind::ContractViolation, "denominator not invertible mod p^m");
  Integer r = u.get_num() * inv;
  mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), modulus.get_mpz_t());
  return r;
}

Rational canonical_representative(const Rational& x, long gamma, long p) {
  if (x == 0) return 0;
  long v = valuation(x, p).value();
  if (v >= gamma) return 0;
  long k = std::max(0L, -v);
  Rational u = x * rpow(p, k);
  Integer r = reduce_unit(u, p, gamma + k);
  Rational out(r, ipow(p, static_cast<unsigned long>(k)));
  out.canonicalize();
  return out;
}

Integer angular_component(const Rational& x, long m, const FieldConfig& cfg) {
  require(m >= 1, ErrorKind::ContractViolation, "angular component needs m >= 1");
  cfg.check_level(m, "angular component");
  if (x == 0) return 0;
  PadicRational px(x, cfg.p);
  return reduce_unit(px.unit_part(), cfg.p, m);
}

bool in_Qnm(const Rational& x, long n, long m, const FieldConfig& cfg) {
  require(n >= 1 && m >= 1, ErrorKind::ContractViolation, "Q_{n,m} needs n, m >= 1");
  if (x == 0) return false;
  if (mod(valuation(x, cfg.p).value(), n) != 0) return false;
  return angular_component(x, m, cfg) == 1;
}

Ball::Ball(long radius, const Rational& center, long p)
    : radius_(radius), center_(canonical_representative(center, radius, p)), p_(p) {}

Ball::Ball(long radius, const Rational& center, const FieldConfig& cfg) : Ball(radius, center, cfg.p) {
  cfg.check_level(radius, "ball radius");
}

bool Ball::contains(const Rational& x) const { return valuation(x - center_, p_) >= Valuation(radius_); }

bool Ball::contains(const Ball& other) const { return other.radius_ >= radius_ && contains(other.center_); }

bool Ball::disjoint(const Ball& other) const { return !contains(other) && !other.contains(*this); }

Ball Ball::parent() const { return Ball(radius_ - 1, center_, p_); }

Ball Ball::ancestor(long radius) const {
  require(radius <= radius_, ErrorKind::ContractViolation, "ancestor radius exceeds ball radius");
  return Ball(radius, center_, p_);
}

std::vector<Ball> Ball::children() const { return subdivide(radius_ + 1); }

std::vector<Ball> Ball::subdivide(long radius) const {
  require(radius >= radius_, ErrorKind::ContractViolation, "subdivision radius below ball radius");
  Integer count = coset_count(radius_, radius, p_);
  require(count <= 10'000'000, ErrorKind::BudgetExceeded, "ball subdivision too large");
  std::vector<Ball> out;
  long n = count.get_si();
  out.reserve(static_cast<std::size_t>(n));
  Rational step = rpow(p_, radius_);
  for (long j = 0; j < n; ++j) out.emplace_back(radius, center_ + step * j, p_);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Ball::to_string() const { return "B_" + std::to_string(radius_) + "(" + center_.get_str() + ")"; }

Ball ball_sum(const Ball& a, const Ball& b) {
  require(a.radius() == b.radius(), ErrorKind::ContractViolation, "ball_sum needs equal radii");
  require(a.prime() == b.prime(), ErrorKind::ContractViolation, "ball_sum needs a common prime");
  return Ball(a.radius(), a.center() + b.center(), a.prime());
}

Integer coset_count(long radius, long level, long p) {
  require(level >= radius, ErrorKind::ContractViolation, "level below radius");
  return ipow(p, static_cast<unsigned long>(level - radius));
}

}  // namespace padiq

std::size_t std::hash<padiq::Ball>::operator()(const padiq::Ball& b) const noexcept {
  std::size_t h = std::hash<long>()(b.radius());
  h ^= mpz_get_ui(b.center().get_num_mpz_t()) * 0x9e3779b97f4a7c15ULL;
  h ^= mpz_get_ui(b.center().get_den_mpz_t()) * 0xc2b2ae3d27d4eb4fULL;
  return h;
}
