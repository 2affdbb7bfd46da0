#include "padiq/rational.hpp"

#include <climits>

#include "padiq/error.hpp"

namespace padiq {

Integer ipow(long base, unsigned long exponent) {
  Integer result;
  Integer b = base;
  mpz_pow_ui(result.get_mpz_t(), b.get_mpz_t(), exponent);
  return result;
}

Rational rpow(long p, long exponent) {
  if (exponent >= 0) return Rational(ipow(p, static_cast<unsigned long>(exponent)));
  Rational r(Integer(1), ipow(p, static_cast<unsigned long>(-exponent)));
  r.canonicalize();
  return r;
}

Rational frac(long num, long den) {
  require(den != 0, ErrorKind::InvalidInput, "zero denominator");
  Rational r{Integer(num), Integer(den)};
  r.canonicalize();
  return r;
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

long to_long(const Integer& z) {
  if (!z.fits_slong_p()) fail(ErrorKind::InvalidInput, "integer out of range: " + z.get_str());
  return z.get_si();
}

long to_long(const Rational& r) {
  if (!is_integer(r)) fail(ErrorKind::InvalidInput, "expected an integer, got " + r.get_str());
  return to_long(r.get_num());
}

long floor_long(const Rational& r) {
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
  return to_long(f);
}

long mod(long a, long m) {
  long r = a % m;
  return r < 0 ? r + m : r;
}

long floor_div(long a, long m) { return (a - mod(a, m)) / m; }

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) fail(ErrorKind::InvalidInput, "empty rational literal");
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    bool ok = (c >= '0' && c <= '9') || c == '/' || (i == 0 && (c == '-' || c == '+'));
    if (!ok) fail(ErrorKind::InvalidInput, "bad rational literal: " + s);
  }
  if (s[0] == '+') s.erase(0, 1);
  Rational r;
  if (r.set_str(s, 10) != 0 || r.get_den() == 0) fail(ErrorKind::InvalidInput, "bad rational literal: " + s);
  r.canonicalize();
  return r;
}

std::string fraction_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

std::string short_string(const Rational& r) { return r.get_str(); }

}  // namespace padiq
