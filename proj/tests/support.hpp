#pragma once

#include <random>
#include <vector>

#include "padiq/padic.hpp"

namespace padiq::testing {

// Random element of Z[1/p] with ord >= min_ord and digits up to index max_digit.
inline Rational random_padic(std::mt19937_64& rng, long p, long min_ord, long max_digit) {
  std::uniform_int_distribution<long> digit(0, p - 1);
  Rational x = 0;
  for (long i = min_ord; i <= max_digit; ++i) x += rpow(p, i) * digit(rng);
  return x;
}

inline Rational random_nonzero(std::mt19937_64& rng, long p, long min_ord, long max_digit) {
  for (;;) {
    Rational x = random_padic(rng, p, min_ord, max_digit);
    if (x != 0) return x;
  }
}

// Rational with small numerator and denominator coprime to p, times p^e.
inline Rational random_rational(std::mt19937_64& rng, long p, long emin, long emax) {
  std::uniform_int_distribution<long> num(-40, 40);
  std::uniform_int_distribution<long> den(1, 30);
  std::uniform_int_distribution<long> ex(emin, emax);
  long d = den(rng);
  while (d % p == 0) d = den(rng);
  return frac(num(rng), d) * rpow(p, ex(rng));
}

inline Ball random_ball(std::mt19937_64& rng, long p, long radius) {
  return Ball(radius, random_padic(rng, p, std::min(radius, 0L) - 2, radius + 2), p);
}

}  // namespace padiq::testing
