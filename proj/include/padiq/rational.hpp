#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace padiq {

using Integer = mpz_class;
using Rational = mpq_class;

Integer ipow(long base, unsigned long exponent);

// p^e for any integer e.
Rational rpow(long p, long exponent);

// num/den in lowest terms.
Rational frac(long num, long den);

bool is_integer(const Rational& r);

// Throws InvalidInput when r is not an integer or does not fit in a long.
long to_long(const Rational& r);
long to_long(const Integer& z);

// Floor of r as a long.
long floor_long(const Rational& r);

// Mathematical modulus, result in [0, m).
long mod(long a, long m);
long floor_div(long a, long m);

// Accepts "a", "-a", "a/b".
Rational parse_rational(std::string_view text);

// Always "num/den", e.g. "3/1".
std::string fraction_string(const Rational& r);

// "num" when integral, else "num/den".
std::string short_string(const Rational& r);

}  // namespace padiq
