#pragma once

#include <complex>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "padiq/padic.hpp"
#include "padiq/rational.hpp"

namespace padiq {

// e mod 1 with denominator a power of p.
class RootOfUnityExponent {
 public:
  RootOfUnityExponent(const Rational& e, long p);

  const Rational& value() const { return value_; }
  long prime() const { return p_; }
  // k with denominator p^k.
  int level() const { return level_; }

 private:
  Rational value_;
  long p_;
  int level_;
};

// Largest conductor exponent k for which p^k fits in dense storage.
int max_cyclotomic_level(long p);

// An element of Q(zeta_{p^k}) in the power basis 1, zeta, ..., zeta^(phi-1),
// reduced by Phi_{p^k} and stored at minimal conductor. A rational number has
// k = 0 and prime 0.
class CyclotomicNumber {
 public:
  CyclotomicNumber() : coeffs_{Rational(0)} {}
  CyclotomicNumber(const Rational& r) : coeffs_{r} {}  // NOLINT(google-explicit-constructor)
  CyclotomicNumber(long r) : coeffs_{Rational(r)} {}   // NOLINT(google-explicit-constructor)

  static CyclotomicNumber root_of_unity(const RootOfUnityExponent& e);
  // zeta_{p^k}^a
  static CyclotomicNumber zeta(long p, int k, long a = 1);
  // Builds from an arbitrary coefficient vector over zeta_{p^k}^0..zeta^(p^k-1).
  static CyclotomicNumber from_exponents(long p, int k, std::vector<Rational> by_exponent);

  long prime() const { return p_; }
  int level() const { return k_; }
  Integer conductor() const;
  const std::vector<Rational>& coeffs() const { return coeffs_; }

  bool is_zero() const { return k_ == 0 && coeffs_[0] == 0; }
  bool is_rational() const { return k_ == 0; }
  // Requires is_rational().
  const Rational& rational_value() const;

  CyclotomicNumber operator-() const;
  CyclotomicNumber& operator+=(const CyclotomicNumber& o);
  CyclotomicNumber& operator-=(const CyclotomicNumber& o);
  CyclotomicNumber& operator*=(const CyclotomicNumber& o);
  CyclotomicNumber scaled(const Rational& r) const;
  CyclotomicNumber canonicalized() const;

  friend CyclotomicNumber operator+(CyclotomicNumber a, const CyclotomicNumber& b) { return a += b; }
  friend CyclotomicNumber operator-(CyclotomicNumber a, const CyclotomicNumber& b) { return a -= b; }
  friend CyclotomicNumber operator*(CyclotomicNumber a, const CyclotomicNumber& b) { return a *= b; }
  friend bool operator==(const CyclotomicNumber& a, const CyclotomicNumber& b) {
    return a.k_ == b.k_ && a.p_ == b.p_ && a.coeffs_ == b.coeffs_;
  }

  std::complex<double> approx(int digits = 15) const;
  std::string to_string() const;

 private:
  long p_ = 0;
  int k_ = 0;
  std::vector<Rational> coeffs_;

  // Group-ring vector of length p^k indexed by exponent.
  std::vector<Rational> expanded(int level) const;
  void assign_reduced(long p, int k, std::vector<Rational> by_exponent);
  static long common_prime(const CyclotomicNumber& a, const CyclotomicNumber& b);
};

// Exact accumulator in the group ring Q[mu_{p^K}]; the field element is
// produced once by result().
inline std::ostream& operator<<(std::ostream& os, const CyclotomicNumber& z) { return os << z.to_string(); }

class CyclotomicAccumulator {
 public:
  explicit CyclotomicAccumulator(long p) : p_(p) {}

  long prime() const { return p_; }

  void add(const CyclotomicNumber& z);
  void add_root(const RootOfUnityExponent& e, const Rational& coeff);
  void merge(const CyclotomicAccumulator& other);
  CyclotomicNumber result() const;
  // Same group-ring element; sufficient (not necessary) for equal results.
  bool same_terms(const CyclotomicAccumulator& other) const;

 private:
  long p_;
  int level_ = 0;
  std::map<long, Rational> sums_;  // exponent at level_ -> coefficient, sparse

  void raise_to(int level);
};

CyclotomicNumber psi_point(const Rational& x, long p);
CyclotomicNumber psi_ball(const Ball& b);
RootOfUnityExponent psi_exponent(const Rational& x, long p);

}  // namespace padiq
