#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "padiq/error.hpp"
#include "padiq/rational.hpp"

namespace padiq {

inline constexpr int kDefaultLevelCap = 24;

bool is_prime(long n);

// K = Q_p with q = p. level_cap bounds the number of p-adic digits any
// operation may need to distinguish.
struct FieldConfig {
  long p = 2;
  int level_cap = kDefaultLevelCap;

  FieldConfig() = default;
  explicit FieldConfig(long prime, int cap = kDefaultLevelCap);

  long q() const { return p; }
  Rational q_power(long e) const { return rpow(p, e); }
  void check_level(long level, const char* what) const;

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

// ord values with +infinity for zero.
class Valuation {
 public:
  Valuation() = default;  // infinity
  explicit Valuation(long v) : finite_(true), value_(v) {}

  static Valuation infinity() { return Valuation(); }
  bool is_infinite() const { return !finite_; }
  long value() const;

  friend bool operator==(const Valuation& a, const Valuation& b) {
    return a.finite_ == b.finite_ && (!a.finite_ || a.value_ == b.value_);
  }
  friend std::strong_ordering operator<=>(const Valuation& a, const Valuation& b) {
    if (!a.finite_ || !b.finite_) return b.finite_ <=> a.finite_;
    return a.value_ <=> b.value_;
  }
  std::string to_string() const;

 private:
  bool finite_ = false;
  long value_ = 0;
};

Valuation valuation(const Rational& x, long p);
Valuation valuation(const Integer& x, long p);

// A point of K with its valuation cached.
class PadicRational {
 public:
  PadicRational(Rational value, long p);

  const Rational& value() const { return value_; }
  long prime() const { return p_; }
  Valuation valuation() const { return valuation_; }
  bool is_zero() const { return valuation_.is_infinite(); }
  // The unit part x * p^(-ord x); requires x != 0.
  Rational unit_part() const;

 private:
  Rational value_;
  long p_;
  Valuation valuation_;
};

// The unique representative of x + p^gamma Z_p in [0, p^gamma) with
// denominator a power of p.
Rational canonical_representative(const Rational& x, long gamma, long p);

// Integer r in [0, p^m) with r = u mod p^m, for u in Z_(p).
Integer reduce_unit(const Rational& u, long p, long m);

Integer angular_component(const Rational& x, long m, const FieldConfig& cfg);
bool in_Qnm(const Rational& x, long n, long m, const FieldConfig& cfg);

// B_gamma(a) = a + p^gamma Z_p, stored with its canonical center.
class Ball {
 public:
  Ball(long radius, const Rational& center, long p);
  Ball(long radius, const Rational& center, const FieldConfig& cfg);

  long radius() const { return radius_; }
  const Rational& center() const { return center_; }
  long prime() const { return p_; }

  bool contains(const Rational& x) const;
  bool contains(const Ball& other) const;
  bool disjoint(const Ball& other) const;
  Ball parent() const;
  Ball ancestor(long radius) const;
  std::vector<Ball> children() const;
  // All sub-balls of the given radius, in canonical order.
  std::vector<Ball> subdivide(long radius) const;
  Rational volume() const { return rpow(p_, -radius_); }
  std::string to_string() const;

  friend bool operator==(const Ball& a, const Ball& b) {
    return a.radius_ == b.radius_ && a.p_ == b.p_ && a.center_ == b.center_;
  }
  friend bool operator<(const Ball& a, const Ball& b) {
    if (a.radius_ != b.radius_) return a.radius_ < b.radius_;
    return a.center_ < b.center_;
  }

 private:
  long radius_;
  Rational center_;
  long p_;
};

Ball ball_sum(const Ball& a, const Ball& b);

// Number of representatives p^(level - radius) of a ball at a finer level.
Integer coset_count(long radius, long level, long p);

}  // namespace padiq

template <>
struct std::hash<padiq::Ball> {
  std::size_t operator()(const padiq::Ball& b) const noexcept;
};
