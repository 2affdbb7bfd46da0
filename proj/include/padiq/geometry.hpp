#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padiq/padic.hpp"
#include "padiq/terms.hpp"

namespace padiq {

// ---------------------------------------------------------------- multi-balls

using Fiber = std::vector<Ball>;

// Sorted copy; equal sets of balls give equal fibers.
Fiber normalize_fiber(Fiber f);

// Checks that the balls share one radius and are pairwise disjoint.
void validate_fiber(const Fiber& f, std::size_t order, long radius, const std::string& where);

// Extensional multi-ball: k disjoint balls of a common radius per base point.
class MultiBall {
 public:
  MultiBall(std::size_t order, long radius, std::map<Point, Fiber> fibers);

  std::size_t order() const { return order_; }
  long radius() const { return radius_; }
  const std::map<Point, Fiber>& fibers() const { return fibers_; }
  bool has_fiber(const Point& key) const { return fibers_.count(key) != 0; }
  const Fiber& fiber(const Point& key) const;
  std::vector<Point> base() const;

  friend bool operator==(const MultiBall&, const MultiBall&) = default;

 private:
  std::size_t order_;
  long radius_;
  std::map<Point, Fiber> fibers_;
};

// Greedy bottom-up merge of complete sibling families.
std::vector<Ball> maximal_balls(const std::vector<Ball>& cosets);

// Distinct valuations of pairwise center differences, descending.
std::vector<long> branching_heights(const Fiber& fiber);

// (k_1, ..., k_d) for fiber[index] along the top d branching heights.
std::vector<int> d_signature(const Fiber& fiber, std::size_t index, std::size_t d);

// Full signature of every point (d = number of branching heights).
std::vector<std::vector<int>> signatures(const Fiber& fiber);

// Branching tree of a fiber: internal nodes at branching heights.
struct SignatureTree {
  struct Node {
    Node(long h, Ball b) : height(h), ball(std::move(b)) {}
    long height;
    Ball ball;
    std::vector<Node> children;
    std::vector<std::size_t> leaves;  // fiber indices branching off directly here
  };
  std::optional<Node> root;  // empty for fibers with fewer than two balls
  std::size_t size = 0;

  static SignatureTree build(const Fiber& fiber);
  std::vector<long> heights() const;
  std::string to_string() const;
};

// ---------------------------------------------------------------------- cells

struct Leaf {
  long height;
  Ball ball;
  Rational volume() const { return ball.volume(); }
  friend bool operator==(const Leaf&, const Leaf&) = default;
};

// {t : alpha < ord(t - c) < beta, t - c in lambda Q_{n,m}}; absent bounds are
// unbounded. The leaf at admissible height gamma is B_{gamma+m}(c + lambda p^{gamma - ord lambda}).
struct ClassicalCell {
  ParamTerm center = AffineTerm(0);
  std::optional<ParamTerm> alpha;
  std::optional<ParamTerm> beta;
  Rational lambda = 1;
  long n = 1;
  long m = 1;

  void validate() const;
  bool admissible(const Point& s, long gamma, long p) const;
  bool contains(const Point& s, const Rational& t, const FieldConfig& cfg) const;
  std::optional<long> lower(const Point& s) const;  // alpha(s) + 1
  std::optional<long> upper(const Point& s) const;  // beta(s) - 1
  // First admissible height >= from.
  long first_height_at_least(long from, long p) const;

  friend bool operator==(const ClassicalCell&, const ClassicalCell&) = default;
};

std::vector<Leaf> leaves(const ClassicalCell& cell, const Point& s, long lo, long hi, const FieldConfig& cfg);
Leaf leaf_at(const Rational& center, const Rational& lambda, long gamma, long m, long p);

// Union over the centers of Sigma_s of classical cells with common data.
struct ClusteredCell {
  MultiBall sigma;
  ParamTerm alpha;
  ParamTerm beta;
  Rational lambda = 1;
  long n = 1;
  long m = 1;
  std::optional<std::vector<int>> tree_type;
  bool large = false;

  // Validates the cell and computes `large`; tree_type, if given, must match.
  static ClusteredCell make(MultiBall sigma, ParamTerm alpha, ParamTerm beta, Rational lambda, long n, long m,
                            std::optional<std::vector<int>> tree_type, const FieldConfig& cfg);

  std::vector<Point> base() const { return sigma.base(); }
  std::vector<long> heights(const Point& s, long p) const;  // admissible heights in (alpha, beta)
  bool contains(const Point& s, const Rational& t, const FieldConfig& cfg) const;
  std::vector<Leaf> leaves(const Point& s, const FieldConfig& cfg) const;

  friend bool operator==(const ClusteredCell&, const ClusteredCell&) = default;
};

std::vector<ClusteredCell> partition_by_signature(const ClusteredCell& cell, const FieldConfig& cfg);

// ------------------------------------------------------------------ value group

// x < y in the order 0, -1, 1, -2, 2, ...
bool triangle_less(long x, long y);

// {gamma : gamma = residue mod step, lo <= gamma <= hi}
struct GammaRun {
  long residue = 0;
  long step = 1;
  std::optional<long> lo;
  std::optional<long> hi;

  static GammaRun single(long g) { return {g, 1, g, g}; }
  static GammaRun range(long lo, long hi) { return {0, 1, lo, hi}; }

  bool contains(long g) const;
  bool empty() const;
  bool finite() const { return lo.has_value() && hi.has_value(); }
  std::optional<long> first() const;  // least element
  std::optional<long> last() const;   // greatest element
  std::optional<long> min_triangle() const;
  long count() const;  // finite runs only
  std::vector<long> elements() const;
  std::string to_string() const;
  friend bool operator==(const GammaRun&, const GammaRun&) = default;
};

using GammaSet = std::vector<GammaRun>;
bool contains(const GammaSet& set, long g);
std::string to_string(const GammaSet& set);

// {(s, gamma) : s in base, alpha(s) < gamma < beta(s), gamma = k mod n}
struct GammaCell {
  std::vector<Point> base;
  std::optional<ParamTerm> alpha;
  std::optional<ParamTerm> beta;
  long residue = 0;
  long modulus = 1;

  GammaRun fiber(const Point& s) const;
  bool contains(const Point& s, long gamma) const;
  friend bool operator==(const GammaCell&, const GammaCell&) = default;
};

// Fibers at gamma >= after repeat with the period; so do fibers at gamma < before.
struct StabilityCertificate {
  std::optional<long> after;
  std::optional<long> before;
  long period = 1;
  friend bool operator==(const StabilityCertificate&, const StabilityCertificate&) = default;
};

// Multi-ball over S x Gamma given by a table plus an optional certificate.
class GammaMultiBall {
 public:
  using Table = std::map<Point, std::map<long, Fiber>>;

  GammaMultiBall(std::size_t order, long radius, Table table, std::optional<StabilityCertificate> cert);

  // Tabulates rule on [lo, hi] widened by verify_periods periods on certified sides.
  static GammaMultiBall from_rule(std::size_t order, long radius, const std::vector<Point>& base,
                                  const std::function<Fiber(const Point&, long)>& rule, long lo, long hi,
                                  std::optional<StabilityCertificate> cert, int verify_periods = 3);

  std::size_t order() const { return order_; }
  long radius() const { return radius_; }
  const Table& table() const { return table_; }
  const std::optional<StabilityCertificate>& certificate() const { return cert_; }
  std::vector<Point> base() const;
  bool defined(const Point& s, long gamma) const;
  const Fiber& fiber(const Point& s, long gamma) const;

  friend bool operator==(const GammaMultiBall&, const GammaMultiBall&) = default;

 private:
  std::size_t order_;
  long radius_;
  Table table_;
  std::optional<StabilityCertificate> cert_;

  std::optional<long> resolve(const Point& s, long gamma) const;
};

// Periodicity promise used to compress an infinite run into finitely many atoms.
struct Periodicity {
  std::optional<long> after;
  std::optional<long> before;
  long period = 1;
};

template <class Key>
struct FiberPiece {
  long delta;  // min under triangle_less of the piece
  GammaSet gammas;
  Key value;
};

// Splits `domain` into runs on which key() is periodic-constant, then groups
// them by iterating delta_i = min over the rest. Throws when an infinite side
// has no periodicity promise.
std::vector<GammaRun> periodic_atoms(const GammaRun& domain, const Periodicity& per);

template <class Key>
std::vector<FiberPiece<Key>> partition_by_key(const GammaRun& domain, const Periodicity& per,
                                              const std::function<Key(long)>& key) {
  struct Atom {
    GammaRun run;
    long tri;
    Key value;
  };
  std::vector<Atom> atoms;
  for (const GammaRun& r : periodic_atoms(domain, per)) {
    long probe = r.lo ? *r.first() : *r.last();
    atoms.push_back({r, *r.min_triangle(), key(probe)});
  }
  std::vector<FiberPiece<Key>> out;
  std::vector<bool> used(atoms.size(), false);
  for (std::size_t done = 0; done < atoms.size();) {
    std::size_t best = atoms.size();
    for (std::size_t i = 0; i < atoms.size(); ++i)
      if (!used[i] && (best == atoms.size() || triangle_less(atoms[i].tri, atoms[best].tri))) best = i;
    FiberPiece<Key> piece{atoms[best].tri, {}, atoms[best].value};
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (!used[i] && atoms[i].value == piece.value) {
        used[i] = true;
        ++done;
        piece.gammas.push_back(atoms[i].run);
      }
    }
    out.push_back(std::move(piece));
  }
  return out;
}

Periodicity periodicity_of(const GammaMultiBall& a);

using ConstantFiberPartition = std::map<Point, std::vector<FiberPiece<Fiber>>>;

ConstantFiberPartition partition_constant_fibers(const GammaMultiBall& a, const GammaCell& x);
std::vector<FiberPiece<Fiber>> partition_constant_fibers(const GammaMultiBall& a, const Point& s,
                                                         const GammaRun& domain);

// Radius-1 balls inside some fiber A_{s,gamma}.
std::size_t count_b1_cover(const GammaMultiBall& a, const Point& s);
// Same, restricted to gamma in [lo, hi] (resolved through the certificate).
std::size_t count_b1_cover(const GammaMultiBall& a, const Point& s, long lo, long hi);

// Radius-1 sub-balls of a ball of radius <= 1.
std::vector<Ball> b1_cover(const Ball& b);

}  // namespace padiq
