#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "padiq/constructible.hpp"
#include "padiq/expstar.hpp"
#include "padiq/geometry.hpp"

namespace padiq::dsl {

// ------------------------------------------------------------------ functions

// Character factor of an additive term: none, charsum(A) or psi(affine).
struct CharFactor {
  enum class Kind { None, CharSum, Psi };
  Kind kind = Kind::None;
  std::string multiball;  // CharSum
  AffineTerm arg;         // Psi
  friend bool operator==(const CharFactor&, const CharFactor&) = default;
};

struct FnTerm {
  ConstructibleExpr h;
  CharFactor chi;
  friend bool operator==(const FnTerm&, const FnTerm&) = default;
};

// sum of h_i * chi_i over (params..., var)
struct FnBody {
  std::vector<FnTerm> terms;
  std::optional<std::string> var;  // the one non-parameter variable, if used
  friend bool operator==(const FnBody&, const FnBody&) = default;
};

// ------------------------------------------------------------------ sets

struct BallSet {
  Ball ball;
  friend bool operator==(const BallSet&, const BallSet&) = default;
};
struct UnionSet {
  std::vector<Ball> balls;
  friend bool operator==(const UnionSet&, const UnionSet&) = default;
};
struct CosetTable {
  std::map<Point, std::vector<Ball>> balls;
  friend bool operator==(const CosetTable&, const CosetTable&) = default;
};
struct CellSet {
  ClassicalCell cell;
  std::optional<std::string> sq;  // bound kinds, only "<" is accepted
  friend bool operator==(const CellSet&, const CellSet&) = default;
};
struct ClusteredSet {
  ClusteredCell cell;
  bool declared_tree_type = false;
  friend bool operator==(const ClusteredSet&, const ClusteredSet&) = default;
};
struct GCellSet {
  std::optional<ParamTerm> alpha;
  std::optional<ParamTerm> beta;
  long residue = 0;
  long modulus = 1;
  friend bool operator==(const GCellSet&, const GCellSet&) = default;
};
struct MultiBallSet {
  std::variant<MultiBall, GammaMultiBall> balls;
  friend bool operator==(const MultiBallSet&, const MultiBallSet&) = default;
};

using SetDecl = std::variant<BallSet, UnionSet, CosetTable, CellSet, ClusteredSet, GCellSet, MultiBallSet>;

// Piece regions (set names) with the function on each.
struct BundleDecl {
  std::vector<std::pair<std::string, std::string>> pieces;
  friend bool operator==(const BundleDecl&, const BundleDecl&) = default;
};

// ------------------------------------------------------------------ commands

struct Integrand {
  std::optional<std::string> fn;  // a declared function, or
  FnBody inline_body;             // an inline expression
  friend bool operator==(const Integrand&, const Integrand&) = default;
};

struct IntegrateCmd {
  Integrand integrand;
  std::string var;
  std::string set;
  std::optional<std::string> normalform;
  bool compare = false;  // `compare` always runs the oracle
  friend bool operator==(const IntegrateCmd&, const IntegrateCmd&) = default;
};
struct EvalCmd {
  Integrand integrand;
  Point point;
  friend bool operator==(const EvalCmd&, const EvalCmd&) = default;
};
struct PartitionSignatureCmd {
  std::string set;
  friend bool operator==(const PartitionSignatureCmd&, const PartitionSignatureCmd&) = default;
};
struct SignatureCmd {
  std::string set;
  Point point;
  friend bool operator==(const SignatureCmd&, const SignatureCmd&) = default;
};
struct PartitionFibersCmd {
  std::string multiball;
  std::string var;
  std::string set;
  friend bool operator==(const PartitionFibersCmd&, const PartitionFibersCmd&) = default;
};

using Command = std::variant<IntegrateCmd, EvalCmd, PartitionSignatureCmd, SignatureCmd, PartitionFibersCmd>;

struct Job {
  long prime = 0;
  long level_cap = 24;
  std::vector<std::string> params;
  std::vector<Point> base{Point{}};
  std::vector<std::pair<std::string, SetDecl>> sets;
  std::vector<std::pair<std::string, FnBody>> fns;
  std::vector<std::pair<std::string, BundleDecl>> bundles;
  std::vector<Command> commands;

  FieldConfig field() const { return FieldConfig(prime, level_cap); }
  const SetDecl& set(const std::string& name) const;
  const FnBody& fn(const std::string& name) const;
  const BundleDecl& bundle(const std::string& name) const;

  friend bool operator==(const Job&, const Job&) = default;
};

// Syntax errors carry the line and the 1-based token index within it; names
// that do not resolve give "unresolved: NAME".
Job parse_job(const std::string& text, std::optional<long> prime_override = std::nullopt);
std::string serialize_job(const Job& job);

std::string to_string(const FnBody& body, const Job& job);
std::string to_string(const Command& cmd, const Job& job);

// Body of an integrand with its variable bound to `var` (checked).
const FnBody& resolve(const Integrand& in, const Job& job);

// ExpStarExpr over (params..., var); pure terms use the constant ball B_1(0).
ExpStarExpr to_expstar(const FnBody& body, const Job& job);

}  // namespace padiq::dsl
