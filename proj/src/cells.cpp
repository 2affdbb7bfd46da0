#include <set>

#include "padiq/geometry.hpp"

namespace padiq {

namespace {

constexpr long kMaxHeights = 1'000'000;

long ord_lambda(const Rational& lambda, long p) { return valuation(lambda, p).value(); }

}  // namespace

void ClassicalCell::validate() const {
  require(n >= 1 && m >= 1, ErrorKind::InvalidInput, "cell needs n, m >= 1");
}

std::optional<long> ClassicalCell::lower(const Point& s) const {
  if (!alpha) return std::nullopt;
  return alpha->eval_integer(s) + 1;
}

std::optional<long> ClassicalCell::upper(const Point& s) const {
  if (!beta) return std::nullopt;
  return beta->eval_integer(s) - 1;
}

bool ClassicalCell::admissible(const Point& s, long gamma, long p) const {
  if (lambda == 0) return false;
  if (auto lo = lower(s); lo && gamma < *lo) return false;
  if (auto hi = upper(s); hi && gamma > *hi) return false;
  return mod(gamma - ord_lambda(lambda, p), n) == 0;
}

long ClassicalCell::first_height_at_least(long from, long p) const {
  long r = ord_lambda(lambda, p);
  return from + mod(r - from, n);
}

bool ClassicalCell::contains(const Point& s, const Rational& t, const FieldConfig& cfg) const {
  Rational c = center.eval(s);
  if (lambda == 0) return t == c;
  Rational d = t - c;
  if (d == 0) return false;
  long g = valuation(d, cfg.p).value();
  if (!admissible(s, g, cfg.p)) return false;
  return in_Qnm(d / lambda, n, m, cfg);
}

Leaf leaf_at(const Rational& center, const Rational& lambda, long gamma, long m, long p) {
  long e = gamma - ord_lambda(lambda, p);
  return Leaf{gamma, Ball(gamma + m, center + lambda * rpow(p, e), p)};
}

std::vector<Leaf> leaves(const ClassicalCell& cell, const Point& s, long lo, long hi, const FieldConfig& cfg) {
  cell.validate();
  if (cell.lambda == 0) fail(ErrorKind::DegenerateCell, "lambda = 0 gives a point cell without leaves");
  if (auto l = cell.lower(s)) lo = std::max(lo, *l);
  if (auto h = cell.upper(s)) hi = std::min(hi, *h);
  std::vector<Leaf> out;
  if (lo > hi) return out;
  require(hi - lo <= kMaxHeights, ErrorKind::BudgetExceeded, "leaf range too long");
  Rational c = cell.center.eval(s);
  for (long g = cell.first_height_at_least(lo, cfg.p); g <= hi; g += cell.n) {
    cfg.check_level(g + cell.m, "leaf radius");
    out.push_back(leaf_at(c, cell.lambda, g, cell.m, cfg.p));
  }
  return out;
}

std::vector<long> ClusteredCell::heights(const Point& s, long p) const {
  long lo = alpha.eval_integer(s) + 1;
  long hi = beta.eval_integer(s) - 1;
  std::vector<long> out;
  if (lo > hi) return out;
  require(hi - lo <= kMaxHeights, ErrorKind::BudgetExceeded, "leaf range too long");
  long r = ord_lambda(lambda, p);
  for (long g = lo + mod(r - lo, n); g <= hi; g += n) out.push_back(g);
  return out;
}

bool ClusteredCell::contains(const Point& s, const Rational& t, const FieldConfig& cfg) const {
  long lo = alpha.eval_integer(s);
  long hi = beta.eval_integer(s);
  for (const Ball& b : sigma.fiber(s)) {
    Rational d = t - b.center();
    if (d == 0) continue;
    long g = valuation(d, cfg.p).value();
    if (g <= lo || g >= hi) continue;
    if (in_Qnm(d / lambda, n, m, cfg)) return true;
  }
  return false;
}

std::vector<Leaf> ClusteredCell::leaves(const Point& s, const FieldConfig& cfg) const {
  std::vector<Leaf> out;
  std::vector<long> hs = heights(s, cfg.p);
  for (const Ball& b : sigma.fiber(s))
    for (long g : hs) {
      cfg.check_level(g + m, "leaf radius");
      out.push_back(leaf_at(b.center(), lambda, g, m, cfg.p));
    }
  return out;
}

ClusteredCell ClusteredCell::make(MultiBall sigma, ParamTerm alpha, ParamTerm beta, Rational lambda, long n, long m,
                                  std::optional<std::vector<int>> tree_type, const FieldConfig& cfg) {
  require(lambda != 0, ErrorKind::InvalidInput, "clustered cell needs lambda != 0");
  require(n >= 1 && m >= 1, ErrorKind::InvalidInput, "clustered cell needs n, m >= 1");
  ClusteredCell c{std::move(sigma), std::move(alpha), std::move(beta), std::move(lambda), n, m, std::nullopt, false};
  std::vector<Point> base = c.base();
  bool large = !base.empty();
  for (const Point& s : base) {
    std::vector<long> hs = c.heights(s, cfg.p);
    if (hs.size() < 2) large = false;
    if (!hs.empty() && c.sigma.radius() < hs.back() + m)
      fail(ErrorKind::InvalidInput, "Sigma radius " + std::to_string(c.sigma.radius()) +
                                        " cannot resolve leaves up to radius " + std::to_string(hs.back() + m) +
                                        " at " + point_string(s));
  }
  c.large = large;
  std::set<std::vector<int>> seen;
  for (const Point& s : base) {
    const Fiber& f = c.sigma.fiber(s);
    std::vector<long> bh = branching_heights(f);
    if (large && !bh.empty() && bh.front() >= c.alpha.eval_integer(s))
      fail(ErrorKind::InvalidInput, "large clustered cell branches at or above alpha at " + point_string(s));
    if (!large) {
      std::vector<Leaf> ls = c.leaves(s, cfg);
      for (std::size_t i = 0; i < ls.size(); ++i)
        for (std::size_t j = i + 1; j < ls.size(); ++j)
          if (!ls[i].ball.disjoint(ls[j].ball))
            fail(ErrorKind::InvalidInput, "clustered cell leaves overlap at " + point_string(s));
    }
    for (const auto& sig : signatures(f)) seen.insert(sig);
  }
  if (tree_type) {
    if (seen.size() > 1 || (seen.size() == 1 && *seen.begin() != *tree_type))
      fail(ErrorKind::InvalidInput, "Sigma does not have the declared tree type");
    c.tree_type = std::move(tree_type);
  } else if (seen.size() == 1) {
    c.tree_type = *seen.begin();
  }
  return c;
}

namespace {

using FiberMap = std::map<Point, Fiber>;

std::vector<FiberMap> refine(const FiberMap& fibers) {
  if (fibers.empty()) return {};
  std::map<std::pair<std::size_t, std::multiset<std::vector<int>>>, FiberMap> groups;
  for (const auto& [s, f] : fibers) {
    auto sigs = signatures(f);
    groups[{f.size(), {sigs.begin(), sigs.end()}}].emplace(s, f);
  }
  if (groups.size() > 1) {
    std::vector<FiberMap> out;
    for (const auto& [shape, g] : groups)
      for (auto& piece : refine(g)) out.push_back(std::move(piece));
    return out;
  }
  const auto& sigs = groups.begin()->first.second;
  if (std::set<std::vector<int>>(sigs.begin(), sigs.end()).size() <= 1) return {fibers};
  // First depth at which the points disagree on their branch count.
  std::size_t j = 0;
  for (;; ++j) {
    std::set<int> vals;
    for (const auto& sig : sigs) vals.insert(sig[j]);
    if (vals.size() > 1) break;
  }
  std::map<int, FiberMap> split;
  for (const auto& [s, f] : fibers) {
    std::size_t d = branching_heights(f).size();
    for (std::size_t i = 0; i < f.size(); ++i) split[d_signature(f, i, d)[j]][s].push_back(f[i]);
  }
  std::vector<FiberMap> out;
  for (const auto& [k, g] : split)
    for (auto& piece : refine(g)) out.push_back(std::move(piece));
  return out;
}

}  // namespace

std::vector<ClusteredCell> partition_by_signature(const ClusteredCell& cell, const FieldConfig& cfg) {
  std::vector<ClusteredCell> out;
  for (const FiberMap& piece : refine(cell.sigma.fibers())) {
    std::size_t order = piece.begin()->second.size();
    MultiBall sigma(order, cell.sigma.radius(), piece);
    ClusteredCell c = ClusteredCell::make(std::move(sigma), cell.alpha, cell.beta, cell.lambda, cell.n, cell.m,
                                          std::nullopt, cfg);
    require(c.tree_type.has_value(), ErrorKind::ContractViolation, "signature refinement did not converge");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace padiq
