#include <set>
#include <sstream>

#include "padiq/geometry.hpp"

namespace padiq {

Fiber normalize_fiber(Fiber f) {
  std::sort(f.begin(), f.end());
  return f;
}

void validate_fiber(const Fiber& f, std::size_t order, long radius, const std::string& where) {
  if (f.size() != order)
    fail(ErrorKind::InvalidInput, where + ": expected " + std::to_string(order) + " balls, got " +
                                      std::to_string(f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].radius() != radius)
      fail(ErrorKind::InvalidInput, where + ": ball " + f[i].to_string() + " has radius other than " +
                                        std::to_string(radius));
    for (std::size_t j = i + 1; j < f.size(); ++j)
      if (!f[i].disjoint(f[j]))
        fail(ErrorKind::InvalidInput, where + ": balls " + f[i].to_string() + " and " + f[j].to_string() +
                                          " overlap");
  }
}

MultiBall::MultiBall(std::size_t order, long radius, std::map<Point, Fiber> fibers)
    : order_(order), radius_(radius) {
  require(order >= 1, ErrorKind::InvalidInput, "multi-ball order must be positive");
  for (auto& [key, f] : fibers) {
    Fiber g = normalize_fiber(std::move(f));
    validate_fiber(g, order, radius, "multi-ball fiber at " + point_string(key));
    fibers_.emplace(key, std::move(g));
  }
}

const Fiber& MultiBall::fiber(const Point& key) const {
  auto it = fibers_.find(key);
  require(it != fibers_.end(), ErrorKind::OutOfDomain, "no multi-ball fiber at " + point_string(key));
  return it->second;
}

std::vector<Point> MultiBall::base() const {
  std::vector<Point> out;
  for (const auto& [key, f] : fibers_) out.push_back(key);
  return out;
}

std::vector<Ball> maximal_balls(const std::vector<Ball>& cosets) {
  if (cosets.empty()) return {};
  long p = cosets.front().prime();
  std::set<Ball> all(cosets.begin(), cosets.end());
  long min_r = all.begin()->radius();
  long max_r = all.rbegin()->radius();
  // Drop balls inside other balls of the input.
  std::set<Ball> kept;
  for (const Ball& b : all) {
    bool inside = false;
    for (long r = min_r; r < b.radius() && !inside; ++r) inside = kept.count(b.ancestor(r)) != 0;
    if (!inside) kept.insert(b);
  }
  for (long r = max_r;; --r) {
    std::map<Ball, std::vector<Ball>> families;
    for (const Ball& b : kept)
      if (b.radius() == r) families[b.parent()].push_back(b);
    if (families.empty() && r < min_r) break;
    for (auto& [parent, kids] : families) {
      if (static_cast<long>(kids.size()) != p) continue;
      for (const Ball& k : kids) kept.erase(k);
      kept.insert(parent);
    }
  }
  return {kept.begin(), kept.end()};
}

std::vector<long> branching_heights(const Fiber& fiber) {
  std::set<long, std::greater<>> hs;
  for (std::size_t i = 0; i < fiber.size(); ++i)
    for (std::size_t j = i + 1; j < fiber.size(); ++j)
      hs.insert(valuation(fiber[i].center() - fiber[j].center(), fiber[i].prime()).value());
  return {hs.begin(), hs.end()};
}

std::vector<int> d_signature(const Fiber& fiber, std::size_t index, std::size_t d) {
  require(index < fiber.size(), ErrorKind::ContractViolation, "signature index out of range");
  std::vector<long> hs = branching_heights(fiber);
  if (d > hs.size())
    fail(ErrorKind::InsufficientDepth, "requested depth " + std::to_string(d) + " but only " +
                                           std::to_string(hs.size()) + " branching heights");
  const Ball& me = fiber[index];
  long p = me.prime();
  std::vector<int> out;
  for (std::size_t j = 0; j < d; ++j) {
    long g = hs[j];
    std::set<Rational> branches;
    for (const Ball& b : fiber)
      if (valuation(b.center() - me.center(), p) >= Valuation(g))
        branches.insert(canonical_representative(b.center(), g + 1, p));
    out.push_back(static_cast<int>(branches.size()));
  }
  return out;
}

std::vector<std::vector<int>> signatures(const Fiber& fiber) {
  std::size_t d = branching_heights(fiber).size();
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < fiber.size(); ++i) out.push_back(d_signature(fiber, i, d));
  return out;
}

namespace {

SignatureTree::Node build_node(const Fiber& fiber, const std::vector<std::size_t>& idx) {
  long p = fiber[idx[0]].prime();
  long h = 0;
  bool first = true;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      long v = valuation(fiber[idx[a]].center() - fiber[idx[b]].center(), p).value();
      if (first || v < h) h = v;
      first = false;
    }
  SignatureTree::Node node(h, Ball(h, fiber[idx[0]].center(), p));
  std::map<Rational, std::vector<std::size_t>> groups;
  for (std::size_t i : idx) groups[canonical_representative(fiber[i].center(), h + 1, p)].push_back(i);
  for (auto& [c, g] : groups) {
    if (g.size() == 1)
      node.leaves.push_back(g[0]);
    else
      node.children.push_back(build_node(fiber, g));
  }
  return node;
}

void collect_heights(const SignatureTree::Node& n, std::set<long, std::greater<>>& out) {
  out.insert(n.height);
  for (const auto& c : n.children) collect_heights(c, out);
}

void render(const SignatureTree::Node& n, std::ostringstream& out) {
  out << "[" << n.height << ":";
  for (std::size_t l : n.leaves) out << " " << l;
  for (const auto& c : n.children) {
    out << " ";
    render(c, out);
  }
  out << "]";
}

}  // namespace

SignatureTree SignatureTree::build(const Fiber& fiber) {
  SignatureTree t;
  t.size = fiber.size();
  if (fiber.size() < 2) return t;
  std::vector<std::size_t> idx(fiber.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  t.root = build_node(fiber, idx);
  return t;
}

std::vector<long> SignatureTree::heights() const {
  std::set<long, std::greater<>> hs;
  if (root) collect_heights(*root, hs);
  return {hs.begin(), hs.end()};
}

std::string SignatureTree::to_string() const {
  if (!root) return size == 1 ? "[leaf 0]" : "[]";
  std::ostringstream out;
  render(*root, out);
  return out.str();
}

}  // namespace padiq
