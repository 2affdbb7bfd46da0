#include "padiq/expstar.hpp"

#include <set>

namespace padiq {

std::size_t order(const MultiBallSource& a) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMultiBall>)
          return m.centers.size();
        else
          return m.balls.order();
      },
      a);
}

long radius(const MultiBallSource& a) {
  return std::visit(
      [](const auto& m) -> long {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AffineMultiBall>)
          return 1;
        else
          return m.balls.radius();
      },
      a);
}

Fiber source_fiber(const MultiBallSource& a, const Point& x, const FieldConfig& cfg) {
  if (const auto* t = std::get_if<TabulatedMultiBall>(&a)) return t->balls.fiber(prefix(x, t->arity));
  if (const auto* g = std::get_if<ParametricMultiBall>(&a)) {
    require(g->arity < x.size(), ErrorKind::OutOfDomain, "point lacks the Gamma coordinate");
    return g->balls.fiber(prefix(x, g->arity), to_long(x[g->arity]));
  }
  const auto& f = std::get<AffineMultiBall>(a);
  Fiber out;
  for (const auto& c : f.centers) out.emplace_back(1, c.eval(x), cfg.p);
  out = normalize_fiber(std::move(out));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i] == out[i - 1])
      fail(ErrorKind::OutOfDomain, "affine multi-ball centers collide at " + point_string(x));
  return out;
}

bool depends_on(const MultiBallSource& a, std::size_t index) {
  if (const auto* t = std::get_if<TabulatedMultiBall>(&a)) return index < t->arity;
  if (const auto* g = std::get_if<ParametricMultiBall>(&a)) return index <= g->arity;
  const auto& f = std::get<AffineMultiBall>(a);
  return std::any_of(f.centers.begin(), f.centers.end(), [&](const AffineTerm& c) { return c.depends_on(index); });
}

CyclotomicNumber char_sum(const Fiber& fiber) {
  if (fiber.empty()) return CyclotomicNumber();
  CyclotomicAccumulator acc(fiber.front().prime());
  for (const Ball& b : fiber) {
    if (b.radius() < 1) fail(ErrorKind::NotConstantOnBall, "psi is not constant on " + b.to_string());
    acc.add_root(psi_exponent(b.center(), b.prime()), 1);
  }
  return acc.result();
}

CyclotomicNumber char_sum(const MultiBall& a, const Point& key) { return char_sum(a.fiber(key)); }

ExpStarExpr::ExpStarExpr(std::vector<ExpStarTerm> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_)
    require(radius(t.balls) == 1, ErrorKind::InvalidInput, "exp* terms need multi-balls of radius 1");
}

CyclotomicNumber ExpStarExpr::eval(const Point& x, const FieldConfig& cfg) const {
  CyclotomicNumber total;
  for (const auto& t : terms_) {
    Rational h = t.coefficient.eval(x, cfg);
    if (h == 0) continue;
    total += char_sum(source_fiber(t.balls, x, cfg)).scaled(h);
  }
  return total;
}

ExpStarExpr ExpStarExpr::scaled(const Rational& r) const {
  std::vector<ExpStarTerm> out;
  for (const auto& t : terms_) out.push_back({ConstructibleExpr(r) * t.coefficient, t.balls});
  return ExpStarExpr(std::move(out));
}

ExpStarExpr operator+(const ExpStarExpr& a, const ExpStarExpr& b) {
  std::vector<ExpStarTerm> out = a.terms_;
  out.insert(out.end(), b.terms_.begin(), b.terms_.end());
  return ExpStarExpr(std::move(out));
}

ExpStarExpr lift_char_of_function(const std::map<Point, Rational>& f, const FieldConfig& cfg) {
  std::map<Point, Fiber> fibers;
  std::size_t arity = f.empty() ? 0 : f.begin()->first.size();
  for (const auto& [x, v] : f) {
    require(x.size() == arity, ErrorKind::InvalidInput, "tabulated function with mixed point sizes");
    fibers[x] = {Ball(1, v, cfg.p)};
  }
  return ExpStarExpr({{ConstructibleExpr(1), TabulatedMultiBall{MultiBall(1, 1, std::move(fibers)), arity}}});
}

ExpStarExpr lift_char_of_affine(const AffineTerm& f) {
  return ExpStarExpr({{ConstructibleExpr(1), AffineMultiBall{{f}}}});
}

Fiber filler(std::size_t t, long p) {
  Fiber out;
  if (t < static_cast<std::size_t>(p)) {
    for (std::size_t j = 0; j < t; ++j) out.emplace_back(1, static_cast<long>(j), p);
    return out;
  }
  // Centers j p^{-L} lie in pairwise different radius-0 balls.
  long L = 1;
  Integer pl = p;
  while (pl < static_cast<unsigned long>(t)) {
    pl *= p;
    ++L;
  }
  for (std::size_t j = 0; j < t; ++j) out.emplace_back(1, rpow(p, -L) * static_cast<long>(j), p);
  return normalize_fiber(std::move(out));
}

namespace {

// Balls of a radius-1 set whose radius-0 parent is not entirely inside the set.
Fiber maximal_part(const std::set<Ball>& d, long p) {
  std::map<Ball, std::size_t> family;
  for (const Ball& b : d) ++family[b.parent()];
  Fiber out;
  for (const Ball& b : d)
    if (family[b.parent()] < static_cast<std::size_t>(p)) out.push_back(b);
  return out;
}

TableAtom indicator(const std::vector<Point>& members, std::size_t arity) {
  TableAtom t;
  for (std::size_t i = 0; i < arity; ++i) t.vars.push_back(i);
  for (const Point& x : members) t.values[x] = 1;
  t.fallback = 0;
  return t;
}

}  // namespace

ExpStarExpr multiply(const ExpStarExpr& a, const ExpStarExpr& b, const std::vector<Point>& base,
                     const FieldConfig& cfg) {
  if (base.empty()) return {};
  std::size_t arity = base.front().size();
  for (const Point& x : base)
    require(x.size() == arity, ErrorKind::InvalidInput, "base table with mixed point sizes");
  std::vector<ExpStarTerm> out;
  for (const auto& ta : a.terms()) {
    for (const auto& tb : b.terms()) {
      // stratum[(r, t)][x] = E^{(r)}_x with |E^{(r)}_x| = t
      std::map<std::pair<std::size_t, std::size_t>, std::map<Point, Fiber>> strata;
      for (const Point& x : base) {
        Fiber fa = source_fiber(ta.balls, x, cfg);
        Fiber fb = source_fiber(tb.balls, x, cfg);
        std::map<Ball, std::size_t> count;
        for (const Ball& u : fa)
          for (const Ball& v : fb) ++count[ball_sum(u, v)];
        std::map<std::size_t, std::set<Ball>> by_r;
        for (const auto& [ball, r] : count) by_r[r].insert(ball);
        for (const auto& [r, d] : by_r) {
          Fiber e = maximal_part(d, cfg.p);
          if (!e.empty()) strata[{r, e.size()}][x] = std::move(e);
        }
      }
      for (auto& [rt, fibers] : strata) {
        auto [r, t] = rt;
        std::vector<Point> members;
        for (const auto& [x, f] : fibers) members.push_back(x);
        std::map<Point, Fiber> full;
        Fiber pad = filler(t, cfg.p);
        for (const Point& x : base) {
          auto it = fibers.find(x);
          full[x] = it != fibers.end() ? it->second : pad;
        }
        ConstructibleExpr coeff = ConstructibleExpr::product(
            {ConstructibleExpr::table(indicator(members, arity)), ConstructibleExpr(static_cast<long>(r)),
             ta.coefficient, tb.coefficient});
        out.push_back({coeff, TabulatedMultiBall{MultiBall(t, 1, std::move(full)), arity}});
      }
    }
  }
  return ExpStarExpr(std::move(out));
}

ExpStarExpr extend_by_zero(const ExpStarExpr& e, const std::vector<Point>& U, const std::vector<Point>& X,
                           const FieldConfig& cfg) {
  if (X.empty()) return {};
  std::size_t arity = X.front().size();
  std::set<Point> inside(U.begin(), U.end());
  for (const Point& u : U)
    require(std::find(X.begin(), X.end(), u) != X.end(), ErrorKind::InvalidInput, "U is not contained in X");
  std::vector<ExpStarTerm> out;
  for (const auto& t : e.terms()) {
    TableAtom coeff;
    for (std::size_t i = 0; i < arity; ++i) coeff.vars.push_back(i);
    coeff.fallback = 0;
    std::map<Point, Fiber> fibers;
    Fiber pad = filler(order(t.balls), cfg.p);
    for (const Point& x : X) {
      if (inside.count(x)) {
        coeff.values[x] = t.coefficient.eval(x, cfg);
        fibers[x] = source_fiber(t.balls, x, cfg);
      } else {
        fibers[x] = pad;
      }
    }
    out.push_back({ConstructibleExpr::table(std::move(coeff)),
                   TabulatedMultiBall{MultiBall(order(t.balls), 1, std::move(fibers)), arity}});
  }
  return ExpStarExpr(std::move(out));
}

std::string multiball_invariant_violation(const ExpStarExpr& e, const std::vector<Point>& base,
                                          const FieldConfig& cfg) {
  for (std::size_t i = 0; i < e.terms().size(); ++i) {
    const auto& src = e.terms()[i].balls;
    for (const Point& x : base) {
      Fiber f;
      try {
        f = source_fiber(src, x, cfg);
      } catch (const Error& err) {
        return "term " + std::to_string(i) + " at " + point_string(x) + ": " + err.what();
      }
      std::string where = "term " + std::to_string(i) + " at " + point_string(x);
      if (f.size() != order(src)) return where + ": fiber size differs from order";
      for (const Ball& b : f)
        if (b.radius() != 1) return where + ": ball of radius " + std::to_string(b.radius());
      for (std::size_t u = 0; u < f.size(); ++u)
        for (std::size_t v = u + 1; v < f.size(); ++v)
          if (!f[u].disjoint(f[v])) return where + ": overlapping balls";
      std::set<Ball> s(f.begin(), f.end());
      if (maximal_part(s, cfg.p).size() != f.size()) return where + ": balls not maximal in their union";
    }
  }
  return {};
}

void ExpStarBuilder::add(const std::string& key, const Point& s, const Rational& coefficient, Fiber fiber) {
  if (coefficient == 0 || fiber.empty()) return;
  fiber = normalize_fiber(std::move(fiber));
  auto& slot = strata_[{key, fiber.size()}];
  require(slot.count(s) == 0, ErrorKind::ContractViolation, "duplicate stratum " + key + " at " + point_string(s));
  slot.emplace(s, Entry{coefficient, std::move(fiber)});
}

ExpStarExpr ExpStarBuilder::build(const std::vector<Point>& base) const {
  std::vector<ExpStarTerm> out;
  for (const auto& [key, entries] : strata_) {
    std::size_t k = key.second;
    TableAtom coeff;
    for (std::size_t i = 0; i < arity_; ++i) coeff.vars.push_back(i);
    coeff.fallback = 0;
    std::map<Point, Fiber> fibers;
    Fiber pad = filler(k, p_);
    for (const Point& s : base) {
      auto it = entries.find(s);
      if (it != entries.end()) {
        coeff.values[s] = it->second.coefficient;
        fibers[s] = it->second.fiber;
      } else {
        fibers[s] = pad;
      }
    }
    out.push_back({ConstructibleExpr::table(std::move(coeff)),
                   TabulatedMultiBall{MultiBall(k, 1, std::move(fibers)), arity_}});
  }
  return ExpStarExpr(std::move(out));
}

}  // namespace padiq
