#include "padiq/integrator.hpp"

#include <numeric>
#include <set>
#include <sstream>

#include "padiq/oracle.hpp"

namespace padiq {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::BallFormula: return "ball-formula";
    case Method::CellLeafsum: return "cell-leafsum";
    case Method::ClusteredCell: return "clustered-cell";
    case Method::ZSum: return "z-sum";
    case Method::FubiniPipeline: return "fubini-pipeline";
  }
  return "?";
}

const CyclotomicNumber& IntegrationResult::value() const {
  require(values.size() == 1, ErrorKind::ContractViolation, "result has " + std::to_string(values.size()) + " values");
  return values.begin()->second;
}

// ---------------------------------------------------------------- psi integrals

CyclotomicNumber integrate_char_ball(const Ball& b) {
  if (b.radius() <= 0) return CyclotomicNumber();
  return psi_ball(b).scaled(b.volume());
}

CyclotomicNumber integrate_char_set(const std::vector<Ball>& cosets) {
  CyclotomicNumber total;
  for (const Ball& b : maximal_balls(cosets)) total += integrate_char_ball(b);
  return total;
}

std::vector<std::pair<Rational, Fiber>> volume_strata(const BallVolumes& v, long p) {
  std::map<Rational, std::vector<Ball>, std::greater<>> groups;
  for (const auto& [ball, vol] : v) {
    require(ball.radius() == 1, ErrorKind::ContractViolation, "strata need radius-1 balls");
    if (vol != 0) groups[vol].push_back(ball);
  }
  std::vector<std::pair<Rational, Fiber>> out;
  for (auto& [vol, balls] : groups) {
    std::map<Ball, std::size_t> family;
    for (const Ball& b : balls) ++family[b.parent()];
    Fiber kept;
    for (const Ball& b : balls)
      if (family[b.parent()] < static_cast<std::size_t>(p)) kept.push_back(b);
    if (!kept.empty()) out.emplace_back(vol, normalize_fiber(std::move(kept)));
  }
  return out;
}

namespace {

CyclotomicNumber strata_value(const std::vector<std::pair<Rational, Fiber>>& strata) {
  CyclotomicNumber total;
  for (const auto& [vol, fiber] : strata) total += char_sum(fiber).scaled(vol);
  return total;
}

// sum of q^{-(g+m)} over g = first, first + n, ..., up to hi (or forever).
Rational leaf_tail(long first, std::optional<long> hi, long n, long m, long p) {
  Rational head = rpow(p, -(first + m));
  Rational ratio = rpow(p, -n);
  if (!hi) return head / (1 - ratio);
  if (*hi < first) return 0;
  long count = (*hi - first) / n + 1;
  return head * (1 - rpow(p, -n * count)) / (1 - ratio);
}

std::string strata_certificate(const std::vector<std::pair<Rational, Fiber>>& strata) {
  std::ostringstream os;
  os << strata.size() << " strata";
  for (const auto& [vol, fiber] : strata) os << "; vol " << short_string(vol) << " x " << fiber.size();
  return os.str();
}

}  // namespace

BallVolumes char_cell_volumes(const ClassicalCell& cell, const Point& s, const FieldConfig& cfg) {
  BallVolumes v;
  if (cell.lambda == 0) return v;  // a single point
  cell.validate();
  long p = cfg.p;
  Rational c = cell.center.eval(s);
  // Leaves with gamma + m <= 0 integrate to 0.
  long lo = std::max(cell.lower(s).value_or(1 - cell.m), 1 - cell.m);
  std::optional<long> hi = cell.upper(s);
  long shallow_top = hi ? std::min(*hi, 0L) : 0L;
  for (long g = cell.first_height_at_least(lo, p); g <= shallow_top; g += cell.n) {
    Leaf leaf = leaf_at(c, cell.lambda, g, cell.m, p);
    v[leaf.ball.ancestor(1)] += leaf.volume();
  }
  // psi = psi(c) on every leaf at height >= 1.
  long first = cell.first_height_at_least(std::max(lo, 1L), p);
  if (!hi || first <= *hi) v[Ball(1, c, p)] += leaf_tail(first, hi, cell.n, cell.m, p);
  return v;
}

BallVolumes char_cell_volumes(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg) {
  BallVolumes v;
  for (const Leaf& leaf : cell.leaves(s, cfg))
    if (leaf.ball.radius() >= 1) v[leaf.ball.ancestor(1)] += leaf.volume();
  return v;
}

CyclotomicNumber integrate_char_cell(const ClassicalCell& cell, const Point& s, const FieldConfig& cfg) {
  return strata_value(volume_strata(char_cell_volumes(cell, s, cfg), cfg.p));
}

CyclotomicNumber integrate_char_cell(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg) {
  return strata_value(volume_strata(char_cell_volumes(cell, s, cfg), cfg.p));
}

namespace {

template <class Cell>
IntegrationResult cell_result(const Cell& cell, const std::vector<Point>& base, Method method,
                              const FieldConfig& cfg) {
  IntegrationResult r;
  r.method = method;
  std::size_t arity = base.empty() ? 0 : base.front().size();
  ExpStarBuilder builder(arity, cfg.p);
  std::size_t most = 0;
  for (const Point& s : base) {
    auto strata = volume_strata(char_cell_volumes(cell, s, cfg), cfg.p);
    most = std::max(most, strata.size());
    for (std::size_t j = 0; j < strata.size(); ++j)
      builder.add("stratum " + std::to_string(j), s, strata[j].first, strata[j].second);
    r.values[s] = strata_value(strata);
    if (base.size() == 1) r.certificate = strata_certificate(strata);
  }
  if (base.size() != 1) r.certificate = "at most " + std::to_string(most) + " strata per point";
  r.symbolic = builder.build(base);
  return r;
}

}  // namespace

IntegrationResult integrate_cell(const ClassicalCell& cell, const std::vector<Point>& base,
                                      const FieldConfig& cfg) {
  IntegrationResult r = cell_result(cell, base, Method::CellLeafsum, cfg);
  if (!cell.beta) r.certificate += "; closed-form geometric tail";
  return r;
}

IntegrationResult integrate_cell(const ClusteredCell& cell, const FieldConfig& cfg) {
  require(cell.tree_type.has_value(), ErrorKind::ContractViolation,
          "clustered cell needs a tree type; partition it by signature first");
  return cell_result(cell, cell.base(), Method::ClusteredCell, cfg);
}

// ---------------------------------------------------------------- Z-variables

namespace {

struct TailKey {
  bool up;
  long residue;
  auto operator<=>(const TailKey&) const = default;
};

void add_poly(std::vector<CyclotomicNumber>& acc, const std::vector<Rational>& coeffs, const CyclotomicNumber& e) {
  if (acc.size() < coeffs.size()) acc.resize(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) acc[i] += e.scaled(coeffs[i]);
}

}  // namespace

std::map<std::size_t, Rational> sum_z_contributions(const std::vector<ZContribution>& parts, const Point& s,
                                                     const FieldConfig& cfg) {
  std::map<std::size_t, Rational> factor;
  std::optional<long> G, H;
  long L = 1;
  for (const auto& c : parts) {
    if (c.run.empty()) continue;
    if (c.run.finite()) continue;
    L = std::lcm(L, c.run.step);
    if (!c.run.hi && c.run.lo) G = G ? std::max(*G, *c.run.first()) : *c.run.first();
    if (!c.run.lo && c.run.hi) H = H ? std::min(*H, *c.run.last()) : *c.run.last();
  }
  if (!G) G = H ? *H + 1 : 0;
  if (!H || *H >= *G) H = *G - 1;
  Point at = append(s, Rational(0));
  std::size_t gi = s.size();

  auto add_finite = [&](const ZContribution& c, const GammaRun& run) {
    if (run.empty()) return;
    long first = *run.first();
    long count = run.count();
    for (const auto& t : to_gamma_poly(c.h, at, gi, first, run.step, cfg))
      factor[c.tag] += sum_gamma_poly(t, ZetaRange{0, count - 1}, cfg);
  };

  std::map<TailKey, std::map<long, std::vector<CyclotomicNumber>>> divergent;
  auto add_tail = [&](const ZContribution& c, bool up) {
    for (long rho = 0; rho < L; ++rho) {
      if (mod(rho - c.run.residue, c.run.step) != 0) continue;
      long offset = up ? *G + mod(rho - *G, L) : *H - mod(*H - rho, L);
      ZetaRange range = up ? ZetaRange{0, std::nullopt} : ZetaRange{std::nullopt, 0};
      for (const auto& t : to_gamma_poly(c.h, at, gi, offset, L, cfg)) {
        if ((up && t.slope < 0) || (!up && t.slope > 0))
          factor[c.tag] += sum_gamma_poly(t, range, cfg);
        else
          add_poly(divergent[{up, rho}][t.slope], t.coeffs, c.e);
      }
    }
  };

  for (const auto& c : parts) {
    if (c.run.empty()) continue;
    factor.try_emplace(c.tag, 0);
    if (c.run.finite()) {
      add_finite(c, c.run);
      continue;
    }
    GammaRun middle = c.run;
    if (!c.run.lo) {
      add_tail(c, false);
      middle.lo = *H + 1;
    }
    if (!c.run.hi) {
      add_tail(c, true);
      middle.hi = *G - 1;
    }
    add_finite(c, middle);
  }
  // e_j(s) * sum_k d_jk(s) zeta^k must vanish on every divergent tail.
  for (const auto& [key, by_slope] : divergent) {
    for (const auto& [slope, coeffs] : by_slope) {
      for (const auto& z : coeffs) {
        if (!z.is_zero())
          fail(ErrorKind::NonIntegrable, "divergent " + std::string(key.up ? "upward" : "downward") +
                                             " tail with slope " + std::to_string(slope) + " at s = " +
                                             point_string(s));
      }
    }
  }
  return factor;
}

IntegrationResult integrate_Z(const ExpStarExpr& f, const GammaCell& x, const FieldConfig& cfg) {
  IntegrationResult r;
  r.method = Method::ZSum;
  std::size_t arity = x.base.empty() ? 0 : x.base.front().size();
  ExpStarBuilder builder(arity, cfg.p);
  std::size_t verified = 0;
  for (const Point& s : x.base) {
    require(s.size() == arity, ErrorKind::InvalidInput, "Gamma-cell base with mixed point sizes");
    GammaRun domain = x.fiber(s);
    std::vector<ZContribution> parts;
    std::vector<std::pair<std::string, Fiber>> labels;
    for (std::size_t i = 0; i < f.terms().size(); ++i) {
      const auto& term = f.terms()[i];
      Periodicity per{0, 0, 1};
      std::function<Fiber(long)> key;
      if (const auto* g = std::get_if<ParametricMultiBall>(&term.balls)) {
        require(g->arity == arity, ErrorKind::InvalidInput, "parametric multi-ball arity differs from the base");
        per = periodicity_of(g->balls);
        key = [&, g](long gamma) { return g->balls.fiber(s, gamma); };
      } else {
        require(!depends_on(term.balls, arity), ErrorKind::UnsupportedInput,
                "multi-ball depends on gamma without a stability certificate");
        Fiber fixed = source_fiber(term.balls, append(s, Rational(0)), cfg);
        key = [fixed](long) { return fixed; };
      }
      auto pieces = partition_by_key<Fiber>(domain, per, key);
      for (std::size_t j = 0; j < pieces.size(); ++j) {
        const auto& piece = pieces[j];
        // The pulled-out fiber must be the fiber at every probed gamma of the piece.
        for (const GammaRun& run : piece.gammas) {
          for (auto probe : {run.first(), run.last()}) {
            if (!probe) continue;
            require(key(*probe) == piece.value, ErrorKind::ContractViolation,
                    "fiber not constant on a constant-fiber piece");
            ++verified;
          }
        }
        CyclotomicNumber e = char_sum(piece.value);
        std::size_t tag = labels.size();
        labels.emplace_back("term " + std::to_string(i) + " piece " + std::to_string(j), piece.value);
        for (const GammaRun& run : piece.gammas) parts.push_back({e, term.coefficient, run, tag});
      }
    }
    auto factor = sum_z_contributions(parts, s, cfg);
    CyclotomicNumber total;
    for (const auto& [tag, a] : factor) {
      total += char_sum(labels[tag].second).scaled(a);
      builder.add(labels[tag].first, s, a, labels[tag].second);
    }
    r.values[s] = total;
  }
  r.symbolic = builder.build(x.base);
  r.certificate = "constant fibers verified at " + std::to_string(verified) + " probes; closed-form sums";
  return r;
}

IntegrationResult integrate_Z(const ExpStarExpr& f, const std::vector<GammaCell>& cells, const FieldConfig& cfg) {
  require(!cells.empty(), ErrorKind::InvalidInput, "no Gamma-cells to integrate over");
  IntegrationResult r = integrate_Z(f, cells.back(), cfg);
  for (std::size_t k = cells.size() - 1; k-- > 0;) {
    require(r.symbolic.has_value(), ErrorKind::ContractViolation, "inner integral without a symbolic form");
    r = integrate_Z(*r.symbolic, cells[k], cfg);
  }
  r.certificate = "iterated over " + std::to_string(cells.size()) + " Gamma-variables; " + r.certificate;
  return r;
}

// ---------------------------------------------------------------- integrability

namespace {

// h on the deep part of a cell, as a function of (s, gamma) with gamma in the
// x slot: ord(a(x - c)) becomes gamma + ord a, and ord(t) with a root away from
// B_from(c) becomes the constant ord t(c).
ConstructibleExpr radialize(const ConstructibleExpr& h, const Point& s, std::size_t xi, const Rational& c, long from,
                            const FieldConfig& cfg) {
  using K = ConstructibleExpr::Kind;
  switch (h.kind()) {
    case K::Constant: return h;
    case K::Affine:
    case K::ZDiv:
      require(!h.term().depends_on(xi), ErrorKind::UnsupportedInput, "affine atom in a K-variable");
      return h;
    case K::Table:
      for (std::size_t v : h.table_atom().vars)
        require(v != xi, ErrorKind::UnsupportedInput, "table atom in a K-variable");
      return h;
    case K::Ord: {
      const AffineTerm& t = h.term();
      if (!t.depends_on(xi)) return h;
      Rational a = t.coefficient(xi);
      Rational at_c = t.eval(append(s, c));
      long oa = valuation(a, cfg.p).value();
      if (at_c == 0) return ConstructibleExpr::affine(AffineTerm::variable(xi) + AffineTerm(oa));
      long oc = valuation(at_c, cfg.p).value();
      require(oc < oa + from, ErrorKind::UnsupportedInput, "ord atom with a root near the cell center");
      return ConstructibleExpr(oc);
    }
    case K::Power: return ConstructibleExpr::power(radialize(h.children()[0], s, xi, c, from, cfg));
    case K::Sum:
    case K::Product: {
      std::vector<ConstructibleExpr> kids;
      for (const auto& k : h.children()) kids.push_back(radialize(k, s, xi, c, from, cfg));
      return h.kind() == K::Sum ? ConstructibleExpr::sum(kids) : ConstructibleExpr::product(kids);
    }
  }
  return h;
}

// Atoms of h that depend on x, checked against a bounded coset union.
bool bounded_on(const ConstructibleExpr& h, const std::vector<Ball>& region, std::size_t xi, const Point& s,
                std::string* why) {
  using K = ConstructibleExpr::Kind;
  switch (h.kind()) {
    case K::Constant: return true;
    case K::Affine:
    case K::ZDiv:
      if (h.term().depends_on(xi)) {
        if (why) *why = "affine atom in a K-variable";
        return false;
      }
      return true;
    case K::Table:
      for (std::size_t v : h.table_atom().vars)
        if (v == xi) {
          if (why) *why = "table atom in a K-variable";
          return false;
        }
      return true;
    case K::Ord: {
      const AffineTerm& t = h.term();
      if (!t.depends_on(xi)) return true;
      Rational root = -t.substitute(xi, 0).eval(append(s, Rational(0))) / t.coefficient(xi);
      for (const Ball& b : region)
        if (b.contains(root)) {
          if (why) *why = "ord atom vanishes inside the region";
          return false;
        }
      return true;
    }
    default:
      for (const auto& k : h.children())
        if (!bounded_on(k, region, xi, s, why)) return false;
      return true;
  }
}

}  // namespace

std::optional<Attestation> check_integrability(const ConstructibleExpr& h, const IntegrabilityRegion& region,
                                               const Point& s, std::size_t x_index, const FieldConfig& cfg,
                                               std::string* refusal) {
  if (const auto* balls = std::get_if<std::vector<Ball>>(&region)) {
    std::string why;
    if (!bounded_on(h, *balls, x_index, s, &why)) {
      if (refusal) *refusal = why;
      return std::nullopt;
    }
    return Attestation{"locally constant and bounded on a bounded coset union"};
  }
  const auto& cell = std::get<ClassicalCell>(region);
  if (cell.lambda == 0) return Attestation{"measure-zero cell"};
  std::optional<long> lo = cell.lower(s);
  std::optional<long> hi = cell.upper(s);
  Rational c = cell.center.eval(s);
  try {
    if (!lo) fail(ErrorKind::UnsupportedInput, "cell unbounded below");
    ConstructibleExpr radial = radialize(h, s, x_index, c, *lo, cfg);
    // sum over admissible gamma of q^{-(gamma+m)} h(gamma)
    ConstructibleExpr vol = ConstructibleExpr::power(
        ConstructibleExpr::affine(AffineTerm::variable(x_index, -1) + AffineTerm(-cell.m)));
    GammaRun run{mod(cell.first_height_at_least(0, cfg.p), cell.n), cell.n, *lo, hi};
    sum_z_contributions({{CyclotomicNumber(1), radial * vol, run, 0}}, s, cfg);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonIntegrable && e.kind() != ErrorKind::UnsupportedInput) throw;
    if (refusal) *refusal = e.what();
    return std::nullopt;
  }
  return Attestation{hi ? "bounded cell" : "negative tail exponents"};
}

// ---------------------------------------------------------------- K-variables

namespace {

bool region_contains(const BundleRegion& region, const Point& s, const Rational& x, const FieldConfig& cfg) {
  if (const auto* t = std::get_if<std::map<Point, std::vector<Ball>>>(&region)) {
    auto it = t->find(s);
    if (it == t->end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const Ball& b) { return b.contains(x); });
  }
  return std::get<ClassicalCell>(region).contains(s, x, cfg);
}

std::vector<Ball> region_balls(const BundleRegion& region, const Point& s) {
  const auto& t = std::get<std::map<Point, std::vector<Ball>>>(region);
  auto it = t.find(s);
  if (it == t.end()) return {};
  return maximal_balls(it->second);
}

// Least coset level at which the term is constant on the region.
long auto_level(const BundleTerm& term, const std::vector<Ball>& region, std::size_t xi, const FieldConfig& cfg) {
  long level = 1;
  for (const Ball& b : region) level = std::max(level, b.radius());
  if (const auto* a = std::get_if<AffineMultiBall>(&term.balls))
    for (const auto& c : a->centers)
      if (c.depends_on(xi)) level = std::max(level, 1 - valuation(c.coefficient(xi), cfg.p).value());
  return level;
}

// b -> sum over x-cosets C with b in A_{s,x} of Vol(C) h(s, x).
BallVolumes inner_integrals(const BundleTerm& term, const std::vector<Ball>& region, const Point& s, long level,
                            const FieldConfig& cfg) {
  require(!std::holds_alternative<ParametricMultiBall>(term.balls), ErrorKind::UnsupportedInput,
          "Gamma-parametric multi-ball in a K-integral");
  cfg.check_level(level, "x-coset level");
  Integer total = 0;
  for (const Ball& b : region) total += coset_count(b.radius(), level, cfg.p);
  std::uint64_t budget = oracle_budget();
  require(total <= Integer(std::to_string(budget)), ErrorKind::BudgetExceeded,
          "x-coset enumeration of " + total.get_str() + " cosets exceeds budget");
  Rational vol = rpow(cfg.p, -level);
  Rational step = rpow(cfg.p, level);
  BallVolumes g;
  for (const Ball& b : region) {
    for (const Ball& coset : b.subdivide(level)) {
      Point x = append(s, coset.center());
      Rational hv = term.h.eval(x, cfg);
      Fiber fiber = source_fiber(term.balls, x, cfg);
      // One more child of the coset must see the same data.
      Point y = append(s, coset.center() + step);
      if (term.h.eval(y, cfg) != hv || source_fiber(term.balls, y, cfg) != fiber)
        fail(ErrorKind::InsufficientLevel, "term not constant on level-" + std::to_string(level) + " coset " +
                                               coset.to_string());
      if (hv == 0) continue;
      for (const Ball& ball : fiber) {
        require(ball.radius() == 1, ErrorKind::ContractViolation, "K-integrand multi-ball of radius != 1");
        g[ball] += hv * vol;
      }
    }
  }
  return g;
}

// Number of level sets {b : g(b) = C}, C != 0.
std::size_t distinct_values(const BallVolumes& g) {
  std::set<Rational> attained;
  for (const auto& [ball, v] : g)
    if (v != 0) attained.insert(v);
  return attained.size();
}

}  // namespace

bool NormalFormBundle::attest(const FieldConfig& cfg, std::string* refusal) {
  for (auto& piece : pieces) {
    for (auto& term : piece.terms) {
      if (term.attestation) continue;
      std::optional<Attestation> att;
      for (const Point& s : base) {
        std::size_t xi = s.size();
        if (const auto* cell = std::get_if<ClassicalCell>(&piece.region))
          att = check_integrability(term.h, *cell, s, xi, cfg, refusal);
        else
          att = check_integrability(term.h, region_balls(piece.region, s), s, xi, cfg, refusal);
        if (!att) return false;
      }
      term.attestation = att ? att : Attestation{"empty base"};
    }
  }
  return true;
}

CyclotomicNumber NormalFormBundle::eval(const Point& s, const Rational& x, const FieldConfig& cfg) const {
  CyclotomicNumber total;
  Point at = append(s, x);
  for (const auto& piece : pieces) {
    if (!region_contains(piece.region, s, x, cfg)) continue;
    for (const auto& term : piece.terms) {
      Rational hv = term.h.eval(at, cfg);
      if (hv != 0) total += char_sum(source_fiber(term.balls, at, cfg)).scaled(hv);
    }
  }
  return total;
}

LevelSetFamily level_sets(const BundleTerm& term, const std::vector<Ball>& region, const Point& s, long level,
                          const FieldConfig& cfg) {
  BallVolumes g = inner_integrals(term, region, s, level, cfg);
  std::map<Rational, std::vector<Ball>> by_value;
  for (const auto& [ball, v] : g)
    if (v != 0) by_value[v].push_back(ball);
  LevelSetFamily out;
  bool first = true;
  for (auto& [v, balls] : by_value) {
    out.values.push_back(v);
    for (const Ball& b : balls) {
      long d = b.center() == 0 ? b.radius() : std::min(b.radius(), valuation(b.center(), cfg.p).value());
      out.radius_bound = first ? d : std::min(out.radius_bound, d);
      first = false;
    }
    out.pieces.push_back(std::move(balls));
    out.bounded.push_back(true);
  }
  return out;
}

IntegrationResult integrate_K(const NormalFormBundle& f, const FieldConfig& cfg) {
  for (const auto& piece : f.pieces)
    for (const auto& term : piece.terms)
      require(term.attestation.has_value(), ErrorKind::NormalFormRequired,
              "bundle term lacks an integrability attestation");
  IntegrationResult r;
  r.method = Method::FubiniPipeline;
  std::size_t arity = f.base.empty() ? 0 : f.base.front().size();
  ExpStarBuilder builder(arity, cfg.p);
  std::size_t level_set_count = 0;
  std::size_t tails = 0;
  for (const Point& s : f.base) {
    require(s.size() == arity, ErrorKind::InvalidInput, "bundle base with mixed point sizes");
    std::size_t xi = s.size();
    BallVolumes total;
    auto absorb = [&](const BallVolumes& g) {
      for (const auto& [ball, v] : g) total[ball] += v;
    };
    for (const auto& piece : f.pieces) {
      for (const auto& term : piece.terms) {
        if (const auto* cell = std::get_if<ClassicalCell>(&piece.region)) {
          if (cell->lambda == 0) continue;
          std::optional<long> lo = cell->lower(s);
          require(lo.has_value(), ErrorKind::UnsupportedInput, "K-integral over a cell needs alpha");
          std::optional<long> hi = cell->upper(s);
          Rational c = cell->center.eval(s);
          long deep = std::max(*lo, 1L);
          // Shallow leaves: each leaf is a ball of the cell.
          for (long h = cell->first_height_at_least(*lo, cfg.p); h < deep && (!hi || h <= *hi); h += cell->n) {
            Leaf leaf = leaf_at(c, cell->lambda, h, cell->m, cfg.p);
            std::vector<Ball> region{leaf.ball};
            long level = std::max(piece.level.value_or(1), auto_level(term, region, xi, cfg));
            BallVolumes g = inner_integrals(term, region, s, level, cfg);
            level_set_count += distinct_values(g);
            absorb(g);
          }
          long first = cell->first_height_at_least(deep, cfg.p);
          if (hi && first > *hi) continue;
          // Deep leaves lie in B_1(c): A is constant there, h depends on gamma only.
          if (const auto* a = std::get_if<AffineMultiBall>(&term.balls))
            for (const auto& ctr : a->centers)
              require(!ctr.depends_on(xi) || valuation(ctr.coefficient(xi), cfg.p).value() >= 0,
                      ErrorKind::UnsupportedInput, "multi-ball not constant on B_1 of the cell center");
          require(!std::holds_alternative<ParametricMultiBall>(term.balls), ErrorKind::UnsupportedInput,
                  "Gamma-parametric multi-ball in a K-integral");
          if (const auto* tab = std::get_if<TabulatedMultiBall>(&term.balls))
            require(tab->arity <= xi, ErrorKind::UnsupportedInput, "tabulated multi-ball over a K-variable");
          Fiber fiber = source_fiber(term.balls, append(s, c), cfg);
          ConstructibleExpr radial = radialize(term.h, s, xi, c, deep, cfg);
          ConstructibleExpr vol = ConstructibleExpr::power(
              ConstructibleExpr::affine(AffineTerm::variable(xi, -1) + AffineTerm(-cell->m)));
          GammaRun run{mod(first, cell->n), cell->n, first, hi};
          auto factor = sum_z_contributions({{char_sum(fiber), radial * vol, run, 0}}, s, cfg);
          ++tails;
          for (const Ball& b : fiber) total[b] += factor[0];
        } else {
          std::vector<Ball> region = region_balls(piece.region, s);
          if (region.empty()) continue;
          long level = std::max(piece.level.value_or(1), auto_level(term, region, xi, cfg));
          BallVolumes g = inner_integrals(term, region, s, level, cfg);
          level_set_count += distinct_values(g);
          absorb(g);
        }
      }
    }
    auto strata = volume_strata(total, cfg.p);
    for (std::size_t j = 0; j < strata.size(); ++j)
      builder.add("stratum " + std::to_string(j), s, strata[j].first, strata[j].second);
    r.values[s] = strata_value(strata);
  }
  r.symbolic = builder.build(f.base);
  r.certificate = std::to_string(level_set_count) + " level sets; " + std::to_string(tails) + " radial tails";
  return r;
}

}  // namespace padiq
