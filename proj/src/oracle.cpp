#include "padiq/oracle.hpp"

#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

namespace padiq {

std::uint64_t oracle_budget() {
  if (const char* env = std::getenv("PADIQ_ORACLE_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    require(end != env && *end == '\0' && v > 0, ErrorKind::InvalidInput,
            std::string("bad PADIQ_ORACLE_BUDGET: ") + env);
    return v;
  }
  return 10'000'000;
}

Integrand psi_integrand(std::size_t index) {
  return [index](const Point& x, const Rational& w, CyclotomicAccumulator& acc) {
    acc.add_root(psi_exponent(x.at(index), acc.prime()), w);
  };
}

Integrand constant_integrand(const Rational& c) {
  return [c](const Point&, const Rational& w, CyclotomicAccumulator& acc) { acc.add(CyclotomicNumber(c * w)); };
}

Integrand value_integrand(std::function<CyclotomicNumber(const Point&)> f) {
  return [f = std::move(f)](const Point& x, const Rational& w, CyclotomicAccumulator& acc) {
    acc.add(f(x).scaled(w));
  };
}

Member everywhere() {
  return [](const Point&) { return true; };
}

namespace {

struct Box {
  std::vector<Ball> balls;
  long level;
  std::vector<Integer> sizes;  // cosets per coordinate
  Integer total;
};

Box make_box(const OracleRegion& r) {
  Box b{r.box, r.level, {}, 1};
  for (const Ball& ball : r.box) {
    require(r.level >= ball.radius(), ErrorKind::InvalidInput, "oracle level below region radius");
    b.sizes.push_back(coset_count(ball.radius(), r.level, ball.prime()));
    b.total *= b.sizes.back();
  }
  return b;
}

// Representative number `index` of the box, coordinates in mixed radix.
Point representative(const Box& box, Integer index, long p) {
  Point x(box.balls.size());
  for (std::size_t i = box.balls.size(); i-- > 0;) {
    Integer digit = index % box.sizes[i];
    index /= box.sizes[i];
    const Ball& b = box.balls[i];
    x[i] = b.center() + rpow(p, b.radius()) * Rational(digit);
  }
  return x;
}

// Terms of f at x alone (weight 1), or nullopt outside the member set.
std::optional<CyclotomicAccumulator> probe(const Integrand& f, const Member& member, const Point& x, long p) {
  if (!member(x)) return std::nullopt;
  CyclotomicAccumulator acc(p);
  f(x, 1, acc);
  return acc;
}

bool same_value(const std::optional<CyclotomicAccumulator>& a, const std::optional<CyclotomicAccumulator>& b) {
  if (!a || !b) return a.has_value() == b.has_value();
  return a->same_terms(*b) || a->result() == b->result();
}

void check_refinement(const Integrand& f, const Member& member, const std::vector<Box>& boxes, long p,
                      const OracleOptions& opts) {
  std::mt19937_64 rng(opts.seed);
  for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
    const Box& box = boxes[bi];
    std::size_t dim = box.balls.size();
    std::size_t samples = opts.refinement_samples;
    std::size_t children = 1;
    for (std::size_t i = 0; i < dim; ++i) children *= static_cast<std::size_t>(p);
    for (std::size_t k = 0; k < samples; ++k) {
      Integer index;
      if (box.total <= samples) {
        if (k >= box.total) break;
        index = static_cast<unsigned long>(k);
      } else {
        // 0, last, then uniform draws
        if (k == 0) index = 0;
        else if (k == 1) index = box.total - 1;
        else {
          std::uniform_int_distribution<unsigned long> d(0, 0xffffffffUL);
          Integer r = 0;
          for (int w = 0; w < 4; ++w) r = r * 4294967296UL + d(rng);
          index = r % box.total;
        }
      }
      Point x = representative(box, index, p);
      auto parent = probe(f, member, x, p);
      for (std::size_t c = 1; c < children; ++c) {
        Point y = x;
        std::size_t rest = c;
        for (std::size_t i = 0; i < dim; ++i) {
          y[i] += rpow(p, box.level) * static_cast<long>(rest % static_cast<std::size_t>(p));
          rest /= static_cast<std::size_t>(p);
        }
        if (!same_value(probe(f, member, y, p), parent))
          fail(ErrorKind::InsufficientLevel, "integrand or region not constant on level-" +
                                                 std::to_string(box.level) + " coset of " + point_string(x));
      }
    }
  }
}

}  // namespace

CyclotomicNumber brute_force_integral(const Integrand& f, const Member& member,
                                      const std::vector<OracleRegion>& regions, const FieldConfig& cfg,
                                      const OracleOptions& opts) {
  long p = cfg.p;
  std::vector<Box> boxes;
  Integer total = 0;
  for (const auto& r : regions) {
    cfg.check_level(r.level, "oracle level");
    boxes.push_back(make_box(r));
    total += boxes.back().total;
  }
  std::uint64_t budget = opts.budget.value_or(oracle_budget());
  require(total <= Integer(std::to_string(budget)), ErrorKind::BudgetExceeded,
          "oracle enumeration of " + total.get_str() + " cosets exceeds budget " + std::to_string(budget));
  if (opts.check_refinement) check_refinement(f, member, boxes, p, opts);

  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  CyclotomicAccumulator acc(p);
  for (const Box& box : boxes) {
    Rational weight = 1;
    for (std::size_t i = 0; i < box.balls.size(); ++i) weight *= rpow(p, -box.level);
    unsigned long n = box.total.get_ui();
    unsigned used = static_cast<unsigned>(std::min<unsigned long>(threads, std::max(1UL, n / 4096)));
    std::vector<CyclotomicAccumulator> parts(used, CyclotomicAccumulator(p));
    std::vector<std::exception_ptr> errors(used);
    auto work = [&](unsigned t) {
      try {
        unsigned long lo = n * t / used;
        unsigned long hi = n * (t + 1) / used;
        for (unsigned long i = lo; i < hi; ++i) {
          Point x = representative(box, Integer(i), p);
          if (member(x)) f(x, weight, parts[t]);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    };
    if (used == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < used; ++t) pool.emplace_back(work, t);
      for (auto& th : pool) th.join();
    }
    for (unsigned t = 0; t < used; ++t) {
      if (errors[t]) std::rethrow_exception(errors[t]);
      acc.merge(parts[t]);
    }
  }
  return acc.result();
}

CyclotomicNumber brute_force_integral(const Integrand& f, const Member& member, const CosetGrid& grid,
                                      const FieldConfig& cfg, const OracleOptions& opts) {
  require(grid.N + grid.M >= 1, ErrorKind::InvalidInput, "coset grid needs N + M >= 1");
  require(grid.dim >= 1, ErrorKind::InvalidInput, "coset grid needs dimension >= 1");
  OracleRegion r{std::vector<Ball>(grid.dim, Ball(-grid.M, 0, cfg.p)), grid.N};
  return brute_force_integral(f, member, std::vector<OracleRegion>{r}, cfg, opts);
}

std::vector<OracleRegion> annular_tiling(const Rational& c, long from, long to, long depth, long p) {
  std::vector<OracleRegion> out;
  for (long g = from; g <= to; ++g)
    for (long u = 1; u < p; ++u)
      out.push_back({{Ball(g + 1, c + rpow(p, g) * u, p)}, std::max({g + depth, g + 1, 1L})});
  return out;
}

std::vector<OracleRegion> ball_regions(const std::vector<Ball>& balls, long level) {
  std::vector<Ball> sorted(balls.begin(), balls.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<Ball> kept;
  for (const Ball& b : sorted) {
    bool inside = std::any_of(kept.begin(), kept.end(), [&](const Ball& k) { return k.contains(b); });
    if (!inside) kept.push_back(b);
  }
  std::vector<OracleRegion> out;
  for (const Ball& b : kept) out.push_back({{b}, std::max(level, b.radius())});
  return out;
}

OracleValue oracle_char_cell(const ClassicalCell& cell, const Point& s, long T, const FieldConfig& cfg,
                             const OracleOptions& opts) {
  require(cell.alpha.has_value(), ErrorKind::UnsupportedInput, "oracle needs a lower bound alpha");
  long lo = cell.alpha->eval_integer(s) + 1;
  long hi = cell.beta ? cell.beta->eval_integer(s) - 1 : T;
  bool truncated = !cell.beta || hi > T;
  hi = std::min(hi, T);
  Rational c = cell.center.eval(s);
  Member member = [&](const Point& x) { return cell.contains(s, x[0], cfg); };
  CyclotomicNumber v;
  if (lo <= hi) v = brute_force_integral(psi_integrand(0), member, annular_tiling(c, lo, hi, cell.m, cfg.p), cfg, opts);
  Rational q = cfg.p;
  Rational bound = truncated ? rpow(cfg.p, -(T + cell.m)) * q / (q - 1) : Rational(0);
  return {v, bound};
}

CyclotomicNumber oracle_char_cell(const ClusteredCell& cell, const Point& s, const FieldConfig& cfg,
                                  const OracleOptions& opts) {
  long lo = cell.alpha.eval_integer(s) + 1;
  std::vector<Ball> around;
  for (const Ball& b : cell.sigma.fiber(s)) around.emplace_back(lo, b.center(), cfg.p);
  Member member = [&](const Point& x) { return cell.contains(s, x[0], cfg); };
  return brute_force_integral(psi_integrand(0), member, ball_regions(around, sufficiency_level(cell, s, cfg.p)),
                              cfg, opts);
}

OracleValue truncated_zsum(const std::function<CyclotomicNumber(long)>& f, long start, std::optional<long> end,
                           long T, const std::optional<ZSumEnvelope>& envelope, const FieldConfig& cfg) {
  long stop = end ? std::min(*end, T) : T;
  CyclotomicNumber partial;
  for (long z = start; z <= stop; ++z) partial += f(z);
  if (end && *end <= T) return {partial, 0};
  require(envelope.has_value(), ErrorKind::InvalidInput, "infinite z-sum needs an envelope");
  require(envelope->slope < 0, ErrorKind::NonIntegrable, "upward z-sum with slope >= 0");
  long from = std::max(T + 1, std::max(start, 1L));
  // Consecutive envelope terms shrink by at most rho for zeta >= from.
  Rational t = rpow(cfg.p, envelope->slope);
  Rational rho = t;
  Rational growth = Rational(from + 1) / from;
  for (int i = 0; i < envelope->degree; ++i) rho *= growth;
  require(rho < 1, ErrorKind::InsufficientLevel, "truncation point too small for the tail bound");
  Rational first = envelope->coefficient * rpow(cfg.p, envelope->slope * from);
  for (int i = 0; i < envelope->degree; ++i) first *= from;
  Rational bound = first / (1 - rho);
  return {partial, bound};
}

bool within_bound(const CyclotomicNumber& a, const CyclotomicNumber& b, const Rational& bound) {
  std::complex<double> d = (a - b).approx();
  return std::abs(d) <= bound.get_d() * (1 + 1e-9) + 1e-12;
}

long sufficiency_level(const LevelDescriptor& d) {
  long level = 1;
  for (long r : d.leaf_radii) level = std::max(level, r);
  for (long r : d.ord_depths) level = std::max(level, r);
  return level;
}

long sufficiency_level(const ClassicalCell& cell, const Point&, long top_height, long) {
  return sufficiency_level(LevelDescriptor{true, {top_height + cell.m}, {}});
}

long sufficiency_level(const ClusteredCell& cell, const Point& s, long) {
  return sufficiency_level(LevelDescriptor{true, {cell.beta.eval_integer(s) - 1 + cell.m}, {}});
}

}  // namespace padiq
