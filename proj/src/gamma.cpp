#include <numeric>
#include <set>

#include "padiq/geometry.hpp"

namespace padiq {

namespace {

constexpr long kMaxExplicit = 1'000'000;

}  // namespace

bool triangle_less(long x, long y) {
  long ax = x < 0 ? -x : x;
  long ay = y < 0 ? -y : y;
  if (ax != ay) return ax < ay;
  return x == -y && y > 0;
}

bool GammaRun::contains(long g) const {
  if (lo && g < *lo) return false;
  if (hi && g > *hi) return false;
  return mod(g - residue, step) == 0;
}

std::optional<long> GammaRun::first() const {
  if (!lo) return std::nullopt;
  long g = *lo + mod(residue - *lo, step);
  if (hi && g > *hi) return std::nullopt;
  return g;
}

std::optional<long> GammaRun::last() const {
  if (!hi) return std::nullopt;
  long g = *hi - mod(*hi - residue, step);
  if (lo && g < *lo) return std::nullopt;
  return g;
}

bool GammaRun::empty() const {
  if (lo) return !first().has_value();
  if (hi) return !last().has_value();
  return false;
}

std::optional<long> GammaRun::min_triangle() const {
  if (empty()) return std::nullopt;
  std::vector<long> candidates;
  // Closest elements to 0 from each side, clamped to the run.
  long up = mod(residue, step);               // least element >= 0 of the progression
  long down = up == 0 ? 0 : up - step;        // greatest element <= 0
  for (long g : {up, down}) {
    if (contains(g)) candidates.push_back(g);
  }
  if (auto f = first()) candidates.push_back(*f);
  if (auto l = last()) candidates.push_back(*l);
  long best = candidates.front();
  for (long g : candidates)
    if (triangle_less(g, best)) best = g;
  return best;
}

long GammaRun::count() const {
  require(finite(), ErrorKind::ContractViolation, "count of an infinite run");
  auto f = first();
  if (!f) return 0;
  return (*last() - *f) / step + 1;
}

std::vector<long> GammaRun::elements() const {
  long c = count();
  require(c <= kMaxExplicit, ErrorKind::BudgetExceeded, "run too long to enumerate");
  std::vector<long> out;
  for (long g = first().value_or(0), i = 0; i < c; ++i, g += step) out.push_back(g);
  return out;
}

std::string GammaRun::to_string() const {
  std::string out = "{g = " + std::to_string(mod(residue, step)) + " mod " + std::to_string(step);
  if (lo) out += ", g >= " + std::to_string(*lo);
  if (hi) out += ", g <= " + std::to_string(*hi);
  return out + "}";
}

bool contains(const GammaSet& set, long g) {
  return std::any_of(set.begin(), set.end(), [g](const GammaRun& r) { return r.contains(g); });
}

std::string to_string(const GammaSet& set) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) out += (i ? " u " : "") + set[i].to_string();
  return out.empty() ? "{}" : out;
}

GammaRun GammaCell::fiber(const Point& s) const {
  require(modulus >= 1, ErrorKind::InvalidInput, "Gamma-cell modulus must be positive");
  GammaRun r{mod(residue, modulus), modulus, std::nullopt, std::nullopt};
  if (alpha) r.lo = alpha->eval_integer(s) + 1;
  if (beta) r.hi = beta->eval_integer(s) - 1;
  return r;
}

bool GammaCell::contains(const Point& s, long gamma) const {
  if (std::find(base.begin(), base.end(), s) == base.end()) return false;
  return fiber(s).contains(gamma);
}

GammaMultiBall::GammaMultiBall(std::size_t order, long radius, Table table, std::optional<StabilityCertificate> cert)
    : order_(order), radius_(radius), cert_(std::move(cert)) {
  require(order >= 1, ErrorKind::InvalidInput, "multi-ball order must be positive");
  if (cert_) {
    require(cert_->period >= 1, ErrorKind::InvalidInput, "certificate period must be positive");
    require(cert_->after || cert_->before, ErrorKind::InvalidInput, "certificate needs after or before");
  }
  for (auto& [s, row] : table) {
    auto& out = table_[s];
    for (auto& [g, f] : row) {
      Fiber h = normalize_fiber(std::move(f));
      validate_fiber(h, order, radius, "fiber at " + point_string(s) + ", gamma " + std::to_string(g));
      out.emplace(g, std::move(h));
    }
  }
  if (!cert_) return;
  long P = cert_->period;
  for (const auto& [s, row] : table_) {
    if (cert_->after)
      for (long g = *cert_->after; g < *cert_->after + P; ++g)
        require(row.count(g) != 0, ErrorKind::InvalidParametricMultiball,
                "certificate window entry missing at gamma " + std::to_string(g));
    if (cert_->before)
      for (long g = *cert_->before; g < *cert_->before + P; ++g)
        require(row.count(g) != 0, ErrorKind::InvalidParametricMultiball,
                "certificate window entry missing at gamma " + std::to_string(g));
    // Tabulated entries beyond the thresholds must repeat the window.
    for (const auto& [g, f] : row) {
      auto r = resolve(s, g);
      if (r && *r != g && row.at(*r) != f)
        fail(ErrorKind::InvalidParametricMultiball, "fiber at " + point_string(s) + ", gamma " +
                                                        std::to_string(g) + " breaks the certified period");
    }
  }
}

GammaMultiBall GammaMultiBall::from_rule(std::size_t order, long radius, const std::vector<Point>& base,
                                         const std::function<Fiber(const Point&, long)>& rule, long lo, long hi,
                                         std::optional<StabilityCertificate> cert, int verify_periods) {
  Table table;
  long from = lo;
  long to = hi;
  if (cert) {
    long P = cert->period;
    if (cert->after) {
      from = std::min(from, *cert->after);
      to = std::max(to, *cert->after + P * (verify_periods + 1) - 1);
    }
    if (cert->before) {
      from = std::min(from, *cert->before - P * verify_periods);
      to = std::max(to, *cert->before + P - 1);
    }
  }
  require(to - from <= kMaxExplicit, ErrorKind::BudgetExceeded, "rule tabulation window too long");
  for (const Point& s : base)
    for (long g = from; g <= to; ++g) table[s][g] = rule(s, g);
  return GammaMultiBall(order, radius, std::move(table), std::move(cert));
}

std::vector<Point> GammaMultiBall::base() const {
  std::vector<Point> out;
  for (const auto& [s, row] : table_) out.push_back(s);
  return out;
}

std::optional<long> GammaMultiBall::resolve(const Point& s, long gamma) const {
  if (!cert_) return gamma;
  long P = cert_->period;
  if (cert_->after && gamma >= *cert_->after) return *cert_->after + mod(gamma - *cert_->after, P);
  if (cert_->before && gamma < *cert_->before) return *cert_->before + mod(gamma - *cert_->before, P);
  (void)s;
  return gamma;
}

bool GammaMultiBall::defined(const Point& s, long gamma) const {
  auto it = table_.find(s);
  if (it == table_.end()) return false;
  auto r = resolve(s, gamma);
  return r && it->second.count(*r) != 0;
}

const Fiber& GammaMultiBall::fiber(const Point& s, long gamma) const {
  auto it = table_.find(s);
  require(it != table_.end(), ErrorKind::OutOfDomain, "no fibers at " + point_string(s));
  long g = resolve(s, gamma).value_or(gamma);
  auto jt = it->second.find(g);
  require(jt != it->second.end(), ErrorKind::OutOfDomain,
          "no fiber at " + point_string(s) + ", gamma " + std::to_string(gamma));
  return jt->second;
}

std::vector<GammaRun> periodic_atoms(const GammaRun& domain, const Periodicity& per) {
  std::vector<GammaRun> out;
  if (domain.empty()) return out;
  long L = std::lcm(domain.step, per.period);
  // Tails where the run is periodic with period L, then the explicit middle.
  std::optional<long> upper_cut;   // upper tail covers gamma >= upper_cut
  std::optional<long> lower_cut;   // lower tail covers gamma < lower_cut
  if (per.after && (!domain.hi || *domain.hi >= *per.after + L)) {
    upper_cut = domain.lo ? std::max(*per.after, *domain.lo) : *per.after;
  }
  if (per.before && (!domain.lo || *domain.lo < *per.before - L)) {
    long d = domain.hi ? std::min(*per.before, *domain.hi + 1) : *per.before;
    if (upper_cut) d = std::min(d, *upper_cut);
    lower_cut = d;
  }
  long mid_lo;
  long mid_hi;
  if (lower_cut) {
    mid_lo = *lower_cut;
  } else if (domain.lo) {
    mid_lo = *domain.lo;
  } else {
    fail(ErrorKind::InvalidParametricMultiball, "domain unbounded below without a certificate");
  }
  if (upper_cut) {
    mid_hi = *upper_cut - 1;
  } else if (domain.hi) {
    mid_hi = *domain.hi;
  } else {
    fail(ErrorKind::InvalidParametricMultiball, "domain unbounded above without a certificate");
  }
  if (lower_cut) {
    for (long k = 0; k < L; k += domain.step) {
      GammaRun r{mod(domain.residue + k, L), L, domain.lo, *lower_cut - 1};
      if (!r.empty()) out.push_back(r);
    }
  }
  if (mid_lo <= mid_hi) {
    GammaRun mid{domain.residue, domain.step, mid_lo, mid_hi};
    if (domain.lo) mid.lo = std::max(mid_lo, *domain.lo);
    if (domain.hi) mid.hi = std::min(mid_hi, *domain.hi);
    if (!mid.empty())
      for (long g : mid.elements()) out.push_back(GammaRun::single(g));
  }
  if (upper_cut) {
    for (long k = 0; k < L; k += domain.step) {
      GammaRun r{mod(domain.residue + k, L), L, *upper_cut, domain.hi};
      if (!r.empty()) out.push_back(r);
    }
  }
  return out;
}

Periodicity periodicity_of(const GammaMultiBall& a) {
  if (!a.certificate()) return {};
  return {a.certificate()->after, a.certificate()->before, a.certificate()->period};
}

std::vector<FiberPiece<Fiber>> partition_constant_fibers(const GammaMultiBall& a, const Point& s,
                                                         const GammaRun& domain) {
  std::function<Fiber(long)> key = [&](long g) { return a.fiber(s, g); };
  return partition_by_key<Fiber>(domain, periodicity_of(a), key);
}

ConstantFiberPartition partition_constant_fibers(const GammaMultiBall& a, const GammaCell& x) {
  ConstantFiberPartition out;
  for (const Point& s : x.base) {
    auto pieces = partition_constant_fibers(a, s, x.fiber(s));
    if (!pieces.empty()) out.emplace(s, std::move(pieces));
  }
  return out;
}

std::vector<Ball> b1_cover(const Ball& b) {
  if (b.radius() > 1) return {};
  return b.subdivide(1);
}

namespace {

std::size_t count_cover(const std::vector<const Fiber*>& fibers) {
  std::set<Ball> cover;
  for (const Fiber* f : fibers)
    for (const Ball& b : *f)
      for (const Ball& c : b1_cover(b)) cover.insert(c);
  return cover.size();
}

}  // namespace

std::size_t count_b1_cover(const GammaMultiBall& a, const Point& s) {
  auto it = a.table().find(s);
  require(it != a.table().end(), ErrorKind::OutOfDomain, "no fibers at " + point_string(s));
  std::vector<const Fiber*> fibers;
  for (const auto& [g, f] : it->second) fibers.push_back(&f);
  return count_cover(fibers);
}

std::size_t count_b1_cover(const GammaMultiBall& a, const Point& s, long lo, long hi) {
  require(hi - lo <= kMaxExplicit, ErrorKind::BudgetExceeded, "window too long");
  std::vector<const Fiber*> fibers;
  for (long g = lo; g <= hi; ++g)
    if (a.defined(s, g)) fibers.push_back(&a.fiber(s, g));
  return count_cover(fibers);
}

}  // namespace padiq
