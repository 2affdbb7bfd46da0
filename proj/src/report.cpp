#include "padiq/report.hpp"

#include <chrono>
#include <future>

#include "padiq/integrator.hpp"
#include "padiq/oracle.hpp"

namespace padiq {

using nlohmann::json;

namespace {

json point_json(const Point& p) {
  json out = json::array();
  for (const Rational& r : p) out.push_back(r.get_str());
  return out;
}

std::string ball_text(const Ball& b) { return "ball(" + std::to_string(b.radius()) + ", " + b.center().get_str() + ")"; }

json fiber_json(const Fiber& f) {
  json out = json::array();
  for (const Ball& b : f) out.push_back(ball_text(b));
  return out;
}

bool is_plain_psi(const dsl::FnBody& body, std::size_t k) {
  return body.terms.size() == 1 && body.terms[0].h == ConstructibleExpr(1) &&
         body.terms[0].chi.kind == dsl::CharFactor::Kind::Psi && body.terms[0].chi.arg == AffineTerm::variable(k);
}

// Ball-type sets as a list of balls at s; nullopt for the other kinds.
std::optional<std::vector<Ball>> set_balls(const dsl::SetDecl& set, const Point& s) {
  if (const auto* b = std::get_if<dsl::BallSet>(&set)) return std::vector<Ball>{b->ball};
  if (const auto* u = std::get_if<dsl::UnionSet>(&set)) return u->balls;
  if (const auto* t = std::get_if<dsl::CosetTable>(&set)) {
    auto it = t->balls.find(s);
    require(it != t->balls.end(), ErrorKind::OutOfDomain, "cosets table has no entry at " + point_string(s));
    return it->second;
  }
  return std::nullopt;
}

GammaCell gamma_cell(const dsl::GCellSet& g, const dsl::Job& job) {
  return GammaCell{job.base, g.alpha, g.beta, g.residue, g.modulus};
}

BundleRegion bundle_region(const dsl::SetDecl& set, const dsl::Job& job) {
  if (const auto* c = std::get_if<dsl::CellSet>(&set)) return c->cell;
  std::map<Point, std::vector<Ball>> table;
  for (const Point& s : job.base) {
    auto balls = set_balls(set, s);
    if (!balls) fail(ErrorKind::UnsupportedInput, "this integrand needs a ball, union, cosets or cell region");
    table[s] = *balls;
  }
  return table;
}

std::vector<BundleTerm> bundle_terms(const dsl::FnBody& body, const dsl::Job& job) {
  std::vector<BundleTerm> out;
  ExpStarExpr e = dsl::to_expstar(body, job);
  for (const ExpStarTerm& t : e.terms()) out.push_back({t.coefficient, t.balls, std::nullopt});
  return out;
}

bool in_set(const dsl::SetDecl& set, const Point& s, const Rational& x, const FieldConfig& cfg) {
  if (const auto* c = std::get_if<dsl::CellSet>(&set)) return c->cell.contains(s, x, cfg);
  auto balls = set_balls(set, s);
  return std::any_of(balls->begin(), balls->end(), [&](const Ball& b) { return b.contains(x); });
}

// A few points of each piece: ball centers and their level-(r+1) neighbours,
// leaf centers of the first heights of a cell.
std::vector<Rational> sample_points(const BundleRegion& region, const Point& s, const FieldConfig& cfg) {
  std::vector<Rational> out;
  std::vector<Ball> balls;
  if (const auto* t = std::get_if<std::map<Point, std::vector<Ball>>>(&region)) {
    auto it = t->find(s);
    if (it != t->end()) balls = it->second;
  } else {
    const auto& cell = std::get<ClassicalCell>(region);
    if (cell.lambda == 0) return out;
    long lo = cell.alpha ? cell.alpha->eval_integer(s) + 1 : -3;
    long hi = cell.beta ? cell.beta->eval_integer(s) - 1 : lo + 3;
    for (const Leaf& l : leaves(cell, s, lo, std::min(hi, lo + 3), cfg)) balls.push_back(l.ball);
  }
  for (const Ball& b : balls)
    for (long j = 0; j < std::min(cfg.p, 3L); ++j) out.push_back(b.center() + rpow(cfg.p, b.radius() + 1) * j);
  return out;
}

NormalFormBundle build_bundle(const dsl::IntegrateCmd& cmd, const dsl::Job& job, const FieldConfig& cfg) {
  const dsl::FnBody& body = dsl::resolve(cmd.integrand, job);
  const dsl::SetDecl& set = job.set(cmd.set);
  NormalFormBundle b;
  b.base = job.base;
  if (!cmd.normalform) {
    b.pieces.push_back({bundle_region(set, job), bundle_terms(body, job), std::nullopt});
    return b;
  }
  for (const auto& [set_name, fn_name] : job.bundle(*cmd.normalform).pieces)
    b.pieces.push_back({bundle_region(job.set(set_name), job), bundle_terms(job.fn(fn_name), job), std::nullopt});
  // The normal form must describe the integrand on the integration set.
  ExpStarExpr f = dsl::to_expstar(body, job);
  for (const Point& s : job.base)
    for (const BundlePiece& piece : b.pieces)
      for (const Rational& x : sample_points(piece.region, s, cfg)) {
        std::string at = point_string(append(s, x));
        require(in_set(set, s, x, cfg), ErrorKind::InconsistentInput,
                "normal form piece reaches " + at + " outside " + cmd.set);
        require(f.eval(append(s, x), cfg) == b.eval(s, x, cfg), ErrorKind::InconsistentInput,
                "normal form disagrees with the integrand at " + at);
      }
  return b;
}

IntegrationResult per_point(const dsl::Job& job, const std::function<CyclotomicNumber(const Point&)>& value,
                            std::string certificate) {
  IntegrationResult r;
  r.method = Method::BallFormula;
  r.certificate = std::move(certificate);
  for (const Point& s : job.base) r.values[s] = value(s);
  return r;
}

IntegrationResult integrate(const dsl::IntegrateCmd& cmd, const dsl::Job& job, const FieldConfig& cfg) {
  const dsl::FnBody& body = dsl::resolve(cmd.integrand, job);
  const dsl::SetDecl& set = job.set(cmd.set);
  std::size_t k = job.params.size();
  if (const auto* g = std::get_if<dsl::GCellSet>(&set)) {
    require(!cmd.normalform, ErrorKind::UnsupportedInput, "normal forms apply to integrals over Q_p");
    return integrate_Z(dsl::to_expstar(body, job), gamma_cell(*g, job), cfg);
  }
  if (!cmd.normalform && is_plain_psi(body, k)) {
    if (std::holds_alternative<dsl::BallSet>(set) || std::holds_alternative<dsl::UnionSet>(set) ||
        std::holds_alternative<dsl::CosetTable>(set)) {
      return per_point(job, [&](const Point& s) { return integrate_char_set(*set_balls(set, s)); },
                       "sum of psi(a) q^-gamma over the maximal balls; balls of radius <= 0 give 0");
    }
    if (const auto* c = std::get_if<dsl::CellSet>(&set)) return integrate_cell(c->cell, job.base, cfg);
    if (const auto* c = std::get_if<dsl::ClusteredSet>(&set)) {
      if (c->cell.tree_type) return integrate_cell(c->cell, cfg);
      IntegrationResult total;
      total.method = Method::ClusteredCell;
      auto pieces = partition_by_signature(c->cell, cfg);
      for (const ClusteredCell& piece : pieces) {
        IntegrationResult r = integrate_cell(piece, cfg);
        for (const auto& [s, v] : r.values) total.values[s] += v;
      }
      total.certificate = "sum over " + std::to_string(pieces.size()) + " constant-signature pieces";
      return total;
    }
  }
  NormalFormBundle bundle = build_bundle(cmd, job, cfg);
  std::string refusal;
  if (!bundle.attest(cfg, &refusal)) fail(ErrorKind::NonIntegrable, "integrability not attested: " + refusal);
  return integrate_K(bundle, cfg);
}

struct OracleCheck {
  std::optional<CyclotomicNumber> value;
  Rational bound = 0;
  std::string note;
};

// Brute force over ball regions, raising the level until the refinement check passes.
CyclotomicNumber adaptive(const Integrand& f, const Member& member,
                          const std::function<std::vector<OracleRegion>(long)>& regions, long start,
                          const FieldConfig& cfg, const OracleOptions& opts) {
  for (long level = start;; ++level) {
    try {
      return brute_force_integral(f, member, regions(level), cfg, opts);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::InsufficientLevel || level >= cfg.level_cap) throw;
    }
  }
}

std::optional<ZSumEnvelope> envelope_for(const ExpStarExpr& f, const Point& s, std::size_t k, const FieldConfig& cfg) {
  ZSumEnvelope env{-1, 0, 0};
  bool any = false;
  for (const ExpStarTerm& t : f.terms()) {
    std::vector<GammaPolyTerm> poly;
    try {
      poly = to_gamma_poly(t.coefficient, append(s, Rational(0)), k, 0, 1, cfg);
    } catch (const Error&) {
      return std::nullopt;
    }
    for (const GammaPolyTerm& p : poly) {
      env.slope = any ? std::max(env.slope, p.slope) : p.slope;
      env.degree = std::max(env.degree, static_cast<int>(p.coeffs.size()) - 1);
      Rational mass = 0;
      for (const Rational& c : p.coeffs) mass += abs(c);
      env.coefficient += mass * static_cast<long>(order(t.balls));
      any = true;
    }
  }
  if (env.slope >= 0) return std::nullopt;
  return env;
}

OracleCheck oracle_for(const dsl::IntegrateCmd& cmd, const dsl::Job& job, const Point& s, const FieldConfig& cfg,
                       const RunOptions& ro) {
  OracleOptions opts;
  opts.seed = ro.seed;
  const dsl::FnBody& body = dsl::resolve(cmd.integrand, job);
  const dsl::SetDecl& set = job.set(cmd.set);
  std::size_t k = job.params.size();
  ExpStarExpr f = dsl::to_expstar(body, job);
  auto at = [&, f](const Point& x) { return f.eval(append(s, x[0]), cfg); };

  if (const auto* g = std::get_if<dsl::GCellSet>(&set)) {
    GammaRun run = gamma_cell(*g, job).fiber(s);
    if (run.empty()) return {CyclotomicNumber(), 0, ""};
    if (!run.lo) return {std::nullopt, 0, "no oracle for sums unbounded below"};
    auto term = [&](long gamma) {
      return run.contains(gamma) ? f.eval(append(s, Rational(gamma)), cfg) : CyclotomicNumber();
    };
    long start = *run.first();
    if (run.hi) {
      OracleValue v = truncated_zsum(term, start, *run.last(), *run.last(), std::nullopt, cfg);
      return {v.value, v.tail_bound, ""};
    }
    auto env = envelope_for(f, s, k, cfg);
    if (!env) return {std::nullopt, 0, "no envelope for the summand"};
    OracleValue v = truncated_zsum(term, start, std::nullopt, std::max(ro.zsum_truncation, start), env, cfg);
    return {v.value, v.tail_bound, ""};
  }

  bool psi = is_plain_psi(body, k);
  if (const auto* c = std::get_if<dsl::ClusteredSet>(&set)) {
    if (!psi) return {std::nullopt, 0, "no oracle for this integrand"};
    return {oracle_char_cell(c->cell, s, cfg, opts), 0, ""};
  }
  if (const auto* c = std::get_if<dsl::CellSet>(&set)) {
    const ClassicalCell& cell = c->cell;
    if (cell.lambda == 0) return {CyclotomicNumber(), 0, ""};
    if (!cell.alpha) return {std::nullopt, 0, "no oracle for cells unbounded below"};
    if (psi) {
      OracleValue v = oracle_char_cell(cell, s, ro.unbounded_truncation, cfg, opts);
      return {v.value, v.tail_bound, ""};
    }
    if (!cell.beta) return {std::nullopt, 0, "no oracle for this integrand on a cell unbounded above"};
    long lo = cell.alpha->eval_integer(s) + 1, hi = cell.beta->eval_integer(s) - 1;
    if (lo > hi) return {CyclotomicNumber(), 0, ""};
    Rational center = cell.center.eval(s);
    Member member = [&](const Point& x) { return cell.contains(s, x[0], cfg); };
    auto regions = [&](long depth) { return annular_tiling(center, lo, hi, depth, cfg.p); };
    return {adaptive(value_integrand(at), member, regions, cell.m, cfg, opts), 0, ""};
  }
  std::vector<Ball> balls = *set_balls(set, s);
  long start = 1;
  for (const Ball& b : balls) start = std::max(start, b.radius());
  auto regions = [&](long level) { return ball_regions(balls, level); };
  Integrand integrand = psi ? psi_integrand(0) : value_integrand(at);
  return {adaptive(integrand, everywhere(), regions, start, cfg, opts), 0, ""};
}

json values_json(const std::map<Point, CyclotomicNumber>& values, const dsl::Job& job, json& out) {
  if (job.params.empty() && values.size() == 1) {
    out["value"] = value_json(values.begin()->second);
  } else {
    json list = json::array();
    for (const auto& [s, v] : values) list.push_back({{"point", point_json(s)}, {"value", value_json(v)}});
    out["values"] = list;
  }
  return out;
}

void run_integrate(const dsl::IntegrateCmd& cmd, const dsl::Job& job, const RunOptions& ro, CommandReport& rep) {
  FieldConfig cfg = job.field();
  IntegrationResult r = integrate(cmd, job, cfg);
  rep.body["method"] = std::string(to_string(r.method));
  rep.body["certificate"] = r.certificate;
  values_json(r.values, job, rep.body);
  if (r.symbolic) rep.body["symbolic_terms"] = r.symbolic->terms().size();
  rep.ok = true;
  if (!ro.compare_oracle && !cmd.compare) return;

  json oracle = json::array();
  bool all = true, any = false;
  std::string note;
  for (const auto& [s, v] : r.values) {
    OracleCheck check = oracle_for(cmd, job, s, cfg, ro);
    if (!check.value) {
      note = check.note;
      all = false;
      continue;
    }
    CyclotomicNumber o = *check.value;
    if (ro.inject_mismatch) o += CyclotomicNumber(1);
    bool match = check.bound == 0 ? o == v : within_bound(o, v, check.bound);
    json entry{{"value", value_json(o)}, {"bound", check.bound.get_str()}, {"match", match}};
    if (!job.params.empty()) entry["point"] = point_json(s);
    oracle.push_back(entry);
    any = true;
    if (!match) rep.oracle_match = false;
  }
  rep.body["oracle"] = oracle;
  if (!note.empty()) rep.body["oracle_note"] = note;
  if (!rep.oracle_match && any && all) rep.oracle_match = true;
}

void run_eval(const dsl::EvalCmd& cmd, const dsl::Job& job, CommandReport& rep) {
  FieldConfig cfg = job.field();
  ExpStarExpr f = dsl::to_expstar(dsl::resolve(cmd.integrand, job), job);
  rep.body["value"] = value_json(f.eval(cmd.point, cfg));
  rep.ok = true;
}

void run_partition_signature(const dsl::PartitionSignatureCmd& cmd, const dsl::Job& job, CommandReport& rep) {
  FieldConfig cfg = job.field();
  const ClusteredCell& cell = std::get<dsl::ClusteredSet>(job.set(cmd.set)).cell;
  json pieces = json::array();
  for (const ClusteredCell& piece : partition_by_signature(cell, cfg)) {
    json base = json::array();
    for (const Point& s : piece.base()) base.push_back(point_json(s));
    json tree = piece.tree_type ? json(*piece.tree_type) : json(nullptr);
    pieces.push_back({{"base", base}, {"tree_type", tree}, {"large", piece.large}});
  }
  rep.body["pieces"] = pieces;
  rep.ok = true;
}

void run_signature(const dsl::SignatureCmd& cmd, const dsl::Job& job, CommandReport& rep) {
  const ClusteredCell& cell = std::get<dsl::ClusteredSet>(job.set(cmd.set)).cell;
  const Fiber& fiber = cell.sigma.fiber(cmd.point);
  rep.body["fiber"] = fiber_json(fiber);
  rep.body["branching_heights"] = branching_heights(fiber);
  rep.body["signatures"] = signatures(fiber);
  rep.ok = true;
}

void run_partition_fibers(const dsl::PartitionFibersCmd& cmd, const dsl::Job& job, CommandReport& rep) {
  const auto& source = std::get<dsl::MultiBallSet>(job.set(cmd.multiball)).balls;
  const auto* a = std::get_if<GammaMultiBall>(&source);
  require(a != nullptr, ErrorKind::SemanticError, cmd.multiball + " has no gamma coordinate");
  const auto& g = std::get<dsl::GCellSet>(job.set(cmd.set));
  json pieces = json::array();
  for (const auto& [s, list] : partition_constant_fibers(*a, gamma_cell(g, job)))
    for (const auto& piece : list)
      pieces.push_back({{"point", point_json(s)},
                        {"delta", piece.delta},
                        {"gammas", to_string(piece.gammas)},
                        {"fiber", fiber_json(piece.value)}});
  rep.body["pieces"] = pieces;
  rep.ok = true;
}

}  // namespace

json value_json(const CyclotomicNumber& z) {
  json coeffs = json::array();
  for (const Rational& c : z.coeffs()) coeffs.push_back(c.get_str());
  std::complex<double> a = z.approx();
  return {{"conductor", z.conductor().get_str()},
          {"coeffs", coeffs},
          {"text", z.to_string()},
          {"approx", {{"re", a.real()}, {"im", a.imag()}}}};
}

CommandReport run_command(const dsl::Job& job, const dsl::Command& cmd, const RunOptions& opts) {
  CommandReport rep;
  rep.command = dsl::to_string(cmd, job);
  rep.body = json::object();
  auto start = std::chrono::steady_clock::now();
  try {
    std::visit(
        [&](const auto& c) {
          using T = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<T, dsl::IntegrateCmd>) run_integrate(c, job, opts, rep);
          else if constexpr (std::is_same_v<T, dsl::EvalCmd>) run_eval(c, job, rep);
          else if constexpr (std::is_same_v<T, dsl::PartitionSignatureCmd>) run_partition_signature(c, job, rep);
          else if constexpr (std::is_same_v<T, dsl::SignatureCmd>) run_signature(c, job, rep);
          else run_partition_fibers(c, job, rep);
        },
        cmd);
  } catch (const Error& e) {
    rep.ok = false;
    rep.body = json::object();
    rep.body["error"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
  }
  rep.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

Report run_job(const dsl::Job& job, const RunOptions& opts) {
  Report report;
  report.prime = job.prime;
  report.options = opts;
  if (!opts.parallel) {
    for (const auto& cmd : job.commands) report.commands.push_back(run_command(job, cmd, opts));
    return report;
  }
  std::vector<std::future<CommandReport>> running;
  for (const auto& cmd : job.commands)
    running.push_back(std::async(std::launch::async, [&job, &cmd, &opts] { return run_command(job, cmd, opts); }));
  for (auto& f : running) report.commands.push_back(f.get());
  return report;
}

std::size_t Report::failures() const {
  std::size_t n = 0;
  for (const auto& c : commands)
    if (!c.ok || c.oracle_match == false) ++n;
  return n;
}

json Report::to_json(bool with_times) const {
  json cmds = json::array();
  for (const auto& c : commands) {
    json j = c.body;
    j["command"] = c.command;
    j["status"] = !c.ok ? "error" : c.oracle_match == false ? "mismatch" : "ok";
    j["oracle_match"] = c.oracle_match ? json(*c.oracle_match) : json(nullptr);
    if (with_times) j["wall_time_ms"] = c.wall_time_ms;
    cmds.push_back(j);
  }
  return {{"prime", prime},
          {"flags",
           {{"compare_oracle", options.compare_oracle},
            {"seed", options.seed},
            {"parallel", options.parallel},
            {"inject_mismatch", options.inject_mismatch}}},
          {"commands", cmds},
          {"failures", failures()},
          {"status", ok() ? "ok" : "failed"}};
}

}  // namespace padiq
