#include "padiq/dsl.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace padiq::dsl {

const SetDecl& Job::set(const std::string& name) const {
  for (const auto& [n, s] : sets)
    if (n == name) return s;
  fail(ErrorKind::SemanticError, "unresolved: " + name);
}

const FnBody& Job::fn(const std::string& name) const {
  for (const auto& [n, f] : fns)
    if (n == name) return f;
  fail(ErrorKind::SemanticError, "unresolved: " + name);
}

const BundleDecl& Job::bundle(const std::string& name) const {
  for (const auto& [n, b] : bundles)
    if (n == name) return b;
  fail(ErrorKind::SemanticError, "unresolved: " + name);
}

namespace {

// ------------------------------------------------------------------ lexing

struct Token {
  enum class Kind { Ident, Number, Punct, End };
  Kind kind;
  std::string text;
  int line;
  int index;  // 1-based within the statement
};

struct Statement {
  std::vector<Token> tokens;
  int line;
};

std::vector<Statement> split_statements(const std::string& text) {
  std::vector<Statement> out;
  Statement cur{{}, 1};
  int depth = 0;
  int line = 1;
  auto flush = [&] {
    if (!cur.tokens.empty()) {
      cur.tokens.push_back({Token::Kind::End, "end of statement", line, static_cast<int>(cur.tokens.size()) + 1});
      out.push_back(std::move(cur));
    }
    cur = Statement{{}, line};
  };
  std::size_t i = 0;
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (ch == '\n') {
      ++line;
      ++i;
      if (depth == 0) flush();
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (cur.tokens.empty()) cur.line = line;
    int index = static_cast<int>(cur.tokens.size()) + 1;
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      cur.tokens.push_back({Token::Kind::Ident, text.substr(i, j - i), line, index});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '/' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      cur.tokens.push_back({Token::Kind::Number, text.substr(i, j - i), line, index});
      i = j;
    } else if (std::string("(){}[],;:=+-*^<").find(ch) != std::string::npos) {
      if (ch == '(' || ch == '{' || ch == '[') ++depth;
      if (ch == ')' || ch == '}' || ch == ']') depth = std::max(0, depth - 1);
      cur.tokens.push_back({Token::Kind::Punct, std::string(1, ch), line, index});
      ++i;
    } else {
      fail(ErrorKind::SyntaxError, "line " + std::to_string(line) + ", token " + std::to_string(index) +
                                       ": unexpected character '" + std::string(1, ch) + "'");
    }
  }
  flush();
  return out;
}

// ------------------------------------------------------------------ parsing

class Parser {
 public:
  Parser(const Statement& st, Job& job) : toks_(st.tokens), job_(job) {}

  [[noreturn]] void error(const std::string& what) const {
    const Token& t = toks_[pos_];
    std::string found = t.kind == Token::Kind::End ? t.text : "'" + t.text + "'";
    fail(ErrorKind::SyntaxError, "line " + std::to_string(t.line) + ", token " + std::to_string(t.index) +
                                     ": expected " + what + ", found " + found);
  }

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Token::Kind::End; }
  bool is(const std::string& text, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind != Token::Kind::End && t.text == text;
  }
  bool accept(const std::string& text) {
    if (!is(text)) return false;
    ++pos_;
    return true;
  }
  void expect(const std::string& text, const std::string& what = "") {
    if (!accept(text)) error(what.empty() ? "'" + text + "'" : what);
  }
  std::string ident(const std::string& what = "a name") {
    if (peek().kind != Token::Kind::Ident) error(what);
    return toks_[pos_++].text;
  }
  void finish() {
    if (!at_end()) error("end of statement");
  }

  Rational rational() {
    bool neg = accept("-");
    if (peek().kind != Token::Kind::Number) error("a number");
    Rational r = parse_rational(toks_[pos_++].text);
    return neg ? Rational(-r) : r;
  }
  long integer() {
    Rational r = rational();
    if (!is_integer(r)) error("an integer");
    return to_long(r);
  }

  Point point() {
    expect("(", "'(' starting a point");
    Point p;
    if (!accept(")")) {
      do p.push_back(rational());
      while (accept(","));
      expect(")", "')' closing a point");
    }
    return p;
  }

  // Identifier to variable index: parameters first, then the free variable.
  std::size_t variable(const std::string& name, FnBody* body) {
    for (std::size_t i = 0; i < job_.params.size(); ++i)
      if (job_.params[i] == name) return i;
    if (!body) fail(ErrorKind::SemanticError, "unresolved: " + name);
    if (!body->var) body->var = name;
    if (*body->var != name)
      fail(ErrorKind::SemanticError, "unresolved: " + name + " (the free variable is " + *body->var + ")");
    return job_.params.size();
  }

  // [sign] (rational ['*' name] | name) joined by + and -
  AffineTerm affine(FnBody* body) {
    AffineTerm t;
    for (bool first = true;; first = false) {
      Rational sign = 1;
      if (accept("-")) sign = -1;
      else if (!first && !accept("+")) break;
      if (peek().kind == Token::Kind::Number) {
        Rational c = rational();
        if (accept("*")) t += AffineTerm::variable(variable(ident("a variable"), body), sign * c);
        else t += AffineTerm(sign * c);
      } else if (peek().kind == Token::Kind::Ident) {
        t += AffineTerm::variable(variable(ident(), body), sign);
      } else {
        error("an affine term");
      }
    }
    return t;
  }

  ParamTerm param_term() {
    if (is("{")) {
      ParamTable table;
      expect("{");
      if (!accept("}")) {
        do {
          Point p = point();
          expect(":");
          table.values[p] = rational();
        } while (accept(";"));
        expect("}", "'}' closing a table");
      }
      return ParamTerm(std::move(table));
    }
    return ParamTerm(affine(nullptr));
  }

  std::optional<ParamTerm> optional_param_term() {
    if (accept("none")) return std::nullopt;
    return param_term();
  }

  Ball ball() {
    if (!accept("ball")) error("ball(gamma, center)");
    expect("(", "'(' after ball");
    long r = integer();
    if (!is(",")) error("argument 2 (center) of ball(gamma, center)");
    expect(",");
    Rational c = rational();
    expect(")", "')' closing ball(gamma, center)");
    return Ball(r, c, job_.prime);
  }

  std::vector<Ball> ball_list() {
    expect("[", "'[' starting a ball list");
    std::vector<Ball> out;
    if (!accept("]")) {
      do out.push_back(ball());
      while (accept(","));
      expect("]", "']' closing a ball list");
    }
    return out;
  }

  std::map<Point, std::vector<Ball>> fiber_table() {
    expect("{", "'{' starting a fiber table");
    std::map<Point, std::vector<Ball>> out;
    if (!accept("}")) {
      do {
        Point p = point();
        expect(":");
        if (out.count(p)) fail(ErrorKind::SemanticError, "duplicate fiber at " + point_string(p));
        out[p] = ball_list();
      } while (accept(";"));
      expect("}", "'}' closing a fiber table");
    }
    return out;
  }

  // key=value arguments in any order, handed to `field`.
  template <class F>
  void keyword_args(const std::string& what, F&& field) {
    expect("(", "'(' after " + what);
    std::set<std::string> seen;
    if (!accept(")")) {
      do {
        if (is("stable")) {
          field("stable");
          continue;
        }
        std::string key = ident("a keyword argument of " + what);
        if (!seen.insert(key).second) fail(ErrorKind::SyntaxError, "repeated argument " + key + " in " + what);
        expect("=", "'=' after " + key);
        if (!field(key)) fail(ErrorKind::SyntaxError, "unknown argument " + key + " in " + what);
      } while (accept(","));
      expect(")", "')' closing " + what);
    }
  }

  SetDecl set_expr() {
    const FieldConfig cfg = job_.field();
    if (is("ball")) return BallSet{ball()};
    if (accept("union")) {
      expect("(");
      UnionSet u;
      do u.balls.push_back(ball());
      while (accept(","));
      expect(")", "')' closing union");
      return u;
    }
    if (accept("cosets")) {
      expect("(");
      CosetTable t{fiber_table()};
      expect(")", "')' closing cosets");
      check_keys(t.balls, job_.params.size(), "cosets");
      return t;
    }
    if (accept("cell")) {
      CellSet c;
      keyword_args("cell", [&](const std::string& k) {
        if (k == "c") c.cell.center = param_term();
        else if (k == "alpha") c.cell.alpha = optional_param_term();
        else if (k == "beta") c.cell.beta = optional_param_term();
        else if (k == "sq") {
          expect("<", "'<' (only strict bounds are supported)");
          c.sq = "<";
        } else if (k == "lambda") c.cell.lambda = rational();
        else if (k == "n") c.cell.n = integer();
        else if (k == "m") c.cell.m = integer();
        else return false;
        return true;
      });
      if (c.cell.lambda != 0) c.cell.validate();
      return c;
    }
    if (accept("clustered")) {
      std::map<Point, std::vector<Ball>> sigma;
      ParamTerm alpha(0), beta(0);
      bool has_alpha = false, has_beta = false;
      Rational lambda = 1;
      long n = 1, m = 1;
      std::optional<std::vector<int>> tree;
      keyword_args("clustered", [&](const std::string& k) {
        if (k == "sigma") sigma = fiber_table();
        else if (k == "alpha") alpha = param_term(), has_alpha = true;
        else if (k == "beta") beta = param_term(), has_beta = true;
        else if (k == "lambda") lambda = rational();
        else if (k == "n") n = integer();
        else if (k == "m") m = integer();
        else if (k == "treetype") {
          expect("(");
          tree.emplace();
          if (!accept(")")) {
            do tree->push_back(static_cast<int>(integer()));
            while (accept(","));
            expect(")", "')' closing treetype");
          }
        } else return false;
        return true;
      });
      if (!has_alpha || !has_beta) fail(ErrorKind::SemanticError, "clustered cell needs alpha and beta");
      if (sigma.empty()) fail(ErrorKind::SemanticError, "clustered cell needs a sigma table");
      check_keys(sigma, job_.params.size(), "sigma");
      std::size_t order = sigma.begin()->second.size();
      long radius = sigma.begin()->second.empty() ? 0 : sigma.begin()->second.front().radius();
      bool declared = tree.has_value();
      auto cell = ClusteredCell::make(MultiBall(order, radius, sigma), alpha, beta, lambda, n, m, tree, cfg);
      return ClusteredSet{std::move(cell), declared};
    }
    if (accept("gcell")) {
      GCellSet g;
      keyword_args("gcell", [&](const std::string& k) {
        if (k == "alpha") g.alpha = optional_param_term();
        else if (k == "beta") g.beta = optional_param_term();
        else if (k == "k") g.residue = integer();
        else if (k == "n") g.modulus = integer();
        else return false;
        return true;
      });
      require(g.modulus >= 1, ErrorKind::SemanticError, "gcell needs n >= 1");
      g.residue = mod(g.residue, g.modulus);
      return g;
    }
    if (accept("multiball")) {
      std::optional<long> order, radius;
      std::map<Point, std::vector<Ball>> fibers;
      std::optional<StabilityCertificate> cert;
      keyword_args("multiball", [&](const std::string& k) {
        if (k == "order") order = integer();
        else if (k == "radius") radius = integer();
        else if (k == "fibers") fibers = fiber_table();
        else if (k == "stable") {
          expect("stable");
          StabilityCertificate c;
          keyword_args("stable", [&](const std::string& s) {
            if (s == "after") c.after = integer();
            else if (s == "before") c.before = integer();
            else if (s == "period") c.period = integer();
            else return false;
            return true;
          });
          cert = c;
        } else return false;
        return true;
      });
      if (!order || !radius) fail(ErrorKind::SemanticError, "multiball needs order and radius");
      std::size_t k = job_.params.size();
      bool gamma = !fibers.empty() && fibers.begin()->first.size() == k + 1;
      check_keys(fibers, gamma ? k + 1 : k, "fibers");
      if (!gamma) {
        if (cert) fail(ErrorKind::SemanticError, "stable(...) needs fibers keyed by (params, gamma)");
        return MultiBallSet{MultiBall(static_cast<std::size_t>(*order), *radius, fibers)};
      }
      GammaMultiBall::Table table;
      for (const auto& [key, f] : fibers) {
        require(is_integer(key.back()), ErrorKind::SemanticError, "gamma key must be an integer");
        table[prefix(key, k)][to_long(key.back())] = f;
      }
      return MultiBallSet{GammaMultiBall(static_cast<std::size_t>(*order), *radius, std::move(table), cert)};
    }
    error("a set: ball, union, cosets, cell, clustered, gcell or multiball");
  }

  void check_keys(const std::map<Point, std::vector<Ball>>& t, std::size_t size, const std::string& what) {
    for (const auto& [key, f] : t)
      if (key.size() != size)
        fail(ErrorKind::SemanticError, what + " key " + point_string(key) + " should have " + std::to_string(size) +
                                           " coordinates");
  }

  // ---------------------------------------------------------------- expressions

  ConstructibleExpr negate(const ConstructibleExpr& e) {
    using K = ConstructibleExpr::Kind;
    if (e.kind() == K::Constant) return ConstructibleExpr(Rational(-e.value()));
    std::vector<ConstructibleExpr> f{ConstructibleExpr(-1)};
    if (e.kind() == K::Product) f.insert(f.end(), e.children().begin(), e.children().end());
    else f.push_back(e);
    return ConstructibleExpr::product(std::move(f));
  }

  // Constructible sums; character factors are rejected here.
  ConstructibleExpr cexpr(FnBody* body) {
    std::vector<ConstructibleExpr> terms;
    bool minus = false;
    if (accept("-")) {
      if (peek().kind == Token::Kind::Number) {
        --pos_;
      } else {
        minus = true;
      }
    }
    for (;;) {
      ConstructibleExpr t = cterm(body);
      terms.push_back(minus ? negate(t) : t);
      if (accept("+")) minus = false;
      else if (accept("-")) minus = true;
      else break;
    }
    return terms.size() == 1 ? terms.front() : ConstructibleExpr::sum(std::move(terms));
  }

  ConstructibleExpr cterm(FnBody* body) {
    std::vector<ConstructibleExpr> f{cfactor(body)};
    while (accept("*")) f.push_back(cfactor(body));
    return f.size() == 1 ? f.front() : ConstructibleExpr::product(std::move(f));
  }

  ConstructibleExpr cfactor(FnBody* body) {
    if (is("-") && peek(1).kind == Token::Kind::Number) return ConstructibleExpr(rational());
    if (peek().kind == Token::Kind::Number) return ConstructibleExpr(rational());
    if (accept("(")) {
      ConstructibleExpr e = cexpr(body);
      expect(")", "')' closing a parenthesis");
      return e;
    }
    if (is("q") && is("^", 1)) {
      pos_ += 2;
      if (accept("(")) {
        ConstructibleExpr e = cexpr(body);
        expect(")", "')' closing q^(...)");
        return ConstructibleExpr::power(e);
      }
      return ConstructibleExpr::power(ConstructibleExpr(rational()));
    }
    if (peek().kind != Token::Kind::Ident) error("an expression");
    std::string name = ident();
    if (is("(")) {
      if (name == "lin" || name == "ord") {
        expect("(");
        AffineTerm t = affine(body);
        expect(")", "')' closing " + name + "(...)");
        return name == "lin" ? ConstructibleExpr::affine(t) : ConstructibleExpr::ord(t);
      }
      if (name == "zdiv") {
        expect("(");
        AffineTerm t = affine(body);
        expect(",", "',' and a modulus in zdiv(term, M)");
        long m = integer();
        expect(")", "')' closing zdiv(term, M)");
        require(m >= 1, ErrorKind::SemanticError, "zdiv modulus must be positive");
        return ConstructibleExpr::zdiv(t, m);
      }
      if (name == "table") return table(body);
      if (name == "charsum" || name == "psi")
        fail(ErrorKind::SemanticError, name + "(...) may only appear as a top-level factor");
      error("lin, ord, zdiv, table, q^, charsum or psi");
    }
    for (const auto& [fname, f] : job_.fns)
      if (fname == name) fail(ErrorKind::SemanticError, "function " + name + " cannot be used inside an expression");
    return ConstructibleExpr::affine(AffineTerm::variable(variable(name, body)));
  }

  ConstructibleExpr table(FnBody* body) {
    expect("(");
    expect("(", "'(' starting the table variables");
    TableAtom t;
    if (!accept(")")) {
      do t.vars.push_back(variable(ident("a variable"), body));
      while (accept(","));
      expect(")", "')' closing the table variables");
    }
    expect(",");
    expect("{", "'{' starting table entries");
    if (!accept("}")) {
      do {
        Point p = point();
        require(p.size() == t.vars.size(), ErrorKind::SemanticError, "table key " + point_string(p) +
                                                                           " does not match the variables");
        expect(":");
        t.values[p] = rational();
      } while (accept(";"));
      expect("}", "'}' closing table entries");
    }
    if (accept(",")) {
      expect("default");
      expect("=");
      t.fallback = rational();
    }
    expect(")", "')' closing table(...)");
    return ConstructibleExpr::table(std::move(t));
  }

  // Additive terms h * chi, each product holding at most one character factor.
  FnBody body() {
    FnBody b;
    bool minus = false;
    if (accept("-")) {
      if (peek().kind == Token::Kind::Number) --pos_;
      else minus = true;
    }
    for (;;) {
      FnTerm t = fn_term(b);
      if (minus) t.h = negate(t.h);
      b.terms.push_back(std::move(t));
      if (accept("+")) minus = false;
      else if (accept("-")) minus = true;
      else break;
    }
    return b;
  }

  FnTerm fn_term(FnBody& b) {
    std::vector<ConstructibleExpr> factors;
    CharFactor chi;
    do {
      if ((is("charsum") || is("psi")) && is("(", 1)) {
        if (chi.kind != CharFactor::Kind::None)
          fail(ErrorKind::SemanticError, "a product may hold only one charsum/psi factor");
        std::string name = ident();
        expect("(");
        if (name == "charsum") {
          chi.kind = CharFactor::Kind::CharSum;
          chi.multiball = ident("a multiball name");
          const SetDecl& s = job_.set(chi.multiball);
          if (!std::holds_alternative<MultiBallSet>(s))
            fail(ErrorKind::SemanticError, chi.multiball + " is not a multiball");
        } else {
          chi.kind = CharFactor::Kind::Psi;
          chi.arg = affine(&b);
        }
        expect(")", "')' closing " + name + "(...)");
      } else {
        factors.push_back(cfactor(&b));
      }
    } while (accept("*"));
    FnTerm t;
    t.chi = chi;
    if (factors.empty()) t.h = ConstructibleExpr(1);
    else if (factors.size() == 1) t.h = factors.front();
    else t.h = ConstructibleExpr::product(std::move(factors));
    return t;
  }

  // A lone declared function name, or an inline body.
  Integrand integrand() {
    Integrand in;
    if (peek().kind == Token::Kind::Ident && (is("over", 1) || is("at", 1))) {
      for (const auto& [fname, f] : job_.fns)
        if (fname == peek().text) {
          in.fn = ident();
          return in;
        }
    }
    in.inline_body = body();
    return in;
  }

  // ---------------------------------------------------------------- statements

  void statement() {
    std::string head = ident("a statement keyword");
    if (head == "field") {
      keyword_list([&](const std::string& k) {
        if (k == "p") {
          long p = integer();
          if (!prime_fixed_) {
            require(job_.prime == 0 || job_.prime == p, ErrorKind::SemanticError, "a job may declare only one prime");
            job_.prime = p;
          }
        } else if (k == "level_cap") job_.level_cap = integer();
        else return false;
        return true;
      });
      job_.field();
    } else if (head == "params") {
      require(job_.sets.empty() && job_.fns.empty(), ErrorKind::SemanticError, "params must precede declarations");
      expect("(");
      job_.params.clear();
      do job_.params.push_back(ident("a parameter name"));
      while (accept(","));
      expect(")");
      expect("=");
      expect("{");
      job_.base.clear();
      if (!accept("}")) {
        do {
          Point p = point();
          require(p.size() == job_.params.size(), ErrorKind::SemanticError,
                  "parameter point " + point_string(p) + " has the wrong size");
          job_.base.push_back(p);
        } while (accept(";"));
        expect("}", "'}' closing the parameter table");
      }
    } else if (head == "set") {
      need_field();
      std::string name = declared_name();
      expect("=");
      job_.sets.emplace_back(name, set_expr());
    } else if (head == "fn") {
      need_field();
      std::string name = declared_name();
      expect("=");
      job_.fns.emplace_back(name, body());
    } else if (head == "bundle") {
      std::string name = declared_name();
      expect("=");
      expect("{");
      BundleDecl b;
      do {
        std::string set = ident("a set name");
        job_.set(set);
        expect(":");
        std::string fn = ident("a function name");
        job_.fn(fn);
        b.pieces.emplace_back(set, fn);
      } while (accept(";"));
      expect("}", "'}' closing the bundle");
      job_.bundles.emplace_back(name, std::move(b));
    } else if (head == "integrate" || head == "compare") {
      need_field();
      IntegrateCmd c;
      c.compare = head == "compare";
      c.integrand = integrand();
      expect("over");
      c.var = ident("the integration variable");
      expect("in");
      c.set = ident("a set name");
      job_.set(c.set);
      if (accept("normalform")) {
        expect("=");
        c.normalform = ident("a bundle name");
        job_.bundle(*c.normalform);
      }
      check_var(c.integrand, c.var);
      job_.commands.push_back(std::move(c));
    } else if (head == "eval") {
      need_field();
      EvalCmd c;
      c.integrand = integrand();
      expect("at");
      c.point = point();
      job_.commands.push_back(std::move(c));
    } else if (head == "partition_signature") {
      PartitionSignatureCmd c{ident("a set name")};
      if (!std::holds_alternative<ClusteredSet>(job_.set(c.set)))
        fail(ErrorKind::SemanticError, c.set + " is not a clustered cell");
      job_.commands.push_back(c);
    } else if (head == "signature") {
      SignatureCmd c;
      c.set = ident("a set name");
      if (!std::holds_alternative<ClusteredSet>(job_.set(c.set)))
        fail(ErrorKind::SemanticError, c.set + " is not a clustered cell");
      expect("at");
      c.point = point();
      job_.commands.push_back(c);
    } else if (head == "partition_fibers") {
      PartitionFibersCmd c;
      c.multiball = ident("a multiball name");
      job_.set(c.multiball);
      expect("over");
      c.var = ident("a variable");
      expect("in");
      c.set = ident("a gcell name");
      if (!std::holds_alternative<GCellSet>(job_.set(c.set)))
        fail(ErrorKind::SemanticError, c.set + " is not a gcell");
      job_.commands.push_back(c);
    } else {
      --pos_;
      error("field, params, set, fn, bundle, integrate, compare, eval, partition_signature, signature or "
            "partition_fibers");
    }
    finish();
  }

  void set_prime_fixed() { prime_fixed_ = true; }

 private:
  const std::vector<Token>& toks_;
  Job& job_;
  std::size_t pos_ = 0;
  bool prime_fixed_ = false;

  template <class F>
  void keyword_list(F&& field) {
    while (!at_end()) {
      std::string key = ident("a keyword");
      expect("=");
      if (!field(key)) fail(ErrorKind::SyntaxError, "unknown field setting " + key);
    }
  }

  void need_field() {
    if (job_.prime == 0) fail(ErrorKind::SemanticError, "no field declared: start the job with `field p=P`");
  }

  std::string declared_name() {
    std::string name = ident("a name to declare");
    for (const auto& [n, s] : job_.sets) require(n != name, ErrorKind::SemanticError, "duplicate name " + name);
    for (const auto& [n, s] : job_.fns) require(n != name, ErrorKind::SemanticError, "duplicate name " + name);
    for (const auto& [n, s] : job_.bundles) require(n != name, ErrorKind::SemanticError, "duplicate name " + name);
    for (const auto& p : job_.params) require(p != name, ErrorKind::SemanticError, "duplicate name " + name);
    return name;
  }

  void check_var(const Integrand& in, const std::string& var) {
    const FnBody& b = in.fn ? job_.fn(*in.fn) : in.inline_body;
    if (b.var && *b.var != var) fail(ErrorKind::SemanticError, "unresolved: " + *b.var);
    for (const auto& p : job_.params)
      require(p != var, ErrorKind::SemanticError, "integration variable " + var + " shadows a parameter");
  }
};

// ------------------------------------------------------------------ printing

std::vector<std::string> names_for(const FnBody& b, const Job& job) {
  std::vector<std::string> names = job.params;
  names.push_back(b.var.value_or("x"));
  return names;
}

std::string ball_string(const Ball& b) { return "ball(" + std::to_string(b.radius()) + ", " + b.center().get_str() + ")"; }

std::string ball_list(const std::vector<Ball>& balls) {
  std::string out = "[";
  for (std::size_t i = 0; i < balls.size(); ++i) out += (i ? ", " : "") + ball_string(balls[i]);
  return out + "]";
}

std::string fiber_table(const std::map<Point, std::vector<Ball>>& t) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, f] : t) {
    out += (first ? "" : "; ") + point_string(k) + ": " + ball_list(f);
    first = false;
  }
  return out + "}";
}

std::string param_string(const ParamTerm& t, const Job& job) {
  if (const auto* a = std::get_if<AffineTerm>(&t.repr())) return a->to_string(job.params);
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : std::get<ParamTable>(t.repr()).values) {
    out += (first ? "" : "; ") + point_string(k) + ": " + v.get_str();
    first = false;
  }
  return out + "}";
}

std::string set_string(const SetDecl& s, const Job& job) {
  std::ostringstream out;
  if (const auto* b = std::get_if<BallSet>(&s)) return ball_string(b->ball);
  if (const auto* u = std::get_if<UnionSet>(&s)) {
    out << "union(";
    for (std::size_t i = 0; i < u->balls.size(); ++i) out << (i ? ", " : "") << ball_string(u->balls[i]);
    out << ")";
  } else if (const auto* t = std::get_if<CosetTable>(&s)) {
    out << "cosets(" << fiber_table(t->balls) << ")";
  } else if (const auto* c = std::get_if<CellSet>(&s)) {
    out << "cell(c=" << param_string(c->cell.center, job);
    out << ", alpha=" << (c->cell.alpha ? param_string(*c->cell.alpha, job) : "none");
    out << ", beta=" << (c->cell.beta ? param_string(*c->cell.beta, job) : "none");
    if (c->sq) out << ", sq=" << *c->sq;
    out << ", lambda=" << c->cell.lambda.get_str() << ", n=" << c->cell.n << ", m=" << c->cell.m << ")";
  } else if (const auto* k = std::get_if<ClusteredSet>(&s)) {
    out << "clustered(sigma=" << fiber_table(k->cell.sigma.fibers()) << ", alpha=" << param_string(k->cell.alpha, job)
        << ", beta=" << param_string(k->cell.beta, job) << ", lambda=" << k->cell.lambda.get_str()
        << ", n=" << k->cell.n << ", m=" << k->cell.m;
    if (k->declared_tree_type) {
      out << ", treetype=(";
      for (std::size_t i = 0; i < k->cell.tree_type->size(); ++i) out << (i ? ", " : "") << (*k->cell.tree_type)[i];
      out << ")";
    }
    out << ")";
  } else if (const auto* g = std::get_if<GCellSet>(&s)) {
    out << "gcell(alpha=" << (g->alpha ? param_string(*g->alpha, job) : "none")
        << ", beta=" << (g->beta ? param_string(*g->beta, job) : "none") << ", k=" << g->residue
        << ", n=" << g->modulus << ")";
  } else {
    const auto& mb = std::get<MultiBallSet>(s).balls;
    if (const auto* m = std::get_if<MultiBall>(&mb)) {
      out << "multiball(order=" << m->order() << ", radius=" << m->radius() << ", fibers=" << fiber_table(m->fibers())
          << ")";
    } else {
      const auto& g = std::get<GammaMultiBall>(mb);
      std::map<Point, std::vector<Ball>> flat;
      for (const auto& [s0, by_gamma] : g.table())
        for (const auto& [gamma, f] : by_gamma) flat[append(s0, Rational(gamma))] = f;
      out << "multiball(order=" << g.order() << ", radius=" << g.radius() << ", fibers=" << fiber_table(flat);
      if (const auto& c = g.certificate()) {
        out << ", stable(";
        std::vector<std::string> parts;
        if (c->after) parts.push_back("after=" + std::to_string(*c->after));
        if (c->before) parts.push_back("before=" + std::to_string(*c->before));
        parts.push_back("period=" + std::to_string(c->period));
        for (std::size_t i = 0; i < parts.size(); ++i) out << (i ? ", " : "") << parts[i];
        out << ")";
      }
      out << ")";
    }
  }
  return out.str();
}

std::string integrand_string(const Integrand& in, const Job& job) {
  return in.fn ? *in.fn : to_string(in.inline_body, job);
}

}  // namespace

std::string to_string(const FnBody& body, const Job& job) {
  auto names = names_for(body, job);
  std::string out;
  for (std::size_t i = 0; i < body.terms.size(); ++i) {
    const FnTerm& t = body.terms[i];
    using K = ConstructibleExpr::Kind;
    std::string h = t.h.to_string(names);
    if (t.h.kind() == K::Sum) h = "(" + h + ")";
    std::string chi;
    if (t.chi.kind == CharFactor::Kind::CharSum) chi = "charsum(" + t.chi.multiball + ")";
    if (t.chi.kind == CharFactor::Kind::Psi) chi = "psi(" + t.chi.arg.to_string(names) + ")";
    std::string term;
    if (chi.empty()) term = h;
    else if (t.h.kind() == K::Constant && t.h.value() == 1) term = chi;
    else term = h + " * " + chi;
    out += (i ? " + " : "") + term;
  }
  return out;
}

std::string to_string(const Command& cmd, const Job& job) {
  if (const auto* c = std::get_if<IntegrateCmd>(&cmd)) {
    std::string out = std::string(c->compare ? "compare " : "integrate ") + integrand_string(c->integrand, job) +
                      " over " + c->var + " in " + c->set;
    if (c->normalform) out += " normalform=" + *c->normalform;
    return out;
  }
  if (const auto* c = std::get_if<EvalCmd>(&cmd))
    return "eval " + integrand_string(c->integrand, job) + " at " + point_string(c->point);
  if (const auto* c = std::get_if<PartitionSignatureCmd>(&cmd)) return "partition_signature " + c->set;
  if (const auto* c = std::get_if<SignatureCmd>(&cmd)) return "signature " + c->set + " at " + point_string(c->point);
  const auto& c = std::get<PartitionFibersCmd>(cmd);
  return "partition_fibers " + c.multiball + " over " + c.var + " in " + c.set;
}

Job parse_job(const std::string& text, std::optional<long> prime_override) {
  Job job;
  if (prime_override) job.prime = *prime_override;
  for (const Statement& st : split_statements(text)) {
    Parser parser(st, job);
    if (prime_override) parser.set_prime_fixed();
    parser.statement();
  }
  if (job.prime == 0) fail(ErrorKind::SemanticError, "no field declared: start the job with `field p=P`");
  job.field();
  return job;
}

std::string serialize_job(const Job& job) {
  std::ostringstream out;
  out << "field p=" << job.prime << " level_cap=" << job.level_cap << "\n";
  if (!job.params.empty()) {
    out << "params (";
    for (std::size_t i = 0; i < job.params.size(); ++i) out << (i ? ", " : "") << job.params[i];
    out << ") = {";
    for (std::size_t i = 0; i < job.base.size(); ++i) out << (i ? "; " : "") << point_string(job.base[i]);
    out << "}\n";
  }
  for (const auto& [name, s] : job.sets) out << "set " << name << " = " << set_string(s, job) << "\n";
  for (const auto& [name, f] : job.fns) out << "fn " << name << " = " << to_string(f, job) << "\n";
  for (const auto& [name, b] : job.bundles) {
    out << "bundle " << name << " = {";
    for (std::size_t i = 0; i < b.pieces.size(); ++i)
      out << (i ? "; " : "") << b.pieces[i].first << ": " << b.pieces[i].second;
    out << "}\n";
  }
  for (const auto& c : job.commands) out << to_string(c, job) << "\n";
  return out.str();
}

const FnBody& resolve(const Integrand& in, const Job& job) { return in.fn ? job.fn(*in.fn) : in.inline_body; }

ExpStarExpr to_expstar(const FnBody& body, const Job& job) {
  std::size_t k = job.params.size();
  std::vector<ExpStarTerm> terms;
  for (const auto& t : body.terms) {
    switch (t.chi.kind) {
      case CharFactor::Kind::None:
        terms.push_back({t.h, AffineMultiBall{{AffineTerm(0)}}});
        break;
      case CharFactor::Kind::Psi:
        terms.push_back({t.h, AffineMultiBall{{t.chi.arg}}});
        break;
      case CharFactor::Kind::CharSum: {
        const auto& mb = std::get<MultiBallSet>(job.set(t.chi.multiball)).balls;
        if (const auto* m = std::get_if<MultiBall>(&mb))
          terms.push_back({t.h, TabulatedMultiBall{*m, k}});
        else
          terms.push_back({t.h, ParametricMultiBall{std::get<GammaMultiBall>(mb), k}});
        break;
      }
    }
  }
  return ExpStarExpr(std::move(terms));
}

}  // namespace padiq::dsl
