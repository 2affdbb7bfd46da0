#include <gtest/gtest.h>

#include "padiq/dsl.hpp"

namespace padiq::dsl {
namespace {

const char* kFullJob = R"(# every declaration form
field p=3 level_cap=20
params (s) = {(0); (1)}
set B = ball(0, 0)
set U = union(ball(1, 0), ball(1, 1/3))
set C = cell(c=s, alpha=0, beta=none, lambda=1, n=1, m=1)
set D = cell(c=0, alpha={(0): 0; (1): 1}, beta={(0): 3; (1): 4}, sq=<, lambda=2, n=1, m=1)
set K = clustered(sigma={(0): [ball(2, 0), ball(2, 1), ball(2, 2)];
                         (1): [ball(2, 0), ball(2, 1), ball(2, 2)]},
                  alpha=0, beta=2, treetype=(3))
set G = gcell(alpha=1, beta=none, k=0, n=1)
set A = multiball(order=1, radius=1, fibers={(0): [ball(1, 0)]; (1): [ball(1, 1)]})
set P = multiball(order=1, radius=1, fibers={(0, 1): [ball(1, 0)]; (1, 1): [ball(1, 1)]},
                  stable(after=1, period=1))
set T = cosets({(0): [ball(0, 0)]; (1): [ball(1, 0), ball(1, 1)]})
fn f = 2 * psi(x) + q^(-2 * ord(x - 1)) * charsum(A) - zdiv(s - 1, 1)
fn w = table((s), {(0): 1; (1): -1/2}, default=0) * psi(1/3*x + s)
fn h = q^(-g) * charsum(P)
fn one = 1
bundle NB = {T: one; U: w}
integrate psi(x) over x in B
compare f over x in C
integrate one over x in T normalform=NB
eval w at (1, 1/3)
partition_signature K
signature K at (0)
partition_fibers P over g in G
)";

Error parse_error(const std::string& text) {
  try {
    parse_job(text);
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return Error(ErrorKind::SyntaxError, "");
}

TEST(Dsl, PsiOverUnitBallJob) {
  Job job = parse_job("field p=3\nset B = ball(0, 0)\nintegrate psi(x) over x in B\n");
  EXPECT_EQ(job.prime, 3);
  ASSERT_EQ(job.sets.size(), 1u);
  EXPECT_EQ(std::get<BallSet>(job.sets[0].second).ball, Ball(0, 0, 3));
  ASSERT_EQ(job.commands.size(), 1u);
  const auto& cmd = std::get<IntegrateCmd>(job.commands[0]);
  EXPECT_EQ(cmd.var, "x");
  EXPECT_EQ(cmd.set, "B");
  const FnBody& body = resolve(cmd.integrand, job);
  ASSERT_EQ(body.terms.size(), 1u);
  EXPECT_EQ(body.terms[0].h, ConstructibleExpr(1));
  EXPECT_EQ(body.terms[0].chi.kind, CharFactor::Kind::Psi);
  EXPECT_EQ(body.terms[0].chi.arg, AffineTerm::variable(0));
}

TEST(Dsl, PositionedSyntaxErrors) {
  Error e = parse_error("field p=3\nset B = ball(0)\n");
  EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
  EXPECT_NE(std::string(e.what()).find("line 2, token 7"), std::string::npos) << e.what();
  EXPECT_NE(std::string(e.what()).find("argument 2"), std::string::npos) << e.what();
  Error e2 = parse_error("field p=3\n\nset B = ball(0, 0) ball\n");
  EXPECT_NE(std::string(e2.what()).find("line 3, token 10"), std::string::npos) << e2.what();
  Error e3 = parse_error("field p=3\nset B = ball(0, 0) $\n");
  EXPECT_EQ(e3.kind(), ErrorKind::SyntaxError);
}

TEST(Dsl, SemanticErrors) {
  Error e = parse_error("field p=3\nset B = ball(0, 0)\nintegrate psi(x) over x in C\n");
  EXPECT_EQ(e.kind(), ErrorKind::SemanticError);
  EXPECT_NE(std::string(e.what()).find("unresolved: C"), std::string::npos);
  Error e2 = parse_error("field p=3\nset B = ball(0, 0)\nintegrate f over x in B\n");
  EXPECT_NE(std::string(e2.what()).find("unresolved: f"), std::string::npos);
  EXPECT_EQ(parse_error("field p=3\nfield p=5\n").kind(), ErrorKind::SemanticError);
  EXPECT_EQ(parse_error("set B = ball(0, 0)\n").kind(), ErrorKind::SemanticError);
  EXPECT_EQ(parse_error("field p=3\nset B = ball(0, 0)\nset B = ball(1, 0)\n").kind(), ErrorKind::SemanticError);
  // Declarations are checked against their invariants at parse time.
  EXPECT_THROW(parse_job("field p=4\n"), Error);
  EXPECT_THROW(parse_job("field p=3\nset K = clustered(sigma={(): [ball(2, 0), ball(2, 1)]}, alpha=0, beta=2, "
                         "treetype=(3))\n"),
               Error);
  EXPECT_THROW(parse_job("field p=3\nset A = multiball(order=1, radius=1, fibers={(): [ball(1, 0)]})\n"
                         "fn f = psi(x) * charsum(A)\n"),
               Error);
}

TEST(Dsl, RoundTripIsByteStable) {
  Job job = parse_job(kFullJob);
  std::string text = serialize_job(job);
  Job again = parse_job(text);
  EXPECT_TRUE(again == job) << text;
  EXPECT_EQ(serialize_job(again), text);
}

TEST(Dsl, PrimeOverride) {
  Job job = parse_job("field p=3\nset B = ball(1, 1)\n", 5);
  EXPECT_EQ(job.prime, 5);
  EXPECT_EQ(std::get<BallSet>(job.sets[0].second).ball, Ball(1, 1, 5));
}

TEST(Dsl, BodiesLowerToExpStar) {
  Job job = parse_job(kFullJob);
  FieldConfig cfg = job.field();
  ExpStarExpr f = to_expstar(job.fn("f"), job);
  // f(s, x) = 2 psi(x) + q^{-2 ord(x-1)} charsum(A)(s) - zdiv(s-1, 1), charsum(A)(1) = psi(1)
  CyclotomicNumber z3 = CyclotomicNumber::zeta(3, 1);
  EXPECT_EQ(f.eval({1, 4}, cfg), z3.scaled(2 + frac(1, 9)));
  EXPECT_EQ(f.eval({1, frac(4, 3)}, cfg), CyclotomicNumber::zeta(3, 2, 4).scaled(2) + z3.scaled(9));
  ExpStarExpr w = to_expstar(job.fn("w"), job);
  EXPECT_EQ(w.eval({1, 1}, cfg), CyclotomicNumber::zeta(3, 2, 4).scaled(frac(-1, 2)));
  EXPECT_EQ(w.eval({0, 1}, cfg), CyclotomicNumber::zeta(3, 2, 1));
  EXPECT_EQ(w.eval({2, 1}, cfg), CyclotomicNumber(0));
}

}  // namespace
}  // namespace padiq::dsl
