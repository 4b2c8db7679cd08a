#include <doctest.h>

#include <cmath>

#include "treemem/errors.hpp"
#include "treemem/two_membranes.hpp"

using namespace treemem;

namespace {

Source src(const std::string& text) {
  return text == "0" ? Source::zero() : Source(parse(text, FuncKind::source));
}

TmpSpec make_spec(int m, int depth, double b1, double b2, const std::string& f,
                  const std::string& g, const std::string& h1, const std::string& h2) {
  return TmpSpec(TruncatedTree(m, depth), OperatorParams(b1, m), OperatorParams(b2, m),
                 src(h1), src(h2), parse(f, FuncKind::boundary), parse(g, FuncKind::boundary));
}

// The pushed-together regression problem: h1 presses u down, h2 presses v up,
// so the membranes meet near the root while f > g keeps them apart at depth.
TmpSpec pushed_spec(int depth) {
  return make_spec(2, depth, 0.25, 0.25, "1", "0.5", "-2*0.5^k", "2*0.5^k");
}

}  // namespace

TEST_CASE("constant data with ordered boundaries stays uncoupled") {
  TmpSpec spec = make_spec(2, 6, 0.25, 0.3, "2", "1", "0", "0");
  for (TmpSolution sol : {solve_alternating(spec, 1e-10), solve_coupled(spec, 1e-10)}) {
    CHECK(field_max_abs_diff(sol.u, LevelField(spec.tree, 2.0)) < 1e-9);
    CHECK(field_max_abs_diff(sol.v, LevelField(spec.tree, 1.0)) < 1e-9);
    CHECK(sol.coincidence.empty());
    CHECK(sol.certificate.empty_beyond);
    CHECK(sol.certificate.max_contact_level == -1);
  }
}

TEST_CASE("ordered free solutions are returned untouched") {
  TmpSpec spec = make_spec(3, 5, 0.2, 0.3, "s+2", "s*s", "0", "0");
  LevelField u_free = solve_direct(spec.problem1()).first;
  LevelField v_free = solve_direct(spec.problem2()).first;
  REQUIRE(field_max_signed_diff(v_free, u_free) < 0.0);  // already ordered
  TmpSolution sol = solve_alternating(spec, 1e-10);
  CHECK(field_max_abs_diff(sol.u, u_free) <= 1e-9);
  CHECK(field_max_abs_diff(sol.v, v_free) <= 1e-9);
  CHECK(sol.coincidence.empty());
}

TEST_CASE("pushed membranes meet near the root and separate at depth") {
  TmpSpec spec = pushed_spec(8);
  double tol = 1e-9;
  TmpSolution alt = solve_alternating(spec, tol);
  TmpSolution cpl = solve_coupled(spec, tol);

  CHECK_FALSE(alt.coincidence.empty());
  CHECK(alt.certificate.max_contact_level >= 0);
  CHECK(alt.certificate.max_contact_level < spec.tree.depth - 1);
  CHECK(alt.certificate.empty_beyond);

  // mutual oracle
  CHECK(field_max_abs_diff(alt.u, cpl.u) <= 20.0 * tol);
  CHECK(field_max_abs_diff(alt.v, cpl.v) <= 20.0 * tol);

  for (const TmpSolution& sol : {alt, cpl}) {
    CHECK(field_max_signed_diff(sol.v, sol.u) <= 1e-10);  // ordering
    CHECK(sol.residual_u <= 10.0 * tol);
    CHECK(sol.residual_v <= 10.0 * tol);
  }

  // outer history is recorded and the alternating route converged quickly
  CHECK(alt.iterations >= 1);
  CHECK(!alt.iteration_history.empty());
}

TEST_CASE("degenerate f = g: coupled route converges to full contact") {
  TmpSpec spec = make_spec(2, 5, 0.25, 0.25, "1", "1", "0", "0");
  CHECK(spec.separation == 0.0);
  TmpSolution sol = solve_coupled(spec, 1e-11);
  CHECK(field_max_abs_diff(sol.u, LevelField(spec.tree, 1.0)) < 1e-9);
  CHECK(field_max_abs_diff(sol.v, LevelField(spec.tree, 1.0)) < 1e-9);
  CHECK(sol.coincidence.size() == static_cast<std::size_t>(spec.tree.node_count()));
  CHECK_FALSE(sol.certificate.applicable);

  // the obstacle iteration needs strict separation
  CHECK_THROWS_AS(solve_alternating(spec, 1e-10), Error);
}

TEST_CASE("coincidence extraction edge cases") {
  TruncatedTree tree(2, 4);
  LevelField a(tree, 2.0), b(tree, 1.0);
  auto [none, cert0] = coincidence_set(a, b, tree);
  CHECK(none.empty());
  CHECK(cert0.empty_beyond);
  auto [all, cert1] = coincidence_set(a, a, tree);
  CHECK(all.size() == static_cast<std::size_t>(tree.node_count()));
  CHECK(cert1.max_contact_level == tree.depth);
  CHECK_FALSE(cert1.empty_beyond);
}

TEST_CASE("boundary data must be ordered at the leaves") {
  CHECK_THROWS_AS(make_spec(2, 4, 0.25, 0.25, "0.5", "1", "0", "0"), Error);
}

TEST_CASE("solvability warnings are flagged on the problem definition") {
  TmpSpec spec = make_spec(2, 4, 0.25, 0.25, "2", "1", "1", "0");  // constant h1 fails
  CHECK_FALSE(spec.solvability1_ok);
  CHECK(spec.solvability2_ok);
}
