#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "treemem/errors.hpp"
#include "treemem/expr.hpp"
#include "treemem/rng.hpp"

using namespace treemem;

TEST_CASE("parsing the documented grammar") {
  CHECK(parse("2", FuncKind::boundary).eval_boundary(0.3) == 2.0);
  CHECK(parse("s*s + 1", FuncKind::boundary).eval_boundary(2.0) == 5.0);
  CHECK(parse("0.5^k", FuncKind::source).eval_source_ks(3, 0.0) == 0.125);
  CHECK(parse("-s^2", FuncKind::boundary).eval_boundary(2.0) == -4.0);  // pow binds tighter
  CHECK(parse("2^3^2", FuncKind::boundary).eval_boundary(0) == 512.0);  // right assoc
  CHECK(parse("min(s, 0.25) + max(s, 0.75)", FuncKind::boundary).eval_boundary(0.5) == 1.0);
  CHECK(parse("abs(-3)", FuncKind::boundary).eval_boundary(0) == 3.0);
  CHECK(parse("exp(0)*cos(0)+sin(0)", FuncKind::boundary).eval_boundary(0) == 1.0);
}

TEST_CASE("parse rejections carry byte offsets") {
  CHECK_THROWS_WITH_AS(parse("s +", FuncKind::boundary),
                       doctest::Contains("at byte"), Error);
  CHECK_THROWS_AS(parse("", FuncKind::boundary), Error);
  CHECK_THROWS_AS(parse("t + 1", FuncKind::boundary), Error);       // unknown identifier
  CHECK_THROWS_AS(parse("k", FuncKind::boundary), Error);           // k only in sources
  CHECK_THROWS_AS(parse("min(s)", FuncKind::boundary), Error);      // arity
  CHECK_THROWS_AS(parse("sin(s, s)", FuncKind::boundary), Error);   // arity
  CHECK_THROWS_AS(parse("1 2", FuncKind::boundary), Error);         // trailing input
  CHECK_THROWS_AS(parse("(s", FuncKind::boundary), Error);
}

TEST_CASE("evaluation guards non-finite results") {
  FuncSpec f = parse("1/(s-0.5)", FuncKind::boundary);
  CHECK(f.eval_boundary(0.75) == 4.0);
  CHECK_THROWS_AS(f.eval_boundary(0.5), Error);
  // non-finite intermediates are caught even if a later op would mask them
  FuncSpec g = parse("min(1, 1/(s-0.5))", FuncKind::boundary);
  CHECK_THROWS_AS(g.eval_boundary(0.5), Error);
}

TEST_CASE("eval_source reads (k, psi)") {
  FuncSpec h = parse("0.5^k", FuncKind::source);
  CHECK(h.eval_source(NodeId{0, 0}, 2) == 1.0);
  CHECK(h.eval_source(NodeId{3, 5}, 2) == 0.125);
  CHECK(parse("0", FuncKind::source).eval_source(NodeId{4, 7}, 2) == 0.0);
  CHECK(h.level_only());
  CHECK_FALSE(parse("s*0.5^k", FuncKind::source).level_only());
}

TEST_CASE("boundary averages by composite Simpson") {
  QuadratureParams q;
  CHECK(boundary_average(parse("s", FuncKind::boundary), Interval{0, 1}, q) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(boundary_average(parse("7", FuncKind::boundary), Interval{0.25, 0.5}, q) ==
        doctest::Approx(7.0).epsilon(1e-15));
  // oracle: closed-form antiderivative of s^2 on [0,1] is 1/3
  CHECK(std::fabs(boundary_average(parse("s*s", FuncKind::boundary), Interval{0, 1}, q) -
                  1.0 / 3.0) < 1e-12);
  // odd panel counts are doubled internally, still exact on cubics
  QuadratureParams odd{3};
  CHECK(std::fabs(boundary_average(parse("s*s*s", FuncKind::boundary), Interval{0, 1}, odd) -
                  0.25) < 1e-12);
}

TEST_CASE("boundary average is linear and shift-equivariant") {
  QuadratureParams q;
  Interval iv{0.125, 0.375};
  FuncSpec f1 = parse("s*s", FuncKind::boundary);
  FuncSpec f2 = parse("sin(s)", FuncKind::boundary);
  FuncSpec combo = parse("2*s*s - 3*sin(s)", FuncKind::boundary);
  double lhs = boundary_average(combo, iv, q);
  double rhs = 2.0 * boundary_average(f1, iv, q) - 3.0 * boundary_average(f2, iv, q);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));

  FuncSpec shifted = parse("s*s + 4", FuncKind::boundary);
  CHECK(boundary_average(shifted, iv, q) ==
        doctest::Approx(boundary_average(f1, iv, q) + 4.0).epsilon(1e-14));
}

TEST_CASE("children averages aggregate to the parent average for cubics") {
  QuadratureParams q;
  FuncSpec f = parse("1 + s + s*s + s*s*s", FuncKind::boundary);
  for (int m : {2, 3}) {
    TruncatedTree tree(m, 4);
    for (int k = 0; k < tree.depth; ++k)
      for (std::int64_t i = 0; i < tree.level_size(k); ++i) {
        double parent_avg = boundary_average(f, interval(NodeId{k, i}, m), q);
        double acc = 0.0;
        for (const NodeId& c : children(NodeId{k, i}, tree))
          acc += boundary_average(f, interval(c, m), q) / m;
        CHECK(std::fabs(acc - parent_avg) < 1e-12);
      }
  }
}

TEST_CASE("print round trip evaluates identically") {
  std::vector<std::string> exprs = {
      "2", "s*s + 1", "0.5^k", "-s^2 + 3*s - 1/(s+2)", "min(s, 0.25)*max(s, 0.75)",
      "exp(-k)*cos(6*s) + abs(s - 0.5)", "2^3^s"};
  SplitMix64 g(42);
  for (const auto& text : exprs) {
    // source kind admits both variables
    FuncSpec a = parse(text, FuncKind::source);
    FuncSpec b = parse(a.print(), FuncKind::source);
    for (int i = 0; i < 100; ++i) {
      double s = g.next_double();
      double k = static_cast<double>(g.next_below(20));
      CHECK(std::fabs(a.eval_source_ks(k, s) - b.eval_source_ks(k, s)) <= 1e-14);
    }
  }
}
