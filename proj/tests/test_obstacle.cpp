#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "treemem/errors.hpp"
#include "treemem/obstacle.hpp"
#include "treemem/rng.hpp"

using namespace treemem;

namespace {

DirichletProblem make_prob(int m, int depth, double beta, const std::string& f,
                           const std::string& h) {
  return DirichletProblem(TruncatedTree(m, depth), OperatorParams(beta, m),
                          h == "0" ? Source::zero() : Source(parse(h, FuncKind::source)),
                          parse(f, FuncKind::boundary));
}

LevelField h_field_of(const DirichletProblem& prob) {
  LevelField h(prob.tree, 0.0);
  for (int k = 0; k < prob.tree.depth; ++k)
    prob.h.fill_level(k, prob.tree.m, h.levels[static_cast<std::size_t>(k)].data(),
                      prob.tree.level_size(k));
  return h;
}

constexpr double kTol = 1e-11;
constexpr long kIter = 200000;

}  // namespace

TEST_CASE("an obstacle far below never binds") {
  DirichletProblem prob = make_prob(2, 6, 0.25, "s", "0.5^k");
  LevelField phi(prob.tree, -1e6);
  auto [u, rep] = solve_below(ObstacleProblem(prob, phi, ObstacleSide::below), kTol, kIter);
  LevelField free = solve_direct(prob).first;
  CHECK(field_max_abs_diff(u, free) <= 10.0 * kTol);
  CHECK(rep.complementarity <= 10.0 * kTol);
}

TEST_CASE("a one-node bump pins the solution there") {
  DirichletProblem prob = make_prob(2, 4, 0.25, "s", "0");
  LevelField free = solve_direct(prob).first;
  NodeId x0{2, 1};
  LevelField phi(prob.tree, -1e6);
  phi.at(x0) = free.at(x0) + 1.0;
  auto [u, rep] = solve_below(ObstacleProblem(prob, phi, ObstacleSide::below), kTol, kIter);
  CHECK(std::fabs(u.at(x0) - phi.at(x0)) <= 1e-9);
  CHECK(field_max_signed_diff(free, u) <= 1e-10);  // u >= free everywhere

  // active-set enumeration oracle
  LevelField oracle = oracles::active_set_enumeration(prob.tree, prob.params, h_field_of(prob),
                                                      leaf_values(prob.f, prob.tree), phi);
  CHECK(field_max_abs_diff(u, oracle) <= 1e-9);
}

TEST_CASE("an obstacle equal to the free solution touches everywhere") {
  DirichletProblem prob = make_prob(2, 5, 0.3, "s*s", "0.5^k");
  LevelField free = solve_direct(prob).first;
  auto [u, rep] = solve_below(ObstacleProblem(prob, free, ObstacleSide::below), kTol, kIter);
  CHECK(field_max_abs_diff(u, free) <= 10.0 * kTol);
  CHECK(rep.complementarity <= 10.0 * kTol);
}

TEST_CASE("solve_above mirrors solve_below under negation") {
  DirichletProblem below_prob = make_prob(2, 4, 0.25, "s", "0.25^k");
  LevelField free = solve_direct(below_prob).first;
  LevelField phi(below_prob.tree, -1e6);
  phi.at(NodeId{1, 0}) = free.at(NodeId{1, 0}) + 0.5;
  auto [u, ru] = solve_below(ObstacleProblem(below_prob, phi, ObstacleSide::below), kTol, kIter);

  // mirrored data: f -> -f, h -> -h, phi -> -phi
  DirichletProblem above_prob(below_prob.tree, below_prob.params,
                              Source(parse("-(0.25^k)", FuncKind::source)),
                              parse("-s", FuncKind::boundary));
  LevelField neg_phi(below_prob.tree, 1e6);
  neg_phi.at(NodeId{1, 0}) = -phi.at(NodeId{1, 0});
  auto [v, rv] = solve_above(ObstacleProblem(above_prob, neg_phi, ObstacleSide::above), kTol, kIter);
  for (int k = 0; k <= below_prob.tree.depth; ++k)
    for (std::int64_t i = 0; i < below_prob.tree.level_size(k); ++i)
      CHECK(std::fabs(v.at(NodeId{k, i}) + u.at(NodeId{k, i})) < 1e-12);
}

TEST_CASE("an obstacle far above never binds (above side)") {
  DirichletProblem prob = make_prob(3, 4, 0.2, "s", "0");
  LevelField phi(prob.tree, 1e6);
  auto [v, rep] = solve_above(ObstacleProblem(prob, phi, ObstacleSide::above), kTol, kIter);
  CHECK(field_max_abs_diff(v, solve_direct(prob).first) <= 10.0 * kTol);
}

TEST_CASE("complementarity residual: zero at solutions, ~epsilon under perturbation") {
  DirichletProblem prob = make_prob(2, 5, 0.25, "s", "0");
  LevelField phi(prob.tree, -1e6);
  ObstacleProblem op(prob, phi, ObstacleSide::below);
  LevelField u = solve_direct(prob).first;
  CHECK(complementarity_residual(u, op) <= 1e-10);

  for (double eps : {1e-4, 1e-2}) {
    LevelField pert = u;
    pert.at(NodeId{2, 2}) += eps;
    CHECK(complementarity_residual(pert, op) >= eps / 2.0);
    pert.at(NodeId{2, 2}) -= 2.0 * eps;
    CHECK(complementarity_residual(pert, op) >= eps / 2.0);
  }
}

TEST_CASE("a strict supersolution used as both obstacle and candidate has residual 0") {
  DirichletProblem prob = make_prob(2, 5, 0.25, "s", "0");
  LevelField phi = build_supersolution(prob, 3.0);  // L(phi) = h + 3 at the root
  ObstacleProblem op(prob, phi, ObstacleSide::below);
  CHECK(complementarity_residual(phi, op) <= 1e-12);
}

TEST_CASE("solutions respond monotonically to the obstacle") {
  DirichletProblem prob = make_prob(2, 4, 0.3, "s+1", "0");
  LevelField free = solve_direct(prob).first;
  SplitMix64 g(5);
  LevelField phi1(prob.tree, -1e6), phi2(prob.tree, -1e6);
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::int64_t i = 0; i < prob.tree.level_size(k); ++i) {
      NodeId n{k, i};
      double base = free.at(n) - 0.5 + g.next_double();
      phi1.at(n) = base;
      phi2.at(n) = base + 0.3 * g.next_double();
    }
  auto [u1, r1] = solve_below(ObstacleProblem(prob, phi1, ObstacleSide::below), kTol, kIter);
  auto [u2, r2] = solve_below(ObstacleProblem(prob, phi2, ObstacleSide::below), kTol, kIter);
  CHECK(field_max_signed_diff(u1, u2) <= 1e-10);  // phi1 <= phi2 => u1 <= u2
  // and both dominate obstacle and free solution
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::int64_t i = 0; i < prob.tree.level_size(k); ++i) {
      NodeId n{k, i};
      CHECK(u1.at(n) >= phi1.at(n) - 1e-12);
      CHECK(u1.at(n) >= free.at(n) - 1e-10);
    }
}

TEST_CASE("active-set exactness across random small instances") {
  SplitMix64 g(11);
  for (int depth : {3, 4}) {
    for (int inst = 0; inst < 3; ++inst) {
      double beta = 0.45 * g.next_double();
      DirichletProblem prob(TruncatedTree(2, depth), OperatorParams(beta, 2), Source::zero(),
                            parse("s", FuncKind::boundary));
      LevelField free = solve_direct(prob).first;
      LevelField phi(prob.tree, 0.0);
      for (int k = 0; k < depth; ++k)
        for (std::int64_t i = 0; i < prob.tree.level_size(k); ++i)
          phi.at(NodeId{k, i}) = free.at(NodeId{k, i}) + 0.8 * g.next_double() - 0.4;
      auto [u, rep] = solve_below(ObstacleProblem(prob, phi, ObstacleSide::below), 1e-12, kIter);
      LevelField oracle = oracles::active_set_enumeration(
          prob.tree, prob.params, h_field_of(prob), leaf_values(prob.f, prob.tree), phi);
      CHECK(field_max_abs_diff(u, oracle) <= 1e-9);
    }
  }
}

TEST_CASE("leaf separation is enforced") {
  DirichletProblem prob = make_prob(2, 4, 0.25, "s", "0");
  LevelField phi(prob.tree, -1.0);
  phi.levels.back()[0] = 2.0;  // above f at a leaf
  CHECK_THROWS_AS(solve_below(ObstacleProblem(prob, phi, ObstacleSide::below), kTol, kIter),
                  Error);
}
