#pragma once

#include <utility>
#include <vector>

#include "treemem/obstacle.hpp"

namespace treemem {

// Coupled system on the truncation:
//   0 = max{ -L1(u) + h1, v - u },   u|leaves = f(psi)
//   0 = min{ -L2(v) + h2, u - v },   v|leaves = g(psi)
struct TmpSpec {
  TruncatedTree tree;
  OperatorParams params1, params2;
  Source h1, h2;
  FuncSpec f, g;
  QuadratureParams quad;

  double separation = 0.0;  // min over leaves of f(psi) - g(psi)
  bool solvability1_ok = true, solvability2_ok = true;  // heuristic check, warning only

  TmpSpec(TruncatedTree tree_, OperatorParams p1, OperatorParams p2, Source h1_, Source h2_,
          FuncSpec f_, FuncSpec g_, QuadratureParams quad_ = {}, bool run_checks = true);

  DirichletProblem problem1() const { return {tree, params1, h1, f, quad}; }
  DirichletProblem problem2() const { return {tree, params2, h2, g, quad}; }
};

struct CoincidenceCertificate {
  int max_contact_level = -1;     // -1 when the coincidence set is empty
  bool empty_beyond = true;       // no contact at levels K-1 and K
  bool applicable = true;         // false when separation == 0 (f = g edge case)
};

struct TmpSolution {
  LevelField u, v;
  std::vector<NodeId> coincidence;
  CoincidenceCertificate certificate;
  // per outer iteration: (sup |u_n - u_{n-1}|, sup |v_n - v_{n-1}|)
  std::vector<std::pair<double, double>> iteration_history;
  double residual_u = 0.0, residual_v = 0.0;
  long iterations = 0;
  double separation = 0.0;
  std::string method;
  double elapsed_seconds = 0.0;
};

// The obstacle-iteration route: v_0 = unconstrained solution of L2(v) = h2
// (a subsolution with equality, the tightest start), then
//   u_n = least supersolution of L1 - h1 above v_{n-1},
//   v_n = greatest subsolution of L2 - h2 below u_n.
// Monotonicity (u_n, v_n nondecreasing) and the explicit bound
// rho_bar = obstacle solve over the unconstrained w are asserted each step.
TmpSolution solve_alternating(const TmpSpec& spec, double tol, long max_outer = 64);

// The coupled fixed-point route: simultaneous clamped sweeps
//   u <- max{ jacobi1(u), v },  v <- min{ jacobi2(v), u },
// u started at a supersolution dominating v_0, v started at v_0 itself.
// u is non-increasing and v non-decreasing from this start.
TmpSolution solve_coupled(const TmpSpec& spec, double tol, long max_iter = 200000);

std::pair<std::vector<NodeId>, CoincidenceCertificate> coincidence_set(
    const LevelField& u, const LevelField& v, const TruncatedTree& tree,
    double contact_tol = 1e-9);

}  // namespace treemem
