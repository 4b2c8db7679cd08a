#pragma once

#include <string>
#include <vector>

#include "treemem/expr.hpp"
#include "treemem/operators.hpp"
#include "treemem/source.hpp"
#include "treemem/tree.hpp"

namespace treemem {

// L(u) = h on the truncation, u pinned to f(psi) at level-K leaves.
struct DirichletProblem {
  TruncatedTree tree;
  OperatorParams params;
  Source h;
  FuncSpec f;
  QuadratureParams quad;

  DirichletProblem(TruncatedTree tree_, OperatorParams params_, Source h_, FuncSpec f_,
                   QuadratureParams quad_ = {});
};

struct SolveReport {
  std::string method;
  long iterations = 0;
  // sup over interior nodes of |L(u) - h|
  double final_residual = 0.0;
  double elapsed_seconds = 0.0;

  // Representation route only: rigorous a-posteriori bound on the sup-norm
  // distance to the exact truncated solution,
  //   |u_rep - u_exact| <= max_leaf |u_rep - f(psi)| + K/(1-2 beta) * sup|L(u_rep)-h|.
  // The first term bounds the harmonic extension of the leaf mismatch (maximum
  // principle); the second uses the explicit supersolution (K-k)/(1-2 beta) of
  // L(w) = 1 to bound the discrete Green operator.
  double tail_bound = 0.0;
  double leaf_mismatch = 0.0;
  double sh_tail = 0.0;  // max per-level S_h truncation tail that entered the sweep
  int sh_min_depth = 0;
  bool sh_tail_estimated = false;
};

struct MaxIterError : IterationFailure {
  MaxIterError(const std::string& what, long iterations, double residual, LevelField last_)
      : IterationFailure(Errc::MaxIterExceeded, what, iterations, residual),
        last(std::move(last_)) {}
  LevelField last;
};

// Exact elimination: upward sweep of per-level coefficients alpha_k and
// per-node offsets b with u(x) = alpha_k u(parent) + b(x), then one downward
// substitution. Serves as the oracle for the other routes.
std::pair<LevelField, SolveReport> solve_direct(const DirichletProblem& prob);

// Downward recurrence u(x) = rho u(parent) + (1/c_beta)(avg_f(I_x) + S_h(x)),
// seeded at the root by u(root) = int_0^1 f + (1/m) sum_children S_h + c_beta h(root).
// Requires beta > 0.
std::pair<LevelField, SolveReport> solve_representation(const DirichletProblem& prob,
                                                        int sh_depth);

// Level-synchronous Jacobi fixed-point iteration of
// u = beta u(parent) + (1-beta) mean(children) + h, leaves pinned.
std::pair<LevelField, SolveReport> solve_value_iteration(const DirichletProblem& prob,
                                                         double tol, long max_iter);

// solve_direct of the problem with h(root) + lift. lift >= 0 gives L(w) >= h
// everywhere with equality off the root; build_subsolution takes lift <= 0.
LevelField build_supersolution(const DirichletProblem& prob, double lift);
LevelField build_subsolution(const DirichletProblem& prob, double lift);

// Supersolution pointwise above `floor` at interior nodes: u_free plus a
// uniform interior lift Lambda propagated through G1 = solution of L(w)=1,
// w|leaves = 0 (G1 >= 1 at every interior node). Returns the field and Lambda.
std::pair<LevelField, double> dominating_supersolution(const DirichletProblem& prob,
                                                       const LevelField& floor);
// Mirror: subsolution pointwise below `ceil` at interior nodes.
std::pair<LevelField, double> dominated_subsolution(const DirichletProblem& prob,
                                                    const LevelField& ceil);

// --- shared sweep helpers ---

// f(psi) over the leaf level.
std::vector<double> leaf_values(const FuncSpec& f, const TruncatedTree& tree);

// Per-node boundary averages of f for all levels 0..K.
std::vector<std::vector<double>> boundary_average_levels(const FuncSpec& f,
                                                         const TruncatedTree& tree,
                                                         const QuadratureParams& q);

// dst <- one Jacobi step of src (interior + root); leaves copied from src.
void jacobi_step(LevelField& dst, const LevelField& src,
                 const std::vector<std::vector<double>>& h_levels,
                 const OperatorParams& p, const TruncatedTree& tree);

// sup over interior nodes (incl. root) of |L(u) - h|.
double equation_residual(const LevelField& u,
                         const std::vector<std::vector<double>>& h_levels,
                         const OperatorParams& p, const TruncatedTree& tree);

}  // namespace treemem
