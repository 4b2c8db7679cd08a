#pragma once

#include <optional>
#include <vector>

#include "treemem/source.hpp"
#include "treemem/tree.hpp"

namespace treemem {

// Parameters of the averaging operator
//   L(u)(x)    = u(x) - beta*u(parent) - (1-beta)*mean(u over children), x != root
//   L(u)(root) = u(root) - mean(u over children of the root).
// Bounded solvability requires beta in [0, 1/2); beta >= 1/2 is rejected.
struct OperatorParams {
  double beta = 0.25;
  int m = 2;

  OperatorParams(double beta_, int m_);

  // rho = beta/(1-beta) in [0,1)
  double rho() const { return beta / (1.0 - beta); }
  // c_beta = sum_{i>=0} rho^i = (1-beta)/(1-2 beta); equals 1 at beta = 0
  double c_beta() const { return (1.0 - beta) / (1.0 - 2.0 * beta); }
};

// L(u)(n) - h(n). Not defined at truncation leaves (they carry boundary data).
double apply_L(const LevelField& u, const OperatorParams& p, const NodeId& n,
               double h_at_n, const TruncatedTree& tree);

double c_beta(const OperatorParams& p);

// One truncated evaluation of the series
//   S_h(x) = (1/beta) sum_{i>=1} sum_{j=0}^{i-1} rho^{i-j} * A_j(x),
//   A_j(x) = m^{-j} sum_{y in S^j(x)} h(y).
//
// Swapping the sums, each j collects sum_{i>j} rho^{i-j} = rho/(1-rho)
// = c_beta - 1, independent of j, so
//   S_h(x) = ((c_beta-1)/beta) * sum_{j>=0} A_j(x)
//          = 1/(1-2 beta)     * sum_{j>=0} A_j(x).
// `value` truncates the j-sum at depth_used <= max_extra_depth; `tail_bound`
// bounds 1/(1-2 beta) * sum over the omitted levels using per-level sups of
// |h| with certified geometric decay (+infinity when no summable decay can be
// certified -- a constant h genuinely diverges here).
struct ShTruncation {
  double value = 0.0;
  double tail_bound = 0.0;
  int depth_used = 0;
  // Tail sups were sampled (s-dependent expression), not exact.
  bool tail_estimated = false;
};

struct ShOptions {
  // Cap on m^j subtree-level enumeration work per node.
  std::int64_t node_work_cap = std::int64_t{1} << 22;
  // How far past the truncation depth the tail certification may look.
  int tail_horizon = 400;
};

// Throws BetaZeroSeries for beta = 0 (the series prefactor 1/beta is the
// paper's form; callers use the beta->0 limit via s_h_field instead) and
// TailUnbounded when h_sup_tail is supplied non-finite.
ShTruncation s_h(const Source& h, const NodeId& n, const OperatorParams& p,
                 int max_extra_depth, std::optional<double> h_sup_tail = std::nullopt,
                 const ShOptions& opts = {});

// S_h for every node of the truncated tree in one bottom-up sweep. Valid for
// all beta in [0, 1/2): the closed form 1/(1-2 beta) extends continuously to
// beta = 0. For s-dependent sources, nodes at level l get extra depth E - l
// where E <= K + max_extra_depth is limited by field_work_cap; level-only
// sources use exactly max_extra_depth everywhere at O(1) cost per level.
struct ShField {
  std::vector<std::vector<double>> value;  // [level][index], levels 0..K
  std::vector<double> tail_bound;          // per level
  int min_depth_used = 0;
  bool tail_estimated = false;
};

struct ShFieldOptions {
  std::int64_t field_work_cap = std::int64_t{1} << 23;
  int tail_horizon = 400;
};

ShField s_h_field(const Source& h, const TruncatedTree& tree, const OperatorParams& p,
                  int max_extra_depth, const ShFieldOptions& opts = {});

// Numerical probe of the solvability condition of the Dirichlet problem:
//   lim_{|x|=k -> oo} sum_{j=1..k} rho^{k-j} S_h(x^j) = 0.
// T(k) maximizes |sum_j rho^{k-j} S_h(x^j)| over probed level-k nodes
// (all nodes when m^k is small, else extremal and psi-equispaced digit
// paths). Heuristic evidence, not a proof.
struct SolvabilityReport {
  bool passes = false;
  std::vector<double> trace;  // trace[i] = T(i+1), k = 1..probe_depth
  int decreasing_from = -1;   // smallest k with T non-increasing onwards; -1 if none
  double tolerance = 1e-3;
  bool tail_unbounded = false;
  bool tail_estimated = false;
};

struct SolvabilityOptions {
  double tolerance = 1e-3;
  int sh_depth = 12;
  std::int64_t probe_exhaustive_cap = 4096;
  int probe_paths = 64;
};

SolvabilityReport solvability_check(const Source& h, const OperatorParams& p,
                                    int probe_depth, const SolvabilityOptions& opts = {});

// h materialized per level for sweep kernels, levels 0..K-1 (interior + root).
std::vector<std::vector<double>> make_h_levels(const Source& h, const TruncatedTree& tree);

}  // namespace treemem
