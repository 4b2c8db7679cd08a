#pragma once

// Independent reference implementations used only by tests. Everything here is
// deliberately written the straightforward way (dense matrices, plain loops,
// explicit double sums) so it shares no code path with the library solvers.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "treemem/operators.hpp"
#include "treemem/source.hpp"
#include "treemem/tree.hpp"

namespace oracles {

using treemem::LevelField;
using treemem::NodeId;
using treemem::OperatorParams;
using treemem::Source;
using treemem::TruncatedTree;

inline std::size_t flat_index(const TruncatedTree& tree, const NodeId& n) {
  std::size_t off = 0;
  for (int k = 0; k < n.level; ++k) off += static_cast<std::size_t>(tree.level_size(k));
  return off + static_cast<std::size_t>(n.index);
}

inline std::size_t flat_count(const TruncatedTree& tree) {
  return static_cast<std::size_t>(tree.node_count());
}

// Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve_system(std::vector<std::vector<double>> a,
                                              std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    if (std::fabs(a[piv][col]) < 1e-14) throw std::runtime_error("dense system is singular");
    std::swap(a[piv], a[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = rhs[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri][c] * x[c];
    x[ri] = s / a[ri][ri];
  }
  return x;
}

// Full linear system of the truncated Dirichlet problem: value rows at the
// leaves, operator rows elsewhere. `constrained[flat] = value` optionally pins
// extra nodes (active sets of the obstacle problem).
inline LevelField dense_dirichlet(const TruncatedTree& tree, const OperatorParams& p,
                                  const LevelField& h, const std::vector<double>& leaf_vals,
                                  const std::vector<std::pair<std::size_t, double>>&
                                      constrained = {}) {
  const std::size_t n = flat_count(tree);
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> rhs(n, 0.0);

  std::vector<char> pinned(n, 0);
  for (auto [fi, val] : constrained) {
    a[fi][fi] = 1.0;
    rhs[fi] = val;
    pinned[fi] = 1;
  }
  for (std::int64_t i = 0; i < tree.level_size(tree.depth); ++i) {
    std::size_t fi = flat_index(tree, NodeId{tree.depth, i});
    a[fi][fi] = 1.0;
    rhs[fi] = leaf_vals[static_cast<std::size_t>(i)];
    pinned[fi] = 1;
  }
  for (int k = 0; k < tree.depth; ++k) {
    for (std::int64_t i = 0; i < tree.level_size(k); ++i) {
      NodeId node{k, i};
      std::size_t fi = flat_index(tree, node);
      if (pinned[fi]) continue;
      a[fi][fi] = 1.0;
      if (k > 0)
        a[fi][flat_index(tree, NodeId{k - 1, i / tree.m})] -= p.beta;
      double w = (k == 0 ? 1.0 : 1.0 - p.beta) / tree.m;
      for (int c = 0; c < tree.m; ++c)
        a[fi][flat_index(tree, NodeId{k + 1, i * tree.m + c})] -= w;
      rhs[fi] = h.at(node);
    }
  }

  std::vector<double> x = dense_solve_system(std::move(a), std::move(rhs));
  LevelField out(tree);
  for (int k = 0; k <= tree.depth; ++k)
    for (std::int64_t i = 0; i < tree.level_size(k); ++i)
      out.at(NodeId{k, i}) = x[flat_index(tree, NodeId{k, i})];
  return out;
}

// Mean of h over S^j(x) by plain enumeration.
inline double subtree_level_mean(const Source& h, const NodeId& x, int m, int j) {
  std::int64_t cnt = treemem::ipow(m, j);
  double s = 0.0;
  for (std::int64_t i = 0; i < cnt; ++i)
    s += h.value(NodeId{x.level + j, x.index * cnt + i}, m);
  return s / static_cast<double>(cnt);
}

// Literal double series (1/beta) sum_i sum_{j<=min(i-1,D)} rho^{i-j} A_j(x),
// i truncated once rho^{i-D} falls below machine noise.
inline double brute_sh(const Source& h, const NodeId& x, const OperatorParams& p, int depth,
                       int i_max) {
  const double rho = p.rho();
  std::vector<double> means(static_cast<std::size_t>(depth) + 1);
  for (int j = 0; j <= depth; ++j) means[static_cast<std::size_t>(j)] = subtree_level_mean(h, x, p.m, j);
  double total = 0.0;
  for (int i = 1; i <= i_max; ++i) {
    double row = 0.0;
    for (int j = 0; j <= std::min(i - 1, depth); ++j)
      row += std::pow(rho, i - j) * means[static_cast<std::size_t>(j)];
    total += row;
  }
  return total / p.beta;
}

// Subtree leaf average of the boundary datum (beta = 0 oracle).
inline double subtree_leaf_mean(const std::vector<double>& leaf_vals, const TruncatedTree& tree,
                                const NodeId& x) {
  std::int64_t cnt = treemem::ipow(tree.m, tree.depth - x.level);
  double s = 0.0;
  for (std::int64_t i = 0; i < cnt; ++i)
    s += leaf_vals[static_cast<std::size_t>(x.index * cnt + i)];
  return s / static_cast<double>(cnt);
}

// Exhaustive active-set enumeration for the obstacle problem from below on a
// small tree: solve each candidate linear system, keep the feasible ones, take
// the pointwise infimum.
inline LevelField active_set_enumeration(const TruncatedTree& tree, const OperatorParams& p,
                                         const LevelField& h, const std::vector<double>& leaf_vals,
                                         const LevelField& phi, double feas_tol = 1e-9) {
  std::vector<NodeId> interior;
  for (int k = 0; k < tree.depth; ++k)
    for (std::int64_t i = 0; i < tree.level_size(k); ++i) interior.push_back(NodeId{k, i});
  const std::size_t ni = interior.size();
  if (ni > 20) throw std::runtime_error("active-set enumeration limited to tiny trees");

  LevelField best(tree, 1e300);
  bool any = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ni); ++mask) {
    std::vector<std::pair<std::size_t, double>> constrained;
    for (std::size_t b = 0; b < ni; ++b)
      if (mask & (std::uint64_t{1} << b))
        constrained.emplace_back(flat_index(tree, interior[b]), phi.at(interior[b]));
    LevelField u;
    try {
      u = dense_dirichlet(tree, p, h, leaf_vals, constrained);
    } catch (const std::runtime_error&) {
      continue;
    }
    // feasibility: u >= phi everywhere and L(u) >= h on the active set
    bool ok = true;
    double scale = 1.0 + treemem::field_max_abs(u);
    for (const NodeId& node : interior) {
      if (u.at(node) < phi.at(node) - feas_tol * scale) {
        ok = false;
        break;
      }
      double lu = treemem::apply_L(u, p, node, h.at(node), tree);
      if (lu < -feas_tol * scale) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    any = true;
    for (int k = 0; k <= tree.depth; ++k)
      for (std::int64_t i = 0; i < tree.level_size(k); ++i) {
        NodeId node{k, i};
        if (u.at(node) < best.at(node)) best.at(node) = u.at(node);
      }
  }
  if (!any) throw std::runtime_error("no feasible active set");
  return best;
}

}  // namespace oracles
