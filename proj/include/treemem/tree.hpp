#pragma once

#include <cstdint>
#include <vector>

#include "treemem/errors.hpp"

namespace treemem {

// Address of a vertex in the m-regular tree: `index` holds the child digits
// a_1..a_level in base m, most significant first, so parent/child moves are
// integer division/multiplication by m.
struct NodeId {
  int level = 0;
  std::int64_t index = 0;

  friend bool operator==(const NodeId&, const NodeId&) = default;
};

// base^exp for small integer arguments; guards against int64 overflow.
inline std::int64_t ipow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) {
    if (r > (std::int64_t{1} << 62) / base)
      throw Error(Errc::InvalidConfig, "integer power overflow");
    r *= base;
  }
  return r;
}

inline void check_node(const NodeId& n, int m) {
  if (n.level < 0 || n.index < 0 || n.index >= ipow(m, n.level))
    throw Error(Errc::InvalidConfig, "node index out of range for its level");
}

// Geometry of the tree truncated at depth K: levels 0..K, level k holding
// m^k vertices. Carries no node values.
struct TruncatedTree {
  int m = 2;
  int depth = 1;

  // Default cap keeps any single level at or below 2^26 vertices.
  static constexpr std::int64_t kDefaultLevelCap = std::int64_t{1} << 26;

  TruncatedTree(int m_, int depth_, std::int64_t level_cap = kDefaultLevelCap)
      : m(m_), depth(depth_) {
    if (m < 2) throw Error(Errc::InvalidConfig, "branching factor m must be >= 2");
    if (depth < 1) throw Error(Errc::InvalidConfig, "truncation depth K must be >= 1");
    if (ipow(m, depth) > level_cap)
      throw Error(Errc::InvalidConfig, "m^K exceeds the per-level node cap");
  }

  std::int64_t level_size(int level) const { return ipow(m, level); }

  std::int64_t node_count() const {
    return (ipow(m, depth + 1) - 1) / (m - 1);
  }

  bool is_leaf(const NodeId& n) const { return n.level == depth; }
};

inline NodeId parent(const NodeId& n, int m) {
  if (n.level == 0) throw Error(Errc::RootHasNoParent, "the root has no predecessor");
  return NodeId{n.level - 1, n.index / m};
}

// The m successors of n, in increasing digit order.
inline std::vector<NodeId> children(const NodeId& n, const TruncatedTree& tree) {
  if (n.level >= tree.depth)
    throw Error(Errc::LeafHasNoChildren, "truncation leaves have no successors");
  std::vector<NodeId> out;
  out.reserve(tree.m);
  for (int i = 0; i < tree.m; ++i)
    out.push_back(NodeId{n.level + 1, n.index * tree.m + i});
  return out;
}

// m^level as an exact double (exact while m^level < 2^53, enforced by the cap).
inline double level_width_denom(int m, int level) {
  return static_cast<double>(ipow(m, level));
}

// psi(n) = sum a_i m^{-i} = index * m^{-level}.
inline double psi(const NodeId& n, int m) {
  if (n.level == 0) return 0.0;
  return static_cast<double>(n.index) / level_width_denom(m, n.level);
}

// Boundary interval I_n = psi(boundary of the subtree below n).
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
};

inline Interval interval(const NodeId& n, int m) {
  double lo = psi(n, m);
  return Interval{lo, lo + 1.0 / level_width_denom(m, n.level)};
}

// One double per node, stored as one contiguous array per level for
// cache-friendly level sweeps.
struct LevelField {
  std::vector<std::vector<double>> levels;

  LevelField() = default;
  explicit LevelField(const TruncatedTree& tree, double fill = 0.0) {
    levels.resize(tree.depth + 1);
    for (int k = 0; k <= tree.depth; ++k)
      levels[k].assign(static_cast<std::size_t>(tree.level_size(k)), fill);
  }

  int depth() const { return static_cast<int>(levels.size()) - 1; }

  double& at(const NodeId& n) { return levels[n.level][static_cast<std::size_t>(n.index)]; }
  double at(const NodeId& n) const { return levels[n.level][static_cast<std::size_t>(n.index)]; }

  double& root() { return levels[0][0]; }
  double root() const { return levels[0][0]; }
};

double field_max_abs(const LevelField& f);
double field_max_abs_diff(const LevelField& a, const LevelField& b);
// max over all nodes of (a - b); useful for one-sided monotonicity checks.
double field_max_signed_diff(const LevelField& a, const LevelField& b);
double field_min(const LevelField& f);
double field_max(const LevelField& f);

}  // namespace treemem
