#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "treemem/expr.hpp"
#include "treemem/tree.hpp"

namespace treemem {

// Right-hand side h on the tree. Three backends share one interface:
//   - a source-kind expression in (k, s),
//   - a per-node table (level,index,value), zero beyond its deepest level,
//   - identically zero.
// Expressions that never reference `s` get exact O(1) level sums in the
// series code instead of subtree sweeps.
class Source {
 public:
  Source();  // zero
  explicit Source(FuncSpec expr);

  struct TableTag {};
  Source(TableTag, std::vector<std::tuple<int, std::int64_t, double>> entries);

  static Source zero();
  static Source from_table_csv(const std::string& path);

  bool is_zero() const { return backend_ == Backend::zero; }
  bool is_table() const { return backend_ == Backend::table; }
  bool is_expr() const { return backend_ == Backend::expr; }

  // Depends on the node only through its level. True for zero, for
  // s-free expressions, and false for tables (unless empty).
  bool level_only() const;

  double value(const NodeId& n, int m) const;
  // Requires level_only().
  double level_value(int level) const;

  // Exact per-level sup of |h| when the backend knows it (zero, table);
  // nullopt for expressions that depend on s.
  std::optional<double> exact_level_sup(int level) const;

  // Estimated per-level sup of |h| for s-dependent expressions, from an
  // equispaced sample of psi values (not a certified bound).
  double sampled_level_sup(int level, int samples = 257) const;

  // Deepest level with a table entry; -1 for empty table, nullopt otherwise.
  std::optional<int> table_max_level() const;

  // Fill dst[i] = h(level, i) for i in [0, n).
  void fill_level(int level, int m, double* dst, std::int64_t n) const;

  const std::string& describe() const { return describe_; }

 private:
  enum class Backend { zero, expr, table };
  Backend backend_ = Backend::zero;
  std::optional<FuncSpec> expr_;
  std::unordered_map<std::int64_t, std::unordered_map<std::int64_t, double>> table_;
  int table_max_level_ = -1;
  std::string describe_ = "0";
};

}  // namespace treemem
