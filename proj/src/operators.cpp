#include "treemem/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "treemem/errors.hpp"
#include "treemem/kernels.hpp"

namespace treemem {

OperatorParams::OperatorParams(double beta_, int m_) : beta(beta_), m(m_) {
  if (!(beta >= 0.0) || beta >= 0.5)
    throw Error(Errc::InvalidConfig, "beta must lie in [0, 1/2)");
  if (m < 2) throw Error(Errc::InvalidConfig, "m must be >= 2");
}

double c_beta(const OperatorParams& p) { return p.c_beta(); }

double apply_L(const LevelField& u, const OperatorParams& p, const NodeId& n,
               double h_at_n, const TruncatedTree& tree) {
  if (n.level >= tree.depth)
    throw Error(Errc::LeafHasNoChildren, "L is not applied at truncation leaves");
  double child_sum = 0.0;
  for (int i = 0; i < tree.m; ++i)
    child_sum += u.levels[n.level + 1][static_cast<std::size_t>(n.index * tree.m + i)];
  double child_mean = child_sum / tree.m;
  if (n.level == 0) return u.root() - child_mean - h_at_n;
  double up = u.levels[n.level - 1][static_cast<std::size_t>(n.index / tree.m)];
  return u.at(n) - p.beta * up - (1.0 - p.beta) * child_mean - h_at_n;
}

namespace {

// mean of h over S^j(n), exact enumeration (pairwise summation); the block of
// descendants at extra depth j is the contiguous index range
// [n.index * m^j, (n.index+1) * m^j) at level n.level + j.
double level_mean_exact(const Source& h, const NodeId& n, int m, int j) {
  if (h.level_only()) return h.level_value(n.level + j);
  std::int64_t count = ipow(m, j);
  std::int64_t base = n.index * count;
  int level = n.level + j;
  std::vector<double> vals(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i)
    vals[static_cast<std::size_t>(i)] = h.value(NodeId{level, base + i}, m);
  return kern::pairwise_sum(vals) / static_cast<double>(count);
}

struct TailResult {
  double bound = 0.0;
  bool estimated = false;
  bool unbounded = false;
};

// Bound 1/(1-2 beta) * sum_{j > depth_used} |A_j| from per-level sups of |h|.
// Requires certified geometric decay of the sups; without it the honest answer
// is +infinity (e.g. constant h, whose S_h series diverges).
TailResult tail_from_level_sups(const Source& h, int base_level, int first_extra,
                                int horizon, double factor,
                                std::optional<double> h_sup_tail) {
  TailResult out;
  if (h_sup_tail && !std::isfinite(*h_sup_tail))
    throw Error(Errc::TailUnbounded, "h_sup_tail must be finite");

  // Tables are zero beyond their deepest level: finite remainder, exact.
  if (auto tmax = h.table_max_level()) {
    double sum = 0.0;
    for (int j = first_extra; base_level + j <= *tmax; ++j) {
      double b = *h.exact_level_sup(base_level + j);
      if (h_sup_tail) b = std::fmin(b, *h_sup_tail);
      sum += b;
    }
    out.bound = factor * sum;
    return out;
  }

  double sum = 0.0;
  double prev = -1.0;
  double worst_ratio = 0.0;
  int streak = 0;           // consecutive terms with certified ratio
  int zero_streak = 0;
  const int need_streak = 8;
  const double r_max = 0.95;
  for (int j = first_extra; j < first_extra + horizon; ++j) {
    int level = base_level + j;
    double b;
    if (auto e = h.exact_level_sup(level)) {
      b = *e;
    } else {
      b = h.sampled_level_sup(level);
      out.estimated = true;
    }
    if (h_sup_tail) b = std::fmin(b, *h_sup_tail);
    sum += b;
    if (b == 0.0) {
      if (++zero_streak >= 4) {
        out.bound = factor * sum;
        return out;
      }
      prev = -1.0;
      streak = 0;
      continue;
    }
    zero_streak = 0;
    if (prev > 0.0) {
      double r = b / prev;
      if (r <= r_max) {
        worst_ratio = streak == 0 ? r : std::fmax(worst_ratio, r);
        ++streak;
      } else {
        streak = 0;
      }
      if (streak >= need_streak) {
        sum += b * worst_ratio / (1.0 - worst_ratio);  // geometric remainder
        out.bound = factor * sum;
        return out;
      }
    }
    prev = b;
  }
  out.unbounded = true;
  out.bound = std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace

namespace {

// Closed-form evaluation, valid for all beta in [0, 1/2): the prefactor
// (c_beta - 1)/beta = 1/(1 - 2 beta) extends continuously to beta = 0.
ShTruncation sh_closed(const Source& h, const NodeId& n, const OperatorParams& p,
                       int max_extra_depth, std::optional<double> h_sup_tail,
                       const ShOptions& opts) {
  if (max_extra_depth < 1)
    throw Error(Errc::InvalidConfig, "max_extra_depth must be >= 1");

  // Reduce the depth if exact enumeration of m^j descendants would exceed the
  // work cap (level-only sources never enumerate).
  int depth = max_extra_depth;
  if (!h.level_only()) {
    while (depth > 0 && ipow(p.m, depth) > opts.node_work_cap) --depth;
  }

  const double factor = 1.0 / (1.0 - 2.0 * p.beta);
  std::vector<double> means(static_cast<std::size_t>(depth) + 1);
  for (int j = 0; j <= depth; ++j)
    means[static_cast<std::size_t>(j)] = level_mean_exact(h, n, p.m, j);

  ShTruncation out;
  out.depth_used = depth;
  out.value = factor * kern::pairwise_sum(means);
  TailResult tail = tail_from_level_sups(h, n.level, depth + 1, opts.tail_horizon,
                                         factor, h_sup_tail);
  out.tail_bound = tail.bound;
  out.tail_estimated = tail.estimated;
  return out;
}

}  // namespace

ShTruncation s_h(const Source& h, const NodeId& n, const OperatorParams& p,
                 int max_extra_depth, std::optional<double> h_sup_tail,
                 const ShOptions& opts) {
  if (p.beta == 0.0)
    throw Error(Errc::BetaZeroSeries, "S_h carries a 1/beta prefactor; use the beta = 0 path");
  return sh_closed(h, n, p, max_extra_depth, h_sup_tail, opts);
}

ShField s_h_field(const Source& h, const TruncatedTree& tree, const OperatorParams& p,
                  int max_extra_depth, const ShFieldOptions& opts) {
  if (max_extra_depth < 1)
    throw Error(Errc::InvalidConfig, "max_extra_depth must be >= 1");
  const int K = tree.depth;
  const double factor = 1.0 / (1.0 - 2.0 * p.beta);

  ShField out;
  out.value.resize(K + 1);
  out.tail_bound.assign(K + 1, 0.0);

  if (h.level_only()) {
    out.min_depth_used = max_extra_depth;
    for (int k = 0; k <= K; ++k) {
      std::vector<double> terms(static_cast<std::size_t>(max_extra_depth) + 1);
      for (int j = 0; j <= max_extra_depth; ++j)
        terms[static_cast<std::size_t>(j)] = h.level_value(k + j);
      double s = factor * kern::pairwise_sum(terms);
      out.value[k].assign(static_cast<std::size_t>(tree.level_size(k)), s);
      TailResult tail = tail_from_level_sups(h, k, max_extra_depth + 1,
                                             opts.tail_horizon, factor, std::nullopt);
      out.tail_bound[k] = tail.bound;
      out.tail_estimated = out.tail_estimated || tail.estimated;
    }
    return out;
  }

  // General sources: one upward sweep. cur at level l accumulates
  // sum_{j=0}^{E-l} A_j per node; the deepest solved level K gets extra depth
  // E - K, shallower levels more. E is capped by the sweep work limit.
  int E = K + max_extra_depth;
  if (auto tmax = h.table_max_level()) E = std::min(E, std::max(*tmax, K));
  while (E > K && ipow(tree.m, E) > opts.field_work_cap) --E;
  out.min_depth_used = E - K;

  std::vector<double> cur(static_cast<std::size_t>(ipow(tree.m, E)));
  h.fill_level(E, tree.m, cur.data(), ipow(tree.m, E));
  if (E <= K) out.value[E] = cur;  // possible only when work cap forces E == K
  std::vector<double> next, hbuf;
  for (int l = E - 1; l >= 0; --l) {
    std::int64_t n = ipow(tree.m, l);
    next.resize(static_cast<std::size_t>(n));
    kern::mean_children(next.data(), cur.data(), static_cast<std::size_t>(n), tree.m);
    hbuf.resize(static_cast<std::size_t>(n));
    h.fill_level(l, tree.m, hbuf.data(), n);
    kern::ops().combine2(next.data(), 1.0, next.data(), 1.0, hbuf.data(),
                         static_cast<std::size_t>(n));
    cur.swap(next);
    if (l <= K) out.value[l] = cur;
  }
  for (int k = 0; k <= K; ++k) {
    for (double& v : out.value[k]) v *= factor;
    TailResult tail = tail_from_level_sups(h, k, E - k + 1, opts.tail_horizon, factor,
                                           std::nullopt);
    out.tail_bound[k] = tail.bound;
    out.tail_estimated = out.tail_estimated || tail.estimated;
  }
  return out;
}

namespace {

// Deterministic probe set at a level: everything when small, otherwise the two
// extremal digit strings plus psi-equispaced paths.
std::vector<std::int64_t> probe_indices(int m, int level, const SolvabilityOptions& opts) {
  std::int64_t n = ipow(m, level);
  std::vector<std::int64_t> out;
  if (n <= opts.probe_exhaustive_cap) {
    out.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = i;
    return out;
  }
  out.push_back(0);
  out.push_back(n - 1);
  for (int t = 1; t < opts.probe_paths - 1; ++t) {
    double frac = static_cast<double>(t) / (opts.probe_paths - 1);
    out.push_back(static_cast<std::int64_t>(frac * static_cast<double>(n - 1)));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

SolvabilityReport solvability_check(const Source& h, const OperatorParams& p,
                                    int probe_depth, const SolvabilityOptions& opts) {
  if (probe_depth < 3) throw Error(Errc::InvalidConfig, "probe_depth must be >= 3");
  const double rho = p.rho();
  const double factor = 1.0 / (1.0 - 2.0 * p.beta);

  SolvabilityReport rep;
  rep.tolerance = opts.tolerance;
  rep.trace.assign(static_cast<std::size_t>(probe_depth), 0.0);

  if (h.level_only()) {
    // All level-k nodes share S_h; T obeys T_signed(k) = rho*T_signed(k-1) + S(k).
    std::vector<double> S(static_cast<std::size_t>(probe_depth) + 1, 0.0);
    for (int k = 1; k <= probe_depth; ++k) {
      std::vector<double> terms(static_cast<std::size_t>(opts.sh_depth) + 1);
      for (int j = 0; j <= opts.sh_depth; ++j)
        terms[static_cast<std::size_t>(j)] = h.level_value(k + j);
      S[static_cast<std::size_t>(k)] = factor * kern::pairwise_sum(terms);
      TailResult tail = tail_from_level_sups(h, k, opts.sh_depth + 1, 400, factor,
                                             std::nullopt);
      rep.tail_unbounded = rep.tail_unbounded || tail.unbounded;
      rep.tail_estimated = rep.tail_estimated || tail.estimated;
    }
    double acc = 0.0;
    for (int k = 1; k <= probe_depth; ++k) {
      acc = rho * acc + S[static_cast<std::size_t>(k)];
      rep.trace[static_cast<std::size_t>(k - 1)] = std::fabs(acc);
    }
  } else {
    // Memoized per-ancestor S_h along probed digit paths.
    std::map<std::pair<int, std::int64_t>, double> memo;
    auto sh_at = [&](const NodeId& node) {
      auto key = std::make_pair(node.level, node.index);
      auto it = memo.find(key);
      if (it != memo.end()) return it->second;
      ShOptions so;
      ShTruncation t = sh_closed(h, node, p, opts.sh_depth, std::nullopt, so);
      rep.tail_unbounded = rep.tail_unbounded || !std::isfinite(t.tail_bound);
      rep.tail_estimated = rep.tail_estimated || t.tail_estimated;
      memo.emplace(key, t.value);
      return t.value;
    };
    for (int k = 1; k <= probe_depth; ++k) {
      double worst = 0.0;
      for (std::int64_t idx : probe_indices(p.m, k, opts)) {
        double acc = 0.0;
        for (int j = 1; j <= k; ++j) {
          std::int64_t anc = idx / ipow(p.m, k - j);
          acc += std::pow(rho, k - j) * sh_at(NodeId{j, anc});
        }
        worst = std::fmax(worst, std::fabs(acc));
      }
      rep.trace[static_cast<std::size_t>(k - 1)] = worst;
    }
  }

  // Eventually decreasing: smallest k0 with T non-increasing from k0 to the end.
  int k0 = probe_depth;
  for (int k = probe_depth - 1; k >= 1; --k) {
    double slack = 1e-15 * (1.0 + rep.trace[static_cast<std::size_t>(k - 1)]);
    if (rep.trace[static_cast<std::size_t>(k)] <=
        rep.trace[static_cast<std::size_t>(k - 1)] + slack)
      k0 = k;
    else
      break;
  }
  rep.decreasing_from = (k0 <= probe_depth - 2) ? k0 : -1;
  rep.passes = rep.decreasing_from > 0 &&
               rep.trace[static_cast<std::size_t>(probe_depth - 1)] < opts.tolerance;
  return rep;
}

std::vector<std::vector<double>> make_h_levels(const Source& h, const TruncatedTree& tree) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(tree.depth));
  for (int k = 0; k < tree.depth; ++k) {
    std::int64_t n = tree.level_size(k);
    out[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(n));
    h.fill_level(k, tree.m, out[static_cast<std::size_t>(k)].data(), n);
  }
  return out;
}

}  // namespace treemem
