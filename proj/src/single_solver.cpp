#include "treemem/single_solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "treemem/errors.hpp"
#include "treemem/kernels.hpp"

namespace treemem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

DirichletProblem::DirichletProblem(TruncatedTree tree_, OperatorParams params_, Source h_,
                                   FuncSpec f_, QuadratureParams quad_)
    : tree(tree_), params(params_), h(std::move(h_)), f(std::move(f_)), quad(quad_) {
  if (params.m != tree.m)
    throw Error(Errc::InvalidConfig, "operator branching m must match the tree");
  if (f.kind() != FuncKind::boundary)
    throw Error(Errc::InvalidConfig, "boundary datum must be a boundary-kind expression");
}

std::vector<double> leaf_values(const FuncSpec& f, const TruncatedTree& tree) {
  std::int64_t n = tree.level_size(tree.depth);
  const double denom = level_width_denom(tree.m, tree.depth);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = f.eval_boundary(static_cast<double>(i) / denom);
  return out;
}

std::vector<std::vector<double>> boundary_average_levels(const FuncSpec& f,
                                                         const TruncatedTree& tree,
                                                         const QuadratureParams& q) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(tree.depth) + 1);
  for (int k = 0; k <= tree.depth; ++k) {
    std::int64_t n = tree.level_size(k);
    auto& lv = out[static_cast<std::size_t>(k)];
    lv.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      lv[static_cast<std::size_t>(i)] = boundary_average(f, interval(NodeId{k, i}, tree.m), q);
  }
  return out;
}

void jacobi_step(LevelField& dst, const LevelField& src,
                 const std::vector<std::vector<double>>& h_levels,
                 const OperatorParams& p, const TruncatedTree& tree) {
  const int K = tree.depth;
  std::vector<double> mc, up;
  // root: u = mean(children) + h
  {
    mc.resize(1);
    kern::mean_children(mc.data(), src.levels[1].data(), 1, tree.m);
    dst.levels[0][0] = mc[0] + h_levels[0][0];
  }
  for (int k = 1; k < K; ++k) {
    std::size_t n = src.levels[static_cast<std::size_t>(k)].size();
    mc.resize(n);
    up.resize(n);
    kern::mean_children(mc.data(), src.levels[static_cast<std::size_t>(k) + 1].data(), n,
                        tree.m);
    kern::upsample(up.data(), src.levels[static_cast<std::size_t>(k) - 1].data(), n, tree.m);
    kern::ops().combine3(dst.levels[static_cast<std::size_t>(k)].data(), p.beta, up.data(),
                         1.0 - p.beta, mc.data(),
                         h_levels[static_cast<std::size_t>(k)].data(), n);
  }
  dst.levels[static_cast<std::size_t>(K)] = src.levels[static_cast<std::size_t>(K)];
}

double equation_residual(const LevelField& u,
                         const std::vector<std::vector<double>>& h_levels,
                         const OperatorParams& p, const TruncatedTree& tree) {
  LevelField t(tree);
  jacobi_step(t, u, h_levels, p, tree);
  double r = 0.0;
  for (int k = 0; k < tree.depth; ++k)
    r = std::fmax(r, kern::ops().sup_abs_diff(u.levels[static_cast<std::size_t>(k)].data(),
                                              t.levels[static_cast<std::size_t>(k)].data(),
                                              u.levels[static_cast<std::size_t>(k)].size()));
  return r;
}

namespace {

// One elimination pass: u(x) = alpha_k u(parent) + b(x), leaves pinned.
LevelField eliminate_once(const DirichletProblem& prob,
                          const std::vector<std::vector<double>>& h_levels,
                          const std::vector<double>& leaves) {
  const TruncatedTree& tree = prob.tree;
  const int K = tree.depth;
  const double beta = prob.params.beta;

  std::vector<double> alpha(static_cast<std::size_t>(K) + 1, 0.0);
  LevelField b(tree);
  b.levels[static_cast<std::size_t>(K)] = leaves;

  std::vector<double> mc;
  for (int k = K - 1; k >= 1; --k) {
    double denom = 1.0 - (1.0 - beta) * alpha[static_cast<std::size_t>(k) + 1];
    if (denom <= 1e-14)
      throw Error(Errc::SingularPivot, "elimination pivot vanished (cannot occur for beta < 1/2)");
    alpha[static_cast<std::size_t>(k)] = beta / denom;
    std::size_t n = b.levels[static_cast<std::size_t>(k)].size();
    mc.resize(n);
    kern::mean_children(mc.data(), b.levels[static_cast<std::size_t>(k) + 1].data(), n, tree.m);
    kern::ops().combine2(b.levels[static_cast<std::size_t>(k)].data(), (1.0 - beta) / denom,
                         mc.data(), 1.0 / denom,
                         h_levels[static_cast<std::size_t>(k)].data(), n);
  }

  LevelField u(tree);
  u.levels[static_cast<std::size_t>(K)] = b.levels[static_cast<std::size_t>(K)];
  {
    double denom0 = 1.0 - alpha[1];
    if (denom0 <= 1e-14) throw Error(Errc::SingularPivot, "root pivot vanished");
    mc.resize(1);
    kern::mean_children(mc.data(), b.levels[1].data(), 1, tree.m);
    u.levels[0][0] = (mc[0] + h_levels[0][0]) / denom0;
  }
  std::vector<double> up;
  for (int k = 1; k < K; ++k) {
    std::size_t n = u.levels[static_cast<std::size_t>(k)].size();
    up.resize(n);
    kern::upsample(up.data(), u.levels[static_cast<std::size_t>(k) - 1].data(), n, tree.m);
    kern::ops().combine2(u.levels[static_cast<std::size_t>(k)].data(),
                         alpha[static_cast<std::size_t>(k)], up.data(), 1.0,
                         b.levels[static_cast<std::size_t>(k)].data(), n);
  }
  return u;
}

// Shared elimination core, parameterized by the h arrays so the lifted
// variants reuse it.
std::pair<LevelField, SolveReport> solve_direct_on(
    const DirichletProblem& prob, const std::vector<std::vector<double>>& h_levels) {
  auto t0 = Clock::now();
  const TruncatedTree& tree = prob.tree;
  auto leaves = leaf_values(prob.f, tree);
  LevelField u = eliminate_once(prob, h_levels, leaves);

  // One step of iterative refinement with the residual accumulated in
  // extended precision (plain working-precision residuals are pure rounding
  // noise and cannot improve the solve). Keeps constants exact to the last
  // bit and tightens everything else.
  {
    const double beta = prob.params.beta;
    std::vector<std::vector<double>> r_levels(static_cast<std::size_t>(tree.depth));
    for (int k = 0; k < tree.depth; ++k) {
      std::int64_t n = tree.level_size(k);
      auto& rk = r_levels[static_cast<std::size_t>(k)];
      rk.resize(static_cast<std::size_t>(n));
      const auto& uk = u.levels[static_cast<std::size_t>(k)];
      const auto& uc = u.levels[static_cast<std::size_t>(k) + 1];
      for (std::int64_t i = 0; i < n; ++i) {
        long double cs = 0.0L;
        for (int c = 0; c < tree.m; ++c)
          cs += static_cast<long double>(uc[static_cast<std::size_t>(i * tree.m + c)]);
        long double mean = cs / tree.m;
        long double t;
        if (k == 0) {
          t = mean + static_cast<long double>(h_levels[0][0]);
        } else {
          long double up =
              u.levels[static_cast<std::size_t>(k) - 1][static_cast<std::size_t>(i / tree.m)];
          t = static_cast<long double>(beta) * up +
              static_cast<long double>(1.0 - beta) * mean +
              static_cast<long double>(h_levels[static_cast<std::size_t>(k)]
                                               [static_cast<std::size_t>(i)]);
        }
        rk[static_cast<std::size_t>(i)] =
            static_cast<double>(static_cast<long double>(uk[static_cast<std::size_t>(i)]) - t);
      }
    }
    std::vector<double> zero_leaves(leaves.size(), 0.0);
    LevelField corr = eliminate_once(prob, r_levels, zero_leaves);
    for (int k = 0; k < tree.depth; ++k) {
      std::size_t n = u.levels[static_cast<std::size_t>(k)].size();
      kern::ops().combine2(u.levels[static_cast<std::size_t>(k)].data(), 1.0,
                           u.levels[static_cast<std::size_t>(k)].data(), -1.0,
                           corr.levels[static_cast<std::size_t>(k)].data(), n);
    }
  }

  SolveReport rep;
  rep.method = "direct";
  rep.iterations = 1;
  rep.final_residual = equation_residual(u, h_levels, prob.params, tree);
  if (rep.final_residual > 1e-10 * (1.0 + field_max_abs(u)))
    throw Error(Errc::SingularPivot, "direct solve failed its residual post-check");
  rep.elapsed_seconds = seconds_since(t0);
  return {std::move(u), rep};
}

}  // namespace

std::pair<LevelField, SolveReport> solve_direct(const DirichletProblem& prob) {
  return solve_direct_on(prob, make_h_levels(prob.h, prob.tree));
}

std::pair<LevelField, SolveReport> solve_representation(const DirichletProblem& prob,
                                                        int sh_depth) {
  if (prob.params.beta == 0.0)
    throw Error(Errc::BetaZeroSeries,
                "the solution recurrence degenerates at beta = 0; use solve_direct");
  auto t0 = Clock::now();
  const TruncatedTree& tree = prob.tree;
  const int K = tree.depth;
  const double rho = prob.params.rho();
  const double cb = prob.params.c_beta();

  ShField sh = s_h_field(prob.h, tree, prob.params, sh_depth);
  auto avg = boundary_average_levels(prob.f, tree, prob.quad);

  LevelField u(tree);
  {
    double mean_sh1 = kern::pairwise_sum(sh.value[1]) / static_cast<double>(tree.m);
    double h_root = prob.h.value(NodeId{0, 0}, tree.m);
    u.levels[0][0] = avg[0][0] + mean_sh1 + cb * h_root;  // avg over [0,1] = int f
  }
  std::vector<double> up, z;
  for (int k = 1; k <= K; ++k) {
    std::size_t n = u.levels[static_cast<std::size_t>(k)].size();
    up.resize(n);
    z.resize(n);
    kern::upsample(up.data(), u.levels[static_cast<std::size_t>(k) - 1].data(), n, tree.m);
    kern::ops().combine2(z.data(), 1.0 / cb, sh.value[static_cast<std::size_t>(k)].data(),
                         1.0 / cb, avg[static_cast<std::size_t>(k)].data(), n);
    kern::ops().combine2(u.levels[static_cast<std::size_t>(k)].data(), rho, up.data(), 1.0,
                         z.data(), n);
  }

  SolveReport rep;
  rep.method = "representation";
  rep.iterations = 1;
  auto h_levels = make_h_levels(prob.h, tree);
  rep.final_residual = equation_residual(u, h_levels, prob.params, tree);

  auto leaves = leaf_values(prob.f, tree);
  rep.leaf_mismatch = kern::ops().sup_abs_diff(
      u.levels[static_cast<std::size_t>(K)].data(), leaves.data(), leaves.size());
  double green = static_cast<double>(K) / (1.0 - 2.0 * prob.params.beta);
  rep.tail_bound = rep.leaf_mismatch + green * rep.final_residual;
  for (double t : sh.tail_bound) rep.sh_tail = std::fmax(rep.sh_tail, t);
  rep.sh_min_depth = sh.min_depth_used;
  rep.sh_tail_estimated = sh.tail_estimated;
  rep.elapsed_seconds = seconds_since(t0);
  return {std::move(u), rep};
}

std::pair<LevelField, SolveReport> solve_value_iteration(const DirichletProblem& prob,
                                                         double tol, long max_iter) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be positive");
  auto t0 = Clock::now();
  const TruncatedTree& tree = prob.tree;
  auto h_levels = make_h_levels(prob.h, tree);

  // Start from the boundary-average extension of f: exact for constant f.
  LevelField cur(tree);
  {
    auto avg = boundary_average_levels(prob.f, tree, prob.quad);
    for (int k = 0; k < tree.depth; ++k) cur.levels[static_cast<std::size_t>(k)] = avg[static_cast<std::size_t>(k)];
    cur.levels[static_cast<std::size_t>(tree.depth)] = leaf_values(prob.f, tree);
  }
  LevelField next(tree);

  SolveReport rep;
  rep.method = "value_iteration";
  double prev_delta = std::numeric_limits<double>::infinity();
  for (long it = 1; it <= max_iter; ++it) {
    jacobi_step(next, cur, h_levels, prob.params, tree);
    double delta = field_max_abs_diff(next, cur);
    cur.levels.swap(next.levels);
    rep.iterations = it;
    // sup updates cannot grow: the iteration matrix has row sums <= 1.
    // Slack covers per-sweep rounding of order eps * |u|.
    if (delta > prev_delta + 1e-12 * (1.0 + field_max_abs(cur)))
      throw Error(Errc::MonotonicityViolated, "value-iteration update norm increased");
    // Stop when the update is below tol and the contraction estimate puts the
    // remaining distance delta * r/(1-r) safely below 5*tol (the contract is a
    // gap of at most 10*tol to the exact truncated solution).
    double r = std::isfinite(prev_delta) && prev_delta > 0.0
                   ? std::fmin(delta / prev_delta, 0.9999)
                   : 0.9999;
    prev_delta = delta;
    if (delta == 0.0 || (delta < tol && delta * r / (1.0 - r) < 5.0 * tol)) {
      rep.final_residual = equation_residual(cur, h_levels, prob.params, tree);
      rep.elapsed_seconds = seconds_since(t0);
      return {std::move(cur), rep};
    }
  }
  double res = equation_residual(cur, h_levels, prob.params, tree);
  throw MaxIterError("value iteration did not reach tol", max_iter, res, std::move(cur));
}

namespace {

LevelField lifted_solve(const DirichletProblem& prob, double lift) {
  auto h_levels = make_h_levels(prob.h, prob.tree);
  h_levels[0][0] += lift;
  return solve_direct_on(prob, h_levels).first;
}

}  // namespace

LevelField build_supersolution(const DirichletProblem& prob, double lift) {
  if (lift < 0.0) throw Error(Errc::InvalidConfig, "supersolution lift must be >= 0");
  return lifted_solve(prob, lift);
}

LevelField build_subsolution(const DirichletProblem& prob, double lift) {
  if (lift > 0.0) throw Error(Errc::InvalidConfig, "subsolution lift must be <= 0");
  return lifted_solve(prob, lift);
}

namespace {

// Solution of L(w) = 1 at interior nodes (and the root), w = 0 at leaves.
// Every interior value is >= 1: the level-(K-1) elimination offset is
// 1/denom >= 1 and offsets only grow moving up.
LevelField unit_green(const DirichletProblem& prob) {
  std::vector<std::vector<double>> ones(static_cast<std::size_t>(prob.tree.depth));
  for (int k = 0; k < prob.tree.depth; ++k)
    ones[static_cast<std::size_t>(k)].assign(
        static_cast<std::size_t>(prob.tree.level_size(k)), 1.0);
  FuncSpec zero_f = parse("0", FuncKind::boundary);
  DirichletProblem zp(prob.tree, prob.params, Source::zero(), zero_f, prob.quad);
  return solve_direct_on(zp, ones).first;
}

}  // namespace

std::pair<LevelField, double> dominating_supersolution(const DirichletProblem& prob,
                                                       const LevelField& floor) {
  LevelField u_free = solve_direct(prob).first;
  double gap = 0.0;
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::size_t i = 0; i < u_free.levels[static_cast<std::size_t>(k)].size(); ++i)
      gap = std::fmax(gap, floor.levels[static_cast<std::size_t>(k)][i] -
                               u_free.levels[static_cast<std::size_t>(k)][i]);
  double lambda = gap + 1.0;
  LevelField g1 = unit_green(prob);
  LevelField w = u_free;
  for (std::size_t k = 0; k < w.levels.size(); ++k)
    kern::ops().combine2(w.levels[k].data(), 1.0, u_free.levels[k].data(), lambda,
                         g1.levels[k].data(), w.levels[k].size());
  return {std::move(w), lambda};
}

std::pair<LevelField, double> dominated_subsolution(const DirichletProblem& prob,
                                                    const LevelField& ceil) {
  LevelField u_free = solve_direct(prob).first;
  double gap = 0.0;
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::size_t i = 0; i < u_free.levels[static_cast<std::size_t>(k)].size(); ++i)
      gap = std::fmax(gap, u_free.levels[static_cast<std::size_t>(k)][i] -
                               ceil.levels[static_cast<std::size_t>(k)][i]);
  double lambda = gap + 1.0;
  LevelField g1 = unit_green(prob);
  LevelField w = u_free;
  for (std::size_t k = 0; k < w.levels.size(); ++k)
    kern::ops().combine2(w.levels[k].data(), 1.0, u_free.levels[k].data(), -lambda,
                         g1.levels[k].data(), w.levels[k].size());
  return {std::move(w), lambda};
}

}  // namespace treemem
