#include "treemem/obstacle.hpp"

#include <chrono>
#include <cmath>

#include "treemem/errors.hpp"
#include "treemem/kernels.hpp"

namespace treemem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// The obstacle may not cross the boundary datum at the truncation leaves.
// Touching is allowed: the finite complementarity system stays well posed with
// equality, and the solution-as-obstacle case relies on it.
void check_leaf_separation(const ObstacleProblem& op) {
  auto leaves = leaf_values(op.base.f, op.base.tree);
  const auto& phi = op.obstacle.levels.back();
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    bool ok = op.side == ObstacleSide::below ? phi[i] <= leaves[i] : phi[i] >= leaves[i];
    if (!ok)
      throw Error(Errc::SeparationViolated,
                  "obstacle crosses the boundary datum at a truncation leaf");
  }
}

}  // namespace

ObstacleProblem::ObstacleProblem(DirichletProblem base_, LevelField obstacle_,
                                 ObstacleSide side_)
    : base(std::move(base_)), obstacle(std::move(obstacle_)), side(side_) {
  if (obstacle.depth() != base.tree.depth)
    throw Error(Errc::InvalidConfig, "obstacle field does not match the tree");
}

double complementarity_residual(const LevelField& u, const ObstacleProblem& op) {
  auto h_levels = make_h_levels(op.base.h, op.base.tree);
  LevelField t(op.base.tree);
  jacobi_step(t, u, h_levels, op.base.params, op.base.tree);
  double r = 0.0;
  for (int k = 0; k < op.base.tree.depth; ++k) {
    const auto& uk = u.levels[static_cast<std::size_t>(k)];
    const auto& tk = t.levels[static_cast<std::size_t>(k)];
    const auto& pk = op.obstacle.levels[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < uk.size(); ++i) {
      double eq = tk[i] - uk[i];  // = -(L(u) - h)
      double ob = pk[i] - uk[i];
      double c = op.side == ObstacleSide::below ? std::fmax(eq, ob) : std::fmin(eq, ob);
      r = std::fmax(r, std::fabs(c));
    }
  }
  return r;
}

namespace {

std::pair<LevelField, ObstacleReport> solve_clamped(const ObstacleProblem& op, double tol,
                                                    long max_iter) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be positive");
  check_leaf_separation(op);
  auto t0 = Clock::now();
  const TruncatedTree& tree = op.base.tree;
  const bool below = op.side == ObstacleSide::below;
  auto h_levels = make_h_levels(op.base.h, tree);

  auto [cur, lift] = below ? dominating_supersolution(op.base, op.obstacle)
                           : dominated_subsolution(op.base, op.obstacle);
  LevelField next(tree);

  ObstacleReport rep;
  rep.method = below ? "obstacle_below" : "obstacle_above";
  rep.init_lift = lift;
  for (long it = 1; it <= max_iter; ++it) {
    jacobi_step(next, cur, h_levels, op.base.params, tree);
    for (int k = 0; k < tree.depth; ++k) {
      auto& nk = next.levels[static_cast<std::size_t>(k)];
      const auto& pk = op.obstacle.levels[static_cast<std::size_t>(k)];
      if (below)
        kern::ops().max_with(nk.data(), pk.data(), nk.size());
      else
        kern::ops().min_with(nk.data(), pk.data(), nk.size());
    }
    // monotone by construction: decreasing from a supersolution (below),
    // increasing from a subsolution (above)
    double drift = below ? field_max_signed_diff(next, cur)
                         : field_max_signed_diff(cur, next);
    if (drift > 1e-12 * (1.0 + field_max_abs(cur)))
      throw Error(Errc::MonotonicityViolated, "projected iteration moved the wrong way");
    double delta = field_max_abs_diff(next, cur);
    cur.levels.swap(next.levels);
    rep.iterations = it;
    if (delta < tol) {
      rep.complementarity = complementarity_residual(cur, op);
      rep.final_residual = rep.complementarity;
      if (rep.complementarity > 10.0 * tol)
        throw Error(Errc::MaxIterExceeded,
                    "complementarity residual did not meet its bound at convergence");
      rep.elapsed_seconds = seconds_since(t0);
      return {std::move(cur), rep};
    }
  }
  double res = complementarity_residual(cur, op);
  throw MaxIterError("projected iteration did not reach tol", max_iter, res, std::move(cur));
}

}  // namespace

std::pair<LevelField, ObstacleReport> solve_below(const ObstacleProblem& op, double tol,
                                                  long max_iter) {
  if (op.side != ObstacleSide::below)
    throw Error(Errc::InvalidConfig, "solve_below needs side = below");
  return solve_clamped(op, tol, max_iter);
}

std::pair<LevelField, ObstacleReport> solve_above(const ObstacleProblem& op, double tol,
                                                  long max_iter) {
  if (op.side != ObstacleSide::above)
    throw Error(Errc::InvalidConfig, "solve_above needs side = above");
  return solve_clamped(op, tol, max_iter);
}

}  // namespace treemem
