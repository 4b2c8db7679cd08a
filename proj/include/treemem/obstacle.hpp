#pragma once

#include "treemem/single_solver.hpp"

namespace treemem {

enum class ObstacleSide { below, above };

// Obstacle problem in complementarity form on the truncation:
//   below: 0 = max{ -L(u) + h, phi - u },  u|leaves = f(psi)
//   above: 0 = min{ -L(v) + h, phi - v },  v|leaves = f(psi)  (datum g in TMP use)
// The obstacle must stay strictly on the correct side of the boundary datum at
// every truncation leaf.
struct ObstacleProblem {
  DirichletProblem base;
  LevelField obstacle;
  ObstacleSide side;

  ObstacleProblem(DirichletProblem base_, LevelField obstacle_, ObstacleSide side_);
};

struct ObstacleReport : SolveReport {
  double complementarity = 0.0;
  double init_lift = 0.0;
};

// Monotone projected Jacobi iteration from a constructed super-(sub-)solution
// dominating the obstacle; iterates decrease (increase) to the least
// supersolution above phi (greatest subsolution below phi).
std::pair<LevelField, ObstacleReport> solve_below(const ObstacleProblem& op, double tol,
                                                  long max_iter);
std::pair<LevelField, ObstacleReport> solve_above(const ObstacleProblem& op, double tol,
                                                  long max_iter);

// sup over interior nodes of |max{-(Lu - h), phi - u}| (min-form for `above`).
double complementarity_residual(const LevelField& u, const ObstacleProblem& op);

}  // namespace treemem
