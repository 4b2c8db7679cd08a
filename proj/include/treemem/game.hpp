#pragma once

#include <cstdint>
#include <vector>

#include "treemem/rng.hpp"
#include "treemem/two_membranes.hpp"

namespace treemem {

// Two-board zero-sum game: a token on one of two copies of the tree. On board
// 1 Player I (maximizer) either plays a round -- collect h1(x), move up with
// probability beta1 or to a uniform child, from the root always to a child --
// or switches the token to board 2 at the same node. On board 2 Player II
// (minimizer) has the mirror choice with beta2, h2. Reaching level M = K ends
// the game with final payoff f(psi) on board 1, g(psi) on board 2.
struct GameConfig {
  TmpSpec spec;
  NodeId start{0, 0};
  int start_board = 1;
  std::int64_t paths = 100000;
  std::uint64_t seed = 1;
  long max_steps = 1000000;  // cap on decisions per path

  GameConfig(TmpSpec spec_, NodeId start_, int start_board_, std::int64_t paths_,
             std::uint64_t seed_, long max_steps_ = 1000000);
};

// Stationary stay/jump decision per node and board: stay1[k][i] is Player I's
// choice at (node, board 1).
struct StrategyPair {
  std::vector<std::vector<std::uint8_t>> stay1, stay2;
};

struct PathOutcome {
  double payoff = 0.0;
  long steps = 0;  // token moves
  NodeId exit_node{0, 0};
  int exit_board = 1;
  bool truncated_by_cap = false;
  long jump_overrides = 0;  // times the anti-livelock rule forced a stay
};

// Greedy strategies read off the solved pair: stay when the own-equation
// branch is no worse than the switch value, ties resolve to stay (which moves
// the token). At contact nodes of the solved pair at least one side ties, so
// greedy play reproduces the solved values.
StrategyPair greedy_strategies(const LevelField& u, const LevelField& v, const TmpSpec& spec,
                               double tie_tol = 1e-7);

// One play-through. A jump flips the board without moving the token or paying;
// an immediate jump-back (two jumps with no token move between them) is
// overridden to stay, so the token advances at least every other decision and
// never-ending mutual switching cannot occur.
PathOutcome play_path(const GameConfig& cfg, const StrategyPair& strat, SplitMix64 rng);

struct ValueEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t paths_used = 0;
  double capped_fraction = 0.0;
  long total_jump_overrides = 0;
};

// Monte Carlo mean over cfg.paths independent substreams (seed x path index);
// aggregation is pairwise in fixed path order, so the result is independent of
// the thread count (TREEMEM_THREADS).
ValueEstimate estimate_value(const GameConfig& cfg, const StrategyPair& strat);

}  // namespace treemem
