#include "treemem/game.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include "treemem/errors.hpp"
#include "treemem/kernels.hpp"

namespace treemem {

GameConfig::GameConfig(TmpSpec spec_, NodeId start_, int start_board_, std::int64_t paths_,
                       std::uint64_t seed_, long max_steps_)
    : spec(std::move(spec_)),
      start(start_),
      start_board(start_board_),
      paths(paths_),
      seed(seed_),
      max_steps(max_steps_) {
  check_node(start, spec.tree.m);
  if (start.level > spec.tree.depth)
    throw Error(Errc::InvalidConfig, "start node lies outside the truncation");
  if (start_board != 1 && start_board != 2)
    throw Error(Errc::InvalidConfig, "start board must be 1 or 2");
  if (paths < 1) throw Error(Errc::InvalidConfig, "paths must be >= 1");
  if (max_steps < 1) throw Error(Errc::InvalidConfig, "max_steps must be >= 1");
}

StrategyPair greedy_strategies(const LevelField& u, const LevelField& v, const TmpSpec& spec,
                               double tie_tol) {
  const TruncatedTree& tree = spec.tree;
  auto h1 = make_h_levels(spec.h1, tree);
  auto h2 = make_h_levels(spec.h2, tree);
  LevelField eq1(tree), eq2(tree);
  jacobi_step(eq1, u, h1, spec.params1, tree);
  jacobi_step(eq2, v, h2, spec.params2, tree);

  StrategyPair s;
  s.stay1.resize(static_cast<std::size_t>(tree.depth));
  s.stay2.resize(static_cast<std::size_t>(tree.depth));
  for (int k = 0; k < tree.depth; ++k) {
    std::size_t n = u.levels[static_cast<std::size_t>(k)].size();
    s.stay1[static_cast<std::size_t>(k)].resize(n);
    s.stay2[static_cast<std::size_t>(k)].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Player I stays unless switching to board 2 is strictly better.
      s.stay1[static_cast<std::size_t>(k)][i] =
          eq1.levels[static_cast<std::size_t>(k)][i] >=
          v.levels[static_cast<std::size_t>(k)][i] - tie_tol;
      // Player II stays unless switching to board 1 is strictly better.
      s.stay2[static_cast<std::size_t>(k)][i] =
          eq2.levels[static_cast<std::size_t>(k)][i] <=
          u.levels[static_cast<std::size_t>(k)][i] + tie_tol;
    }
  }
  return s;
}

PathOutcome play_path(const GameConfig& cfg, const StrategyPair& strat, SplitMix64 rng) {
  const TruncatedTree& tree = cfg.spec.tree;
  const int m = tree.m;
  const int M = tree.depth;

  NodeId pos = cfg.start;
  int board = cfg.start_board;
  bool last_was_jump = false;
  PathOutcome out;

  for (long decisions = 0;; ++decisions) {
    if (pos.level == M) {
      double s = psi(pos, m);
      out.payoff += board == 1 ? cfg.spec.f.eval_boundary(s) : cfg.spec.g.eval_boundary(s);
      out.exit_node = pos;
      out.exit_board = board;
      return out;
    }
    if (decisions >= cfg.max_steps) {
      out.truncated_by_cap = true;
      out.exit_node = pos;
      out.exit_board = board;
      return out;
    }

    bool stay = board == 1
                    ? strat.stay1[static_cast<std::size_t>(pos.level)]
                                 [static_cast<std::size_t>(pos.index)] != 0
                    : strat.stay2[static_cast<std::size_t>(pos.level)]
                                 [static_cast<std::size_t>(pos.index)] != 0;
    if (!stay && last_was_jump) {  // no immediate jump-back
      stay = true;
      ++out.jump_overrides;
    }

    if (!stay) {
      board = 3 - board;
      last_was_jump = true;
      continue;
    }
    last_was_jump = false;

    // Play one round on the current board: running payoff, then the move.
    const double beta = board == 1 ? cfg.spec.params1.beta : cfg.spec.params2.beta;
    out.payoff += board == 1 ? cfg.spec.h1.value(pos, m) : cfg.spec.h2.value(pos, m);
    if (pos.level == 0) {
      pos = NodeId{1, static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(m)))};
    } else if (rng.next_double() < beta) {
      pos = NodeId{pos.level - 1, pos.index / m};
    } else {
      std::int64_t child = static_cast<std::int64_t>(rng.next_below(static_cast<std::uint64_t>(m)));
      pos = NodeId{pos.level + 1, pos.index * m + child};
    }
    ++out.steps;
  }
}

namespace {

int thread_budget() {
  if (const char* env = std::getenv("TREEMEM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

ValueEstimate estimate_value(const GameConfig& cfg, const StrategyPair& strat) {
  const std::int64_t n = cfg.paths;
  std::vector<double> payoffs(static_cast<std::size_t>(n));
  std::vector<std::uint8_t> capped(static_cast<std::size_t>(n), 0);
  std::vector<long> overrides(static_cast<std::size_t>(n), 0);

  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      PathOutcome o = play_path(cfg, strat, substream(cfg.seed, static_cast<std::uint64_t>(i)));
      payoffs[static_cast<std::size_t>(i)] = o.payoff;
      capped[static_cast<std::size_t>(i)] = o.truncated_by_cap ? 1 : 0;
      overrides[static_cast<std::size_t>(i)] = o.jump_overrides;
    }
  };

  int threads = thread_budget();
  if (threads <= 1 || n < 1024) {
    run_range(0, n);
  } else {
    // Each path is a pure function of (seed, index); the partition cannot
    // change any outcome, only who computes it.
    std::vector<std::thread> pool;
    std::int64_t chunk = (n + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
      std::int64_t lo = t * chunk;
      std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  ValueEstimate est;
  est.paths_used = n;
  est.mean = kern::pairwise_sum(payoffs) / static_cast<double>(n);
  if (n > 1) {
    std::vector<double> sq(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      double d = payoffs[static_cast<std::size_t>(i)] - est.mean;
      sq[static_cast<std::size_t>(i)] = d * d;
    }
    double var = kern::pairwise_sum(sq) / static_cast<double>(n - 1);
    est.std_error = std::sqrt(var / static_cast<double>(n));
  }
  std::int64_t ncapped = 0;
  for (std::uint8_t c : capped) ncapped += c;
  est.capped_fraction = static_cast<double>(ncapped) / static_cast<double>(n);
  for (long o : overrides) est.total_jump_overrides += o;
  return est;
}

}  // namespace treemem
