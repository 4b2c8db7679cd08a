#include "treemem/two_membranes.hpp"

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

TmpSpec::TmpSpec(TruncatedTree tree_, OperatorParams p1, OperatorParams p2, Source h1_,
                 Source h2_, FuncSpec f_, FuncSpec g_, QuadratureParams quad_,
                 bool run_checks)
    : tree(tree_),
      params1(p1),
      params2(p2),
      h1(std::move(h1_)),
      h2(std::move(h2_)),
      f(std::move(f_)),
      g(std::move(g_)),
      quad(quad_) {
  if (params1.m != tree.m || params2.m != tree.m)
    throw Error(Errc::InvalidConfig, "operator branching m must match the tree");
  auto fl = leaf_values(f, tree);
  auto gl = leaf_values(g, tree);
  separation = 1e300;
  for (std::size_t i = 0; i < fl.size(); ++i)
    separation = std::fmin(separation, fl[i] - gl[i]);
  if (separation < 0.0)
    throw Error(Errc::InvalidConfig, "boundary data must satisfy f >= g at every leaf");
  if (run_checks) {
    // Heuristic solvability probes; failures are flagged, not fatal. Level-only
    // sources are probed deep (O(1) per level); a slowly decaying trace with
    // rho near 1 needs ~30 levels to clear the default tolerance.
    auto probe = [](const Source& h, const OperatorParams& p) {
      if (h.is_zero()) return true;
      SolvabilityOptions so;
      so.sh_depth = 8;
      int depth = h.level_only() ? 32 : 10;
      return solvability_check(h, p, depth, so).passes;
    };
    solvability1_ok = probe(h1, params1);
    solvability2_ok = probe(h2, params2);
  }
}

std::pair<std::vector<NodeId>, CoincidenceCertificate> coincidence_set(
    const LevelField& u, const LevelField& v, const TruncatedTree& tree,
    double contact_tol) {
  std::vector<NodeId> contact;
  CoincidenceCertificate cert;
  for (int k = 0; k <= tree.depth; ++k) {
    const auto& uk = u.levels[static_cast<std::size_t>(k)];
    const auto& vk = v.levels[static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < uk.size(); ++i) {
      if (std::fabs(uk[i] - vk[i]) <= contact_tol * (1.0 + std::fabs(uk[i]))) {
        contact.push_back(NodeId{k, static_cast<std::int64_t>(i)});
        cert.max_contact_level = k;
      }
    }
  }
  cert.empty_beyond = cert.max_contact_level <= tree.depth - 2;
  return {std::move(contact), cert};
}

namespace {

// Pair residuals of the coupled system.
void system_residuals(const TmpSpec& spec, const LevelField& u, const LevelField& v,
                      double& r_u, double& r_v) {
  ObstacleProblem ou(spec.problem1(), v, ObstacleSide::below);
  ObstacleProblem ov(spec.problem2(), u, ObstacleSide::above);
  r_u = complementarity_residual(u, ou);
  r_v = complementarity_residual(v, ov);
}

void finish(TmpSolution& sol, const TmpSpec& spec, double tol, double contact_tol) {
  double slack = 1e-10 * (1.0 + field_max_abs(sol.u));
  if (field_max_signed_diff(sol.v, sol.u) > slack)
    throw Error(Errc::MonotonicityViolated, "converged membranes are not ordered");
  system_residuals(spec, sol.u, sol.v, sol.residual_u, sol.residual_v);
  if (std::fmax(sol.residual_u, sol.residual_v) > 10.0 * tol)
    throw Error(Errc::MaxIterExceeded, "system residual exceeds 10*tol at convergence");
  auto [contact, cert] = coincidence_set(sol.u, sol.v, spec.tree, contact_tol);
  sol.coincidence = std::move(contact);
  sol.certificate = cert;
  sol.certificate.applicable = spec.separation > 0.0;
  sol.separation = spec.separation;
}

}  // namespace

TmpSolution solve_alternating(const TmpSpec& spec, double tol, long max_outer) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be positive");
  auto t0 = Clock::now();
  if (spec.separation <= 0.0)
    throw Error(Errc::SeparationViolated,
                "the obstacle iteration needs strict boundary separation f > g");
  // Tight inner tolerance keeps the outer monotonicity assertions meaningful
  // at the 1e-12 slack: the inner stopping overshoot must sit below it.
  const double inner_tol = std::fmin(tol / 10.0, 1e-13);
  const long inner_iter = 1000000;

  DirichletProblem p1 = spec.problem1();
  DirichletProblem p2 = spec.problem2();

  LevelField v_prev = solve_direct(p2).first;  // v_0, subsolution with equality

  // CLAIM 2 bound: obstacle solve over the unconstrained second membrane.
  LevelField rho_bar =
      solve_below(ObstacleProblem(p1, v_prev, ObstacleSide::below), inner_tol, inner_iter)
          .first;

  TmpSolution sol;
  sol.method = "alternating";
  LevelField u_prev;
  bool have_u_prev = false;
  for (long n = 1; n <= max_outer; ++n) {
    LevelField u_n =
        solve_below(ObstacleProblem(p1, v_prev, ObstacleSide::below), inner_tol, inner_iter)
            .first;
    LevelField v_n =
        solve_above(ObstacleProblem(p2, u_n, ObstacleSide::above), inner_tol, inner_iter)
            .first;

    double scale = 1.0 + field_max_abs(u_n);
    // CLAIM 1: both sequences increase.
    if (have_u_prev && field_max_signed_diff(u_prev, u_n) > 1e-12 * scale)
      throw Error(Errc::MonotonicityViolated, "u_n decreased across an outer iteration");
    if (field_max_signed_diff(v_prev, v_n) > 1e-12 * scale)
      throw Error(Errc::MonotonicityViolated, "v_n decreased across an outer iteration");
    // CLAIM 2: u_n stays below the explicit bound.
    if (field_max_signed_diff(u_n, rho_bar) > 1e-10 * scale)
      throw Error(Errc::MonotonicityViolated, "u_n exceeded its boundedness certificate");

    double du = have_u_prev ? field_max_abs_diff(u_n, u_prev)
                            : std::numeric_limits<double>::infinity();
    double dv = field_max_abs_diff(v_n, v_prev);
    sol.iteration_history.emplace_back(du, dv);
    u_prev = std::move(u_n);
    have_u_prev = true;
    v_prev = std::move(v_n);
    sol.iterations = n;
    if (du < tol && dv < tol) {
      sol.u = std::move(u_prev);
      sol.v = std::move(v_prev);
      finish(sol, spec, tol, 1e-9);
      sol.elapsed_seconds = seconds_since(t0);
      return sol;
    }
  }
  throw IterationFailure(Errc::MaxIterExceeded, "alternating iteration did not converge",
                         max_outer, 0.0);
}

TmpSolution solve_coupled(const TmpSpec& spec, double tol, long max_iter) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidConfig, "tol must be positive");
  auto t0 = Clock::now();
  DirichletProblem p1 = spec.problem1();
  DirichletProblem p2 = spec.problem2();
  auto h1 = make_h_levels(spec.h1, spec.tree);
  auto h2 = make_h_levels(spec.h2, spec.tree);

  // v starts at the unconstrained solution of its own equation (the tightest
  // subsolution); u starts at a supersolution dominating it. Both solvers then
  // home in on the same extremal pair, which keeps the two routes comparable.
  LevelField v = solve_direct(p2).first;
  LevelField u = dominating_supersolution(p1, v).first;

  TmpSolution sol;
  sol.method = "coupled";
  LevelField u_next(spec.tree), v_next(spec.tree);
  for (long it = 1; it <= max_iter; ++it) {
    jacobi_step(u_next, u, h1, spec.params1, spec.tree);
    for (int k = 0; k < spec.tree.depth; ++k) {
      auto& nk = u_next.levels[static_cast<std::size_t>(k)];
      kern::ops().max_with(nk.data(), v.levels[static_cast<std::size_t>(k)].data(), nk.size());
    }
    jacobi_step(v_next, v, h2, spec.params2, spec.tree);
    for (int k = 0; k < spec.tree.depth; ++k) {
      auto& nk = v_next.levels[static_cast<std::size_t>(k)];
      kern::ops().min_with(nk.data(), u_next.levels[static_cast<std::size_t>(k)].data(),
                           nk.size());
    }

    double scale = 1.0 + field_max_abs(u);
    if (field_max_signed_diff(u_next, u) > 1e-12 * scale)
      throw Error(Errc::MonotonicityViolated, "coupled sweep increased u");
    if (field_max_signed_diff(v, v_next) > 1e-12 * scale)
      throw Error(Errc::MonotonicityViolated, "coupled sweep decreased v");

    double du = field_max_abs_diff(u_next, u);
    double dv = field_max_abs_diff(v_next, v);
    u.levels.swap(u_next.levels);
    v.levels.swap(v_next.levels);
    sol.iterations = it;
    if (du < tol && dv < tol) {
      sol.iteration_history.emplace_back(du, dv);
      sol.u = std::move(u);
      sol.v = std::move(v);
      finish(sol, spec, tol, 1e-9);
      sol.elapsed_seconds = seconds_since(t0);
      return sol;
    }
  }
  throw IterationFailure(Errc::MaxIterExceeded, "coupled iteration did not converge",
                         max_iter, 0.0);
}

}  // namespace treemem
