#include "treemem/report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "treemem/errors.hpp"
#include "treemem/game.hpp"
#include "treemem/kernels.hpp"
#include "treemem/two_membranes.hpp"

namespace treemem {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void bad(const std::string& msg) { throw Error(Errc::InvalidConfig, msg); }

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) bad(std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) bad(std::string("missing string field '") + key + "'");
  return j[key].get<std::string>();
}

// h / obstacle entries are either an expression string or {"csv": path}.
Source parse_source_field(const json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) bad(std::string("missing source field '") + key + "'");
    return Source::zero();
  }
  const json& v = j[key];
  if (v.is_string()) return Source(parse(v.get<std::string>(), FuncKind::source));
  if (v.is_object() && v.contains("csv") && v["csv"].is_string())
    return Source::from_table_csv(v["csv"].get<std::string>());
  bad(std::string("field '") + key + "' must be an expression string or {\"csv\": path}");
}

struct ModeDefaults {
  bool needs_beta2 = false, needs_g = false, needs_h2 = false, needs_f = true;
};

}  // namespace

json normalize_config(const json& raw) {
  if (!raw.is_object()) bad("config must be a JSON object");
  json c = raw;
  std::string mode = require_string(c, "mode");
  if (mode != "single" && mode != "obstacle" && mode != "tmp" && mode != "game" &&
      mode != "check")
    bad("mode must be one of single|obstacle|tmp|game|check");

  int m = static_cast<int>(require_number(c, "m"));
  if (m < 2) bad("m must be >= 2");
  int depth = 1;
  if (mode != "check") {
    depth = static_cast<int>(require_number(c, "depth"));
    if (depth < 1) bad("depth must be >= 1");
  } else if (c.contains("depth")) {
    depth = c["depth"].get<int>();
  }
  double beta1 = require_number(c, "beta1");
  if (!(beta1 >= 0.0) || beta1 >= 0.5) bad("beta1 must lie in [0, 0.5)");

  bool pair_mode = mode == "tmp" || mode == "game";
  if (pair_mode) {
    double beta2 = require_number(c, "beta2");
    if (!(beta2 >= 0.0) || beta2 >= 0.5) bad("beta2 must lie in [0, 0.5)");
  }

  // defaults
  if (!c.contains("tol")) c["tol"] = 1e-10;
  if (!(c["tol"].get<double>() > 0.0)) bad("tol must be positive");
  if (!c.contains("max_iter")) c["max_iter"] = 200000;
  if (!c.contains("sh_depth")) c["sh_depth"] = 12;
  if (c["sh_depth"].get<int>() < 1) bad("sh_depth must be >= 1");
  if (!c.contains("quad_subdivisions")) c["quad_subdivisions"] = 8;
  if (c["quad_subdivisions"].get<int>() < 1) bad("quad_subdivisions must be >= 1");
  if (!c.contains("contact_tol")) c["contact_tol"] = 1e-9;

  if (mode == "single") {
    if (!c.contains("method")) c["method"] = "direct";
    std::string method = c["method"].get<std::string>();
    if (method != "direct" && method != "representation" && method != "value_iteration" &&
        method != "all")
      bad("single-mode method must be direct|representation|value_iteration|all");
  }
  if (mode == "tmp" || mode == "game") {
    if (!c.contains("method")) c["method"] = mode == "tmp" ? "both" : "coupled";
    std::string method = c["method"].get<std::string>();
    if (mode == "tmp" && method != "alternating" && method != "coupled" && method != "both")
      bad("tmp-mode method must be alternating|coupled|both");
  }
  if (mode == "obstacle") {
    std::string side = require_string(c, "side");
    if (side != "below" && side != "above") bad("side must be below|above");
    if (!c.contains("obstacle")) bad("obstacle mode needs an 'obstacle' field");
  }
  if (mode == "check") {
    if (!c.contains("h1")) bad("check mode needs the source field 'h1'");
    json chk = c.contains("check") ? c["check"] : json::object();
    if (!chk.contains("probe_depth")) chk["probe_depth"] = 12;
    if (chk["probe_depth"].get<int>() < 3) bad("check.probe_depth must be >= 3");
    if (!chk.contains("tolerance")) chk["tolerance"] = 1e-3;
    c["check"] = chk;
  }
  if (mode == "game") {
    if (!c.contains("game")) bad("game mode needs a 'game' object");
    json g = c["game"];
    if (!g.contains("start_level")) g["start_level"] = 0;
    if (!g.contains("start_index")) g["start_index"] = 0;
    if (!g.contains("start_board")) g["start_board"] = 1;
    int board = g["start_board"].get<int>();
    if (board != 1 && board != 2) bad("game.start_board must be 1 or 2");
    if (!g.contains("paths")) g["paths"] = 100000;
    if (g["paths"].get<std::int64_t>() < 1) bad("game.paths must be >= 1");
    if (!g.contains("seed")) g["seed"] = 1;
    if (!g.contains("max_steps")) g["max_steps"] = 1000000;
    c["game"] = g;
  }

  // boundary data
  ModeDefaults md;
  if (mode == "tmp" || mode == "game") md = {true, true, true, true};
  if (mode == "check") md.needs_f = false;
  if (mode == "obstacle" && c["side"] == "above") {
    md.needs_f = false;
    md.needs_g = true;
  }
  if (md.needs_f) parse(require_string(c, "f"), FuncKind::boundary);
  if (md.needs_g) parse(require_string(c, "g"), FuncKind::boundary);
  parse_source_field(c, "h1", false);
  if (md.needs_h2) parse_source_field(c, "h2", false);
  return c;
}

namespace {

// --- output writing (temp file + rename, '%.17g' decimals, '\n' newlines) ---

void atomic_write(const fs::path& target, const std::string& contents) {
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot open " + tmp.string());
    out << contents;
    if (!out) throw Error(Errc::IoError, "short write to " + tmp.string());
  }
  fs::rename(tmp, target);
}

struct FieldsData {
  const TruncatedTree* tree = nullptr;
  const LevelField* u = nullptr;
  const LevelField* v = nullptr;           // null in single/obstacle mode
  const LevelField* residual_u = nullptr;  // per-node residual (equation or complementarity)
  const LevelField* residual_v = nullptr;
  std::vector<std::vector<std::uint8_t>> contact;  // empty -> all zero
};

std::string render_fields_csv(const FieldsData& d) {
  std::ostringstream os;
  os << "level,index,psi,u,v,residual_u,residual_v,contact\n";
  for (int k = 0; k <= d.tree->depth; ++k) {
    std::int64_t n = d.tree->level_size(k);
    for (std::int64_t i = 0; i < n; ++i) {
      NodeId node{k, i};
      os << k << ',' << i << ',' << format_g17(psi(node, d.tree->m)) << ','
         << format_g17(d.u->at(node)) << ',';
      if (d.v) os << format_g17(d.v->at(node));
      os << ',';
      if (d.residual_u) os << format_g17(d.residual_u->at(node));
      os << ',';
      if (d.residual_v) os << format_g17(d.residual_v->at(node));
      os << ',';
      int c = 0;
      if (!d.contact.empty() && !d.contact[static_cast<std::size_t>(k)].empty())
        c = d.contact[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      os << c << '\n';
    }
  }
  return os.str();
}

// Plain equation residual L(u) - h per interior node; u - f(psi) at leaves.
LevelField residual_field(const DirichletProblem& prob, const LevelField& u) {
  LevelField r(prob.tree);
  auto h_levels = make_h_levels(prob.h, prob.tree);
  LevelField t(prob.tree);
  jacobi_step(t, u, h_levels, prob.params, prob.tree);
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::size_t i = 0; i < r.levels[static_cast<std::size_t>(k)].size(); ++i)
      r.levels[static_cast<std::size_t>(k)][i] =
          u.levels[static_cast<std::size_t>(k)][i] - t.levels[static_cast<std::size_t>(k)][i];
  auto leaves = leaf_values(prob.f, prob.tree);
  for (std::size_t i = 0; i < leaves.size(); ++i)
    r.levels.back()[i] = u.levels.back()[i] - leaves[i];
  return r;
}

// Per-node complementarity residual of one membrane against its obstacle.
LevelField complementarity_field(const DirichletProblem& prob, const LevelField& u,
                                 const LevelField& obstacle, bool below) {
  LevelField r(prob.tree);
  auto h_levels = make_h_levels(prob.h, prob.tree);
  LevelField t(prob.tree);
  jacobi_step(t, u, h_levels, prob.params, prob.tree);
  for (int k = 0; k < prob.tree.depth; ++k)
    for (std::size_t i = 0; i < r.levels[static_cast<std::size_t>(k)].size(); ++i) {
      double eq = t.levels[static_cast<std::size_t>(k)][i] -
                  u.levels[static_cast<std::size_t>(k)][i];
      double ob = obstacle.levels[static_cast<std::size_t>(k)][i] -
                  u.levels[static_cast<std::size_t>(k)][i];
      r.levels[static_cast<std::size_t>(k)][i] = below ? std::fmax(eq, ob) : std::fmin(eq, ob);
    }
  return r;
}

std::vector<std::vector<std::uint8_t>> contact_mask(const TruncatedTree& tree,
                                                    const std::vector<NodeId>& nodes) {
  std::vector<std::vector<std::uint8_t>> mask(static_cast<std::size_t>(tree.depth) + 1);
  for (int k = 0; k <= tree.depth; ++k)
    mask[static_cast<std::size_t>(k)].assign(static_cast<std::size_t>(tree.level_size(k)), 0);
  for (const NodeId& n : nodes)
    mask[static_cast<std::size_t>(n.level)][static_cast<std::size_t>(n.index)] = 1;
  return mask;
}

json solve_report_json(const SolveReport& r) {
  json j;
  j["method"] = r.method;
  j["iterations"] = r.iterations;
  j["final_residual"] = r.final_residual;
  if (r.method == "representation") {
    j["tail_bound"] = r.tail_bound;
    j["leaf_mismatch"] = r.leaf_mismatch;
    j["sh_tail"] = r.sh_tail;
    j["sh_min_depth"] = r.sh_min_depth;
    j["sh_tail_estimated"] = r.sh_tail_estimated;
  }
  return j;
}

struct RunContext {
  json config;
  fs::path out;
  json report;
  std::vector<std::string> warnings;
  Clock::time_point t0 = Clock::now();

  void warn(const std::string& w) { warnings.push_back(w); }

  void finalize(int exit_code) {
    report["config"] = config;
    report["library_version"] = kLibraryVersion;
    report["simd"] = kern::active_variant();
    report["warnings"] = warnings;
    report["exit_code"] = exit_code;
    json timing;
    timing["wall_seconds"] = std::chrono::duration<double>(Clock::now() - t0).count();
    report["timing"] = timing;
    atomic_write(out / "report.json", report.dump(2) + "\n");
  }
};

Source get_source(const json& c, const char* key) { return parse_source_field(c, key, false); }

TruncatedTree tree_of(const json& c) {
  return TruncatedTree(c["m"].get<int>(), c["depth"].get<int>());
}

void warn_table_depth(RunContext& ctx, const Source& h, const char* name, int depth) {
  if (auto tmax = h.table_max_level(); tmax && *tmax < depth - 1)
    ctx.warn(std::string(name) + ": per-node table ends at level " + std::to_string(*tmax) +
             "; deeper levels are treated as 0");
}

int run_single(RunContext& ctx) {
  const json& c = ctx.config;
  TruncatedTree tree = tree_of(c);
  Source h = get_source(c, "h1");
  warn_table_depth(ctx, h, "h1", tree.depth);
  QuadratureParams quad{c["quad_subdivisions"].get<int>()};
  DirichletProblem prob(tree, OperatorParams(c["beta1"].get<double>(), tree.m), h,
                        parse(c["f"].get<std::string>(), FuncKind::boundary), quad);

  std::string method = c["method"].get<std::string>();
  std::optional<std::pair<LevelField, SolveReport>> direct, rep, vi;
  if (method == "direct" || method == "all") direct = solve_direct(prob);
  if (method == "representation" || method == "all") {
    if (prob.params.beta == 0.0 && method == "all")
      ctx.warn("representation route skipped: beta = 0");
    else
      rep = solve_representation(prob, c["sh_depth"].get<int>());
  }
  if (method == "value_iteration" || method == "all")
    vi = solve_value_iteration(prob, c["tol"].get<double>(), c["max_iter"].get<long>());

  const auto& primary = direct ? *direct : (rep ? *rep : *vi);
  json methods = json::array();
  for (const auto* s : {&direct, &rep, &vi})
    if (s->has_value()) methods.push_back(solve_report_json((*s)->second));
  ctx.report["solves"] = methods;
  ctx.report["method"] = primary.second.method;
  ctx.report["iterations"] = primary.second.iterations;
  json residuals;
  residuals["equation"] = primary.second.final_residual;
  if (method == "all") {
    json gaps;
    if (direct && rep) gaps["direct_vs_representation"] = field_max_abs_diff(direct->first, rep->first);
    if (direct && vi) gaps["direct_vs_value_iteration"] = field_max_abs_diff(direct->first, vi->first);
    if (rep && vi) gaps["representation_vs_value_iteration"] = field_max_abs_diff(rep->first, vi->first);
    ctx.report["cross_gaps"] = gaps;
  }
  ctx.report["residuals"] = residuals;
  if (rep) ctx.report["tail_bounds"] = {{"representation", rep->second.tail_bound},
                                        {"leaf_mismatch", rep->second.leaf_mismatch},
                                        {"sh_tail", rep->second.sh_tail}};

  LevelField res = residual_field(prob, primary.first);
  FieldsData fd;
  fd.tree = &prob.tree;
  fd.u = &primary.first;
  fd.residual_u = &res;
  atomic_write(ctx.out / "fields.csv", render_fields_csv(fd));
  return 0;
}

int run_obstacle(RunContext& ctx) {
  const json& c = ctx.config;
  TruncatedTree tree = tree_of(c);
  bool below = c["side"].get<std::string>() == "below";
  Source h = get_source(c, "h1");
  warn_table_depth(ctx, h, "h1", tree.depth);
  QuadratureParams quad{c["quad_subdivisions"].get<int>()};
  FuncSpec datum = parse(c[below ? "f" : "g"].get<std::string>(), FuncKind::boundary);
  DirichletProblem base(tree, OperatorParams(c["beta1"].get<double>(), tree.m), h, datum, quad);

  Source obs_src = parse_source_field(c, "obstacle", true);
  LevelField obstacle(tree);
  for (int k = 0; k <= tree.depth; ++k)
    obs_src.fill_level(k, tree.m, obstacle.levels[static_cast<std::size_t>(k)].data(),
                       tree.level_size(k));

  ObstacleProblem op(base, obstacle, below ? ObstacleSide::below : ObstacleSide::above);
  auto [u, rep] = below ? solve_below(op, c["tol"].get<double>(), c["max_iter"].get<long>())
                        : solve_above(op, c["tol"].get<double>(), c["max_iter"].get<long>());

  ctx.report["method"] = rep.method;
  ctx.report["iterations"] = rep.iterations;
  ctx.report["residuals"] = {{"complementarity", rep.complementarity}};
  ctx.report["init_lift"] = rep.init_lift;

  double contact_tol = c["contact_tol"].get<double>();
  std::vector<NodeId> contact;
  for (int k = 0; k <= tree.depth; ++k)
    for (std::int64_t i = 0; i < tree.level_size(k); ++i) {
      NodeId n{k, i};
      if (std::fabs(u.at(n) - obstacle.at(n)) <= contact_tol * (1.0 + std::fabs(u.at(n))))
        contact.push_back(n);
    }
  ctx.report["contact_count"] = contact.size();

  LevelField res = complementarity_field(base, u, obstacle, below);
  FieldsData fd;
  fd.tree = &tree;
  fd.u = &u;
  fd.residual_u = &res;
  fd.contact = contact_mask(tree, contact);
  atomic_write(ctx.out / "fields.csv", render_fields_csv(fd));
  return 0;
}

TmpSpec tmp_spec_of(RunContext& ctx, json* flags = nullptr) {
  const json& c = ctx.config;
  TruncatedTree tree = tree_of(c);
  Source h1 = get_source(c, "h1");
  Source h2 = get_source(c, "h2");
  warn_table_depth(ctx, h1, "h1", tree.depth);
  warn_table_depth(ctx, h2, "h2", tree.depth);
  QuadratureParams quad{c["quad_subdivisions"].get<int>()};
  TmpSpec spec(tree, OperatorParams(c["beta1"].get<double>(), tree.m),
               OperatorParams(c["beta2"].get<double>(), tree.m), h1, h2,
               parse(c["f"].get<std::string>(), FuncKind::boundary),
               parse(c["g"].get<std::string>(), FuncKind::boundary), quad);
  if (!spec.solvability1_ok)
    ctx.warn("h1 failed the heuristic solvability probe; results may not attain the boundary data");
  if (!spec.solvability2_ok)
    ctx.warn("h2 failed the heuristic solvability probe; results may not attain the boundary data");
  if (spec.separation == 0.0)
    ctx.warn("separation = 0: f and g touch at a leaf; the finiteness claim for the "
             "coincidence set is not applicable");
  if (flags) {
    (*flags)["solvability_h1_ok"] = spec.solvability1_ok;
    (*flags)["solvability_h2_ok"] = spec.solvability2_ok;
    (*flags)["separation"] = spec.separation;
  }
  return spec;
}

json certificate_json(const TmpSolution& sol) {
  json j;
  j["max_contact_level"] = sol.certificate.max_contact_level;
  j["empty_beyond"] = sol.certificate.empty_beyond;
  j["applicable"] = sol.certificate.applicable;
  j["contact_count"] = sol.coincidence.size();
  j["separation"] = sol.separation;
  return j;
}

void write_tmp_outputs(RunContext& ctx, const TmpSpec& spec, const TmpSolution& sol) {
  LevelField ru = complementarity_field(spec.problem1(), sol.u, sol.v, true);
  LevelField rv = complementarity_field(spec.problem2(), sol.v, sol.u, false);
  FieldsData fd;
  fd.tree = &spec.tree;
  fd.u = &sol.u;
  fd.v = &sol.v;
  fd.residual_u = &ru;
  fd.residual_v = &rv;
  fd.contact = contact_mask(spec.tree, sol.coincidence);
  atomic_write(ctx.out / "fields.csv", render_fields_csv(fd));

  std::ostringstream cs;
  cs << "level,index,psi,u,v\n";
  for (const NodeId& n : sol.coincidence)
    cs << n.level << ',' << n.index << ',' << format_g17(psi(n, spec.tree.m)) << ','
       << format_g17(sol.u.at(n)) << ',' << format_g17(sol.v.at(n)) << '\n';
  atomic_write(ctx.out / "coincidence.csv", cs.str());
}

json tmp_solution_json(const TmpSolution& sol) {
  json j;
  j["method"] = sol.method;
  j["iterations"] = sol.iterations;
  j["residual_u"] = sol.residual_u;
  j["residual_v"] = sol.residual_v;
  json hist = json::array();
  for (auto [du, dv] : sol.iteration_history) {
    double du_out = std::isfinite(du) ? du : -1.0;
    hist.push_back({{"du", du_out}, {"dv", dv}});
  }
  j["iteration_history"] = hist;
  return j;
}

int run_tmp(RunContext& ctx) {
  const json& c = ctx.config;
  json flags;
  TmpSpec spec = tmp_spec_of(ctx, &flags);
  ctx.report["spec_flags"] = flags;
  double tol = c["tol"].get<double>();
  long max_iter = c["max_iter"].get<long>();
  std::string method = c["method"].get<std::string>();

  std::optional<TmpSolution> alt, cpl;
  if (method == "alternating" || method == "both")
    alt = solve_alternating(spec, tol, 64);
  if (method == "coupled" || method == "both") cpl = solve_coupled(spec, tol, max_iter);

  const TmpSolution& primary = alt ? *alt : *cpl;
  ctx.report["method"] = primary.method;
  ctx.report["iterations"] = primary.iterations;
  ctx.report["residuals"] = {{"complementarity_u", primary.residual_u},
                             {"complementarity_v", primary.residual_v}};
  json solves = json::array();
  if (alt) solves.push_back(tmp_solution_json(*alt));
  if (cpl) solves.push_back(tmp_solution_json(*cpl));
  ctx.report["solves"] = solves;
  if (alt && cpl) {
    ctx.report["cross_gaps"] = {
        {"u", field_max_abs_diff(alt->u, cpl->u)},
        {"v", field_max_abs_diff(alt->v, cpl->v)},
    };
  }
  ctx.report["coincidence"] = certificate_json(primary);
  write_tmp_outputs(ctx, spec, primary);
  return 0;
}

int run_game(RunContext& ctx) {
  const json& c = ctx.config;
  json flags;
  TmpSpec spec = tmp_spec_of(ctx, &flags);
  ctx.report["spec_flags"] = flags;
  double tol = c["tol"].get<double>();
  TmpSolution sol = solve_coupled(spec, tol, c["max_iter"].get<long>());

  const json& g = c["game"];
  NodeId start{g["start_level"].get<int>(), g["start_index"].get<std::int64_t>()};
  GameConfig gc(spec, start, g["start_board"].get<int>(), g["paths"].get<std::int64_t>(),
                g["seed"].get<std::uint64_t>(), g["max_steps"].get<long>());
  StrategyPair strat = greedy_strategies(sol.u, sol.v, spec);
  ValueEstimate est = estimate_value(gc, strat);
  if (est.capped_fraction > 0.0)
    ctx.warn("some paths hit the step cap; their payoffs are truncated");

  double solved = gc.start_board == 1 ? sol.u.at(start) : sol.v.at(start);
  json gj;
  gj["mean"] = est.mean;
  gj["std_error"] = est.std_error;
  gj["paths_used"] = est.paths_used;
  gj["capped_fraction"] = est.capped_fraction;
  gj["jump_overrides"] = est.total_jump_overrides;
  gj["solved_value_at_start"] = solved;
  gj["abs_gap"] = std::fabs(est.mean - solved);
  gj["seed"] = g["seed"];
  ctx.report["game"] = gj;
  ctx.report["seed"] = g["seed"];
  ctx.report["method"] = "coupled+monte_carlo";
  ctx.report["iterations"] = sol.iterations;
  ctx.report["residuals"] = {{"complementarity_u", sol.residual_u},
                             {"complementarity_v", sol.residual_v}};
  ctx.report["coincidence"] = certificate_json(sol);
  write_tmp_outputs(ctx, spec, sol);
  return 0;
}

int run_check(RunContext& ctx) {
  const json& c = ctx.config;
  Source h = get_source(c, "h1");
  OperatorParams p(c["beta1"].get<double>(), c["m"].get<int>());
  SolvabilityOptions opts;
  opts.tolerance = c["check"]["tolerance"].get<double>();
  opts.sh_depth = c["sh_depth"].get<int>();
  SolvabilityReport rep = solvability_check(h, p, c["check"]["probe_depth"].get<int>(), opts);

  json sj;
  sj["passes"] = rep.passes;
  sj["trace"] = rep.trace;
  sj["decreasing_from"] = rep.decreasing_from;
  sj["tolerance"] = rep.tolerance;
  sj["tail_unbounded"] = rep.tail_unbounded;
  sj["tail_estimated"] = rep.tail_estimated;
  sj["note"] = "numerical evidence for the boundary-limit condition, not a proof";
  ctx.report["solvability"] = sj;
  ctx.report["method"] = "check";
  return 0;
}

}  // namespace

int run_config(const json& raw, const std::string& out_dir) {
  RunContext ctx;
  ctx.out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Error(Errc::IoError, "cannot create output directory " + ctx.out.string());

  try {
    ctx.config = normalize_config(raw);
    if (ctx.config.contains("out_dir") && out_dir.empty())
      ctx.out = fs::path(ctx.config["out_dir"].get<std::string>());
    fs::create_directories(ctx.out, ec);
    std::string mode = ctx.config["mode"].get<std::string>();
    int rc = 0;
    if (mode == "single") rc = run_single(ctx);
    else if (mode == "obstacle") rc = run_obstacle(ctx);
    else if (mode == "tmp") rc = run_tmp(ctx);
    else if (mode == "game") rc = run_game(ctx);
    else rc = run_check(ctx);
    ctx.finalize(rc);
    return rc;
  } catch (const Error& e) {
    ctx.report["error"] = {{"code", errc_name(e.code())}, {"message", e.what()}};
    int rc = e.exit_code();
    ctx.finalize(rc);
    return rc;
  } catch (const json::exception& e) {
    ctx.report["error"] = {{"code", errc_name(Errc::InvalidConfig)},
                           {"message", std::string("malformed config field: ") + e.what()}};
    ctx.finalize(2);
    return 2;
  }
}

int run(const std::string& config_path, const std::string& out_dir_override) {
  std::ifstream in(config_path);
  if (!in) throw Error(Errc::IoError, "cannot open config: " + config_path);
  json raw;
  try {
    in >> raw;
  } catch (const json::parse_error& e) {
    throw Error(Errc::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return run_config(raw, out_dir_override);
}

}  // namespace treemem
