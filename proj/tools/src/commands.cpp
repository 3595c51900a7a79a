#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "config.hpp"
#include "nehari/errors.hpp"
#include "nehari/extremal.hpp"
#include "nehari/fibering.hpp"
#include "nehari/nehari_solver.hpp"

namespace nehari::cli {

namespace {

namespace fs = std::filesystem;

std::string g12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string nodal_csv(const Field& u) {
  std::ostringstream os;
  write_nodal_csv(os, u.values());
  return os.str();
}

// Collects every output first so that nothing is written when one file would
// be overwritten without --force.
class Outputs {
 public:
  Outputs(fs::path dir, bool force) : dir_(std::move(dir)), force_(force) {}

  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }

  void commit(std::ostream& out) const {
    if (!force_) {
      std::string clash;
      for (const auto& [name, content] : files_) {
        if (fs::exists(dir_ / name)) clash += (clash.empty() ? "" : ", ") + (dir_ / name).string();
      }
      if (!clash.empty()) throw ConfigError("refusing to overwrite " + clash + " (use --force)");
    }
    fs::create_directories(dir_);
    for (const auto& [name, content] : files_) {
      std::ofstream f(dir_ / name, std::ios::binary | std::ios::trunc);
      if (!f) throw ConfigError("cannot write " + (dir_ / name).string());
      f << content;
      out << "wrote " << (dir_ / name).string() << '\n';
    }
  }

 private:
  fs::path dir_;
  bool force_;
  std::map<std::string, std::string> files_;
};

ExtremalOptions extremal_options(const SolverConfig& s) {
  ExtremalOptions o;
  o.starts = s.starts;
  o.max_iters = s.search_iters;
  o.step = s.step;
  o.seed = s.seed;
  return o;
}

SolveOptions solve_options(const SolverConfig& s, bool force) {
  SolveOptions o;
  o.tol = s.tol;
  o.max_iters = s.max_iters;
  o.force = force;
  return o;
}

struct Extremals {
  double lambda_star = 0.0;
  double lambda_lower = 0.0;
};

// Configured values win; missing ones are estimated.
Extremals resolve_extremals(const RunConfig& cfg, const Problem& prob, std::ostream& out) {
  Extremals e;
  const auto& s = cfg.solver;
  const auto opts = extremal_options(s);
  if (s.lambda_star_hat) {
    e.lambda_star = *s.lambda_star_hat;
  } else {
    e.lambda_star = estimate_lambda_star(prob, opts).value;
    out << "estimated lambda_star = " << g12(e.lambda_star) << '\n';
  }
  if (s.lambda_lower_hat) {
    e.lambda_lower = *s.lambda_lower_hat;
  } else {
    e.lambda_lower = estimate_lambda_lower(prob, opts).value;
    out << "estimated lambda_lower = " << g12(e.lambda_lower) << '\n';
  }
  return e;
}

double resolve_lambda_star(const RunConfig& cfg, const Problem& prob, std::ostream& out) {
  if (cfg.solver.lambda_star_hat) return *cfg.solver.lambda_star_hat;
  const double v = estimate_lambda_star(prob, extremal_options(cfg.solver)).value;
  out << "estimated lambda_star = " << g12(v) << '\n';
  return v;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  const auto model = make_model(cfg.problem);
  ValidationInput in;
  in.q = cfg.problem.q;
  in.p = cfg.problem.p;
  in.dim = cfg.problem.dim;
  in.weight_floor = cfg.problem.weight;
  const auto report = validate_hypotheses(model, in);
  out << "hypothesis,verdict,witness\n";
  for (const auto& e : report.entries) {
    out << to_string(e.id) << ',' << to_string(e.verdict) << ',' << e.witness << '\n';
  }
  return report.any_fail() ? kExitValidation : kExitOk;
}

// Scales u so that A(su) = P(su) and returns the constant weight that makes Q = A as well.
double balance(const Problem& prob, Field& u) {
  auto f = [&](double s) {
    const auto b = breakdown(prob, u.scaled(s));
    return std::log(b.A) - std::log(b.P);
  };
  double lo = 1.0;
  double hi = 1.0;
  for (int i = 0; i < 200 && !(f(lo) > 0.0); ++i) lo /= 2.0;
  for (int i = 0; i < 200 && !(f(hi) < 0.0); ++i) hi *= 2.0;
  if (!(f(lo) > 0.0) || !(f(hi) < 0.0)) throw SearchFailure("balanced normalisation: A(su) = P(su) has no root");
  for (int i = 0; i < 200 && hi / lo - 1.0 > 1e-15; ++i) {
    const double mid = std::sqrt(lo * hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  u = u.scaled(std::sqrt(lo * hi));
  const auto b = breakdown(prob, u);
  return b.A / b.Q;
}

int cmd_ray(const RunConfig& cfg, Outputs& files, std::ostream& out) {
  const double lam = cfg.ray.lambda.value_or(0.0);
  ProblemConfig pc = cfg.problem;
  Problem prob = make_problem(pc, lam);
  Field u = direction_preset(prob.mesh(), cfg.ray.direction);
  if (cfg.ray.normalize == "unit") {
    u = u.scaled(1.0 / u.nodal_norm());
  } else if (cfg.ray.normalize == "balanced") {
    pc.weight *= balance(prob, u);
    prob = make_problem(pc, lam);
    out << "balanced: weight = " << g12(pc.weight) << '\n';
  }
  const Ray ray = Ray::through(prob, u);
  const double tn = find_tn(ray);
  const double te = find_te(ray);
  std::vector<double> ts;
  const int n = cfg.ray.points;
  for (int i = 0; i < n; ++i) {
    ts.push_back(cfg.ray.t_min * std::pow(cfg.ray.t_max / cfg.ray.t_min, static_cast<double>(i) / (n - 1)));
  }
  ts.push_back(tn);
  ts.push_back(te);
  out << "t_n = " << g12(tn) << "  Lambda_n = " << g12(ray.rn(tn)) << '\n';
  out << "t_e = " << g12(te) << "  Lambda_e = " << g12(ray.re(te)) << '\n';
  if (cfg.ray.lambda && lam > 0.0) {
    const auto roots = nehari_roots(ray, lam);
    out << "roots at lambda = " << g12(lam) << ": " << to_string(roots.kind);
    if (roots.kind != RootKind::no_root) {
      ts.push_back(roots.t_plus);
      ts.push_back(roots.t_minus);
      out << "  t+ = " << g12(roots.t_plus) << "  t- = " << g12(roots.t_minus);
    }
    out << '\n';
  }
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  const auto rows = ray_trace(ray, lam, ts);
  std::ostringstream csv;
  write_ray_csv(csv, rows);
  files.add("ray.csv", csv.str());
  return kExitOk;
}

int cmd_estimate(const RunConfig& cfg, Outputs& files, std::ostream& out) {
  const Problem prob = make_problem(cfg.problem, 0.0);
  const auto opts = extremal_options(cfg.solver);
  const auto n = estimate_lambda_star(prob, opts);
  const auto e = estimate_lambda_lower(prob, opts);
  std::ostringstream csv;
  csv << "quantity,value,starts,iters,seed\n";
  csv << "lambda_star," << g12(n.value) << ',' << n.starts_used << ',' << n.iterations << ',' << opts.seed << '\n';
  csv << "lambda_lower," << g12(e.value) << ',' << e.starts_used << ',' << e.iterations << ',' << opts.seed << '\n';
  files.add("lambda_star.csv", csv.str());
  files.add("minimizer_n.csv", nodal_csv(n.minimizer));
  files.add("minimizer_e.csv", nodal_csv(e.minimizer));
  out << "lambda_star = " << g12(n.value) << "  lambda_lower = " << g12(e.value) << '\n';
  if (!(e.value < n.value)) out << "warning: lambda_lower estimate is not below lambda_star\n";
  return kExitOk;
}

std::string report_line(const char* name, const SolveReport& r) {
  std::ostringstream os;
  os << name << ": branch=" << to_string(r.branch) << " lambda=" << g12(r.lambda) << " J=" << g12(r.J_value)
     << " residual=" << g12(r.residual) << " second_diag=" << g12(r.second_diag) << " norm=" << g12(r.norm)
     << " iterations=" << r.iterations << " status=" << to_string(r.status);
  return os.str();
}

int cmd_solve(const RunConfig& cfg, bool force, Outputs& files, std::ostream& out) {
  const auto& s = cfg.solver;
  if (!s.lambda && !s.lambda_fraction) throw ConfigError("solve needs solver.lambda or solver.lambda_fraction");
  Problem base = make_problem(cfg.problem, 0.0);
  auto opts = solve_options(s, force);
  std::optional<double> lstar;
  if (s.lambda_fraction || !force) lstar = resolve_lambda_star(cfg, base, out);
  const double lam = s.lambda ? *s.lambda : *s.lambda_fraction * *lstar;
  opts.lambda_star_hat = lstar;
  const Problem prob = base.with_lambda(lam);
  const Field init = bump_field(prob.mesh());
  const auto plus = solve_plus(prob, init, opts);
  const auto minus = solve_minus(prob, init, opts);
  out << report_line("plus", plus) << '\n' << report_line("minus", minus) << '\n';
  files.add("solution_plus.csv", nodal_csv(plus.u));
  files.add("solution_minus.csv", nodal_csv(minus.u));
  const bool ok = plus.status == SolveStatus::converged && minus.status == SolveStatus::converged;
  return ok ? kExitOk : kExitSolver;
}

int cmd_continue(const RunConfig& cfg, bool force, Outputs& files, std::ostream& out) {
  const Problem base = make_problem(cfg.problem, 0.0);
  const double lstar = resolve_lambda_star(cfg, base, out);
  const auto opts = solve_options(cfg.solver, force);
  const auto res = continuation_to_lambda_star(base, lstar, cfg.solver.k_max, bump_field(base.mesh()), opts);
  std::ostringstream csv;
  csv << "stage,lambda,J,norm,residual,iterations,branch,step_change\n";
  for (std::size_t k = 0; k < res.steps.size(); ++k) {
    const auto& st = res.steps[k];
    csv << k + 1 << ',' << g12(st.lambda) << ',' << g12(st.J_value) << ',' << g12(st.norm) << ','
        << g12(st.residual) << ',' << st.iterations << ',' << to_string(st.branch) << ',' << g12(st.step_change)
        << '\n';
  }
  const auto& f = res.final;
  csv << "final," << g12(f.lambda) << ',' << g12(f.J_value) << ',' << g12(f.norm) << ',' << g12(f.residual) << ','
      << f.iterations << ',' << to_string(f.branch) << ",nan\n";
  files.add("continuation.csv", csv.str());
  files.add("solution_lambda_star.csv", nodal_csv(f.u));
  out << report_line("final", f) << '\n';
  return f.status == SolveStatus::converged ? kExitOk : kExitSolver;
}

int sweep_threads() {
  const char* env = std::getenv("NEHARI_PHI_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) throw ConfigError("NEHARI_PHI_THREADS must be an integer in [1, 1024]");
  return static_cast<int>(v);
}

int cmd_sweep(const RunConfig& cfg, Outputs& files, std::ostream& out) {
  const Problem base = make_problem(cfg.problem, 0.0);
  const auto ex = resolve_extremals(cfg, base, out);
  std::vector<double> grid = cfg.solver.lambda_grid;
  if (grid.empty()) {
    const int n = cfg.solver.grid_count;
    for (int i = 1; i <= n; ++i) grid.push_back(ex.lambda_star * cfg.solver.grid_max_fraction * i / n);
  }
  SweepOptions so;
  so.solve = solve_options(cfg.solver, true);
  so.lambda_star_hat = ex.lambda_star;
  so.lambda_lower_hat = ex.lambda_lower;
  so.threads = sweep_threads();
  const auto rows = sweep(base, grid, bump_field(base.mesh()), so);
  std::ostringstream csv;
  csv << "lambda,J_plus,J_minus,norm_plus,norm_minus,sign_tag,branch_plus,branch_minus\n";
  for (const auto& r : rows) {
    csv << g12(r.lambda) << ',' << g12(r.J_plus) << ',' << g12(r.J_minus) << ',' << g12(r.norm_plus) << ','
        << g12(r.norm_minus) << ',' << to_string(r.sign_tag) << ',' << r.branch_plus << ',' << r.branch_minus
        << '\n';
  }
  files.add("sweep.csv", csv.str());
  out << "lambda_star = " << g12(ex.lambda_star) << "  lambda_lower = " << g12(ex.lambda_lower) << "  rows = "
      << rows.size() << '\n';
  return kExitOk;
}

}  // namespace

int run_command(const Invocation& inv, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_config(inv.config_path);
    Outputs files(inv.out_dir ? fs::path(*inv.out_dir) : fs::path(cfg.output.dir), inv.force);
    int code = kExitOk;
    if (inv.command == "validate") {
      return cmd_validate(cfg, out);
    } else if (inv.command == "ray") {
      code = cmd_ray(cfg, files, out);
    } else if (inv.command == "estimate") {
      code = cmd_estimate(cfg, files, out);
    } else if (inv.command == "solve") {
      code = cmd_solve(cfg, inv.force, files, out);
    } else if (inv.command == "continue") {
      code = cmd_continue(cfg, inv.force, files, out);
    } else if (inv.command == "sweep") {
      code = cmd_sweep(cfg, files, out);
    } else {
      throw ConfigError("unknown subcommand '" + inv.command + "'");
    }
    files.commit(out);
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractViolation& e) {
    err << "refused: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ValidationError& e) {
    err << "validation failed: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ProjectionFailure& e) {
    err << "projection failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ContinuationError& e) {
    err << "continuation failed: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Nehari-manifold solver for concave-convex Phi-Laplacian problems"};
  app.require_subcommand(1);
  Invocation inv;
  std::string out_dir;
  const std::pair<const char*, const char*> commands[] = {
      {"validate", "check the structural hypotheses and print a table"},
      {"ray", "trace R_n, R_e and the fibering map along a preset direction (ray.csv)"},
      {"estimate", "estimate lambda^* and lambda_* (lambda_star.csv, minimizer_*.csv)"},
      {"solve", "solve on N+ and N- at one lambda (solution_plus.csv, solution_minus.csv)"},
      {"continue", "continue the N+ branch up to lambda^* (continuation.csv)"},
      {"sweep", "solve both branches over a lambda grid (sweep.csv)"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", inv.config_path, "run configuration file")->required();
    sub->add_option("-o,--out", out_dir, "output directory (overrides output.dir)");
    sub->add_flag("-f,--force", inv.force, "overwrite outputs and allow lambda above 1.001 lambda^*");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  inv.command = app.get_subcommands().front()->get_name();
  if (!out_dir.empty()) inv.out_dir = out_dir;
  return run_command(inv, std::cout, std::cerr);
}

}  // namespace nehari::cli
