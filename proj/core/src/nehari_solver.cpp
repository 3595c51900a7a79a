#include "nehari/nehari_solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "assembly.hpp"
#include "nehari/errors.hpp"

namespace nehari {

namespace {

enum class Side { plus, minus };

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double relative_residual(const Mesh& mesh, const detail::Factor& stiff, std::span<const double> g,
                         std::span<const double> u_int) {
  const auto kg = detail::solve(stiff, g);
  const double dual = std::sqrt(std::max(detail::dot(g, kg), 0.0));
  const auto ku = element_gradients(mesh, Field::from_interior(mesh, u_int));
  double energy_norm = 0.0;
  for (std::size_t e = 0; e < ku.size(); ++e) energy_norm += ku[e] * ku[e] * mesh.measure(e);
  energy_norm = std::sqrt(energy_norm);
  return energy_norm > 0.0 ? dual / energy_norm : std::numeric_limits<double>::infinity();
}

// Kacanov weights phi(|grad u|) per element, floored so the matrix stays definite
// where the gradient vanishes.
std::vector<double> kacanov_weights(const Problem& prob, const Field& u) {
  const auto grads = element_gradients(prob.mesh(), u);
  std::vector<double> c(grads.size());
  double top = 0.0;
  for (std::size_t e = 0; e < grads.size(); ++e) {
    c[e] = prob.model().phi(std::max(grads[e], prob.grad_eps()));
    if (std::isfinite(c[e])) top = std::max(top, c[e]);
  }
  if (!(top > 0.0)) top = 1.0;
  for (double& x : c) x = std::isfinite(x) ? std::max(x, 1e-10 * top) : top;
  return c;
}

Field project(const Problem& prob, const Field& v, Side side, double tie_tol, int iterate) {
  const Ray ray = Ray::through(prob, v);
  const auto roots = nehari_roots(ray, prob.lambda(), tie_tol);
  if (roots.kind == RootKind::no_root) {
    throw ProjectionFailure("iterate " + std::to_string(iterate) + ": no Nehari point on the ray at lambda = " +
                            num(prob.lambda()) + " (ray maximum " + num(roots.Lambda_n) + ")");
  }
  return v.scaled(side == Side::plus ? roots.t_plus : roots.t_minus);
}

void check_guardrail(const Problem& prob, const SolveOptions& opts) {
  if (opts.force || !opts.lambda_star_hat) return;
  if (prob.lambda() > 1.001 * *opts.lambda_star_hat) {
    throw ContractViolation("lambda = " + num(prob.lambda()) + " exceeds 1.001 x estimated lambda^* = " +
                            num(*opts.lambda_star_hat) + "; pass force to solve anyway");
  }
}

SolveReport solve_branch(const Problem& prob, const Field& init, const SolveOptions& opts, Side side) {
  check_guardrail(prob, opts);
  const Mesh& mesh = prob.mesh();
  if (init.size() != mesh.node_count()) throw ContractViolation("initial guess does not conform to the mesh");
  if (init.is_zero()) throw ContractViolation("initial guess is zero");
  if (!(prob.lambda() > 0.0)) throw ContractViolation("solver needs lambda > 0");

  detail::Factor stiff;
  detail::factorize(stiff, detail::stiffness(mesh));

  SolveReport rep;
  rep.lambda = prob.lambda();
  Field u = project(prob, init.abs(), side, opts.tie_tol, 0);
  double J = energy(prob, u);
  auto g = gradient(prob, u);
  auto u_int = u.interior_values(mesh);
  double res = relative_residual(mesh, stiff, g, u_int);
  rep.J_trace.push_back(J);

  constexpr double kMinStep = 1e-12;
  const double noise = 4.0 * std::numeric_limits<double>::epsilon();
  double alpha = 1.0;
  rep.status = SolveStatus::max_iters;
  int it = 0;
  while (true) {
    if (res <= opts.tol) {
      rep.status = SolveStatus::converged;
      break;
    }
    if (it >= opts.max_iters) break;
    ++it;

    detail::Factor precond;
    detail::factorize(precond, detail::weighted_stiffness(mesh, kacanov_weights(prob, u)));
    const auto d = detail::solve(precond, g);
    const double slope = detail::dot(g, d);

    bool accepted = false;
    bool lost_roots = true;
    Field next;
    double J_next = 0.0;
    std::vector<double> trial(u_int.size());
    for (; alpha >= kMinStep; alpha *= 0.5) {
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = u_int[i] - alpha * d[i];
      const Field candidate = Field::from_interior(mesh, trial).abs();
      if (candidate.is_zero()) continue;
      try {
        next = project(prob, candidate, side, opts.tie_tol, it);
      } catch (const ProjectionFailure&) {
        continue;
      } catch (const SearchFailure&) {
        continue;
      }
      lost_roots = false;
      J_next = energy(prob, next);
      if (J_next <= J - opts.armijo * alpha * slope + noise * std::abs(J)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (lost_roots) {
        throw ProjectionFailure("iterate " + std::to_string(it) + ": every trial step left the region with Nehari " +
                                "points at lambda = " + num(prob.lambda()));
      }
      rep.status = SolveStatus::stalled;
      --it;
      break;
    }
    u = std::move(next);
    J = J_next;
    g = gradient(prob, u);
    u_int = u.interior_values(mesh);
    res = relative_residual(mesh, stiff, g, u_int);
    rep.J_trace.push_back(J);
    alpha = std::min(1.0, 2.0 * alpha);
  }

  rep.u = u;
  rep.iterations = it;
  rep.J_value = J;
  rep.residual = residual(prob, u);
  rep.second_diag = second_along(prob, u);
  rep.branch = classify(prob, u, opts.class_tol);
  rep.norm = norm_proxy(mesh, u);
  return rep;
}

}  // namespace

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max_iters";
    case SolveStatus::stalled: return "stalled";
  }
  return "?";
}

std::string_view to_string(SignTag t) {
  switch (t) {
    case SignTag::below_lambda_lower: return "below_lambda_lower";
    case SignTag::at_lambda_lower: return "at_lambda_lower";
    case SignTag::between: return "between";
    case SignTag::above_lambda_star: return "above_lambda_star";
  }
  return "?";
}

double residual(const Problem& prob, const Field& u) {
  detail::Factor stiff;
  detail::factorize(stiff, detail::stiffness(prob.mesh()));
  const auto g = gradient(prob, u);
  return relative_residual(prob.mesh(), stiff, g, u.interior_values(prob.mesh()));
}

SolveReport solve_plus(const Problem& prob, const Field& init, const SolveOptions& opts) {
  return solve_branch(prob, init, opts, Side::plus);
}

SolveReport solve_minus(const Problem& prob, const Field& init, const SolveOptions& opts) {
  return solve_branch(prob, init, opts, Side::minus);
}

ContinuationResult continuation_to_lambda_star(const Problem& prob, double lambda_star_hat, int k_max,
                                               const Field& init, const SolveOptions& opts) {
  if (k_max < 1) throw ContractViolation("continuation needs k_max >= 1");
  if (!(lambda_star_hat > 0.0)) throw ContractViolation("continuation needs lambda^* > 0");
  SolveOptions o = opts;
  o.lambda_star_hat = lambda_star_hat;
  ContinuationResult out;
  Field u = init;
  std::optional<double> last_good;
  auto fail = [&](const std::string& why) -> ContinuationError {
    return ContinuationError("continuation stopped: " + why + "; last good lambda_k = " +
                             (last_good ? num(*last_good) : std::string("none")));
  };
  for (int k = 1; k <= k_max; ++k) {
    const double lam = lambda_star_hat * (1.0 - std::ldexp(1.0, -k));
    SolveReport r;
    try {
      r = solve_plus(prob.with_lambda(lam), u, o);
    } catch (const Error& e) {
      throw fail(std::string("solve at lambda = ") + num(lam) + " raised: " + e.what());
    }
    if (r.status != SolveStatus::converged) {
      throw fail("solve at lambda = " + num(lam) + " ended " + std::string(to_string(r.status)) +
                 " with residual " + num(r.residual));
    }
    ContinuationStep s;
    s.lambda = lam;
    s.J_value = r.J_value;
    s.norm = r.norm;
    s.residual = r.residual;
    s.iterations = r.iterations;
    s.branch = r.branch;
    if (!out.steps.empty()) {
      std::vector<double> diff(r.u.size());
      for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = r.u[i] - u[i];
      s.step_change = norm_proxy(prob.mesh(), Field(prob.mesh(), std::move(diff)));
    }
    out.steps.push_back(s);
    u = r.u;
    last_good = lam;
  }
  try {
    out.final = solve_plus(prob.with_lambda(lambda_star_hat), u, o);
  } catch (const Error& e) {
    throw fail(std::string("final solve at lambda^* raised: ") + e.what());
  }
  return out;
}

std::vector<SweepRow> sweep(const Problem& prob, std::span<const double> lambda_grid, const Field& init,
                            const SweepOptions& opts) {
  if (!(opts.lambda_star_hat > 0.0)) throw ContractViolation("sweep needs lambda^* > 0");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    const double lam = lambda_grid[i];
    if (!(lam > 0.0) || lam > 1.2 * opts.lambda_star_hat) {
      throw ContractViolation("sweep grid value " + num(lam) + " outside (0, 1.2 lambda^*]");
    }
    if (i > 0 && !(lam > lambda_grid[i - 1])) throw ContractViolation("sweep grid is not strictly increasing");
  }

  SolveOptions so = opts.solve;
  so.force = true;
  so.lambda_star_hat = opts.lambda_star_hat;

  auto branch = [&](const Problem& p, Side side, double& J, double& norm) -> std::string {
    J = std::numeric_limits<double>::quiet_NaN();
    norm = std::numeric_limits<double>::quiet_NaN();
    try {
      const auto r = side == Side::plus ? solve_plus(p, init, so) : solve_minus(p, init, so);
      if (r.status != SolveStatus::converged) return "not_converged";
      J = r.J_value;
      norm = r.norm;
      return std::string(to_string(r.branch));
    } catch (const ProjectionFailure&) {
      return "projection_failure";
    } catch (const SearchFailure&) {
      return "projection_failure";
    }
  };

  std::vector<SweepRow> rows(lambda_grid.size());
  auto work = [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.lambda = lambda_grid[i];
    const double lo = opts.lambda_lower_hat;
    if (std::abs(row.lambda - lo) <= opts.at_tol * lo) {
      row.sign_tag = SignTag::at_lambda_lower;
    } else if (row.lambda < lo) {
      row.sign_tag = SignTag::below_lambda_lower;
    } else if (row.lambda <= opts.lambda_star_hat) {
      row.sign_tag = SignTag::between;
    } else {
      row.sign_tag = SignTag::above_lambda_star;
    }
    const Problem p = prob.with_lambda(row.lambda);
    row.branch_plus = branch(p, Side::plus, row.J_plus, row.norm_plus);
    row.branch_minus = branch(p, Side::minus, row.J_minus, row.norm_minus);
  };

  const int threads = std::max(1, std::min<int>(opts.threads, static_cast<int>(rows.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) work(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < rows.size(); i = next++) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

}  // namespace nehari
