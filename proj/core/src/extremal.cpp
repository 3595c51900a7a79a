#include "nehari/extremal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "assembly.hpp"
#include "nehari/errors.hpp"
#include "nehari/fibering.hpp"

namespace nehari {

namespace {

enum class Quotient { n, e };

LambdaValue evaluate_lambda(const Problem& prob, const Field& u, Quotient which, bool with_gradient) {
  const Ray ray = Ray::through(prob, u);
  LambdaValue out;
  if (which == Quotient::n) {
    out.t = find_tn(ray);
    out.value = ray.rn(out.t);
  } else {
    out.t = find_te(ray);
    out.value = ray.re(out.t);
  }
  if (!with_gradient) return out;

  const Field v = u.scaled(out.t);
  const auto b = breakdown(prob, v);
  const auto g = breakdown_gradient(prob, v);
  out.gradient.resize(g.A.size());
  const double q = prob.q();
  const double p = prob.p();
  for (std::size_t i = 0; i < g.A.size(); ++i) {
    const double num = which == Quotient::n ? g.A[i] - g.P[i] : q * (g.B[i] - g.P[i] / p);
    out.gradient[i] = out.t * (num - out.value * g.Q[i]) / b.Q;
  }
  return out;
}

std::optional<LambdaValue> try_lambda(const Problem& prob, const Field& u, Quotient which, bool with_gradient) {
  try {
    return evaluate_lambda(prob, u, which, with_gradient);
  } catch (const SearchFailure&) {
    return std::nullopt;
  } catch (const DomainError&) {
    return std::nullopt;
  } catch (const EvaluationError&) {
    return std::nullopt;
  }
}

std::vector<double> normalized(std::vector<double> v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

std::uint64_t start_seed(std::uint64_t seed, int start) {
  return seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(start);
}

std::vector<std::vector<double>> search_directions(const Mesh& mesh, const ExtremalOptions& opts) {
  std::vector<std::vector<double>> dirs;
  for (int k = 1; k <= opts.smooth_modes; ++k) {
    if (mesh.dim() == 1) {
      dirs.push_back(normalized(sine_field(mesh, k).interior_values(mesh)));
      continue;
    }
    // 2D: all products sin(i pi x) sin(j pi y) with i, j <= k that have not been added yet.
    const auto& s = mesh.spec();
    for (int i = 1; i <= k; ++i) {
      for (int j = 1; j <= k; ++j) {
        if (std::max(i, j) != k) continue;
        if (static_cast<int>(dirs.size()) >= opts.smooth_modes) break;
        const Field f = Field::from_function(mesh, [&](const Point& x) {
          return std::sin(i * std::numbers::pi * (x.x - s.lo[0]) / (s.hi[0] - s.lo[0])) *
                 std::sin(j * std::numbers::pi * (x.y - s.lo[1]) / (s.hi[1] - s.lo[1]));
        });
        dirs.push_back(normalized(f.interior_values(mesh)));
      }
    }
    if (static_cast<int>(dirs.size()) >= opts.smooth_modes) break;
  }
  if (mesh.interior_count() <= opts.nodal_direction_limit) {
    for (std::size_t i = 0; i < mesh.interior_count(); ++i) {
      std::vector<double> e(mesh.interior_count(), 0.0);
      e[i] = 1.0;
      dirs.push_back(std::move(e));
    }
  }
  return dirs;
}

struct StartResult {
  double initial = 0.0;
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> u;
  int iterations = 0;
  double min_scaled_norm = std::numeric_limits<double>::infinity();
};

class Search {
 public:
  Search(const Problem& prob, Quotient which, const ExtremalOptions& opts)
      : prob_(prob), mesh_(prob.mesh()), which_(which), opts_(opts), dirs_(search_directions(mesh_, opts)) {
    detail::factorize(stiff_, detail::stiffness(mesh_));
  }

  std::optional<StartResult> run(const Field& start, double& global_best, std::vector<double>& trace) {
    std::vector<double> u = normalized(start.interior_values(mesh_));
    auto lv = value(u, opts_.gradient_phase);
    if (!lv) return std::nullopt;
    StartResult r;
    r.u = u;
    r.value = r.initial = lv->value;
    record(r, *lv);
    global_best = std::min(global_best, r.value);

    if (opts_.gradient_phase) descend(r, *lv, global_best, trace);
    polish(r, global_best, trace);
    return r;
  }

 private:
  std::optional<LambdaValue> value(std::span<const double> u, bool with_gradient) const {
    return try_lambda(prob_, Field::from_interior(mesh_, u), which_, with_gradient);
  }

  void record(StartResult& r, const LambdaValue& lv) const {
    const double n = lv.t * norm_proxy(mesh_, Field::from_interior(mesh_, r.u));
    r.min_scaled_norm = std::min(r.min_scaled_norm, n);
  }

  void step_done(StartResult& r, double& global_best, std::vector<double>& trace) const {
    ++r.iterations;
    global_best = std::min(global_best, r.value);
    trace.push_back(global_best);
  }

  // Descent on the unit sphere along -K^{-1} grad Lambda with Armijo backtracking.
  void descend(StartResult& r, LambdaValue lv, double& global_best, std::vector<double>& trace) const {
    double rel_step = opts_.step;
    while (r.iterations < opts_.max_iters) {
      const auto d = detail::solve(stiff_, lv.gradient);
      const double slope = detail::dot(lv.gradient, d);
      const double dn = std::sqrt(detail::dot(d, d));
      if (!(slope > 0.0) || !(dn > 0.0)) return;
      double alpha = rel_step / dn;
      std::optional<LambdaValue> next;
      std::vector<double> trial(r.u.size());
      while (alpha * dn >= opts_.min_step) {
        for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = r.u[i] - alpha * d[i];
        trial = normalized(std::move(trial));
        next = value(trial, true);
        if (next && next->value <= r.value - 1e-4 * alpha * slope) break;
        next.reset();
        alpha *= 0.5;
      }
      if (!next) return;
      r.u = trial;
      r.value = next->value;
      lv = *next;
      record(r, lv);
      step_done(r, global_best, trace);
      rel_step = std::min(2.0 * alpha * dn, 1.0);
    }
  }

  // Coordinate search over the fixed direction set with a halving step.
  void polish(StartResult& r, double& global_best, std::vector<double>& trace) const {
    double h = opts_.step;
    std::vector<double> trial(r.u.size());
    while (r.iterations < opts_.max_iters && h >= opts_.min_step) {
      bool improved = false;
      for (const auto& d : dirs_) {
        for (double sign : {1.0, -1.0}) {
          for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = r.u[i] + sign * h * d[i];
          trial = normalized(std::move(trial));
          const auto lv = value(trial, false);
          if (lv && lv->value < r.value) {
            r.u = trial;
            r.value = lv->value;
            record(r, *lv);
            improved = true;
            break;
          }
        }
      }
      step_done(r, global_best, trace);
      if (!improved) h *= 0.5;
    }
  }

  const Problem& prob_;
  const Mesh& mesh_;
  Quotient which_;
  ExtremalOptions opts_;
  std::vector<std::vector<double>> dirs_;
  detail::Factor stiff_;
};

ExtremalSearch estimate(const Problem& prob, const ExtremalOptions& opts, Quotient which) {
  if (opts.starts < 1) throw ContractViolation("extremal search needs at least one start");
  const auto starts = extremal_starts(prob.mesh(), opts.starts, opts.seed);
  Search search(prob, which, opts);
  ExtremalSearch out;
  out.value = std::numeric_limits<double>::infinity();
  out.min_scaled_norm = std::numeric_limits<double>::infinity();
  double global_best = std::numeric_limits<double>::infinity();
  for (const auto& start : starts) {
    std::vector<double> trace;
    const auto r = search.run(start, global_best, trace);
    if (!r) continue;
    if (out.starts_used == 0) out.first_value = r->initial;
    ++out.starts_used;
    out.iterations += r->iterations;
    out.trace.insert(out.trace.end(), trace.begin(), trace.end());
    out.min_scaled_norm = std::min(out.min_scaled_norm, r->min_scaled_norm);
    if (r->value < out.value) {
      out.value = r->value;
      out.minimizer = Field::from_interior(prob.mesh(), r->u);
    }
  }
  if (out.starts_used == 0) {
    throw EstimationError("every start failed the ray analysis; nothing to minimise");
  }
  return out;
}

}  // namespace

double lambda_n_of(const Problem& prob, const Field& u) { return evaluate_lambda(prob, u, Quotient::n, false).value; }

double lambda_e_of(const Problem& prob, const Field& u) { return evaluate_lambda(prob, u, Quotient::e, false).value; }

LambdaValue lambda_n_with_gradient(const Problem& prob, const Field& u) {
  return evaluate_lambda(prob, u, Quotient::n, true);
}

LambdaValue lambda_e_with_gradient(const Problem& prob, const Field& u) {
  return evaluate_lambda(prob, u, Quotient::e, true);
}

std::vector<Field> extremal_starts(const Mesh& mesh, int count, std::uint64_t seed) {
  std::vector<Field> out;
  for (int i = 0; i < count; ++i) {
    if (i == 0) {
      out.push_back(bump_field(mesh));
    } else {
      out.push_back(random_field(mesh, start_seed(seed, i), i % 2 == 1));
    }
  }
  return out;
}

ExtremalSearch estimate_lambda_star(const Problem& prob, const ExtremalOptions& opts) {
  return estimate(prob, opts, Quotient::n);
}

ExtremalSearch estimate_lambda_lower(const Problem& prob, const ExtremalOptions& opts) {
  return estimate(prob, opts, Quotient::e);
}

ExtremalEstimate estimate_extremals(const Problem& prob, const ExtremalOptions& opts) {
  auto n = estimate_lambda_star(prob, opts);
  auto e = estimate_lambda_lower(prob, opts);
  ExtremalEstimate out;
  out.lambda_star = n.value;
  out.lambda_lower = e.value;
  out.minimizer_n = std::move(n.minimizer);
  out.minimizer_e = std::move(e.minimizer);
  out.starts_used = std::min(n.starts_used, e.starts_used);
  out.iterations = n.iterations + e.iterations;
  out.trace_n = std::move(n.trace);
  out.trace_e = std::move(e.trace);
  return out;
}

}  // namespace nehari
