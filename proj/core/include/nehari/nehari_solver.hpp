#pragma once

// Minimisation of J over the two halves of the Nehari set: projected descent
// where every iterate is rescaled onto N+ (smaller root t+) or N- (larger root
// t-) of its ray. Also the continuation lambda_k -> lambda^* and lambda sweeps.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"
#include "nehari/fibering.hpp"

namespace nehari {

struct SolveOptions {
  double tol = 1e-6;
  int max_iters = 5000;
  /// Sufficient-decrease constant of the backtracking step.
  double armijo = 1e-4;
  /// Dead band handed to classify().
  double class_tol = 1e-8;
  /// Relative band in which a ray counts as tangent to the level lambda; the
  /// projection then uses the double root t_n.
  double tie_tol = 1e-9;
  /// Estimate of lambda^*; with it, lambda > 1.001 lambda^* is refused unless `force`.
  std::optional<double> lambda_star_hat;
  bool force = false;
};

enum class SolveStatus { converged, max_iters, stalled };

std::string_view to_string(SolveStatus s);

struct SolveReport {
  Field u;
  NehariClass branch = NehariClass::off_nehari;
  double J_value = 0.0;
  double residual = 0.0;
  /// J''(u)(u, u).
  double second_diag = 0.0;
  int iterations = 0;
  double lambda = 0.0;
  SolveStatus status = SolveStatus::max_iters;
  /// J after every accepted iterate, starting with the projected initial guess.
  std::vector<double> J_trace;
  double norm = 0.0;
};

/// (g^T K^{-1} g)^(1/2) / (u^T K u)^(1/2) with g the interior gradient of J and
/// K the P1 stiffness matrix: the dual norm of J'(u) relative to the H^1_0 size of u.
double residual(const Problem& prob, const Field& u);

/// Ground state on N+. `init` must be nonzero; its absolute value is used.
/// Throws ProjectionFailure when the initial direction has no root at lambda,
/// or when every backtracking trial of an iterate loses its roots.
SolveReport solve_plus(const Problem& prob, const Field& init, const SolveOptions& opts = {});
/// Ground state on N-.
SolveReport solve_minus(const Problem& prob, const Field& init, const SolveOptions& opts = {});

struct ContinuationStep {
  double lambda = 0.0;
  double J_value = 0.0;
  double norm = 0.0;
  double residual = 0.0;
  int iterations = 0;
  NehariClass branch = NehariClass::off_nehari;
  /// H^1_0 distance to the previous step's solution; zero for the first step.
  double step_change = 0.0;
};

struct ContinuationResult {
  std::vector<ContinuationStep> steps;
  /// Solve at lambda^* itself; its branch may be N_zero.
  SolveReport final;
};

/// N+ solves at lambda_k = lambda_star_hat (1 - 2^-k), k = 1..k_max, each warm
/// started from the previous one, then at lambda_star_hat. Throws
/// ContinuationError naming the last good lambda_k when an intermediate solve fails.
ContinuationResult continuation_to_lambda_star(const Problem& prob, double lambda_star_hat, int k_max,
                                               const Field& init, const SolveOptions& opts = {});

enum class SignTag { below_lambda_lower, at_lambda_lower, between, above_lambda_star };

std::string_view to_string(SignTag t);

struct SweepOptions {
  SolveOptions solve;
  double lambda_star_hat = 0.0;
  double lambda_lower_hat = 0.0;
  /// Relative band around lambda_lower_hat tagged at_lambda_lower.
  double at_tol = 1e-6;
  /// Worker threads; rows are independent so the result does not depend on it.
  int threads = 1;
};

struct SweepRow {
  double lambda = 0.0;
  /// NaN when the branch failed.
  double J_plus = 0.0;
  double J_minus = 0.0;
  double norm_plus = 0.0;
  double norm_minus = 0.0;
  SignTag sign_tag = SignTag::between;
  /// Classification of the converged point, or `projection_failure` / `not_converged`.
  std::string branch_plus;
  std::string branch_minus;
};

/// Both branches at every lambda of a strictly increasing grid inside
/// (0, 1.2 lambda_star_hat], each cold-started from `init`. Failures are recorded per row.
std::vector<SweepRow> sweep(const Problem& prob, std::span<const double> lambda_grid, const Field& init,
                            const SweepOptions& opts);

}  // namespace nehari
