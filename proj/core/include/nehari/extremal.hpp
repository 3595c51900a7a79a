#pragma once

// Lambda_n(u) = sup_t R_n(tu), Lambda_e(u) = sup_t R_e(tu) and estimates of
//   lambda^* = inf Lambda_n   and   lambda_* = inf Lambda_e
// over the discrete space. Estimates are values attained by concrete fields, so
// they bound the discrete infima from above.

#include <cstdint>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"

namespace nehari {

double lambda_n_of(const Problem& prob, const Field& u);
double lambda_e_of(const Problem& prob, const Field& u);

/// Lambda together with its gradient in the interior nodal values. Both
/// quotients are stationary in t at their maximiser, so the gradient is
/// t * grad R(tu) there.
struct LambdaValue {
  double value = 0.0;
  double t = 0.0;
  std::vector<double> gradient;
};

LambdaValue lambda_n_with_gradient(const Problem& prob, const Field& u);
LambdaValue lambda_e_with_gradient(const Problem& prob, const Field& u);

struct ExtremalOptions {
  int starts = 4;
  /// Iteration budget per start, shared by the descent and the polishing phase.
  int max_iters = 2000;
  /// Initial relative step of the coordinate search.
  double step = 0.25;
  double min_step = 1e-6;
  std::uint64_t seed = 1;
  /// Smooth sine directions tried before single-node perturbations.
  int smooth_modes = 16;
  /// Single-node directions are only searched up to this many interior nodes.
  std::size_t nodal_direction_limit = 128;
  /// Run the preconditioned descent before the coordinate search.
  bool gradient_phase = true;
};

struct ExtremalSearch {
  double value = 0.0;
  Field minimizer;
  int starts_used = 0;
  int iterations = 0;
  /// Best value over all starts after every iteration; non-increasing.
  std::vector<double> trace;
  /// Value at the first start before any iteration.
  double first_value = 0.0;
  /// Smallest norm proxy of t(u) u over the accepted iterates.
  double min_scaled_norm = 0.0;
};

/// Multi-start minimisation of Lambda_n over interior nodal vectors of unit
/// Euclidean norm. Deterministic for a given seed. Throws EstimationError when
/// no start admits a ray analysis.
ExtremalSearch estimate_lambda_star(const Problem& prob, const ExtremalOptions& opts = {});
/// Same for Lambda_e.
ExtremalSearch estimate_lambda_lower(const Problem& prob, const ExtremalOptions& opts = {});

struct ExtremalEstimate {
  double lambda_star = 0.0;
  double lambda_lower = 0.0;
  Field minimizer_n;
  Field minimizer_e;
  int starts_used = 0;
  int iterations = 0;
  std::vector<double> trace_n;
  std::vector<double> trace_e;
};

ExtremalEstimate estimate_extremals(const Problem& prob, const ExtremalOptions& opts = {});

/// The starting directions used by the searches: the bump, then seeded random
/// fields alternating between positive and sign-changing.
std::vector<Field> extremal_starts(const Mesh& mesh, int count, std::uint64_t seed);

}  // namespace nehari
