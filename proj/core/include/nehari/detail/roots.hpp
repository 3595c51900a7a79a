#pragma once

#include <cmath>
#include <cstdint>

#include <boost/math/tools/toms748_solve.hpp>

namespace nehari::detail {

/// Root of f on a bracket [lo, hi] with 0 < lo < hi where f changes sign.
/// Works in s = ln t with TOMS 748 (bracket-preserving, never worse than
/// bisection) and stops once hi / lo - 1 <= rel_width. Returns the geometric
/// midpoint of the final bracket.
template <class F>
double bisect_log(F&& f, double lo, double hi, double rel_width) {
  auto g = [&](double s) { return f(std::exp(s)); };
  const double width = std::log1p(rel_width);
  auto done = [width](double a, double b) { return std::abs(b - a) <= width; };
  std::uintmax_t max_iter = 400;
  const auto [a, b] = boost::math::tools::toms748_solve(g, std::log(lo), std::log(hi), done, max_iter);
  return std::exp(0.5 * (a + b));
}

}  // namespace nehari::detail
