#pragma once

// Analysis along a ray t -> t u: the quotients
//   R_n(tu) = (A(tu) - P(tu)) / Q(tu)          (level lambda <=> Nehari set)
//   R_e(tu) = q (B(tu) - P(tu)/p) / Q(tu)      (level lambda <=> J(tu) = 0)
// their unique maximisers t_n < t_e, the two Nehari roots t+ < t_n < t- and
// the N+/N-/N0 classification.

#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"
#include "nehari/nfunction.hpp"

namespace nehari {

struct RootSearchOptions {
  double initial_lo = 1e-3;
  double initial_hi = 1e3;
  double expand_factor = 10.0;
  double min_lo = 1e-9;
  double max_hi = 1e9;
  double rel_width = 1e-12;
};

/// Everything a ray needs, precomputed once: element gradient magnitudes of the
/// direction, element measures, P(u) and Q(u). Scaling is exact because
/// P(tu) = t^p P(u) and Q(tu) = t^q Q(u) on the nodal interpolant.
class Ray {
 public:
  /// Throws DomainError when u vanishes (Q(u) = 0).
  static Ray through(const Problem& prob, const Field& u);
  /// A ray described directly by its integrals; used for closed-form checks.
  static Ray synthetic(NFunctionModel model, double q, double p, std::vector<double> grads,
                       std::vector<double> measures, double P, double Q, double grad_eps = 1e-12);

  struct Moments {
    double B = 0.0;
    double A = 0.0;
    double D = 0.0;
    double P = 0.0;
    double Q = 0.0;
  };
  Moments at(double t) const;

  double rn(double t) const;
  double re(double t) const;
  /// d/dt R_n(tu) = (D + (2 - q) A - (p - q) P) / (t Q).
  double drn_dt(double t) const;
  /// d/dt R_e(tu) = q (A - q B - (p - q) P / p) / (t Q).
  double dre_dt(double t) const;
  /// gamma(t) = J_lambda(tu).
  double gamma(double t, double lambda) const;

  /// h(t) = ((2 - q) A(tu) + D(tu)) / t^p, strictly decreasing under H3.
  double h(double t) const;
  /// L(t) = (A(tu) - q B(tu)) / t^p, strictly decreasing under H3.
  double L(double t) const;

  double q() const noexcept { return q_; }
  double p() const noexcept { return p_; }
  double P1() const noexcept { return P_; }
  double Q1() const noexcept { return Q_; }

 private:
  Ray(NFunctionModel model, double q, double p, std::vector<double> grads, std::vector<double> measures,
      double P, double Q, double grad_eps);
  Moments accumulate(double t, bool with_phi) const;

  NFunctionModel model_;
  double q_;
  double p_;
  std::vector<double> grads_;
  std::vector<double> measures_;
  double P_;
  double Q_;
  double grad_eps_;
};

double rn(const Problem& prob, const Field& u, double t);
double re(const Problem& prob, const Field& u, double t);

/// Unique zero of d/dt R_n(tu): root of h(t) = (p - q) P(u), bracketed on an
/// expanding log interval and bisected. Throws SearchFailure when no sign
/// change is found inside [min_lo, max_hi].
double find_tn(const Ray& ray, const RootSearchOptions& opts = {});
double find_tn(const Problem& prob, const Field& u, const RootSearchOptions& opts = {});

/// Unique zero of d/dt R_e(tu): root of L(t) = (p - q) P(u) / p.
double find_te(const Ray& ray, const RootSearchOptions& opts = {});
double find_te(const Problem& prob, const Field& u, const RootSearchOptions& opts = {});

enum class RootKind { two_roots, degenerate, no_root };

std::string_view to_string(RootKind kind);

struct NehariRoots {
  RootKind kind = RootKind::no_root;
  double t_n = 0.0;
  double Lambda_n = 0.0;
  /// Valid for two_roots; for degenerate both equal t_n.
  double t_plus = 0.0;
  double t_minus = 0.0;
};

/// Solutions of R_n(tu) = lam. `tie_tol` is the relative band around
/// Lambda_n(u) reported as a tangency. Throws ContractViolation for lam <= 0
/// and SearchFailure when a bracket cannot be expanded.
NehariRoots nehari_roots(const Ray& ray, double lam, double tie_tol = 1e-12, const RootSearchOptions& opts = {});
NehariRoots nehari_roots(const Problem& prob, const Field& u, double lam, double tie_tol = 1e-12);

enum class NehariClass { N_plus, N_minus, N_zero, off_nehari };

std::string_view to_string(NehariClass c);

/// off_nehari when |R_n(u) - lambda| > tol max(1, lambda); otherwise the sign
/// of J''(u)(u, u) with a dead band tol * Q(u).
NehariClass classify(const Problem& prob, const Field& u, double tol = 1e-8);

struct RayAnalysis {
  Field direction;
  double t_n = 0.0;
  double t_e = 0.0;
  double Lambda_n = 0.0;
  double Lambda_e = 0.0;
  std::optional<NehariRoots> roots;
  std::optional<double> lambda_used;
};

RayAnalysis analyze_ray(const Problem& prob, const Field& u, std::optional<double> lam = std::nullopt);

struct RayTraceRow {
  double t = 0.0;
  double rn = 0.0;
  double re = 0.0;
  double gamma = 0.0;
};

std::vector<RayTraceRow> ray_trace(const Ray& ray, double lambda, std::span<const double> ts);

/// CSV with header `t,rn,re,gamma`, 12 significant digits.
void write_ray_csv(std::ostream& os, std::span<const RayTraceRow> rows);

}  // namespace nehari
