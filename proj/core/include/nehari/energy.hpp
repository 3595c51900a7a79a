#pragma once

// The energy J(u) = int Phi(|grad u|) - (lambda/q) int a |u|^q - (1/p) int |u|^p
// on a discrete space, its Gateaux derivative and its second derivative along u.

#include <string>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/nfunction.hpp"

namespace nehari {

/// Immutable problem data. Construction validates the hypotheses for the mesh
/// dimension and throws ValidationError when H1 or H2 fails; every other
/// failed hypothesis is kept as a warning.
class Problem {
 public:
  Problem(Mesh mesh, NFunctionModel model, Weight weight, double q, double p, double lambda,
          double grad_eps = 1e-12);

  const Mesh& mesh() const noexcept { return mesh_; }
  const NFunctionModel& model() const noexcept { return model_; }
  const Weight& weight() const noexcept { return weight_; }
  double q() const noexcept { return q_; }
  double p() const noexcept { return p_; }
  double lambda() const noexcept { return lambda_; }
  /// Lower cutoff applied to |grad u| before phi and phi' are evaluated.
  double grad_eps() const noexcept { return grad_eps_; }

  const HypothesisReport& hypotheses() const noexcept { return report_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Same problem at another parameter value; hypotheses are not re-run.
  Problem with_lambda(double lambda) const;

 private:
  Mesh mesh_;
  NFunctionModel model_;
  Weight weight_;
  double q_;
  double p_;
  double lambda_;
  double grad_eps_;
  HypothesisReport report_;
  std::vector<std::string> warnings_;
};

/// The five integrals every functional is built from.
struct EnergyBreakdown {
  double B = 0.0;  ///< int Phi(|grad u|)
  double A = 0.0;  ///< int phi(|grad u|) |grad u|^2
  double D = 0.0;  ///< int phi'(|grad u|) |grad u|^3
  double P = 0.0;  ///< int |u|^p
  double Q = 0.0;  ///< int a |u|^q
};

EnergyBreakdown breakdown(const Problem& prob, const Field& u);

double energy(const Problem& prob, const Field& u);
double energy(const Problem& prob, const Field& u, double lambda);

/// J'(u) psi_i for every interior hat function psi_i, in interior-node order.
std::vector<double> gradient(const Problem& prob, const Field& u);

/// J''(u)(u, u) = A + D - lambda (q - 1) Q - (p - 1) P.
double second_along(const Problem& prob, const Field& u);

/// J'(u) u = A - lambda Q - P.
double nehari_functional(const Problem& prob, const Field& u);

/// Derivatives of B, A, P and Q with respect to the interior nodal values.
struct BreakdownGradient {
  std::vector<double> B;
  std::vector<double> A;
  std::vector<double> P;
  std::vector<double> Q;
};

BreakdownGradient breakdown_gradient(const Problem& prob, const Field& u);

/// Discrete H^1_0 seminorm (int |grad u|^2)^(1/2), the norm proxy used in reports.
double norm_proxy(const Mesh& mesh, const Field& u);

}  // namespace nehari
