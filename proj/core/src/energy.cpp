#include "nehari/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

// sign(v) |v|^(s-1), i.e. |v|^(s-2) v without evaluating 0^(negative).
double signed_pow(double v, double s_minus_one) {
  if (v == 0.0) return 0.0;
  const double m = std::pow(std::abs(v), s_minus_one);
  return v > 0.0 ? m : -m;
}

void check_finite(double v, std::size_t e, const char* what) {
  if (!std::isfinite(v)) {
    throw EvaluationError(std::string("non-finite ") + what + " integrand on element " + std::to_string(e));
  }
}

void check_conforms(const Problem& prob, const Field& u) {
  if (u.size() != prob.mesh().node_count()) {
    throw ContractViolation("field has " + std::to_string(u.size()) + " values, mesh has " +
                            std::to_string(prob.mesh().node_count()) + " nodes");
  }
}

struct PowerIntegrals {
  double P = 0.0;
  double Q = 0.0;
};

PowerIntegrals power_integrals(const Problem& prob, std::span<const double> u) {
  const Mesh& mesh = prob.mesh();
  const auto rule = quadrature_rule(mesh.dim());
  const auto a = prob.weight().values();
  PowerIntegrals out;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    double P = 0.0;
    double Q = 0.0;
    for (const auto& qp : rule) {
      double uq = 0.0;
      double aq = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        uq += qp.shape[k] * u[nodes[k]];
        aq += qp.shape[k] * a[nodes[k]];
      }
      const double au = std::abs(uq);
      P += qp.weight * std::pow(au, prob.p());
      Q += qp.weight * aq * std::pow(au, prob.q());
    }
    out.P += P * mesh.measure(e);
    out.Q += Q * mesh.measure(e);
  }
  return out;
}

}  // namespace

Problem::Problem(Mesh mesh, NFunctionModel model, Weight weight, double q, double p, double lambda,
                 double grad_eps)
    : mesh_(std::move(mesh)),
      model_(std::move(model)),
      weight_(std::move(weight)),
      q_(q),
      p_(p),
      lambda_(lambda),
      grad_eps_(grad_eps) {
  if (weight_.values().size() != mesh_.node_count()) throw ContractViolation("weight does not conform to mesh");
  if (!(lambda_ >= 0.0) || !std::isfinite(lambda_)) throw ConfigError("lambda must be finite and >= 0");
  if (!(grad_eps_ >= 0.0)) throw ConfigError("gradient cutoff must be >= 0");

  ValidationInput in;
  in.q = q_;
  in.p = p_;
  in.dim = mesh_.dim();
  in.weight_floor = weight_.floor();
  report_ = validate_hypotheses(model_, in);
  for (const auto& e : report_.entries) {
    if (e.verdict != Verdict::fail) continue;
    if (e.id == Hypothesis::H1 || e.id == Hypothesis::H2) {
      throw ValidationError(std::string(to_string(e.id)) + " violated: " + e.witness);
    }
    warnings_.push_back(std::string(to_string(e.id)) + ": " + e.witness);
  }
}

Problem Problem::with_lambda(double lambda) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 0");
  Problem out = *this;
  out.lambda_ = lambda;
  return out;
}

EnergyBreakdown breakdown(const Problem& prob, const Field& u) {
  check_conforms(prob, u);
  const Mesh& mesh = prob.mesh();
  const auto& model = prob.model();
  const auto grads = element_gradients(mesh, u.values());
  EnergyBreakdown out;
  for (std::size_t e = 0; e < grads.size(); ++e) {
    if (grads[e] == 0.0) continue;
    const double g = std::max(grads[e], prob.grad_eps());
    const auto m = model.moments(g);
    const double B = m.Phi;
    const double A = m.A;
    const double D = m.D;
    check_finite(B, e, "Phi");
    check_finite(A, e, "phi t^2");
    check_finite(D, e, "phi' t^3");
    const double w = mesh.measure(e);
    out.B += B * w;
    out.A += A * w;
    out.D += D * w;
  }
  const auto pq = power_integrals(prob, u.values());
  out.P = pq.P;
  out.Q = pq.Q;
  return out;
}

double energy(const Problem& prob, const Field& u) { return energy(prob, u, prob.lambda()); }

double energy(const Problem& prob, const Field& u, double lambda) {
  const auto b = breakdown(prob, u);
  return b.B - lambda / prob.q() * b.Q - b.P / prob.p();
}

std::vector<double> gradient(const Problem& prob, const Field& u) {
  check_conforms(prob, u);
  const Mesh& mesh = prob.mesh();
  const auto& model = prob.model();
  const auto uv = u.values();
  const auto a = prob.weight().values();
  const auto rule = quadrature_rule(mesh.dim());
  const double lambda = prob.lambda();
  std::vector<double> full(mesh.node_count(), 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    const double w = mesh.measure(e);
    const auto g = element_gradient(mesh, uv, e);
    const double gm = std::hypot(g[0], g[1]);
    if (gm > 0.0) {
      const double coef = model.phi(std::max(gm, prob.grad_eps()));
      check_finite(coef, e, "phi");
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& b = mesh.basis_gradient(e, k);
        full[nodes[k]] += w * coef * (g[0] * b[0] + g[1] * b[1]);
      }
    }
    for (const auto& qp : rule) {
      double uq = 0.0;
      double aq = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        uq += qp.shape[k] * uv[nodes[k]];
        aq += qp.shape[k] * a[nodes[k]];
      }
      const double load = lambda * aq * signed_pow(uq, prob.q() - 1.0) + signed_pow(uq, prob.p() - 1.0);
      for (std::size_t k = 0; k < nodes.size(); ++k) full[nodes[k]] -= w * qp.weight * qp.shape[k] * load;
    }
  }
  std::vector<double> out;
  out.reserve(mesh.interior_count());
  for (std::size_t node : mesh.interior_nodes()) out.push_back(full[node]);
  return out;
}

double second_along(const Problem& prob, const Field& u) {
  const auto b = breakdown(prob, u);
  return b.A + b.D - prob.lambda() * (prob.q() - 1.0) * b.Q - (prob.p() - 1.0) * b.P;
}

double nehari_functional(const Problem& prob, const Field& u) {
  const auto b = breakdown(prob, u);
  return b.A - prob.lambda() * b.Q - b.P;
}

BreakdownGradient breakdown_gradient(const Problem& prob, const Field& u) {
  check_conforms(prob, u);
  const Mesh& mesh = prob.mesh();
  const auto& model = prob.model();
  const auto uv = u.values();
  const auto a = prob.weight().values();
  const auto rule = quadrature_rule(mesh.dim());
  const std::size_t n = mesh.node_count();
  std::vector<double> B(n, 0.0), A(n, 0.0), P(n, 0.0), Q(n, 0.0);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    const double w = mesh.measure(e);
    const auto g = element_gradient(mesh, uv, e);
    const double gm = std::hypot(g[0], g[1]);
    if (gm > 0.0) {
      const double t = std::max(gm, prob.grad_eps());
      const double phi = model.phi(t);
      const double flux_a = 2.0 * phi + model.dphi(t) * t;
      check_finite(flux_a, e, "phi");
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& b = mesh.basis_gradient(e, k);
        const double gb = w * (g[0] * b[0] + g[1] * b[1]);
        B[nodes[k]] += phi * gb;
        A[nodes[k]] += flux_a * gb;
      }
    }
    for (const auto& qp : rule) {
      double uq = 0.0;
      double aq = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        uq += qp.shape[k] * uv[nodes[k]];
        aq += qp.shape[k] * a[nodes[k]];
      }
      const double lp = prob.p() * signed_pow(uq, prob.p() - 1.0);
      const double lq = prob.q() * aq * signed_pow(uq, prob.q() - 1.0);
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double s = w * qp.weight * qp.shape[k];
        P[nodes[k]] += s * lp;
        Q[nodes[k]] += s * lq;
      }
    }
  }
  BreakdownGradient out;
  for (std::size_t node : mesh.interior_nodes()) {
    out.B.push_back(B[node]);
    out.A.push_back(A[node]);
    out.P.push_back(P[node]);
    out.Q.push_back(Q[node]);
  }
  return out;
}

double norm_proxy(const Mesh& mesh, const Field& u) {
  const auto grads = element_gradients(mesh, u.values());
  double s = 0.0;
  for (std::size_t e = 0; e < grads.size(); ++e) s += grads[e] * grads[e] * mesh.measure(e);
  return std::sqrt(s);
}

}  // namespace nehari
