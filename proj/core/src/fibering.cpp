#include "nehari/fibering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "nehari/detail/roots.hpp"
#include "nehari/errors.hpp"

namespace nehari {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::string sign_text(double v) { return v > 0.0 ? "+" : (v < 0.0 ? "-" : "0"); }

// Expands [lo, hi] until f(lo) > 0 > f(hi) for a function decreasing in t.
template <class F>
std::pair<double, double> bracket_decreasing(F&& f, const RootSearchOptions& opts, const char* what) {
  double lo = opts.initial_lo;
  double hi = opts.initial_hi;
  double flo = f(lo);
  double fhi = f(hi);
  while (!(flo > 0.0) && lo > opts.min_lo) {
    hi = lo;
    fhi = flo;
    lo = std::max(lo / opts.expand_factor, opts.min_lo);
    flo = f(lo);
  }
  while (!(fhi < 0.0) && hi < opts.max_hi) {
    lo = hi;
    flo = fhi;
    hi = std::min(hi * opts.expand_factor, opts.max_hi);
    fhi = f(hi);
  }
  if (!(flo > 0.0) || !(fhi < 0.0)) {
    throw SearchFailure(std::string(what) + ": no sign change in [" + num(opts.min_lo) + ", " + num(opts.max_hi) +
                        "]; residual signs " + sign_text(flo) + " at " + num(lo) + ", " + sign_text(fhi) + " at " +
                        num(hi));
  }
  return {lo, hi};
}

}  // namespace

Ray::Ray(NFunctionModel model, double q, double p, std::vector<double> grads, std::vector<double> measures,
         double P, double Q, double grad_eps)
    : model_(std::move(model)),
      q_(q),
      p_(p),
      grads_(std::move(grads)),
      measures_(std::move(measures)),
      P_(P),
      Q_(Q),
      grad_eps_(grad_eps) {
  if (grads_.size() != measures_.size()) throw ContractViolation("ray: gradients and measures differ in length");
  if (!(Q_ > 0.0)) throw DomainError("ray direction is degenerate: Q(u) = 0");
}

Ray Ray::through(const Problem& prob, const Field& u) {
  const auto b = breakdown(prob, u);
  const auto& mesh = prob.mesh();
  auto grads = element_gradients(mesh, u.values());
  std::vector<double> measures(mesh.measures().begin(), mesh.measures().end());
  return Ray(prob.model(), prob.q(), prob.p(), std::move(grads), std::move(measures), b.P, b.Q, prob.grad_eps());
}

Ray Ray::synthetic(NFunctionModel model, double q, double p, std::vector<double> grads,
                   std::vector<double> measures, double P, double Q, double grad_eps) {
  return Ray(std::move(model), q, p, std::move(grads), std::move(measures), P, Q, grad_eps);
}

Ray::Moments Ray::accumulate(double t, bool with_phi) const {
  Moments m;
  for (std::size_t e = 0; e < grads_.size(); ++e) {
    if (grads_[e] == 0.0) continue;
    const double g = std::max(t * grads_[e], grad_eps_);
    const auto local = with_phi ? model_.moments(g) : model_.flux_moments(g);
    const double w = measures_[e];
    m.B += local.Phi * w;
    m.A += local.A * w;
    m.D += local.D * w;
  }
  m.P = std::pow(t, p_) * P_;
  m.Q = std::pow(t, q_) * Q_;
  return m;
}

Ray::Moments Ray::at(double t) const { return accumulate(t, true); }

double Ray::rn(double t) const {
  const auto m = accumulate(t, false);
  return (m.A - m.P) / m.Q;
}

double Ray::re(double t) const {
  const auto m = at(t);
  return q_ * (m.B - m.P / p_) / m.Q;
}

double Ray::drn_dt(double t) const {
  const auto m = accumulate(t, false);
  return (m.D + (2.0 - q_) * m.A - (p_ - q_) * m.P) / (t * m.Q);
}

double Ray::dre_dt(double t) const {
  const auto m = at(t);
  return q_ * (m.A - q_ * m.B - (p_ - q_) * m.P / p_) / (t * m.Q);
}

double Ray::gamma(double t, double lambda) const {
  const auto m = at(t);
  return m.B - lambda / q_ * m.Q - m.P / p_;
}

double Ray::h(double t) const {
  const auto m = accumulate(t, false);
  return ((2.0 - q_) * m.A + m.D) / std::pow(t, p_);
}

double Ray::L(double t) const {
  const auto m = at(t);
  return (m.A - q_ * m.B) / std::pow(t, p_);
}

double rn(const Problem& prob, const Field& u, double t) { return Ray::through(prob, u).rn(t); }
double re(const Problem& prob, const Field& u, double t) { return Ray::through(prob, u).re(t); }

double find_tn(const Ray& ray, const RootSearchOptions& opts) {
  const double target = (ray.p() - ray.q()) * ray.P1();
  auto f = [&](double t) { return ray.h(t) - target; };
  const auto [lo, hi] = bracket_decreasing(f, opts, "find_tn");
  return detail::bisect_log(f, lo, hi, opts.rel_width);
}

double find_tn(const Problem& prob, const Field& u, const RootSearchOptions& opts) {
  return find_tn(Ray::through(prob, u), opts);
}

double find_te(const Ray& ray, const RootSearchOptions& opts) {
  const double target = (ray.p() - ray.q()) * ray.P1() / ray.p();
  auto f = [&](double t) { return ray.L(t) - target; };
  const auto [lo, hi] = bracket_decreasing(f, opts, "find_te");
  return detail::bisect_log(f, lo, hi, opts.rel_width);
}

double find_te(const Problem& prob, const Field& u, const RootSearchOptions& opts) {
  return find_te(Ray::through(prob, u), opts);
}

std::string_view to_string(RootKind kind) {
  switch (kind) {
    case RootKind::two_roots: return "two_roots";
    case RootKind::degenerate: return "degenerate";
    case RootKind::no_root: return "no_root";
  }
  return "?";
}

NehariRoots nehari_roots(const Ray& ray, double lam, double tie_tol, const RootSearchOptions& opts) {
  if (!(lam > 0.0)) throw ContractViolation("nehari_roots needs lambda > 0");
  NehariRoots out;
  out.t_n = find_tn(ray, opts);
  out.Lambda_n = ray.rn(out.t_n);
  if (std::abs(lam - out.Lambda_n) <= tie_tol * std::max(1.0, std::abs(out.Lambda_n))) {
    out.kind = RootKind::degenerate;
    out.t_plus = out.t_minus = out.t_n;
    return out;
  }
  if (lam > out.Lambda_n) {
    out.kind = RootKind::no_root;
    return out;
  }
  auto f = [&](double t) { return ray.rn(t) - lam; };
  constexpr int kMaxDecades = 60;

  double lo = out.t_n;
  int steps = 0;
  while (!(f(lo) < 0.0)) {
    if (++steps > kMaxDecades) throw SearchFailure("nehari_roots: lower root bracket exhausted");
    lo /= opts.expand_factor;
  }
  out.t_plus = detail::bisect_log(f, lo, out.t_n, opts.rel_width);

  double hi = out.t_n;
  steps = 0;
  while (!(f(hi) < 0.0)) {
    if (++steps > kMaxDecades) throw SearchFailure("nehari_roots: upper root bracket exhausted");
    hi *= opts.expand_factor;
  }
  out.t_minus = detail::bisect_log(f, out.t_n, hi, opts.rel_width);
  out.kind = RootKind::two_roots;
  return out;
}

NehariRoots nehari_roots(const Problem& prob, const Field& u, double lam, double tie_tol) {
  return nehari_roots(Ray::through(prob, u), lam, tie_tol);
}

std::string_view to_string(NehariClass c) {
  switch (c) {
    case NehariClass::N_plus: return "N_plus";
    case NehariClass::N_minus: return "N_minus";
    case NehariClass::N_zero: return "N_zero";
    case NehariClass::off_nehari: return "off_nehari";
  }
  return "?";
}

NehariClass classify(const Problem& prob, const Field& u, double tol) {
  const auto b = breakdown(prob, u);
  if (!(b.Q > 0.0)) throw DomainError("classify: degenerate direction, Q(u) = 0");
  const double lambda = prob.lambda();
  const double r = (b.A - b.P) / b.Q;
  if (std::abs(r - lambda) > tol * std::max(1.0, lambda)) return NehariClass::off_nehari;
  const double second = b.A + b.D - lambda * (prob.q() - 1.0) * b.Q - (prob.p() - 1.0) * b.P;
  const double band = tol * b.Q;
  if (second > band) return NehariClass::N_plus;
  if (second < -band) return NehariClass::N_minus;
  return NehariClass::N_zero;
}

RayAnalysis analyze_ray(const Problem& prob, const Field& u, std::optional<double> lam) {
  const Ray ray = Ray::through(prob, u);
  RayAnalysis out;
  out.direction = u;
  out.t_n = find_tn(ray);
  out.t_e = find_te(ray);
  out.Lambda_n = ray.rn(out.t_n);
  out.Lambda_e = ray.re(out.t_e);
  if (lam) {
    out.roots = nehari_roots(ray, *lam);
    out.lambda_used = lam;
  }
  return out;
}

std::vector<RayTraceRow> ray_trace(const Ray& ray, double lambda, std::span<const double> ts) {
  std::vector<RayTraceRow> rows;
  rows.reserve(ts.size());
  for (double t : ts) rows.push_back({t, ray.rn(t), ray.re(t), ray.gamma(t, lambda)});
  return rows;
}

void write_ray_csv(std::ostream& os, std::span<const RayTraceRow> rows) {
  os << "t,rn,re,gamma\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", r.t, r.rn, r.re, r.gamma);
    os << buf;
  }
}

}  // namespace nehari
