#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "fixtures.hpp"
#include "nehari/errors.hpp"
#include "nehari/fibering.hpp"

using namespace nehari;
using fixtures::rel_err;

namespace {

// K = int |u'|^r from nodal differences, independent of the library's integrals.
double power_K(const Mesh& m, const Field& u, double r) {
  double K = 0.0;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const double h = m.measure(e);
    K += std::pow(std::abs(u[e + 1] - u[e]) / h, r) * h;
  }
  return K;
}

Ray unit_synthetic() { return Ray::synthetic(NFunctionModel::power(2.0), 1.5, 3.0, {1.0}, {1.0}, 1.0, 1.0); }

}  // namespace

TEST_CASE("synthetic quadratic ray: closed forms") {
  const Ray ray = unit_synthetic();
  // R_n(t) = t^0.5 - t^1.5, R_e(t) = 1.5 (t^0.5 / 2 - t^1.5 / 3).
  for (double t : {0.1, 1.0 / 3.0, 0.5, 1.0, 2.0}) {
    CHECK(rel_err(ray.rn(t) + 2.0, std::sqrt(t) - std::pow(t, 1.5) + 2.0) < 1e-14);
    CHECK(rel_err(ray.re(t) + 2.0, 1.5 * (std::sqrt(t) / 2.0 - std::pow(t, 1.5) / 3.0) + 2.0) < 1e-14);
  }
  CHECK(std::abs(ray.rn(1.0)) < 1e-15);
  CHECK(rel_err(find_tn(ray), 1.0 / 3.0) < 1e-10);
  CHECK(rel_err(find_te(ray), 0.5) < 1e-10);
  CHECK(rel_err(ray.rn(find_tn(ray)), std::sqrt(1.0 / 3.0) - std::pow(1.0 / 3.0, 1.5)) < 1e-12);
  CHECK(rel_err(ray.re(find_te(ray)), std::pow(2.0, -1.5)) < 1e-12);
}

TEST_CASE("power family: radii match the closed forms on random fields") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto mesh = fixtures::line(32);
  for (int trial = 0; trial < 20; ++trial) {
    const double q = 1.1 + 0.8 * unit(gen);
    const double r = q + 0.2 + 1.5 * unit(gen);
    const double p = r + 0.3 + 3.0 * unit(gen);
    const Problem prob(mesh, NFunctionModel::power(r), Weight::constant(mesh, 1.0), q, p, 1.0);
    const auto u = fixtures::random_field(mesh, gen);
    const double K = power_K(mesh, u, r);
    const double P = lp_norm_pow(mesh, u, p);
    const double tn = std::pow((r - q) * K / ((p - q) * P), 1.0 / (p - r));
    const double te = std::pow(p * (r - q) * K / (r * (p - q) * P), 1.0 / (p - r));
    CAPTURE(q);
    CAPTURE(r);
    CAPTURE(p);
    CHECK(rel_err(find_tn(prob, u), tn) < 1e-8);
    CHECK(rel_err(find_te(prob, u), te) < 1e-8);
  }
}

TEST_CASE("the maximiser of R_n agrees with a brute-force scan") {
  std::mt19937_64 gen(12);
  for (const auto& prob : {fixtures::double_power(32), fixtures::log_type(6)}) {
    const auto u = fixtures::random_field(prob.mesh(), gen);
    const Ray ray = Ray::through(prob, u);
    const double tn = find_tn(ray);
    double best = -1e300;
    double best_t = 0.0;
    for (double t : log_grid(tn / 10.0, tn * 10.0, 4001)) {
      if (ray.rn(t) > best) {
        best = ray.rn(t);
        best_t = t;
      }
    }
    CHECK(ray.rn(tn) >= best - 1e-12 * std::abs(best));
    CHECK(rel_err(best_t, tn) < 2e-3);
  }
}

TEST_CASE("Rayleigh identity R_n - R_e = (t / q) dR_e/dt") {
  std::mt19937_64 gen(13);
  for (const auto& prob : {fixtures::power2(32), fixtures::double_power(32), fixtures::log_type(6)}) {
    const auto u = fixtures::random_field(prob.mesh(), gen);
    const Ray ray = Ray::through(prob, u);
    const double tn = find_tn(ray);
    for (double t : log_grid(tn / 20.0, tn * 20.0, 50)) {
      const double fd = fixtures::central([&](double s) { return ray.re(s); }, t, 1e-5 * t);
      const double lhs = ray.rn(t) - ray.re(t);
      CHECK(rel_err(lhs, t / prob.q() * fd) < 1e-6);
      CHECK(rel_err(lhs, t / prob.q() * ray.dre_dt(t)) < 1e-10);
    }
  }
}

TEST_CASE("derivative formulas match finite differences") {
  std::mt19937_64 gen(14);
  const auto prob = fixtures::log_type(6);
  const auto u = fixtures::random_field(prob.mesh(), gen);
  const Ray ray = Ray::through(prob, u);
  for (double t : {0.2, 1.0, 4.0}) {
    const double fd = fixtures::central([&](double s) { return ray.rn(s); }, t, 1e-5 * t);
    CHECK(rel_err(ray.drn_dt(t), fd) < 1e-6);
  }
}

TEST_CASE("ordering, monotone residual functions and homogeneity") {
  std::mt19937_64 gen(15);
  for (const auto& prob : {fixtures::double_power(32), fixtures::log_type(6)}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto u = fixtures::random_field(prob.mesh(), gen);
      const Ray ray = Ray::through(prob, u);
      const double tn = find_tn(ray);
      const double te = find_te(ray);
      CHECK(tn < te);
      CHECK(ray.re(te) < ray.rn(tn));
      // The quotients cross at t_e.
      CHECK(rel_err(ray.re(te), ray.rn(te)) < 1e-8);
      double prev_h = 1e300;
      double prev_L = 1e300;
      for (double t : log_grid(1e-3, 1e3, 60)) {
        CHECK(ray.h(t) < prev_h);
        CHECK(ray.L(t) < prev_L);
        prev_h = ray.h(t);
        prev_L = ray.L(t);
      }
      for (double s : {0.1, 2.0, 10.0}) {
        CHECK(rel_err(find_tn(prob, u.scaled(s)), tn / s) < 1e-9);
      }
    }
  }
}

TEST_CASE("Nehari roots and classification") {
  const auto base = fixtures::double_power(32);
  const auto u = bump_field(base.mesh());
  const Ray ray = Ray::through(base, u);
  const double tn = find_tn(ray);
  const double Lam = ray.rn(tn);
  const double lam = 0.6 * Lam;
  const auto r = nehari_roots(ray, lam);
  REQUIRE(r.kind == RootKind::two_roots);
  CHECK(r.t_plus < tn);
  CHECK(tn < r.t_minus);
  CHECK(rel_err(ray.rn(r.t_plus), lam) < 1e-9);
  CHECK(rel_err(ray.rn(r.t_minus), lam) < 1e-9);

  const auto prob = base.with_lambda(lam);
  CHECK(classify(prob, u.scaled(r.t_plus)) == NehariClass::N_plus);
  CHECK(classify(prob, u.scaled(r.t_minus)) == NehariClass::N_minus);
  CHECK(classify(prob, u.scaled(tn)) == NehariClass::off_nehari);
  // On the Nehari set J'' (u, u) = t Q dR_n/dt; the fibering map has a local min at t+ and a max at t-.
  const double eps = 1e-4;
  auto gamma = [&](double t) { return ray.gamma(t, lam); };
  CHECK(gamma(r.t_plus) < gamma(r.t_plus * (1 + eps)));
  CHECK(gamma(r.t_plus) < gamma(r.t_plus * (1 - eps)));
  CHECK(gamma(r.t_minus) > gamma(r.t_minus * (1 + eps)));
  CHECK(gamma(r.t_minus) > gamma(r.t_minus * (1 - eps)));
  CHECK(gamma(r.t_plus) < 0.0);

  CHECK(nehari_roots(ray, 1.5 * Lam).kind == RootKind::no_root);
  const auto tie = nehari_roots(ray, Lam);
  CHECK(tie.kind == RootKind::degenerate);
  CHECK(tie.t_plus == tie.t_minus);
  CHECK(classify(base.with_lambda(Lam), u.scaled(tn), 1e-6) == NehariClass::N_zero);
  CHECK_THROWS_AS(nehari_roots(ray, 0.0), ContractViolation);
  CHECK_THROWS_AS(nehari_roots(ray, -1.0), ContractViolation);
}

TEST_CASE("degenerate directions and failed searches") {
  const auto prob = fixtures::double_power(16);
  CHECK_THROWS_AS(Ray::through(prob, Field::zero(prob.mesh())), DomainError);
  RootSearchOptions tight;
  tight.initial_lo = 1e-3;
  tight.initial_hi = 1e-2;
  tight.min_lo = 1e-3;
  tight.max_hi = 1e-2;
  const auto u = bump_field(prob.mesh());
  try {
    (void)find_tn(Ray::through(prob, u), tight);
    FAIL("expected SearchFailure");
  } catch (const SearchFailure& e) {
    CHECK(std::string(e.what()).find("residual signs") != std::string::npos);
  }
}

TEST_CASE("analyze_ray and the CSV trace") {
  const auto prob = fixtures::power2(32);
  const auto u = bump_field(prob.mesh());
  const auto a = analyze_ray(prob, u, 0.1);
  CHECK(a.t_n < a.t_e);
  CHECK(a.Lambda_e < a.Lambda_n);
  REQUIRE(a.roots.has_value());
  CHECK(a.lambda_used == 0.1);

  const Ray ray = Ray::through(prob, u);
  const std::vector<double> ts = {0.5, 1.0};
  const auto rows = ray_trace(ray, 0.1, ts);
  std::ostringstream os;
  write_ray_csv(os, rows);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,rn,re,gamma");
  std::getline(in, line);
  char buf[200];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g", 0.5, rows[0].rn, rows[0].re, rows[0].gamma);
  CHECK(line == buf);
}
