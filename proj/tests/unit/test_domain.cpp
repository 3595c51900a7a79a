#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fixtures.hpp"
#include "nehari/domain.hpp"
#include "nehari/errors.hpp"

using namespace nehari;
using fixtures::rel_err;

TEST_CASE("1D mesh layout") {
  const auto m = fixtures::line(8);
  CHECK(m.dim() == 1);
  CHECK(m.node_count() == 9);
  CHECK(m.element_count() == 8);
  CHECK(m.interior_count() == 7);
  CHECK(m.is_boundary(0));
  CHECK(m.is_boundary(8));
  CHECK_FALSE(m.is_boundary(4));
  CHECK(m.interior_index(0) == -1);
  CHECK(m.interior_index(1) == 0);
  CHECK(m.volume() == doctest::Approx(1.0));
  for (std::size_t e = 0; e < m.element_count(); ++e) CHECK(m.measure(e) == doctest::Approx(0.125));
}

TEST_CASE("2D mesh layout") {
  MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, -1.0};
  s.hi = {2.0, 1.0};
  s.subdivisions = {4, 3};
  const auto m = build_mesh(s);
  CHECK(m.node_count() == 5 * 4);
  CHECK(m.element_count() == 2 * 4 * 3);
  CHECK(m.interior_count() == 3 * 2);
  CHECK(m.volume() == doctest::Approx(4.0));
  // Node id = i (ny + 1) + j.
  CHECK(m.nodes()[1 * 4 + 2].x == doctest::Approx(0.5));
  CHECK(m.nodes()[1 * 4 + 2].y == doctest::Approx(1.0 / 3.0));
  // Hat gradients sum to zero on every element.
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    double gx = 0.0;
    double gy = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      gx += m.basis_gradient(e, k)[0];
      gy += m.basis_gradient(e, k)[1];
    }
    CHECK(std::abs(gx) < 1e-12);
    CHECK(std::abs(gy) < 1e-12);
  }
}

TEST_CASE("mesh spec errors") {
  MeshSpec s;
  s.subdivisions = {1};
  CHECK_THROWS_AS(build_mesh(s), ConfigError);
  s.subdivisions = {4};
  s.hi = {0.0};
  CHECK_THROWS_AS(build_mesh(s), ConfigError);
  s.hi = {1.0};
  s.dim = 3;
  CHECK_THROWS_AS(build_mesh(s), ConfigError);
  s.dim = 2;
  CHECK_THROWS_AS(build_mesh(s), ConfigError);
}

TEST_CASE("fields vanish on the boundary") {
  const auto m = fixtures::line(4);
  CHECK_THROWS_AS(Field(m, {1.0, 0.0, 0.0, 0.0, 0.0}), ContractViolation);
  CHECK_THROWS_AS(Field(m, {0.0, 1.0}), ContractViolation);
  const std::vector<double> inner = {1.0, -2.0, 3.0};
  const auto f = Field::from_interior(m, inner);
  CHECK(f.interior_values(m) == inner);
  CHECK(f.abs()[2] == 2.0);
  CHECK(f.scaled(2.0)[3] == 6.0);
  CHECK(f.nodal_norm() == doctest::Approx(std::sqrt(14.0)));
  CHECK(Field::zero(m).is_zero());
  CHECK_FALSE(f.is_zero());
}

TEST_CASE("mass integrals match the element mass matrix") {
  // Oracle: int u^2 over a P1 segment of length h is h/3 (a^2 + ab + b^2).
  const auto m = fixtures::line(10);
  std::mt19937_64 gen(3);
  const auto u = fixtures::random_field(m, gen);
  double exact = 0.0;
  for (std::size_t e = 0; e < m.element_count(); ++e) {
    const double a = u[e];
    const double b = u[e + 1];
    exact += m.measure(e) / 3.0 * (a * a + a * b + b * b);
  }
  CHECK(rel_err(lp_norm_pow(m, u, 2.0), exact) < 1e-13);

  // On triangles the edge-midpoint rule is exact for quadratics: |T|/6 (sum u_i^2 + sum_{i<j} u_i u_j).
  const auto sq = fixtures::square(5);
  const auto v = fixtures::random_field(sq, gen);
  double tri = 0.0;
  for (std::size_t e = 0; e < sq.element_count(); ++e) {
    const auto n = sq.element(e);
    const double a = v[n[0]], b = v[n[1]], c = v[n[2]];
    tri += sq.measure(e) / 6.0 * (a * a + b * b + c * c + a * b + b * c + a * c);
  }
  CHECK(rel_err(lp_norm_pow(sq, v, 2.0), tri) < 1e-13);
}

TEST_CASE("norms converge to the continuum values") {
  // int_0^1 sin^2(pi x) dx = 1/2, int sin^4 = 3/8.
  double prev2 = 1.0;
  for (int n : {16, 32, 64}) {
    const auto m = fixtures::line(n);
    const auto u = bump_field(m);
    const double e2 = std::abs(lp_norm_pow(m, u, 2.0) - 0.5);
    CHECK(e2 < prev2 / 3.0);
    prev2 = e2;
    CHECK(std::abs(lp_norm_pow(m, u, 4.0) - 0.375) < 5.0 / (n * n));
  }
  // Weighted integral scales with a constant weight.
  const auto m = fixtures::line(32);
  const auto w = Weight::constant(m, 3.0);
  const auto u = bump_field(m);
  CHECK(rel_err(lp_norm_pow(m, u, 1.5, &w), 3.0 * lp_norm_pow(m, u, 1.5)) < 1e-14);
  CHECK(w.floor() == 3.0);
}

TEST_CASE("element gradients of an interpolated linear function") {
  const auto m = fixtures::square(4);
  // u = x on interior nodes only is not linear; use the exact tent u(x, y) and check one interior element.
  std::vector<double> vals(m.node_count(), 0.0);
  const std::size_t centre = 2 * 5 + 2;
  vals[centre] = 1.0;
  const auto g = element_gradients(m, vals);
  double total = 0.0;
  for (std::size_t e = 0; e < g.size(); ++e) total += g[e] * g[e] * m.measure(e);
  // Dirichlet energy of one hat on this mesh type is 4 (standard 5-point stencil diagonal).
  CHECK(total == doctest::Approx(4.0));
}

TEST_CASE("presets") {
  const auto m = fixtures::line(16);
  const auto b = bump_field(m);
  CHECK(b[8] == doctest::Approx(1.0));
  const auto s2 = sine_field(m, 2);
  CHECK(std::abs(s2[8]) < 1e-12);
  CHECK_THROWS_AS(sine_field(m, 0), ContractViolation);
  const auto r1 = random_field(m, 42, true);
  const auto r2 = random_field(m, 42, true);
  CHECK(std::equal(r1.values().begin(), r1.values().end(), r2.values().begin()));
  for (std::size_t i : m.interior_nodes()) {
    CHECK(r1[i] > 0.0);
    CHECK(r1[i] <= 1.0);
  }
  const auto r3 = random_field(m, 43, false);
  bool has_negative = false;
  for (double v : r3.values()) has_negative = has_negative || v < 0.0;
  CHECK(has_negative);
}

TEST_CASE("nodal CSV round trip and errors") {
  const auto m = fixtures::line(6);
  std::mt19937_64 gen(5);
  const auto u = fixtures::random_field(m, gen);
  std::stringstream ss;
  write_nodal_csv(ss, u.values());
  CHECK(ss.str().rfind("node_index,value\n", 0) == 0);
  const auto back = read_nodal_csv(ss, m.node_count());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(rel_err(back[i] + 1.0, u[i] + 1.0) < 1e-11);

  std::istringstream bad_header("idx,value\n0,1\n");
  CHECK_THROWS_AS(read_nodal_csv(bad_header, 1), ConfigError);
  std::istringstream missing("node_index,value\n0,1\n");
  CHECK_THROWS_AS(read_nodal_csv(missing, 2), ConfigError);
  std::istringstream junk("node_index,value\n0,abc\n");
  CHECK_THROWS_AS(read_nodal_csv(junk, 1), ConfigError);
  std::istringstream repeat("node_index,value\n0,1\n0,2\n");
  CHECK_THROWS_AS(read_nodal_csv(repeat, 2), ConfigError);
}
