#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fixtures.hpp"
#include "nehari/errors.hpp"
#include "nehari/nfunction.hpp"

using namespace nehari;
using fixtures::rel_err;

namespace {

// Composite Simpson of s phi(s) on [0, t] after s = x^2, which smooths the
// square-root behaviour of s phi(s) at zero; independent of the closed forms.
double simpson_Phi(const NFunctionModel& m, double t, int n = 20000) {
  const double h = std::sqrt(t) / n;
  auto f = [&](double x) { return x > 0.0 ? 2.0 * x * x * x * m.phi(x * x) : 0.0; };
  double sum = f(0.0) + f(std::sqrt(t));
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("power family closed forms") {
  const auto m = NFunctionModel::power(3.0);
  for (double t : {1e-3, 0.5, 2.0, 40.0}) {
    CHECK(rel_err(m.Phi(t), std::pow(t, 3.0) / 3.0) < 1e-14);
    CHECK(rel_err(m.phi(t), t) < 1e-14);
    CHECK(rel_err(m.dphi(t), 1.0) < 1e-14);
  }
  CHECK(m.ell() == 3.0);
  CHECK(m.m_idx() == 3.0);
}

TEST_CASE("evaluate at zero and below") {
  const auto m = NFunctionModel::log_type();
  const auto v = evaluate(m, 0.0);
  CHECK(v.Phi == 0.0);
  CHECK_FALSE(v.phi.has_value());
  CHECK_FALSE(v.dphi.has_value());
  CHECK_THROWS_AS(evaluate(m, -1.0), DomainError);
  const auto w = evaluate(NFunctionModel::double_power(2.0, 3.0), 2.0);
  REQUIRE(w.phi.has_value());
  CHECK(rel_err(*w.phi, 3.0) < 1e-14);
  CHECK(rel_err(w.Phi, 2.0 + 8.0 / 3.0) < 1e-14);
}

TEST_CASE("Phi agrees with quadrature of s phi(s)") {
  for (const auto& m : {NFunctionModel::log_type(), NFunctionModel::double_power(2.0, 3.0),
                        NFunctionModel::double_power(1.5, 2.5), NFunctionModel::power(1.7)}) {
    for (double t : {1e-4, 0.3, 0.5, 1.0, 7.0, 300.0}) {
      CAPTURE(m.name());
      CAPTURE(t);
      CHECK(rel_err(m.Phi(t), simpson_Phi(m, t)) < 1e-8);
    }
  }
}

TEST_CASE("log type Phi keeps precision for tiny arguments") {
  const auto m = NFunctionModel::log_type();
  // Phi(t) = sum_k (-1)^(k+1) t^(k+2) / (k (k+2)) near zero.
  for (double t : {1e-8, 1e-5, 1e-3}) {
    double series = 0.0;
    for (int k = 1; k <= 6; ++k) series += (k % 2 ? 1.0 : -1.0) * std::pow(t, k + 2) / (k * (k + 2));
    CHECK(rel_err(m.Phi(t), series) < 1e-10);
  }
}

TEST_CASE("derivatives match central differences") {
  for (const auto& m : {NFunctionModel::log_type(), NFunctionModel::double_power(2.0, 3.0),
                        NFunctionModel::power(2.5)}) {
    for (double t : {0.01, 0.4, 3.0, 50.0}) {
      const double h = 1e-5 * t;
      const double dPhi = fixtures::central([&](double s) { return m.Phi(s); }, t, h);
      const double dphi = fixtures::central([&](double s) { return m.phi(s); }, t, h);
      CAPTURE(m.name());
      CAPTURE(t);
      CHECK(rel_err(dPhi, t * m.phi(t)) < 1e-7);
      CHECK(rel_err(dphi, m.dphi(t)) < 1e-6);
    }
  }
}

TEST_CASE("moments bundle the three integrands") {
  for (const auto& m : {NFunctionModel::log_type(), NFunctionModel::double_power(2.0, 3.0),
                        NFunctionModel::power(1.8)}) {
    for (double g : {1e-3, 0.7, 9.0}) {
      const auto mo = m.moments(g);
      const auto fl = m.flux_moments(g);
      CHECK(rel_err(mo.Phi, m.Phi(g)) < 1e-13);
      CHECK(rel_err(mo.A, m.phi(g) * g * g) < 1e-13);
      CHECK(rel_err(mo.D, m.dphi(g) * g * g * g) < 1e-13);
      CHECK(fl.A == doctest::Approx(mo.A).epsilon(1e-15));
      CHECK(fl.D == doctest::Approx(mo.D).epsilon(1e-15));
    }
  }
}

TEST_CASE("growth indices") {
  const auto lg = NFunctionModel::log_type();
  CHECK(lg.ell() == 2.0);
  CHECK(lg.m_idx() == 3.0);
  const auto dp = NFunctionModel::double_power(2.0, 3.0);
  CHECK(dp.ell() == 2.0);
  CHECK(dp.m_idx() == 3.0);

  // A custom model sampled on the default grid recovers the indices of the same phi.
  const auto custom = NFunctionModel::custom([](double t) { return 1.0 + t; }, [](double) { return 1.0; }, "1+t");
  CHECK(custom.ell() == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(custom.m_idx() == doctest::Approx(3.0).epsilon(1e-5));
  for (double t : {1e-3, 0.2, 5.0}) CHECK(rel_err(custom.Phi(t), dp.Phi(t)) < 1e-9);

  // Brute-force oracle: extrema of 2 + phi' t / phi over a dense grid bound the log-type indices.
  double lo = 1e300;
  double hi = -1e300;
  for (double t : log_grid(1e-6, 1e6, 4000)) {
    const double idx = 2.0 + lg.dphi(t) * t / lg.phi(t);
    lo = std::min(lo, idx);
    hi = std::max(hi, idx);
  }
  CHECK(lo >= lg.ell() - 1e-12);
  CHECK(hi <= lg.m_idx() + 1e-12);
  CHECK(lo < 2.0 + 0.1);
  CHECK(hi > 3.0 - 1e-4);
}

TEST_CASE("compute_indices rejects a short grid for sampled models") {
  const auto custom = NFunctionModel::custom([](double t) { return 1.0 + t; }, [](double) { return 1.0; }, "1+t");
  CHECK_THROWS_AS(compute_indices(custom, log_grid(1e-3, 1e3, 50)), ConfigError);
  CHECK_THROWS_AS(compute_indices(custom, log_grid(1e-6, 1e6, 100)), ConfigError);
  // Built-in families report their exact indices for any grid.
  const auto idx = compute_indices(NFunctionModel::log_type(), log_grid(1e-3, 1e3, 50));
  CHECK(idx.ell == 2.0);
  CHECK(idx.m == 3.0);
}

TEST_CASE("critical exponent") {
  CHECK(critical_exponent(2.0, 3) == doctest::Approx(6.0));
  CHECK(std::isinf(critical_exponent(2.0, 2)));
  CHECK(std::isinf(critical_exponent(2.0, 1)));
  CHECK(critical_exponent(1.5, 2) == doctest::Approx(6.0));
}

TEST_CASE("validate: log type with q = 1.5, p = 7, N = 2 passes everything") {
  ValidationInput in;
  in.q = 1.5;
  in.p = 7.0;
  in.dim = 2;
  in.weight_floor = 1.0;
  const auto r = validate_hypotheses(NFunctionModel::log_type(), in);
  for (const auto& e : r.entries) {
    CAPTURE(to_string(e.id));
    CAPTURE(e.witness);
    CHECK(e.verdict == Verdict::pass);
  }
  CHECK(r.all_pass());
}

TEST_CASE("validate: exponent failures carry witnesses") {
  ValidationInput in;
  in.q = 1.5;
  in.p = 5.9;
  in.dim = 2;
  auto r = validate_hypotheses(NFunctionModel::log_type(), in);
  CHECK(r.verdict(Hypothesis::H4) == Verdict::fail);
  CHECK(r.at(Hypothesis::H4).witness.find("6") != std::string::npos);
  CHECK(r.verdict(Hypothesis::H1) == Verdict::pass);
  CHECK(r.verdict(Hypothesis::H2) == Verdict::not_applicable);

  in.q = 2.5;
  in.p = 7.0;
  r = validate_hypotheses(NFunctionModel::log_type(), in);
  CHECK(r.verdict(Hypothesis::H1) == Verdict::fail);
  CHECK(r.at(Hypothesis::H1).witness.find("ell") != std::string::npos);

  in.q = 1.5;
  in.dim = 3;
  in.p = 6.5;  // ell* = 6
  r = validate_hypotheses(NFunctionModel::log_type(), in);
  CHECK(r.verdict(Hypothesis::H1) == Verdict::fail);

  in.dim = 2;
  in.weight_floor = 0.0;
  r = validate_hypotheses(NFunctionModel::log_type(), in);
  CHECK(r.verdict(Hypothesis::H2) == Verdict::fail);
}

TEST_CASE("validate: growth faster than t^N fails phi3") {
  ValidationInput in;
  in.q = 1.5;
  in.p = 7.0;
  in.dim = 1;
  const auto r = validate_hypotheses(NFunctionModel::double_power(2.0, 3.0), in);
  CHECK(r.verdict(Hypothesis::phi3) == Verdict::fail);
  in.dim = 3;
  CHECK(validate_hypotheses(NFunctionModel::double_power(2.0, 3.0), in).verdict(Hypothesis::phi3) == Verdict::pass);
}

TEST_CASE("validate: H3 monotonicity matches a direct scan") {
  const auto m = NFunctionModel::double_power(2.0, 3.0);
  for (double p : {2.5, 3.0, 4.0, 7.0}) {
    ValidationInput in;
    in.q = 1.5;
    in.p = p;
    in.dim = 3;
    const auto r = validate_hypotheses(m, in);
    // Oracle: ((2-q)(1+t) + t) / t^(p-2) = (0.5 + 1.5 t) t^(2-p), decreasing iff p > 2.
    bool decreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : log_grid()) {
      const double v = (0.5 + 1.5 * t) * std::pow(t, 2.0 - p);
      if (!(v < prev)) decreasing = false;
      prev = v;
    }
    CAPTURE(p);
    CHECK((r.verdict(Hypothesis::H3) == Verdict::pass) == decreasing);
  }
}

TEST_CASE("validate: phi5 convexity") {
  ValidationInput in;
  in.q = 1.5;
  in.p = 7.0;
  in.dim = 2;
  CHECK(validate_hypotheses(NFunctionModel::log_type(), in).verdict(Hypothesis::phi5) == Verdict::pass);
  // p Phi - phi t^2 = (p/r - 1) t^r is concave when p < r and r > 1.
  in.p = 2.0;
  CHECK(validate_hypotheses(NFunctionModel::power(3.0), in).verdict(Hypothesis::phi5) == Verdict::fail);
}

TEST_CASE("sandwich inequalities on 200 log-spaced samples") {
  const auto rhos = log_grid(1e-4, 1e4, 20);
  const auto ts = log_grid(1e-3, 1e3, 10);
  std::vector<std::pair<double, double>> samples;
  for (double r : rhos)
    for (double t : ts) samples.emplace_back(r, t);
  REQUIRE(samples.size() == 200);
  for (const auto& m : {NFunctionModel::log_type(), NFunctionModel::double_power(2.0, 3.0),
                        NFunctionModel::power(2.0), NFunctionModel::double_power(1.5, 4.0)}) {
    const auto r = sandwich_check(m, samples, 1e-9);
    CAPTURE(m.name());
    CAPTURE(r.worst_ratio);
    CHECK(r.pass);
    CHECK(r.worst_ratio <= 1.0 + 1e-9);
  }
}

TEST_CASE("sandwich bounds are saturated by a pure power") {
  std::vector<std::pair<double, double>> samples = {{0.5, 3.0}, {2.0, 0.1}, {10.0, 10.0}};
  const auto r = sandwich_check(NFunctionModel::power(2.5), samples, 1e-12);
  CHECK(r.pass);
  CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));
  const auto lg = sandwich_check(NFunctionModel::log_type(), samples, 1e-12);
  CHECK(lg.worst_ratio < 1.0);
}
