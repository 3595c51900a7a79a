#include "nehari/nfunction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// int_0^t s ln(1+s) ds. The closed form cancels badly for small t, so a
// power series is used below 0.5.
double log_type_Phi(double t) {
  if (t < 0.5) {
    double sum = 0.0;
    double tk = t * t * t;  // t^(k+2) for k = 1
    for (int k = 1; k < 400; ++k) {
      const double term = tk / (static_cast<double>(k) * (k + 2));
      sum += (k % 2 == 1) ? term : -term;
      if (term <= 1e-18 * sum) break;
      tk *= t;
    }
    return sum;
  }
  const double lg = std::log1p(t);
  return 0.5 * (t * t - 1.0) * lg - 0.25 * t * t + 0.5 * t;
}

void require_finite(double v, double t, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + " is not finite at t = " + fmt_num(t));
  }
}

}  // namespace

std::string_view to_string(Family family) {
  switch (family) {
    case Family::power: return "power";
    case Family::double_power: return "double_power";
    case Family::log_type: return "log_type";
    case Family::custom: return "custom";
  }
  return "unknown";
}

NFunctionModel NFunctionModel::power(double r) {
  if (!(r > 1.0) || !std::isfinite(r)) throw ConfigError("power family needs r > 1, got " + fmt_num(r));
  NFunctionModel m;
  m.family_ = Family::power;
  m.r1_ = m.r2_ = r;
  m.name_ = "power";
  m.indices_ = {r, r};
  return m;
}

NFunctionModel NFunctionModel::double_power(double r1, double r2) {
  if (!(r1 > 1.0) || !(r2 > 1.0) || !std::isfinite(r1) || !std::isfinite(r2)) {
    throw ConfigError("double_power family needs r1, r2 > 1");
  }
  NFunctionModel m;
  m.family_ = Family::double_power;
  m.r1_ = r1;
  m.r2_ = r2;
  m.name_ = "double_power";
  m.indices_ = {std::min(r1, r2), std::max(r1, r2)};
  return m;
}

NFunctionModel NFunctionModel::log_type() {
  NFunctionModel m;
  m.family_ = Family::log_type;
  m.name_ = "log_type";
  m.indices_ = {2.0, 3.0};
  return m;
}

NFunctionModel NFunctionModel::custom(ScalarFn phi, ScalarFn dphi, std::string name) {
  if (!phi || !dphi) throw ConfigError("custom N-function needs both phi and phi'");
  NFunctionModel m;
  m.family_ = Family::custom;
  m.phi_fn_ = std::move(phi);
  m.dphi_fn_ = std::move(dphi);
  m.name_ = std::move(name);
  const auto grid = log_grid();
  m.indices_ = compute_indices(m, grid);
  return m;
}

std::vector<double> NFunctionModel::parameters() const {
  switch (family_) {
    case Family::power: return {r1_};
    case Family::double_power: return {r1_, r2_};
    default: return {};
  }
}

double NFunctionModel::phi(double t) const {
  switch (family_) {
    case Family::power: return std::pow(t, r1_ - 2.0);
    case Family::double_power: return std::pow(t, r1_ - 2.0) + std::pow(t, r2_ - 2.0);
    case Family::log_type: return std::log1p(t);
    case Family::custom: return phi_fn_(t);
  }
  return 0.0;
}

double NFunctionModel::dphi(double t) const {
  switch (family_) {
    case Family::power: return (r1_ - 2.0) * std::pow(t, r1_ - 3.0);
    case Family::double_power:
      return (r1_ - 2.0) * std::pow(t, r1_ - 3.0) + (r2_ - 2.0) * std::pow(t, r2_ - 3.0);
    case Family::log_type: return 1.0 / (1.0 + t);
    case Family::custom: return dphi_fn_(t);
  }
  return 0.0;
}

double NFunctionModel::Phi(double t) const {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  switch (family_) {
    case Family::power: return std::pow(t, r1_) / r1_;
    case Family::double_power: return std::pow(t, r1_) / r1_ + std::pow(t, r2_) / r2_;
    case Family::log_type: return log_type_Phi(t);
    case Family::custom: {
      auto integrand = [this](double s) { return s > 0.0 ? s * phi_fn_(s) : 0.0; };
      return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, t, 30,
                                                                          1e-10);
    }
  }
  return 0.0;
}

double NFunctionModel::index(double t) const {
  switch (family_) {
    case Family::power: return r1_ - 2.0;
    case Family::double_power: {
      // Weighted average of (r1 - 2) and (r2 - 2), written without overflow.
      const double w1 = 1.0 / (1.0 + std::pow(t, r2_ - r1_));
      return w1 * (r1_ - 2.0) + (1.0 - w1) * (r2_ - 2.0);
    }
    case Family::log_type: return t / ((1.0 + t) * std::log1p(t));
    case Family::custom: return dphi_fn_(t) * t / phi_fn_(t);
  }
  return 0.0;
}

NFunctionModel::Moments NFunctionModel::flux_moments(double g) const {
  Moments out;
  switch (family_) {
    case Family::power: {
      const double a = std::pow(g, r1_);
      out.A = a;
      out.D = (r1_ - 2.0) * a;
      break;
    }
    case Family::double_power: {
      const double a1 = std::pow(g, r1_);
      const double a2 = std::pow(g, r2_);
      out.A = a1 + a2;
      out.D = (r1_ - 2.0) * a1 + (r2_ - 2.0) * a2;
      break;
    }
    case Family::log_type: {
      const double g2 = g * g;
      out.A = std::log1p(g) * g2;
      out.D = g2 * g / (1.0 + g);
      break;
    }
    case Family::custom: {
      const double g2 = g * g;
      out.A = phi_fn_(g) * g2;
      out.D = dphi_fn_(g) * g2 * g;
      break;
    }
  }
  return out;
}

NFunctionModel::Moments NFunctionModel::moments(double g) const {
  Moments out;
  switch (family_) {
    case Family::power: {
      const double a = std::pow(g, r1_);
      out.Phi = a / r1_;
      out.A = a;
      out.D = (r1_ - 2.0) * a;
      break;
    }
    case Family::double_power: {
      const double a1 = std::pow(g, r1_);
      const double a2 = std::pow(g, r2_);
      out.Phi = a1 / r1_ + a2 / r2_;
      out.A = a1 + a2;
      out.D = (r1_ - 2.0) * a1 + (r2_ - 2.0) * a2;
      break;
    }
    default:
      out = flux_moments(g);
      out.Phi = Phi(g);
      break;
  }
  return out;
}

NValues evaluate(const NFunctionModel& model, double t) {
  if (!(t >= 0.0)) throw DomainError("N-function evaluated at negative t = " + fmt_num(t));
  NValues out;
  out.Phi = model.Phi(t);
  require_finite(out.Phi, t, "Phi");
  if (t > 0.0) {
    out.phi = model.phi(t);
    out.dphi = model.dphi(t);
    require_finite(*out.phi, t, "phi");
    require_finite(*out.dphi, t, "phi'");
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) throw ConfigError("log_grid needs 0 < lo < hi and count >= 2");
  std::vector<double> grid(count);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    grid[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

GrowthIndices compute_indices(const NFunctionModel& model, std::span<const double> grid) {
  if (model.family() != Family::custom) {
    switch (model.family()) {
      case Family::power: {
        const double r = model.parameters()[0];
        return {r, r};
      }
      case Family::double_power: {
        const auto r = model.parameters();
        return {std::min(r[0], r[1]), std::max(r[0], r[1])};
      }
      case Family::log_type: return {2.0, 3.0};
      default: break;
    }
  }
  if (grid.size() < 200 || grid.front() > 1e-6 * (1 + 1e-12) || grid.back() < 1e6 * (1 - 1e-12)) {
    throw ConfigError("index grid must span [1e-6, 1e6] with at least 200 points");
  }
  double lo = kInf;
  double hi = -kInf;
  for (double t : grid) {
    const double idx = model.index(t);
    if (!std::isfinite(idx)) throw ValidationError("growth index is not finite at t = " + fmt_num(t));
    lo = std::min(lo, idx);
    hi = std::max(hi, idx);
  }
  return {2.0 + lo, 2.0 + hi};
}

double critical_exponent(double ell, int dim) {
  if (ell >= static_cast<double>(dim)) return kInf;
  return dim * ell / (dim - ell);
}

std::string_view to_string(Hypothesis id) {
  switch (id) {
    case Hypothesis::phi1: return "phi1";
    case Hypothesis::phi2: return "phi2";
    case Hypothesis::phi3: return "phi3";
    case Hypothesis::phi4: return "phi4";
    case Hypothesis::phi5: return "phi5";
    case Hypothesis::H1: return "H1";
    case Hypothesis::H2: return "H2";
    case Hypothesis::H3: return "H3";
    case Hypothesis::H4: return "H4";
  }
  return "?";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::not_applicable: return "n/a";
  }
  return "?";
}

bool HypothesisReport::all_pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const HypothesisEntry& e) { return e.verdict != Verdict::fail; });
}

bool HypothesisReport::any_fail() const { return !all_pass(); }

namespace {

struct MonotoneWitness {
  bool ok = true;
  double t = 0.0;
};

// Consecutive values must move in `direction` (+1 increase, -1 decrease);
// `slack` forgives relative rounding noise only.
MonotoneWitness check_monotone(std::span<const double> grid, std::span<const double> values, int direction,
                               double slack) {
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    const double diff = direction * (values[i + 1] - values[i]);
    const double scale = std::max(std::abs(values[i]), std::abs(values[i + 1]));
    if (!(diff > -slack * scale) || !std::isfinite(values[i + 1])) return {false, grid[i + 1]};
  }
  return {};
}

// Asymptotic power of Phi at infinity.
double growth_at_infinity(const NFunctionModel& model, std::span<const double> grid) {
  switch (model.family()) {
    case Family::power:
    case Family::double_power: return model.m_idx();
    case Family::log_type: return 2.0;  // t^2 ln t: the log factor keeps the borderline integral divergent
    case Family::custom: return 2.0 + model.index(grid.back());
  }
  return kInf;
}

}  // namespace

HypothesisReport validate_hypotheses(const NFunctionModel& model, const ValidationInput& in) {
  const auto grid = log_grid();
  return validate_hypotheses(model, in, grid);
}

HypothesisReport validate_hypotheses(const NFunctionModel& model, const ValidationInput& in,
                                     std::span<const double> grid) {
  HypothesisReport report;
  for (std::size_t i = 0; i < kHypothesisCount; ++i) report.entries[i].id = static_cast<Hypothesis>(i);
  auto set = [&](Hypothesis id, bool ok, std::string witness = {}, std::optional<double> t = {}) {
    auto& e = report.entries[static_cast<std::size_t>(id)];
    e.verdict = ok ? Verdict::pass : Verdict::fail;
    if (!ok) {
      e.witness = std::move(witness);
      e.witness_t = t;
    }
  };

  const double q = in.q;
  const double p = in.p;
  const double ell = model.ell();
  const double m = model.m_idx();
  const double ell_star = critical_exponent(ell, in.dim);
  const auto star_text = [&] { return std::isinf(ell_star) ? std::string("inf") : fmt_num(ell_star); };

  // phi1 / phi2: t phi(t) grows like a positive power at both ends and increases.
  std::vector<double> tphi(grid.size());
  double min_slope = kInf;
  double min_slope_t = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    tphi[i] = t * model.phi(t);
    const double slope = 1.0 + model.index(t);
    if (!std::isfinite(slope) || slope < min_slope) {
      min_slope = std::isfinite(slope) ? slope : -kInf;
      min_slope_t = t;
    }
  }
  {
    const bool ends = tphi.front() < tphi.back();
    const bool ok = min_slope > 0.0 && ends;
    set(Hypothesis::phi1, ok,
        "log-slope of t*phi(t) is " + fmt_num(min_slope) + " <= 0 at t = " + fmt_num(min_slope_t),
        min_slope_t);
  }
  {
    const auto mono = check_monotone(grid, tphi, +1, in.monotone_slack);
    set(Hypothesis::phi2, mono.ok, "t*phi(t) fails to increase at t = " + fmt_num(mono.t), mono.t);
  }

  // phi3: divergence of int_1^inf Phi^{-1}(s) s^{-(N+1)/N} ds, decided by the growth at infinity.
  {
    const double growth = growth_at_infinity(model, grid);
    const bool ok = growth <= in.dim + 1e-9;
    set(Hypothesis::phi3, ok,
        "Phi grows like t^" + fmt_num(growth) + " at infinity, faster than t^N with N = " + std::to_string(in.dim));
  }

  // phi4
  {
    const bool ok = ell > 1.0 && std::isfinite(m) && ell <= m;
    set(Hypothesis::phi4, ok, "(ell, m) = (" + fmt_num(ell) + ", " + fmt_num(m) + ")");
  }

  // phi5: S(t) = p Phi(t) - phi(t) t^2 is convex (non-decreasing divided differences).
  {
    std::vector<double> s(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      s[i] = p * model.Phi(t) - model.phi(t) * t * t;
    }
    bool ok = true;
    double witness = 0.0;
    double prev_slope = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      const double slope = (s[i + 1] - s[i]) / (grid[i + 1] - grid[i]);
      if (i > 0) {
        const double scale = std::max(std::abs(slope), std::abs(prev_slope));
        if (!(slope - prev_slope >= -in.convexity_slack * scale)) {
          ok = false;
          witness = grid[i];
          break;
        }
      }
      prev_slope = slope;
    }
    set(Hypothesis::phi5, ok, "S(t) = p Phi - phi t^2 loses convexity near t = " + fmt_num(witness), witness);
  }

  // H1: 1 < q < ell <= m < p < ell*
  {
    std::string why;
    if (!(q > 1.0)) why = "q = " + fmt_num(q) + " <= 1";
    else if (!(q < ell)) why = "q = " + fmt_num(q) + " >= ell = " + fmt_num(ell);
    else if (!(ell <= m)) why = "ell = " + fmt_num(ell) + " > m = " + fmt_num(m);
    else if (!(m < p)) why = "p = " + fmt_num(p) + " <= m = " + fmt_num(m);
    else if (!(p < ell_star)) why = "p = " + fmt_num(p) + " >= ell* = " + star_text();
    set(Hypothesis::H1, why.empty(),
        why + " (q, ell, m, p, ell*) = (" + fmt_num(q) + ", " + fmt_num(ell) + ", " + fmt_num(m) + ", " +
            fmt_num(p) + ", " + star_text() + ")");
  }

  // H2: positive floor of the weight
  if (in.weight_floor) {
    const double a0 = *in.weight_floor;
    set(Hypothesis::H2, a0 > 0.0 && std::isfinite(a0), "weight floor a0 = " + fmt_num(a0) + " is not positive");
  }

  // H3: ((2 - q) phi(t) + phi'(t) t) / t^(p-2) strictly decreasing.
  {
    std::vector<double> g(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      g[i] = ((2.0 - q) * model.phi(t) + model.dphi(t) * t) / std::pow(t, p - 2.0);
    }
    const auto mono = check_monotone(grid, g, -1, in.monotone_slack);
    set(Hypothesis::H3, mono.ok,
        "((2-q) phi + phi' t) / t^(p-2) fails to decrease at t = " + fmt_num(mono.t), mono.t);
  }

  // H4: ell (m - q) / (ell - q) < p < ell*
  {
    const double lower = ell > q ? ell * (m - q) / (ell - q) : kInf;
    const bool ok = lower < p && p < ell_star;
    set(Hypothesis::H4, ok,
        "need " + fmt_num(lower) + " < p = " + fmt_num(p) + " < ell* = " + star_text());
  }
  return report;
}

SandwichResult sandwich_check(const NFunctionModel& model, std::span<const std::pair<double, double>> samples,
                              double rel_slack) {
  const double ell = model.ell();
  const double m = model.m_idx();
  SandwichResult out;
  auto record = [&](double lhs, double rhs, double rho, double t) {
    double ratio;
    if (rhs > 0.0) ratio = lhs / rhs;
    else ratio = lhs <= 0.0 ? 1.0 : kInf;
    if (ratio > out.worst_ratio || !std::isfinite(ratio)) {
      out.worst_ratio = ratio;
      out.worst_rho = rho;
      out.worst_t = t;
    }
  };
  auto index_bounds = [&](double s, double rho, double t) {
    const double Phi = model.Phi(s);
    const double phits2 = model.phi(s) * s * s;
    record(ell * Phi, phits2, rho, t);
    record(phits2, m * Phi, rho, t);
  };
  for (const auto& [rho, t] : samples) {
    const double Phi_rho = model.Phi(rho);
    const double Phi_rt = model.Phi(rho * t);
    const double a = std::pow(t, ell);
    const double b = std::pow(t, m);
    record(std::min(a, b) * Phi_rho, Phi_rt, rho, t);
    record(Phi_rt, std::max(a, b) * Phi_rho, rho, t);
    index_bounds(rho, rho, t);
    index_bounds(rho * t, rho, t);
  }
  out.pass = out.worst_ratio <= 1.0 + rel_slack;
  return out;
}

}  // namespace nehari
