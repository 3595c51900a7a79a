#pragma once

// N-function families Phi(t) = int_0^|t| s phi(s) ds, their growth indices and
// numeric validators for the structural hypotheses placed on phi and on the
// exponents (q, p).

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nehari {

enum class Family { power, double_power, log_type, custom };

std::string_view to_string(Family family);

/// Values of (Phi, phi, phi') at one point. phi and phi' are only defined for t > 0.
struct NValues {
  double Phi = 0.0;
  std::optional<double> phi;
  std::optional<double> dphi;
};

struct GrowthIndices {
  double ell = 0.0;
  double m = 0.0;
};

/// An N-function model: the triple (phi, phi', Phi) together with its growth
/// indices ell <= m, where ell - 2 <= phi'(t) t / phi(t) <= m - 2.
///
/// Built-in families evaluate in closed form. A custom model supplies phi and
/// phi'; Phi is then obtained by adaptive quadrature and the indices by
/// sampling the default grid.
class NFunctionModel {
 public:
  using ScalarFn = std::function<double(double)>;

  /// phi(t) = t^(r-2), Phi(t) = t^r / r.
  static NFunctionModel power(double r);
  /// phi(t) = t^(r1-2) + t^(r2-2): the (r1, r2)-Laplacian.
  static NFunctionModel double_power(double r1, double r2);
  /// phi(t) = ln(1 + t).
  static NFunctionModel log_type();
  static NFunctionModel custom(ScalarFn phi, ScalarFn dphi, std::string name = "custom");

  Family family() const noexcept { return family_; }
  /// r for power, (r1, r2) for double_power; empty otherwise.
  std::vector<double> parameters() const;
  const std::string& name() const noexcept { return name_; }

  double phi(double t) const;
  double dphi(double t) const;
  double Phi(double t) const;

  /// phi'(t) t / phi(t); the growth indices bound 2 + index.
  double index(double t) const;

  /// Phi(g), phi(g) g^2 and phi'(g) g^3 at one g > 0, sharing work between the three.
  struct Moments {
    double Phi = 0.0;
    double A = 0.0;
    double D = 0.0;
  };
  Moments moments(double g) const;
  /// Same as moments() without Phi, which is the expensive part for some families.
  Moments flux_moments(double g) const;

  double ell() const noexcept { return indices_.ell; }
  double m_idx() const noexcept { return indices_.m; }
  GrowthIndices indices() const noexcept { return indices_; }

 private:
  NFunctionModel() = default;

  Family family_ = Family::power;
  double r1_ = 2.0;
  double r2_ = 2.0;
  ScalarFn phi_fn_;
  ScalarFn dphi_fn_;
  std::string name_;
  GrowthIndices indices_;
};

/// Evaluates the model at t >= 0. Throws DomainError for t < 0 or a non-finite value.
NValues evaluate(const NFunctionModel& model, double t);

/// `count` log-spaced points on [lo, hi].
std::vector<double> log_grid(double lo = 1e-6, double hi = 1e6, std::size_t count = 200);

/// Growth indices. Built-in families return the exact values; custom models are
/// sampled on `grid`, which must span [1e-6, 1e6] with at least 200 points.
GrowthIndices compute_indices(const NFunctionModel& model, std::span<const double> grid);

/// Critical exponent N ell / (N - ell), or +infinity when ell >= N.
double critical_exponent(double ell, int dim);

enum class Hypothesis { phi1, phi2, phi3, phi4, phi5, H1, H2, H3, H4 };
inline constexpr std::size_t kHypothesisCount = 9;

std::string_view to_string(Hypothesis id);

enum class Verdict { pass, fail, not_applicable };

std::string_view to_string(Verdict verdict);

struct HypothesisEntry {
  Hypothesis id = Hypothesis::phi1;
  Verdict verdict = Verdict::not_applicable;
  /// Sample point where a grid check failed, if the failure is pointwise.
  std::optional<double> witness_t;
  /// Human readable witness: the violated inequality or exponent tuple.
  std::string witness;
};

struct HypothesisReport {
  std::array<HypothesisEntry, kHypothesisCount> entries;

  const HypothesisEntry& at(Hypothesis id) const { return entries[static_cast<std::size_t>(id)]; }
  Verdict verdict(Hypothesis id) const { return at(id).verdict; }
  bool all_pass() const;
  bool any_fail() const;
};

struct ValidationInput {
  double q = 0.0;
  double p = 0.0;
  int dim = 2;
  /// Lower bound a_0 of the weight; H2 is not applicable when absent.
  std::optional<double> weight_floor;
  double monotone_slack = 1e-12;
  double convexity_slack = 1e-9;
};

/// Checks every hypothesis. Failures are verdicts, never exceptions.
HypothesisReport validate_hypotheses(const NFunctionModel& model, const ValidationInput& in,
                                     std::span<const double> grid);
HypothesisReport validate_hypotheses(const NFunctionModel& model, const ValidationInput& in);

struct SandwichResult {
  bool pass = true;
  /// Largest lhs / rhs over every inequality checked; 1 means saturated.
  double worst_ratio = 0.0;
  double worst_rho = 0.0;
  double worst_t = 0.0;
};

/// zeta0(t) Phi(rho) <= Phi(rho t) <= zeta1(t) Phi(rho) and
/// ell Phi(s) <= phi(s) s^2 <= m Phi(s) at s = rho and s = rho t.
SandwichResult sandwich_check(const NFunctionModel& model,
                              std::span<const std::pair<double, double>> samples,
                              double rel_slack = 1e-9);

}  // namespace nehari
