#pragma once

// Run configuration: a small TOML subset (sections, dotted keys, inline
// tables, strings, numbers, booleans and flat arrays).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"
#include "nehari/nfunction.hpp"

namespace nehari::cli {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<double, bool, std::string, Array> v;
  bool operator==(const Value&) const = default;
};

/// Flattened document: "section.key" -> value.
using Document = std::map<std::string, Value>;

/// Throws ConfigError with the line number on malformed input.
Document parse_document(const std::string& text);

struct ProblemConfig {
  std::string family = "double_power";
  std::vector<double> params{2.0, 3.0};
  double q = 1.5;
  double p = 7.0;
  int dim = 1;
  std::vector<double> lo{0.0};
  std::vector<double> hi{1.0};
  std::vector<int> subdivisions{64};
  double weight = 1.0;
  bool operator==(const ProblemConfig&) const = default;
};

struct SolverConfig {
  std::optional<double> lambda;
  /// Used when `lambda` is absent: lambda = fraction * estimated lambda^*.
  std::optional<double> lambda_fraction;
  std::vector<double> lambda_grid;
  /// Used when `lambda_grid` is empty: count points up to grid_max_fraction * lambda^*.
  int grid_count = 12;
  double grid_max_fraction = 1.2;
  std::optional<double> lambda_star_hat;
  std::optional<double> lambda_lower_hat;
  double tol = 1e-6;
  int max_iters = 5000;
  int starts = 4;
  std::uint64_t seed = 1;
  int search_iters = 2000;
  double step = 0.25;
  int k_max = 8;
  bool operator==(const SolverConfig&) const = default;
};

struct RayConfig {
  /// `bump`, `sine k` or `random seed=n`.
  std::string direction = "bump";
  /// `none`, `unit` (unit nodal norm) or `balanced` (A = P = Q at t = 1).
  std::string normalize = "none";
  double t_min = 1e-3;
  double t_max = 1e1;
  int points = 200;
  std::optional<double> lambda;
  bool operator==(const RayConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  bool operator==(const OutputConfig&) const = default;
};

struct RunConfig {
  ProblemConfig problem;
  SolverConfig solver;
  RayConfig ray;
  OutputConfig output;
  bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError listing every unknown key, or naming a key of the wrong type.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Inverse of parse_config: parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& cfg);

MeshSpec mesh_spec(const ProblemConfig& cfg);
NFunctionModel make_model(const ProblemConfig& cfg);
Problem make_problem(const ProblemConfig& cfg, double lambda);

/// Builds the direction named by a preset string; throws ConfigError on an unknown preset.
Field direction_preset(const Mesh& mesh, const std::string& spec);

}  // namespace nehari::cli
