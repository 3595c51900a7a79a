#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "nehari/domain.hpp"
#include "nehari/energy.hpp"
#include "nehari/nfunction.hpp"

namespace fixtures {

inline nehari::Mesh line(int cells) {
  nehari::MeshSpec s;
  s.subdivisions = {cells};
  return nehari::build_mesh(s);
}

inline nehari::Mesh square(int cells) {
  nehari::MeshSpec s;
  s.dim = 2;
  s.lo = {0.0, 0.0};
  s.hi = {1.0, 1.0};
  s.subdivisions = {cells, cells};
  return nehari::build_mesh(s);
}

/// Laplacian, q = 1.5, p = 3 on [0, 1].
inline nehari::Problem power2(int cells = 64, double lambda = 0.1) {
  auto mesh = line(cells);
  auto w = nehari::Weight::constant(mesh, 1.0);
  return nehari::Problem(std::move(mesh), nehari::NFunctionModel::power(2.0), std::move(w), 1.5, 3.0, lambda);
}

/// (2,3)-Laplacian, q = 1.5, p = 7 on [0, 1].
inline nehari::Problem double_power(int cells = 64, double lambda = 1.0) {
  auto mesh = line(cells);
  auto w = nehari::Weight::constant(mesh, 1.0);
  return nehari::Problem(std::move(mesh), nehari::NFunctionModel::double_power(2.0, 3.0), std::move(w), 1.5, 7.0,
                         lambda);
}

/// phi(t) = ln(1 + t), q = 1.5, p = 7 on the unit square.
inline nehari::Problem log_type(int cells = 8, double lambda = 1.0) {
  auto mesh = square(cells);
  auto w = nehari::Weight::constant(mesh, 1.0);
  return nehari::Problem(std::move(mesh), nehari::NFunctionModel::log_type(), std::move(w), 1.5, 7.0, lambda);
}

/// Random smooth-ish field: a random combination of low sine modes plus nodal noise.
inline nehari::Field random_field(const nehari::Mesh& mesh, std::mt19937_64& gen, bool positive = false) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> c(4);
  for (double& x : c) x = unit(gen);
  const auto& s = mesh.spec();
  std::vector<double> v(mesh.node_count(), 0.0);
  for (std::size_t node : mesh.interior_nodes()) {
    const auto& x = mesh.nodes()[node];
    const double xi = (x.x - s.lo[0]) / (s.hi[0] - s.lo[0]);
    const double eta = mesh.dim() == 2 ? (x.y - s.lo[1]) / (s.hi[1] - s.lo[1]) : 0.5;
    double f = 0.0;
    for (int k = 0; k < 4; ++k) f += c[k] * std::sin((k + 1) * M_PI * xi) * std::sin((k % 2 + 1) * M_PI * eta);
    f += 0.2 * unit(gen);
    v[node] = positive ? std::abs(f) + 1e-3 : f;
  }
  return nehari::Field(mesh, std::move(v));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Central difference with step h.
inline double central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double second_central(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

}  // namespace fixtures
