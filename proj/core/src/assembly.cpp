#include "assembly.hpp"

#include <Eigen/Core>

#include "nehari/errors.hpp"

namespace nehari::detail {

SparseMatrix weighted_stiffness(const Mesh& mesh, std::span<const double> coef) {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(mesh.element_count() * 9);
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    const double w = coef[e] * mesh.measure(e);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto ri = mesh.interior_index(nodes[i]);
      if (ri < 0) continue;
      const auto& bi = mesh.basis_gradient(e, i);
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        const auto rj = mesh.interior_index(nodes[j]);
        if (rj < 0) continue;
        const auto& bj = mesh.basis_gradient(e, j);
        entries.emplace_back(static_cast<int>(ri), static_cast<int>(rj), w * (bi[0] * bj[0] + bi[1] * bj[1]));
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(mesh.interior_count());
  SparseMatrix m(n, n);
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

SparseMatrix stiffness(const Mesh& mesh) {
  const std::vector<double> ones(mesh.element_count(), 1.0);
  return weighted_stiffness(mesh, ones);
}

void factorize(Factor& solver, const SparseMatrix& m) {
  solver.compute(m);
  if (solver.info() != Eigen::Success) throw EvaluationError("stiffness matrix is not positive definite");
}

std::vector<double> solve(const Factor& solver, std::span<const double> rhs) {
  const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  const Eigen::VectorXd x = solver.solve(b);
  return {x.data(), x.data() + x.size()};
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace nehari::detail
