#pragma once

// Sparse stiffness matrices on the interior nodes, shared by the extremal
// search and the solver as preconditioners.

#include <span>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "nehari/domain.hpp"

namespace nehari::detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Factor = Eigen::SimplicialLDLT<SparseMatrix>;

/// sum_e coef_e |e| grad psi_i . grad psi_j over interior i, j.
SparseMatrix weighted_stiffness(const Mesh& mesh, std::span<const double> coef);
SparseMatrix stiffness(const Mesh& mesh);

/// Factorises `m`; throws EvaluationError when it is not positive definite.
void factorize(Factor& solver, const SparseMatrix& m);

std::vector<double> solve(const Factor& solver, std::span<const double> rhs);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace nehari::detail
