#pragma once

// Uniform P1 meshes on intervals and rectangles, nodal fields with homogeneous
// Dirichlet data, nodal weights and the element quadrature shared by every
// integral in the library.

#include <array>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace nehari {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct MeshSpec {
  int dim = 1;
  std::vector<double> lo{0.0};
  std::vector<double> hi{1.0};
  /// Cells per axis, at least 2 each.
  std::vector<int> subdivisions{64};
};

/// Uniform simplicial mesh. 1D: segments. 2D: each axis-aligned cell is split
/// into two triangles along its (lo, lo)-(hi, hi) diagonal. Nodes are ordered
/// lexicographically by (x, y). Immutable after construction.
class Mesh {
 public:
  int dim() const noexcept { return dim_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t element_count() const noexcept { return measures_.size(); }
  std::size_t nodes_per_element() const noexcept { return static_cast<std::size_t>(dim_) + 1; }

  std::span<const Point> nodes() const noexcept { return nodes_; }
  std::span<const std::size_t> element(std::size_t e) const noexcept {
    return {connectivity_.data() + e * nodes_per_element(), nodes_per_element()};
  }
  /// Gradient of the k-th local hat function on element e (constant per element).
  const std::array<double, 2>& basis_gradient(std::size_t e, std::size_t k) const noexcept {
    return basis_gradients_[e * nodes_per_element() + k];
  }
  double measure(std::size_t e) const noexcept { return measures_[e]; }
  std::span<const double> measures() const noexcept { return measures_; }
  double volume() const noexcept { return volume_; }

  bool is_boundary(std::size_t node) const noexcept { return boundary_[node] != 0; }
  std::size_t interior_count() const noexcept { return interior_.size(); }
  /// Node ids of the interior (unknown) nodes, in node order.
  std::span<const std::size_t> interior_nodes() const noexcept { return interior_; }
  /// Position of `node` among the interior nodes, or -1 for a boundary node.
  std::ptrdiff_t interior_index(std::size_t node) const noexcept { return interior_index_[node]; }

  const MeshSpec& spec() const noexcept { return spec_; }

 private:
  friend Mesh build_mesh(const MeshSpec& spec);
  Mesh() = default;

  MeshSpec spec_;
  int dim_ = 1;
  std::vector<Point> nodes_;
  std::vector<std::size_t> connectivity_;
  std::vector<std::array<double, 2>> basis_gradients_;
  std::vector<double> measures_;
  std::vector<char> boundary_;
  std::vector<std::size_t> interior_;
  std::vector<std::ptrdiff_t> interior_index_;
  double volume_ = 0.0;
};

/// Throws ConfigError for dim outside {1, 2}, lo >= hi or fewer than 2 subdivisions.
Mesh build_mesh(const MeshSpec& spec);

/// Nodal values of a P1 function that vanishes on the boundary.
class Field {
 public:
  Field() = default;
  /// Throws ContractViolation on size mismatch or a nonzero boundary value.
  Field(const Mesh& mesh, std::vector<double> values);

  static Field zero(const Mesh& mesh);
  /// Samples f at interior nodes; boundary nodes are set to zero.
  static Field from_function(const Mesh& mesh, const std::function<double(const Point&)>& f);
  /// Scatters one value per interior node.
  static Field from_interior(const Mesh& mesh, std::span<const double> interior_values);

  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  std::vector<double> interior_values(const Mesh& mesh) const;

  Field scaled(double s) const;
  /// Nodal absolute value.
  Field abs() const;
  bool is_zero() const noexcept;
  /// Euclidean norm of the nodal vector.
  double nodal_norm() const noexcept;

 private:
  std::vector<double> values_;
};

/// Nodal weight a(x) >= a0 > 0, interpolated linearly at quadrature points.
class Weight {
 public:
  static Weight constant(const Mesh& mesh, double value);
  static Weight from_function(const Mesh& mesh, const std::function<double(const Point&)>& f);
  /// Throws ContractViolation on size mismatch.
  static Weight from_nodal(const Mesh& mesh, std::vector<double> values);

  std::span<const double> values() const noexcept { return values_; }
  /// Smallest nodal value a0; construction does not reject a0 <= 0, the
  /// problem-level validator does.
  double floor() const noexcept { return floor_; }

 private:
  std::vector<double> values_;
  double floor_ = 0.0;
};

/// One reference quadrature point: barycentric shape values and a weight
/// fraction of the element measure.
struct QuadPoint {
  std::array<double, 3> shape{};
  double weight = 0.0;
};

/// 2-point Gauss on segments, 3-point edge-midpoint rule on triangles.
std::span<const QuadPoint> quadrature_rule(int dim);

/// |grad u| per element. Throws ContractViolation on size mismatch.
std::vector<double> element_gradients(const Mesh& mesh, std::span<const double> u);
std::vector<double> element_gradients(const Mesh& mesh, const Field& u);

/// grad u on element e.
std::array<double, 2> element_gradient(const Mesh& mesh, std::span<const double> u, std::size_t e);

/// Sum of value * measure in element order.
double integrate(const Mesh& mesh, std::span<const double> per_element);

/// int w |u|^s dx over the P1 interpolant (w = 1 when absent).
double lp_norm_pow(const Mesh& mesh, std::span<const double> u, double s, const Weight* w = nullptr);
double lp_norm_pow(const Mesh& mesh, const Field& u, double s, const Weight* w = nullptr);

/// prod_i sin(pi (x_i - lo_i) / (hi_i - lo_i)): the first Dirichlet mode of the box.
Field bump_field(const Mesh& mesh);
/// prod_i sin(k pi (x_i - lo_i) / (hi_i - lo_i)).
Field sine_field(const Mesh& mesh, int k);
/// Independent uniform interior values from a seeded mt19937_64, in (0, 1]
/// when `positive`, otherwise in [-1, 1). Identical across platforms.
Field random_field(const Mesh& mesh, std::uint64_t seed, bool positive);

/// CSV with header `node_index,value`, 12 significant digits.
void write_nodal_csv(std::ostream& os, std::span<const double> values);
/// Throws ConfigError on malformed rows, a missing index or a size mismatch.
std::vector<double> read_nodal_csv(std::istream& is, std::size_t expected_size);

}  // namespace nehari
