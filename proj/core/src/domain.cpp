#include "nehari/domain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <random>
#include <ostream>
#include <sstream>
#include <string>

#include "nehari/errors.hpp"

namespace nehari {

namespace {

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw ContractViolation(std::string(what) + ": expected " + std::to_string(want) + " values, got " +
                            std::to_string(got));
  }
}

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

Mesh build_mesh(const MeshSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) throw ConfigError("mesh dim must be 1 or 2");
  const auto d = static_cast<std::size_t>(spec.dim);
  if (spec.lo.size() != d || spec.hi.size() != d || spec.subdivisions.size() != d) {
    throw ConfigError("mesh bounds and subdivisions need one entry per axis");
  }
  for (std::size_t a = 0; a < d; ++a) {
    if (!(spec.lo[a] < spec.hi[a])) throw ConfigError("degenerate mesh bounds on axis " + std::to_string(a));
    if (spec.subdivisions[a] < 2) throw ConfigError("mesh needs at least 2 subdivisions per axis");
  }

  Mesh mesh;
  mesh.spec_ = spec;
  mesh.dim_ = spec.dim;

  if (spec.dim == 1) {
    const auto n = static_cast<std::size_t>(spec.subdivisions[0]);
    const double h = (spec.hi[0] - spec.lo[0]) / static_cast<double>(n);
    mesh.nodes_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) mesh.nodes_[i] = {spec.lo[0] + h * static_cast<double>(i), 0.0};
    mesh.nodes_.back().x = spec.hi[0];
    mesh.boundary_.assign(n + 1, 0);
    mesh.boundary_.front() = mesh.boundary_.back() = 1;
    for (std::size_t e = 0; e < n; ++e) {
      const double len = mesh.nodes_[e + 1].x - mesh.nodes_[e].x;
      mesh.connectivity_.push_back(e);
      mesh.connectivity_.push_back(e + 1);
      mesh.basis_gradients_.push_back({-1.0 / len, 0.0});
      mesh.basis_gradients_.push_back({1.0 / len, 0.0});
      mesh.measures_.push_back(len);
    }
  } else {
    const auto nx = static_cast<std::size_t>(spec.subdivisions[0]);
    const auto ny = static_cast<std::size_t>(spec.subdivisions[1]);
    const double hx = (spec.hi[0] - spec.lo[0]) / static_cast<double>(nx);
    const double hy = (spec.hi[1] - spec.lo[1]) / static_cast<double>(ny);
    auto id = [ny](std::size_t i, std::size_t j) { return i * (ny + 1) + j; };
    mesh.nodes_.resize((nx + 1) * (ny + 1));
    mesh.boundary_.assign(mesh.nodes_.size(), 0);
    for (std::size_t i = 0; i <= nx; ++i) {
      for (std::size_t j = 0; j <= ny; ++j) {
        const double x = i == nx ? spec.hi[0] : spec.lo[0] + hx * static_cast<double>(i);
        const double y = j == ny ? spec.hi[1] : spec.lo[1] + hy * static_cast<double>(j);
        mesh.nodes_[id(i, j)] = {x, y};
        if (i == 0 || j == 0 || i == nx || j == ny) mesh.boundary_[id(i, j)] = 1;
      }
    }
    auto add_triangle = [&mesh](std::size_t a, std::size_t b, std::size_t c) {
      const Point& p0 = mesh.nodes_[a];
      const Point& p1 = mesh.nodes_[b];
      const Point& p2 = mesh.nodes_[c];
      const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
      mesh.connectivity_.insert(mesh.connectivity_.end(), {a, b, c});
      mesh.basis_gradients_.push_back({(p1.y - p2.y) / area2, (p2.x - p1.x) / area2});
      mesh.basis_gradients_.push_back({(p2.y - p0.y) / area2, (p0.x - p2.x) / area2});
      mesh.basis_gradients_.push_back({(p0.y - p1.y) / area2, (p1.x - p0.x) / area2});
      mesh.measures_.push_back(0.5 * std::abs(area2));
    };
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        add_triangle(id(i, j), id(i + 1, j), id(i + 1, j + 1));
        add_triangle(id(i, j), id(i + 1, j + 1), id(i, j + 1));
      }
    }
  }

  mesh.interior_index_.assign(mesh.nodes_.size(), -1);
  for (std::size_t i = 0; i < mesh.nodes_.size(); ++i) {
    if (!mesh.boundary_[i]) {
      mesh.interior_index_[i] = static_cast<std::ptrdiff_t>(mesh.interior_.size());
      mesh.interior_.push_back(i);
    }
  }
  mesh.volume_ = std::accumulate(mesh.measures_.begin(), mesh.measures_.end(), 0.0);
  return mesh;
}

Field::Field(const Mesh& mesh, std::vector<double> values) : values_(std::move(values)) {
  require_size(values_.size(), mesh.node_count(), "Field");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (mesh.is_boundary(i) && values_[i] != 0.0) {
      throw ContractViolation("Field: boundary node " + std::to_string(i) + " carries nonzero value");
    }
  }
}

Field Field::zero(const Mesh& mesh) { return Field(mesh, std::vector<double>(mesh.node_count(), 0.0)); }

Field Field::from_function(const Mesh& mesh, const std::function<double(const Point&)>& f) {
  std::vector<double> v(mesh.node_count(), 0.0);
  for (std::size_t node : mesh.interior_nodes()) v[node] = f(mesh.nodes()[node]);
  return Field(mesh, std::move(v));
}

Field Field::from_interior(const Mesh& mesh, std::span<const double> interior_values) {
  require_size(interior_values.size(), mesh.interior_count(), "Field::from_interior");
  std::vector<double> v(mesh.node_count(), 0.0);
  const auto interior = mesh.interior_nodes();
  for (std::size_t k = 0; k < interior.size(); ++k) v[interior[k]] = interior_values[k];
  return Field(mesh, std::move(v));
}

std::vector<double> Field::interior_values(const Mesh& mesh) const {
  require_size(values_.size(), mesh.node_count(), "Field::interior_values");
  std::vector<double> out;
  out.reserve(mesh.interior_count());
  for (std::size_t node : mesh.interior_nodes()) out.push_back(values_[node]);
  return out;
}

Field Field::scaled(double s) const {
  Field out = *this;
  for (double& v : out.values_) v *= s;
  return out;
}

Field Field::abs() const {
  Field out = *this;
  for (double& v : out.values_) v = std::abs(v);
  return out;
}

bool Field::is_zero() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
}

double Field::nodal_norm() const noexcept {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

Weight Weight::constant(const Mesh& mesh, double value) {
  return from_nodal(mesh, std::vector<double>(mesh.node_count(), value));
}

Weight Weight::from_function(const Mesh& mesh, const std::function<double(const Point&)>& f) {
  std::vector<double> v(mesh.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh.nodes()[i]);
  return from_nodal(mesh, std::move(v));
}

Weight Weight::from_nodal(const Mesh& mesh, std::vector<double> values) {
  require_size(values.size(), mesh.node_count(), "Weight");
  Weight w;
  w.values_ = std::move(values);
  w.floor_ = *std::min_element(w.values_.begin(), w.values_.end());
  return w;
}

std::span<const QuadPoint> quadrature_rule(int dim) {
  static const double g = 0.5 / std::sqrt(3.0);
  static const std::array<QuadPoint, 2> segment{{
      {{0.5 + g, 0.5 - g, 0.0}, 0.5},
      {{0.5 - g, 0.5 + g, 0.0}, 0.5},
  }};
  static const std::array<QuadPoint, 3> triangle{{
      {{0.5, 0.5, 0.0}, 1.0 / 3.0},
      {{0.0, 0.5, 0.5}, 1.0 / 3.0},
      {{0.5, 0.0, 0.5}, 1.0 / 3.0},
  }};
  if (dim == 1) return segment;
  return triangle;
}

std::array<double, 2> element_gradient(const Mesh& mesh, std::span<const double> u, std::size_t e) {
  std::array<double, 2> g{0.0, 0.0};
  const auto nodes = mesh.element(e);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto& b = mesh.basis_gradient(e, k);
    g[0] += u[nodes[k]] * b[0];
    g[1] += u[nodes[k]] * b[1];
  }
  return g;
}

std::vector<double> element_gradients(const Mesh& mesh, std::span<const double> u) {
  require_size(u.size(), mesh.node_count(), "element_gradients");
  std::vector<double> out(mesh.element_count());
  for (std::size_t e = 0; e < out.size(); ++e) {
    const auto g = element_gradient(mesh, u, e);
    out[e] = std::hypot(g[0], g[1]);
  }
  return out;
}

std::vector<double> element_gradients(const Mesh& mesh, const Field& u) {
  return element_gradients(mesh, u.values());
}

double integrate(const Mesh& mesh, std::span<const double> per_element) {
  require_size(per_element.size(), mesh.element_count(), "integrate");
  double sum = 0.0;
  for (std::size_t e = 0; e < per_element.size(); ++e) sum += per_element[e] * mesh.measure(e);
  return sum;
}

double lp_norm_pow(const Mesh& mesh, std::span<const double> u, double s, const Weight* w) {
  require_size(u.size(), mesh.node_count(), "lp_norm_pow");
  if (w) require_size(w->values().size(), mesh.node_count(), "lp_norm_pow weight");
  const auto rule = quadrature_rule(mesh.dim());
  double sum = 0.0;
  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto nodes = mesh.element(e);
    double local = 0.0;
    for (const auto& qp : rule) {
      double uq = 0.0;
      double aq = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        uq += qp.shape[k] * u[nodes[k]];
        if (w) aq += qp.shape[k] * w->values()[nodes[k]];
      }
      const double val = std::pow(std::abs(uq), s);
      local += qp.weight * (w ? aq * val : val);
    }
    sum += local * mesh.measure(e);
  }
  return sum;
}

double lp_norm_pow(const Mesh& mesh, const Field& u, double s, const Weight* w) {
  return lp_norm_pow(mesh, u.values(), s, w);
}

namespace {

Field product_sine(const Mesh& mesh, int k) {
  const auto& s = mesh.spec();
  return Field::from_function(mesh, [&](const Point& x) {
    double v = std::sin(k * std::numbers::pi * (x.x - s.lo[0]) / (s.hi[0] - s.lo[0]));
    if (mesh.dim() == 2) v *= std::sin(k * std::numbers::pi * (x.y - s.lo[1]) / (s.hi[1] - s.lo[1]));
    return v;
  });
}

}  // namespace

Field bump_field(const Mesh& mesh) { return product_sine(mesh, 1); }

Field sine_field(const Mesh& mesh, int k) {
  if (k < 1) throw ContractViolation("sine_field needs k >= 1");
  return product_sine(mesh, k);
}

Field random_field(const Mesh& mesh, std::uint64_t seed, bool positive) {
  std::mt19937_64 gen(seed);
  // 53 high bits -> [0, 1); avoids distribution classes whose output differs between standard libraries.
  auto unit = [&gen] { return static_cast<double>(gen() >> 11) * 0x1p-53; };
  std::vector<double> v(mesh.interior_count());
  for (auto& x : v) x = positive ? 1.0 - unit() : 2.0 * unit() - 1.0;
  return Field::from_interior(mesh, v);
}

void write_nodal_csv(std::ostream& os, std::span<const double> values) {
  os << "node_index,value\n";
  for (std::size_t i = 0; i < values.size(); ++i) os << i << ',' << format_g12(values[i]) << '\n';
}

std::vector<double> read_nodal_csv(std::istream& is, std::size_t expected_size) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("nodal CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "node_index,value") throw ConfigError("nodal CSV header must be 'node_index,value'");
  std::vector<double> values(expected_size, 0.0);
  std::vector<char> seen(expected_size, 0);
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("nodal CSV row " + std::to_string(row) + " has no comma");
    std::size_t idx = 0;
    double val = 0.0;
    try {
      std::size_t used = 0;
      idx = std::stoul(line.substr(0, comma), &used);
      val = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError("nodal CSV row " + std::to_string(row) + " is malformed");
    }
    if (idx >= expected_size) throw ConfigError("nodal CSV index " + std::to_string(idx) + " out of range");
    if (seen[idx]) throw ConfigError("nodal CSV index " + std::to_string(idx) + " repeated");
    seen[idx] = 1;
    values[idx] = val;
  }
  for (std::size_t i = 0; i < expected_size; ++i) {
    if (!seen[i]) throw ConfigError("nodal CSV misses node " + std::to_string(i));
  }
  return values;
}

}  // namespace nehari
