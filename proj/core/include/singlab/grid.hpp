#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace singlab {

using NodeMask = std::vector<std::uint8_t>;

/// Uniform tensor grid on an axis-aligned box in dimension 1, 2 or 3.
///
/// Nodes are enumerated lexicographically (axis 0 fastest). The grid is a
/// small immutable value: boundary flags, positions and the exact distance
/// to the box boundary are derived from index arithmetic, so a Domain can be
/// shared freely across concurrent solves.
class Domain {
public:
    using Extents = std::array<std::array<double, 2>, 3>;

    /// resolution = nodes per axis (>= 3). All axes must produce the same
    /// spacing; pass extents with equal side lengths.
    static Domain build(int dim, int resolution, const Extents& extents);
    static Domain unit_box(int dim, int resolution);

    int dim() const { return dim_; }
    int resolution() const { return res_; }
    double spacing() const { return h_; }
    double cell_volume() const { return cell_volume_; }
    const Extents& extents() const { return extents_; }
    double extent_length(int axis) const { return extents_[axis][1] - extents_[axis][0]; }
    double min_extent() const;

    std::size_t node_count() const { return n_nodes_; }
    std::size_t cells_per_axis() const { return static_cast<std::size_t>(res_ - 1); }

    std::array<int, 3> coords_of(std::size_t node) const;
    std::size_t index_of(const std::array<int, 3>& c) const;
    std::array<double, 3> position(std::size_t node) const;

    bool is_boundary(std::size_t node) const;
    /// Exact distance from the node to the box boundary (0 on the boundary).
    double boundary_distance(std::size_t node) const;
    double boundary_distance(const std::array<double, 3>& point) const;
    bool contains_strictly(const std::array<double, 3>& point) const;

    /// Tensor trapezoid quadrature weight of the node (h^N interior,
    /// halved per boundary-extreme axis).
    double node_weight(std::size_t node) const;

    /// Nearest node to a point; ties resolved toward the lower index.
    std::size_t nearest_node(const std::array<double, 3>& point) const;

    bool same_grid(const Domain& other) const;

private:
    int dim_ = 1;
    int res_ = 0;
    Extents extents_{};
    double h_ = 0.0;
    double cell_volume_ = 0.0;
    std::size_t n_nodes_ = 0;
};

/// Nodal values over a Domain. Fields declared Dirichlet keep exact zeros on
/// boundary nodes.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Domain& dom, double fill = 0.0);

    const Domain& domain() const { return dom_; }
    std::size_t size() const { return values_.size(); }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double max_abs() const;
    double min() const;
    double max() const;
    /// Enforce exact zeros on boundary nodes.
    void zero_boundary();

private:
    Domain dom_;
    std::vector<double> values_;
};

/// Nodes at boundary distance >= delta (a compact subset well inside the box).
/// Throws ConfigError if the mask would be empty or delta is out of range.
NodeMask compact_subdomain(const Domain& dom, double delta);

/// Nodes at boundary distance < eps; the complement of compact_subdomain(eps).
NodeMask boundary_layer(const Domain& dom, double eps);

std::size_t mask_count(const NodeMask& mask);

}  // namespace singlab
