#include "singlab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

Domain Domain::build(int dim, int resolution, const Extents& extents) {
    if (dim < 1 || dim > 3)
        throw ConfigError("domain.dim", "must be 1, 2 or 3");
    if (resolution < 3)
        throw ConfigError("domain.resolution", "must be at least 3");

    Domain d;
    d.dim_ = dim;
    d.res_ = resolution;
    d.extents_ = extents;
    double h0 = 0.0;
    for (int a = 0; a < dim; ++a) {
        double len = extents[a][1] - extents[a][0];
        if (!(len > 0.0))
            throw ConfigError("domain.extents", "axis " + std::to_string(a) +
                                                    " is degenerate");
        double h = len / (resolution - 1);
        if (a == 0) {
            h0 = h;
        } else if (std::fabs(h - h0) > 1e-9 * h0) {
            throw ConfigError("domain.extents",
                              "spacing must be uniform across axes; axis " +
                                  std::to_string(a) + " disagrees");
        }
    }
    d.h_ = h0;
    d.cell_volume_ = std::pow(h0, dim);
    d.n_nodes_ = 1;
    for (int a = 0; a < dim; ++a) d.n_nodes_ *= static_cast<std::size_t>(resolution);
    return d;
}

Domain Domain::unit_box(int dim, int resolution) {
    Extents e{};
    for (int a = 0; a < 3; ++a) e[a] = {0.0, 1.0};
    return build(dim, resolution, e);
}

double Domain::min_extent() const {
    double m = extent_length(0);
    for (int a = 1; a < dim_; ++a) m = std::min(m, extent_length(a));
    return m;
}

std::array<int, 3> Domain::coords_of(std::size_t node) const {
    std::array<int, 3> c{0, 0, 0};
    auto m = static_cast<std::size_t>(res_);
    for (int a = 0; a < dim_; ++a) {
        c[a] = static_cast<int>(node % m);
        node /= m;
    }
    return c;
}

std::size_t Domain::index_of(const std::array<int, 3>& c) const {
    auto m = static_cast<std::size_t>(res_);
    std::size_t idx = 0;
    for (int a = dim_ - 1; a >= 0; --a) idx = idx * m + static_cast<std::size_t>(c[a]);
    return idx;
}

std::array<double, 3> Domain::position(std::size_t node) const {
    auto c = coords_of(node);
    std::array<double, 3> p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = extents_[a][0] + h_ * c[a];
    return p;
}

bool Domain::is_boundary(std::size_t node) const {
    auto c = coords_of(node);
    for (int a = 0; a < dim_; ++a)
        if (c[a] == 0 || c[a] == res_ - 1) return true;
    return false;
}

double Domain::boundary_distance(std::size_t node) const {
    auto c = coords_of(node);
    int steps = res_;
    for (int a = 0; a < dim_; ++a)
        steps = std::min(steps, std::min(c[a], res_ - 1 - c[a]));
    return steps * h_;
}

double Domain::boundary_distance(const std::array<double, 3>& point) const {
    double d = extent_length(0);
    for (int a = 0; a < dim_; ++a) {
        d = std::min(d, point[a] - extents_[a][0]);
        d = std::min(d, extents_[a][1] - point[a]);
    }
    return d;
}

bool Domain::contains_strictly(const std::array<double, 3>& point) const {
    return boundary_distance(point) > 0.0;
}

double Domain::node_weight(std::size_t node) const {
    auto c = coords_of(node);
    double w = cell_volume_;
    for (int a = 0; a < dim_; ++a)
        if (c[a] == 0 || c[a] == res_ - 1) w *= 0.5;
    return w;
}

std::size_t Domain::nearest_node(const std::array<double, 3>& point) const {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
        double t = (point[a] - extents_[a][0]) / h_;
        // round half toward the lower index so ties pick the smaller node
        int i = static_cast<int>(std::ceil(t - 0.5));
        c[a] = std::clamp(i, 0, res_ - 1);
    }
    return index_of(c);
}

bool Domain::same_grid(const Domain& other) const {
    if (dim_ != other.dim_ || res_ != other.res_) return false;
    for (int a = 0; a < dim_; ++a)
        if (extents_[a] != other.extents_[a]) return false;
    return true;
}

ScalarField::ScalarField(const Domain& dom, double fill)
    : dom_(dom), values_(dom.node_count(), fill) {}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::fabs(v));
    return m;
}

double ScalarField::min() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::min(m, v);
    return m;
}

double ScalarField::max() const {
    double m = values_.empty() ? 0.0 : values_[0];
    for (double v : values_) m = std::max(m, v);
    return m;
}

void ScalarField::zero_boundary() {
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (dom_.is_boundary(i)) values_[i] = 0.0;
}

NodeMask compact_subdomain(const Domain& dom, double delta) {
    if (!(delta > 0.0) || delta >= 0.5 * dom.min_extent())
        throw ConfigError("compact_subdomain: delta must lie in (0, min_extent/2)");
    NodeMask mask(dom.node_count(), 0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        if (dom.boundary_distance(i) >= delta) {
            mask[i] = 1;
            ++count;
        }
    }
    if (count == 0)
        throw ConfigError("compact_subdomain: delta too large, no node is that "
                          "far from the boundary");
    return mask;
}

NodeMask boundary_layer(const Domain& dom, double eps) {
    if (!(eps > 0.0) || eps >= 0.5 * dom.min_extent())
        throw ConfigError("boundary_layer: eps must lie in (0, min_extent/2)");
    NodeMask mask(dom.node_count(), 0);
    for (std::size_t i = 0; i < dom.node_count(); ++i)
        if (dom.boundary_distance(i) < eps) mask[i] = 1;
    return mask;
}

std::size_t mask_count(const NodeMask& mask) {
    std::size_t n = 0;
    for (auto b : mask) n += (b != 0);
    return n;
}

}  // namespace singlab
