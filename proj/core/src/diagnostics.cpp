#include "singlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

Exponents sobolev_exponents(double gamma, int dim) {
    if (!(gamma > 0.0)) throw ConfigError("sobolev_exponents: gamma must be positive");
    Exponents e;
    if (dim == 1) {
        e.oracle_regime = true;
        return e;
    }
    double N = dim;
    if (gamma < 1.0) {
        e.q = N * (gamma + 1.0) / (N - 1.0 + gamma);
        e.q_prime = N * (gamma + 1.0) / ((N - 1.0) * gamma + 1.0);
    }
    if (dim >= 3) e.s = N * (gamma + 1.0) / (N - 2.0);
    return e;
}

namespace {

// visit every cell: anchor node index plus the forward-difference gradient
template <typename F>
void for_each_cell(const Domain& dom, F&& visit) {
    int n = dom.dim();
    int cells = dom.resolution() - 1;
    std::array<int, 3> c{0, 0, 0};
    if (n == 1) {
        for (c[0] = 0; c[0] < cells; ++c[0]) visit(c);
    } else if (n == 2) {
        for (c[1] = 0; c[1] < cells; ++c[1])
            for (c[0] = 0; c[0] < cells; ++c[0]) visit(c);
    } else {
        for (c[2] = 0; c[2] < cells; ++c[2])
            for (c[1] = 0; c[1] < cells; ++c[1])
                for (c[0] = 0; c[0] < cells; ++c[0]) visit(c);
    }
}

}  // namespace

double norm_w1q(const ScalarField& u, double q) {
    if (!(q >= 1.0)) throw ConfigError("norm_w1q: q must be at least 1");
    const Domain& dom = u.domain();
    double h = dom.spacing();
    double vol = dom.cell_volume();
    double acc = 0.0;
    for_each_cell(dom, [&](const std::array<int, 3>& c) {
        std::size_t i = dom.index_of(c);
        double g2 = 0.0;
        for (int a = 0; a < dom.dim(); ++a) {
            auto cp = c;
            cp[a] += 1;
            double g = (u[dom.index_of(cp)] - u[i]) / h;
            g2 += g * g;
        }
        acc += std::pow(g2, 0.5 * q) * vol;
    });
    return std::pow(acc, 1.0 / q);
}

double local_h1(const ScalarField& u, const NodeMask& omega) {
    const Domain& dom = u.domain();
    if (omega.size() != dom.node_count())
        throw ConfigError("local_h1: mask size mismatch");
    double h = dom.spacing();
    double vol = dom.cell_volume();
    double acc = 0.0;
    int n = dom.dim();
    for_each_cell(dom, [&](const std::array<int, 3>& c) {
        // cell counts only if all 2^n corners lie in omega
        for (int corner = 0; corner < (1 << n); ++corner) {
            auto cc = c;
            for (int a = 0; a < n; ++a)
                if (corner & (1 << a)) cc[a] += 1;
            if (!omega[dom.index_of(cc)]) return;
        }
        std::size_t i = dom.index_of(c);
        double g2 = 0.0;
        for (int a = 0; a < n; ++a) {
            auto cp = c;
            cp[a] += 1;
            double g = (u[dom.index_of(cp)] - u[i]) / h;
            g2 += g * g;
        }
        acc += g2 * vol;
    });
    return std::sqrt(acc);
}

double power_energy(const ScalarField& u, double gamma) {
    ScalarField v(u.domain());
    double expo = 0.5 * (gamma + 1.0);
    for (std::size_t i = 0; i < u.size(); ++i)
        v[i] = std::pow(std::max(u[i], 0.0), expo);
    return norm_w1q(v, 2.0);
}

std::vector<double> boundary_trace_profile(const ScalarField& u,
                                           const std::vector<double>& eps_list) {
    const Domain& dom = u.domain();
    double h = dom.spacing();
    double vol = dom.cell_volume();
    int n = dom.dim();
    std::vector<double> out;
    out.reserve(eps_list.size());
    for (double eps : eps_list) {
        if (eps < h * (1.0 - 1e-12))
            throw ConfigError("boundary_trace_profile: eps must be at least h");
        double acc = 0.0;
        for_each_cell(dom, [&](const std::array<int, 3>& c) {
            double mean = 0.0;
            for (int corner = 0; corner < (1 << n); ++corner) {
                auto cc = c;
                for (int a = 0; a < n; ++a)
                    if (corner & (1 << a)) cc[a] += 1;
                std::size_t idx = dom.index_of(cc);
                if (dom.boundary_distance(idx) > eps * (1.0 + 1e-12)) return;
                mean += u[idx];
            }
            acc += mean / (1 << n) * vol;
        });
        out.push_back(acc / eps);
    }
    return out;
}

std::vector<ScalarField> make_bump_basis(const Domain& dom) {
    std::vector<ScalarField> bumps;
    int max_level = dom.dim() == 1 ? 3 : 2;
    for (int level = 1; level <= max_level; ++level) {
        int centers = (1 << level) - 1;
        std::array<int, 3> ci{0, 0, 0};
        std::array<int, 3> count{1, 1, 1};
        for (int a = 0; a < dom.dim(); ++a) count[a] = centers;
        for (ci[2] = 0; ci[2] < count[2]; ++ci[2])
            for (ci[1] = 0; ci[1] < count[1]; ++ci[1])
                for (ci[0] = 0; ci[0] < count[0]; ++ci[0]) {
                    ScalarField phi(dom);
                    bool nonzero = false;
                    for (std::size_t i = 0; i < dom.node_count(); ++i) {
                        auto p = dom.position(i);
                        double val = 1.0;
                        for (int a = 0; a < dom.dim(); ++a) {
                            double lo = dom.extents()[a][0];
                            double len = dom.extent_length(a);
                            double c = lo + len * (ci[a] + 1) / (1 << level);
                            double w = len / (1 << (level + 1));
                            val *= std::max(0.0, 1.0 - std::fabs(p[a] - c) / w);
                        }
                        phi[i] = val;
                        nonzero = nonzero || val != 0.0;
                    }
                    if (nonzero) bumps.push_back(std::move(phi));
                }
    }
    return bumps;
}

WeakResidualReport weak_residual(const ScalarField& u, const DiscreteMeasure& m,
                                 double gamma, const LinearSystem& sys,
                                 const std::vector<ScalarField>& test_set,
                                 double shift) {
    if (!u.domain().same_grid(m.dom))
        throw ConfigError("weak_residual: field and measure grids differ");
    WeakResidualReport rep;
    for (const auto& phi : test_set) {
        // duality pairing: evaluate u^{-gamma} only on the support of phi
        double rhs = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (phi[i] == 0.0) continue;
            double base = shift + u[i];
            if (m.masses[i] != 0.0 || !u.domain().is_boundary(i)) {
                if (!(base > 0.0))
                    throw ConfigError(
                        "weak_residual: nonpositive field on a test support "
                        "(interior positivity violated)");
            }
            if (m.masses[i] != 0.0) rhs += phi[i] * m.masses[i] / std::pow(base, gamma);
        }
        double lhs = sys.bilinear(u, phi);
        double r = std::fabs(lhs - rhs);
        rep.per_test.push_back(r);
        rep.max_abs = std::max(rep.max_abs, r);
    }
    return rep;
}

WeakResidualReport weak_residual(const ScalarField& u, const DiscreteMeasure& m,
                                 double gamma, const CoefficientField& A,
                                 const std::vector<ScalarField>& test_set,
                                 double shift) {
    LinearSystem sys = assemble(u.domain(), A);
    return weak_residual(u, m, gamma, sys, test_set, shift);
}

double captured_mass(const ScalarField& u, const DiscreteMeasure& m, double gamma,
                     double level_n, const NodeMask* region) {
    if (!u.domain().same_grid(m.dom))
        throw ConfigError("captured_mass: field and measure grids differ");
    if (region && region->size() != m.masses.size())
        throw ConfigError("captured_mass: region mask size mismatch");
    double shift = 1.0 / level_n;
    double acc = 0.0;
    for (std::size_t i = 0; i < m.masses.size(); ++i) {
        if (m.masses[i] == 0.0) continue;
        if (region && !(*region)[i]) continue;
        acc += m.masses[i] / std::pow(shift + std::max(u[i], 0.0), gamma);
    }
    return acc;
}

FieldDistance cross_scheme_compare(const ScalarField& a, const ScalarField& b) {
    if (!a.domain().same_grid(b.domain()))
        throw ConfigError("cross_scheme_compare: grids differ");
    FieldDistance d;
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double e = a[i] - b[i];
        d.linf = std::max(d.linf, std::fabs(e));
        acc += e * e * a.domain().node_weight(i);
    }
    d.l2 = std::sqrt(acc);
    return d;
}

}  // namespace singlab
