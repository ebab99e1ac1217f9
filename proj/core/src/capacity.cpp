#include "singlab/capacity.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

std::string trend_name(TrendVerdict v) {
    switch (v) {
        case TrendVerdict::Vanishing: return "vanishing";
        case TrendVerdict::BoundedBelow: return "bounded-below";
        case TrendVerdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

double point_segment_distance(const std::array<double, 3>& x,
                              const std::array<double, 3>& a,
                              const std::array<double, 3>& b, int dim) {
    double ab2 = 0.0, t = 0.0;
    for (int d = 0; d < dim; ++d) {
        ab2 += (b[d] - a[d]) * (b[d] - a[d]);
        t += (x[d] - a[d]) * (b[d] - a[d]);
    }
    t = ab2 > 0.0 ? std::clamp(t / ab2, 0.0, 1.0) : 0.0;
    double d2 = 0.0;
    for (int d = 0; d < dim; ++d) {
        double proj = a[d] + t * (b[d] - a[d]);
        d2 += (x[d] - proj) * (x[d] - proj);
    }
    return std::sqrt(d2);
}

struct CondenserMasks {
    NodeMask in_set;    // phi = 1
    NodeMask grounded;  // phi = 0
    std::vector<std::size_t> free_nodes;
    std::vector<std::int64_t> free_index;  // -1 when fixed
};

CondenserMasks build_masks(const Domain& dom, const CondenserProblem& cp) {
    CondenserMasks m;
    std::size_t nn = dom.node_count();
    m.in_set.assign(nn, 0);
    m.grounded.assign(nn, 0);
    m.free_index.assign(nn, -1);

    std::size_t count = 0;
    for (std::size_t i = 0; i < nn; ++i) {
        auto x = dom.position(i);
        double dist;
        if (cp.kind == CondenserProblem::SetKind::SegmentTube)
            dist = point_segment_distance(x, cp.seg_a, cp.seg_b, dom.dim());
        else {
            double d2 = 0.0;
            for (int d = 0; d < dom.dim(); ++d)
                d2 += (x[d] - cp.center[d]) * (x[d] - cp.center[d]);
            dist = std::sqrt(d2);
        }
        if (dist <= cp.radius) {
            m.in_set[i] = 1;
            ++count;
        }
        if (dom.is_boundary(i)) m.grounded[i] = 1;
        if (cp.outer_radius) {
            double d2 = 0.0;
            for (int d = 0; d < dom.dim(); ++d)
                d2 += (x[d] - cp.center[d]) * (x[d] - cp.center[d]);
            if (std::sqrt(d2) >= *cp.outer_radius) m.grounded[i] = 1;
        }
    }
    if (count == 0) {
        if (cp.kind == CondenserProblem::SetKind::PointNeighborhood) {
            // a point neighborhood always covers at least the point's node
            m.in_set[dom.nearest_node(cp.center)] = 1;
        } else {
            throw ConfigError("capacity: the compact set covers no grid node");
        }
    }
    for (std::size_t i = 0; i < nn; ++i) {
        if (m.in_set[i] && m.grounded[i])
            throw ConfigError("capacity: compact set touches the grounded set");
        if (!m.in_set[i] && !m.grounded[i]) {
            m.free_index[i] = static_cast<std::int64_t>(m.free_nodes.size());
            m.free_nodes.push_back(i);
        }
    }
    return m;
}

// cell quadrature of |grad phi|^p with one-sided differences
double p_energy(const Domain& dom, const std::vector<double>& phi, double p) {
    double h = dom.spacing();
    double vol = dom.cell_volume();
    int n = dom.dim();
    int cells = dom.resolution() - 1;
    double acc = 0.0;
    std::array<int, 3> c{0, 0, 0};
    std::array<int, 3> lim{1, 1, 1};
    for (int a = 0; a < n; ++a) lim[a] = cells;
    for (c[2] = 0; c[2] < lim[2]; ++c[2])
        for (c[1] = 0; c[1] < lim[1]; ++c[1])
            for (c[0] = 0; c[0] < lim[0]; ++c[0]) {
                std::size_t i = dom.index_of(c);
                double g2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    auto cp = c;
                    cp[a] += 1;
                    double g = (phi[dom.index_of(cp)] - phi[i]) / h;
                    g2 += g * g;
                }
                acc += std::pow(g2, 0.5 * p) * vol;
            }
    return acc;
}

void p_energy_gradient(const Domain& dom, const std::vector<double>& phi, double p,
                       const CondenserMasks& masks, std::vector<double>& grad) {
    double h = dom.spacing();
    double vol = dom.cell_volume();
    int n = dom.dim();
    int cells = dom.resolution() - 1;
    grad.assign(phi.size(), 0.0);
    std::array<int, 3> c{0, 0, 0};
    std::array<int, 3> lim{1, 1, 1};
    for (int a = 0; a < n; ++a) lim[a] = cells;
    for (c[2] = 0; c[2] < lim[2]; ++c[2])
        for (c[1] = 0; c[1] < lim[1]; ++c[1])
            for (c[0] = 0; c[0] < lim[0]; ++c[0]) {
                std::size_t i = dom.index_of(c);
                double g[3] = {0, 0, 0};
                double g2 = 0.0;
                std::size_t nb[3];
                for (int a = 0; a < n; ++a) {
                    auto cp = c;
                    cp[a] += 1;
                    nb[a] = dom.index_of(cp);
                    g[a] = (phi[nb[a]] - phi[i]) / h;
                    g2 += g[a] * g[a];
                }
                if (g2 == 0.0) continue;
                double factor = p * std::pow(g2, 0.5 * p - 1.0) * vol / h;
                for (int a = 0; a < n; ++a) {
                    grad[nb[a]] += factor * g[a];
                    grad[i] -= factor * g[a];
                }
            }
    // projection: fixed nodes do not move
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (masks.free_index[i] < 0) grad[i] = 0.0;
}

// harmonic potential: 5/7-point Laplace solve on the free nodes via
// Jacobi-preconditioned CG (the matrix is the plain Laplacian)
std::vector<double> harmonic_potential(const Domain& dom, const CondenserMasks& masks) {
    std::size_t nf = masks.free_nodes.size();
    double inv_h2 = 1.0 / (dom.spacing() * dom.spacing());
    int n = dom.dim();

    auto neighbors = [&](std::size_t node, auto&& fn) {
        auto c = dom.coords_of(node);
        for (int a = 0; a < n; ++a) {
            for (int s = -1; s <= 1; s += 2) {
                auto cc = c;
                cc[a] += s;
                if (cc[a] < 0 || cc[a] >= dom.resolution()) continue;
                fn(dom.index_of(cc));
            }
        }
    };

    std::vector<double> b(nf, 0.0);
    for (std::size_t k = 0; k < nf; ++k) {
        neighbors(masks.free_nodes[k], [&](std::size_t nb) {
            if (masks.in_set[nb]) b[k] += inv_h2;
        });
    }

    auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
        for (std::size_t k = 0; k < nf; ++k) {
            double diag = 2.0 * n * inv_h2;
            double off = 0.0;
            neighbors(masks.free_nodes[k], [&](std::size_t nb) {
                std::int64_t j = masks.free_index[nb];
                if (j >= 0) off += x[static_cast<std::size_t>(j)];
            });
            y[k] = diag * x[k] - inv_h2 * off;
        }
    };

    std::vector<double> x(nf, 0.0), r(b), pdir(b), q(nf);
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);
    if (bnorm == 0.0) return x;
    double rr = bnorm * bnorm;
    std::vector<double> hist;
    for (int it = 0; it < 200000; ++it) {
        apply(pdir, q);
        double pq = 0.0;
        for (std::size_t k = 0; k < nf; ++k) pq += pdir[k] * q[k];
        double alpha = rr / pq;
        for (std::size_t k = 0; k < nf; ++k) {
            x[k] += alpha * pdir[k];
            r[k] -= alpha * q[k];
        }
        double rr_new = 0.0;
        for (double v : r) rr_new += v * v;
        hist.push_back(std::sqrt(rr_new) / bnorm);
        if (std::sqrt(rr_new) <= 1e-12 * bnorm) return x;
        double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < nf; ++k) pdir[k] = r[k] + beta * pdir[k];
    }
    throw SolveError("capacity: conjugate gradients did not converge", hist);
}

}  // namespace

CapacityEstimate estimate_capacity(const Domain& dom, const CondenserProblem& cp,
                                   double tol) {
    if (!(cp.p > 1.0)) throw ConfigError("capacity.p", "must exceed 1");
    CondenserMasks masks = build_masks(dom, cp);

    std::vector<double> phi(dom.node_count(), 0.0);
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (masks.in_set[i]) phi[i] = 1.0;
    std::vector<double> x = harmonic_potential(dom, masks);
    for (std::size_t k = 0; k < masks.free_nodes.size(); ++k)
        phi[masks.free_nodes[k]] = x[k];

    CapacityEstimate est;
    est.energy_history.push_back(p_energy(dom, phi, cp.p));

    if (std::fabs(cp.p - 2.0) > 1e-14) {
        // projected descent on the p-energy, warm started from the harmonic
        // potential; Barzilai-Borwein step with Armijo backtracking
        std::vector<double> grad, grad_prev, phi_prev;
        double energy = est.energy_history.back();
        double step = dom.spacing() * dom.spacing();
        const int max_iter = 20000;
        int it = 0;
        for (; it < max_iter; ++it) {
            p_energy_gradient(dom, phi, cp.p, masks, grad);
            double gnorm2 = 0.0;
            for (double v : grad) gnorm2 += v * v;
            if (gnorm2 == 0.0) break;
            if (!phi_prev.empty()) {
                double sy = 0.0, yy = 0.0;
                for (std::size_t i = 0; i < phi.size(); ++i) {
                    double s = phi[i] - phi_prev[i];
                    double y = grad[i] - grad_prev[i];
                    sy += s * y;
                    yy += y * y;
                }
                if (sy > 0.0 && yy > 0.0) step = sy / yy;
            }
            phi_prev = phi;
            grad_prev = grad;

            double t = step;
            double new_energy = energy;
            std::vector<double> trial(phi.size());
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::size_t i = 0; i < phi.size(); ++i)
                    trial[i] = phi[i] - t * grad[i];
                new_energy = p_energy(dom, trial, cp.p);
                if (new_energy <= energy - 1e-4 * t * gnorm2) {
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted)
                throw SolveError("capacity: p-energy descent stagnated",
                                 est.energy_history);
            phi.swap(trial);
            double rel = (energy - new_energy) / std::max(new_energy, 1e-300);
            energy = new_energy;
            est.energy_history.push_back(energy);
            if (rel <= tol) break;
        }
        est.iterations = it;
        if (it >= max_iter)
            throw SolveError("capacity: p-energy descent hit the iteration cap",
                             est.energy_history);
    }

    est.value = est.energy_history.back();
    ScalarField pot(dom);
    pot.values() = phi;
    est.potential = std::move(pot);
    return est;
}

CapacityTrend capacity_trend(const Domain& dom, const CondenserProblem& base,
                             const std::vector<double>& radii, double tol) {
    if (radii.size() < 3)
        throw ConfigError("capacity.radii", "trend needs at least three radii");
    for (std::size_t k = 0; k + 1 < radii.size(); ++k)
        if (!(radii[k + 1] < radii[k]))
            throw ConfigError("capacity.radii", "radii must decrease");

    CapacityTrend trend;
    trend.radii = radii;
    for (double r : radii) {
        CondenserProblem cp = base;
        cp.radius = r;
        trend.estimates.push_back(estimate_capacity(dom, cp, tol).value);
    }

    bool vanishing = true;
    for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
        double halvings = std::log2(radii[k] / radii[k + 1]);
        double per_halving =
            std::pow(trend.estimates[k + 1] / trend.estimates[k], 1.0 / halvings);
        if (!(per_halving <= 0.75)) vanishing = false;
    }
    std::size_t m = trend.estimates.size();
    double last_change = std::fabs(trend.estimates[m - 1] - trend.estimates[m - 2]) /
                         trend.estimates[m - 2];
    if (vanishing)
        trend.verdict = TrendVerdict::Vanishing;
    else if (last_change <= 0.10)
        trend.verdict = TrendVerdict::BoundedBelow;
    else
        trend.verdict = TrendVerdict::Inconclusive;
    return trend;
}

}  // namespace singlab
