#include "singlab/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "singlab/errors.hpp"

namespace singlab {

CoefficientField CoefficientField::identity() { return CoefficientField{}; }

CoefficientField CoefficientField::diagonal(std::vector<Expression> entries) {
    if (entries.empty() || entries.size() > 3)
        throw ConfigError("coefficient.entries", "diagonal takes 1 to 3 entries");
    CoefficientField A;
    A.kind_ = Kind::Diagonal;
    A.diag_ = std::move(entries);
    return A;
}

CoefficientField CoefficientField::matrix(
    const std::vector<std::vector<Expression>>& entries) {
    CoefficientField A;
    A.kind_ = Kind::Matrix;
    std::size_t n = entries.size();
    if (n < 1 || n > 3)
        throw ConfigError("coefficient.entries", "matrix must be 1x1 to 3x3");
    for (std::size_t d = 0; d < n; ++d) {
        if (entries[d].size() != n)
            throw ConfigError("coefficient.entries", "matrix rows must have equal length");
        for (std::size_t e = 0; e < n; ++e) A.mat_[d][e] = entries[d][e];
    }
    for (std::size_t d = n; d < 3; ++d) A.mat_[d][d] = Expression::constant(1.0);
    return A;
}

double CoefficientField::entry(int d, int e, const std::array<double, 3>& p) const {
    switch (kind_) {
        case Kind::Identity:
            return d == e ? 1.0 : 0.0;
        case Kind::Diagonal: {
            if (d != e) return 0.0;
            const Expression& ex =
                diag_.size() == 1 ? diag_[0] : diag_[static_cast<std::size_t>(d)];
            return ex.eval(p[0], p[1], p[2]);
        }
        case Kind::Matrix:
            return mat_[static_cast<std::size_t>(d)][static_cast<std::size_t>(e)].eval(
                p[0], p[1], p[2]);
    }
    return 0.0;
}

namespace {

// eigenvalue range of a small symmetric matrix via cyclic Jacobi rotations
void sym_eig_range(double a[3][3], int n, double& lo, double& hi) {
    for (int sweep = 0; sweep < 32; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
    }
    lo = a[0][0];
    hi = a[0][0];
    for (int i = 1; i < n; ++i) {
        lo = std::min(lo, a[i][i]);
        hi = std::max(hi, a[i][i]);
    }
}

}  // namespace

EllipticityBounds validate_ellipticity(const CoefficientField& A, const Domain& dom) {
    int n = dom.dim();
    double alpha = 0.0, beta = 0.0;
    bool first = true;

    std::mt19937 rng(12345);  // fixed seed: deterministic sampling directions
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<std::array<double, 3>> dirs;
    for (int k = 0; k < 16; ++k) {
        std::array<double, 3> xi{0.0, 0.0, 0.0};
        double norm2 = 0.0;
        for (int a = 0; a < n; ++a) {
            xi[a] = gauss(rng);
            norm2 += xi[a] * xi[a];
        }
        double norm = std::sqrt(norm2);
        for (int a = 0; a < n; ++a) xi[a] /= norm;
        dirs.push_back(xi);
    }

    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        auto p = dom.position(i);
        double m[3][3] = {{0}};
        for (int d = 0; d < n; ++d)
            for (int e = 0; e < n; ++e) m[d][e] = A.entry(d, e, p);
        double scale = 0.0;
        for (int d = 0; d < n; ++d)
            for (int e = 0; e < n; ++e) scale = std::max(scale, std::fabs(m[d][e]));
        for (int d = 0; d < n; ++d)
            for (int e = d + 1; e < n; ++e)
                if (std::fabs(m[d][e] - m[e][d]) > 1e-12 * std::max(1.0, scale))
                    throw ConfigError("coefficient: A is not symmetric at node " +
                                      std::to_string(i));
        double lo, hi;
        double mc[3][3];
        std::copy(&m[0][0], &m[0][0] + 9, &mc[0][0]);
        sym_eig_range(mc, n, lo, hi);
        if (!(lo > 0.0))
            throw ConfigError("coefficient: A is not positive definite at node " +
                              std::to_string(i) + " (min eigenvalue " +
                              std::to_string(lo) + ")");
        // belt: sampled Rayleigh quotients must sit inside the eigen range
        for (const auto& xi : dirs) {
            double q = 0.0;
            for (int d = 0; d < n; ++d)
                for (int e = 0; e < n; ++e) q += xi[d] * m[d][e] * xi[e];
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        if (first) {
            alpha = lo;
            beta = hi;
            first = false;
        } else {
            alpha = std::min(alpha, lo);
            beta = std::max(beta, hi);
        }
    }
    return {alpha, beta};
}

LinearSystem assemble(const Domain& dom, const CoefficientField& A) {
    LinearSystem sys;
    sys.dom_ = dom;
    std::size_t nn = dom.node_count();
    sys.interior_of_.assign(nn, -1);
    for (std::size_t i = 0; i < nn; ++i) {
        if (!dom.is_boundary(i)) {
            sys.interior_of_[i] = static_cast<std::int64_t>(sys.node_of_.size());
            sys.node_of_.push_back(i);
        }
    }

    int n = dom.dim();
    double h = dom.spacing();
    double inv_h2 = 1.0 / (h * h);
    std::size_t unknowns = sys.node_of_.size();

    // nodal coefficient tables
    std::vector<std::array<double, 3>> diag_coef(nn);
    std::vector<std::array<double, 3>> off_coef;  // pairs (0,1),(0,2),(1,2)
    bool mixed = A.has_mixed_terms();
    if (mixed) off_coef.resize(nn);
    for (std::size_t i = 0; i < nn; ++i) {
        auto p = dom.position(i);
        for (int d = 0; d < n; ++d) diag_coef[i][d] = A.entry(d, d, p);
        if (mixed) {
            off_coef[i][0] = n > 1 ? A.entry(0, 1, p) : 0.0;
            off_coef[i][1] = n > 2 ? A.entry(0, 2, p) : 0.0;
            off_coef[i][2] = n > 2 ? A.entry(1, 2, p) : 0.0;
        }
    }
    auto off_entry = [&](std::size_t node, int d, int e) {
        int lo = std::min(d, e), hi = std::max(d, e);
        int k = (lo == 0) ? (hi == 1 ? 0 : 1) : 2;
        return off_coef[node][k];
    };

    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(unknowns);
    auto add_entry = [&](std::size_t row, std::size_t node_col, double v) {
        std::int64_t col = sys.interior_of_[node_col];
        if (col < 0) return;  // Dirichlet neighbor
        rows[row].emplace_back(static_cast<std::uint32_t>(col), v);
    };

    for (std::size_t k = 0; k < unknowns; ++k) {
        std::size_t i = sys.node_of_[k];
        auto c = dom.coords_of(i);
        double diag = 0.0;
        for (int d = 0; d < n; ++d) {
            auto cp = c, cm = c;
            cp[d] += 1;
            cm[d] -= 1;
            std::size_t ip = dom.index_of(cp), im = dom.index_of(cm);
            double wp = 0.5 * (diag_coef[i][d] + diag_coef[ip][d]) * inv_h2;
            double wm = 0.5 * (diag_coef[i][d] + diag_coef[im][d]) * inv_h2;
            diag += wp + wm;
            add_entry(k, ip, -wp);
            add_entry(k, im, -wm);
        }
        rows[k].emplace_back(static_cast<std::uint32_t>(k), diag);
        if (mixed) {
            double q = 0.25 * inv_h2;
            for (int d = 0; d < n; ++d)
                for (int e = d + 1; e < n; ++e) {
                    auto cpd = c, cmd = c, cpe = c, cme = c;
                    cpd[d] += 1;
                    cmd[d] -= 1;
                    cpe[e] += 1;
                    cme[e] -= 1;
                    double apd = off_entry(dom.index_of(cpd), d, e);
                    double amd = off_entry(dom.index_of(cmd), d, e);
                    double ape = off_entry(dom.index_of(cpe), d, e);
                    double ame = off_entry(dom.index_of(cme), d, e);
                    auto cc = c;
                    cc[d] += 1; cc[e] += 1;
                    add_entry(k, dom.index_of(cc), -q * (apd + ape));
                    cc = c; cc[d] -= 1; cc[e] -= 1;
                    add_entry(k, dom.index_of(cc), -q * (amd + ame));
                    cc = c; cc[d] += 1; cc[e] -= 1;
                    add_entry(k, dom.index_of(cc), q * (apd + ame));
                    cc = c; cc[d] -= 1; cc[e] += 1;
                    add_entry(k, dom.index_of(cc), q * (amd + ape));
                }
        }
        std::sort(rows[k].begin(), rows[k].end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    }

    sys.row_ptr_.assign(unknowns + 1, 0);
    for (std::size_t k = 0; k < unknowns; ++k)
        sys.row_ptr_[k + 1] = sys.row_ptr_[k] + rows[k].size();
    sys.cols_.resize(sys.row_ptr_[unknowns]);
    sys.vals_.resize(sys.row_ptr_[unknowns]);
    sys.diag_pos_.assign(unknowns, 0);
    double max_diag = 0.0, max_off = 0.0;
    for (std::size_t k = 0; k < unknowns; ++k) {
        std::size_t at = sys.row_ptr_[k];
        for (const auto& [col, v] : rows[k]) {
            sys.cols_[at] = col;
            sys.vals_[at] = v;
            if (col == k) {
                sys.diag_pos_[k] = at;
                max_diag = std::max(max_diag, std::fabs(v));
            } else {
                max_off = std::max(max_off, v);
            }
            ++at;
        }
    }
    sys.m_matrix_ = max_off <= 1e-13 * max_diag;
    return sys;
}

void LinearSystem::apply(const std::vector<double>& x, std::vector<double>& y,
                         const std::vector<double>* diag_shift) const {
    std::size_t n = unknowns();
    y.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t a = row_ptr_[k]; a < row_ptr_[k + 1]; ++a)
            s += vals_[a] * x[cols_[a]];
        if (diag_shift) s += (*diag_shift)[k] * x[k];
        y[k] = s;
    }
}

void LinearSystem::solve_tridiagonal(const std::vector<double>& b,
                                     const std::vector<double>* diag_shift,
                                     std::vector<double>& x) const {
    // Thomas algorithm; in 1D the interior system is tridiagonal by layout.
    std::size_t n = unknowns();
    std::vector<double> diag(n), lower(n, 0.0), upper(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t a = row_ptr_[k]; a < row_ptr_[k + 1]; ++a) {
            if (cols_[a] == k)
                diag[k] = vals_[a];
            else if (cols_[a] + 1 == k)
                lower[k] = vals_[a];
            else
                upper[k] = vals_[a];
        }
        if (diag_shift) diag[k] += (*diag_shift)[k];
    }
    std::vector<double> cp(n), dp(n);
    cp[0] = upper[0] / diag[0];
    dp[0] = b[0] / diag[0];
    for (std::size_t k = 1; k < n; ++k) {
        double m = diag[k] - lower[k] * cp[k - 1];
        cp[k] = upper[k] / m;
        dp[k] = (b[k] - lower[k] * dp[k - 1]) / m;
    }
    x.assign(n, 0.0);
    x[n - 1] = dp[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) x[k] = dp[k] - cp[k] * x[k + 1];
}

CgResult LinearSystem::solve(const std::vector<double>& b, const CgOptions& opts) const {
    std::size_t n = unknowns();
    double bnorm = 0.0;
    for (double v : b) bnorm += v * v;
    bnorm = std::sqrt(bnorm);

    CgResult res;
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        return res;
    }

    if (dom_.dim() == 1) {
        solve_tridiagonal(b, opts.diag_shift, res.x);
        std::vector<double> r(n);
        apply(res.x, r, opts.diag_shift);
        double rn = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double d = r[k] - b[k];
            rn += d * d;
        }
        res.rel_residual = std::sqrt(rn) / bnorm;
        return res;
    }

    std::vector<double> diag(n);
    for (std::size_t k = 0; k < n; ++k) {
        diag[k] = vals_[diag_pos_[k]];
        if (opts.diag_shift) diag[k] += (*opts.diag_shift)[k];
    }

    // symmetric Gauss-Seidel preconditioner
    auto precond = [&](const std::vector<double>& r, std::vector<double>& z,
                       std::vector<double>& w) {
        for (std::size_t k = 0; k < n; ++k) {
            double s = r[k];
            for (std::size_t a = row_ptr_[k]; a < row_ptr_[k + 1]; ++a) {
                std::uint32_t c = cols_[a];
                if (c < k) s -= vals_[a] * w[c];
            }
            w[k] = s / diag[k];
        }
        for (std::size_t k = n; k-- > 0;) {
            double s = w[k] * diag[k];
            for (std::size_t a = row_ptr_[k]; a < row_ptr_[k + 1]; ++a) {
                std::uint32_t c = cols_[a];
                if (c > k) s -= vals_[a] * z[c];
            }
            z[k] = s / diag[k];
        }
    };

    std::vector<double> x = opts.x0 ? *opts.x0 : std::vector<double>(n, 0.0);
    std::vector<double> r(n), z(n), w(n), p(n), q(n);
    apply(x, r, opts.diag_shift);
    for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - r[k];

    std::vector<double> history;
    double rnorm = 0.0;
    for (double v : r) rnorm += v * v;
    rnorm = std::sqrt(rnorm);
    if (rnorm <= opts.tol * bnorm) {
        res.x = std::move(x);
        res.rel_residual = rnorm / bnorm;
        return res;
    }

    precond(r, z, w);
    p = z;
    double rz = 0.0;
    for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];

    for (int it = 1; it <= opts.max_iter; ++it) {
        apply(p, q, opts.diag_shift);
        double pq = 0.0;
        for (std::size_t k = 0; k < n; ++k) pq += p[k] * q[k];
        double alpha = rz / pq;
        for (std::size_t k = 0; k < n; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * q[k];
        }
        rnorm = 0.0;
        for (double v : r) rnorm += v * v;
        rnorm = std::sqrt(rnorm);
        history.push_back(rnorm / bnorm);
        if (rnorm <= opts.tol * bnorm) {
            res.x = std::move(x);
            res.iterations = it;
            res.rel_residual = rnorm / bnorm;
            return res;
        }
        precond(r, z, w);
        double rz_new = 0.0;
        for (std::size_t k = 0; k < n; ++k) rz_new += r[k] * z[k];
        double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    throw SolveError("conjugate gradients: no convergence within " +
                         std::to_string(opts.max_iter) + " iterations (rel residual " +
                         std::to_string(rnorm / bnorm) + ")",
                     history);
}

std::vector<double> LinearSystem::restrict_interior(const ScalarField& u) const {
    std::vector<double> x(unknowns());
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = u[node_of_[k]];
    return x;
}

ScalarField LinearSystem::extend(const std::vector<double>& interior_values) const {
    ScalarField u(dom_, 0.0);
    for (std::size_t k = 0; k < interior_values.size(); ++k)
        u[node_of_[k]] = interior_values[k];
    return u;
}

std::vector<double> LinearSystem::load_from(const DiscreteMeasure& m) const {
    if (!m.dom.same_grid(dom_))
        throw ConfigError("load_from: measure lives on a different grid");
    std::vector<double> b(unknowns(), 0.0);
    double inv_vol = 1.0 / dom_.cell_volume();
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = m.masses[node_of_[k]] * inv_vol;
    return b;
}

std::vector<double> LinearSystem::load_from(const ScalarField& density) const {
    if (!density.domain().same_grid(dom_))
        throw ConfigError("load_from: field lives on a different grid");
    std::vector<double> b(unknowns(), 0.0);
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = density[node_of_[k]];
    return b;
}

double LinearSystem::bilinear(const ScalarField& u, const ScalarField& phi) const {
    auto x = restrict_interior(u);
    std::vector<double> y;
    apply(x, y);
    double s = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) s += y[k] * phi[node_of_[k]];
    return s * dom_.cell_volume();
}

namespace {

ScalarField finish_solve(const LinearSystem& sys, const std::vector<double>& b,
                         double tol, const ScalarField* warm, bool nonneg_load) {
    CgOptions opts;
    opts.tol = tol;
    std::vector<double> x0;
    if (warm) {
        x0 = sys.restrict_interior(*warm);
        opts.x0 = &x0;
    }
    CgResult r = sys.solve(b, opts);
    if (nonneg_load && sys.is_m_matrix()) {
        double scale = 0.0;
        for (double v : r.x) scale = std::max(scale, std::fabs(v));
        for (double& v : r.x) {
            if (v < 0.0) {
                if (v < -1e-12 * scale)
                    throw SolveError("maximum principle violated beyond roundoff", {});
                v = 0.0;
            }
        }
    }
    return sys.extend(r.x);
}

}  // namespace

ScalarField solve_linear(const LinearSystem& sys, const DiscreteMeasure& load, double tol,
                         const ScalarField* warm) {
    bool nonneg = true;
    for (double v : load.masses)
        if (v < 0.0) nonneg = false;
    return finish_solve(sys, sys.load_from(load), tol, warm, nonneg);
}

ScalarField solve_linear(const LinearSystem& sys, const ScalarField& density_load,
                         double tol, const ScalarField* warm) {
    bool nonneg = true;
    for (double v : density_load.values())
        if (v < 0.0) nonneg = false;
    return finish_solve(sys, sys.load_from(density_load), tol, warm, nonneg);
}

}  // namespace singlab
