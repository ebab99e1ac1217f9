#include "singlab/singular.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/diagnostics.hpp"
#include "singlab/errors.hpp"

namespace singlab {

namespace {

void validate(const RegularizedProblem& prob) {
    if (!(prob.gamma > 0.0))
        throw ConfigError("solve_regularized: gamma must be positive");
    if (!(prob.level_n >= 1.0))
        throw ConfigError("solve_regularized: level n must be at least 1");
    if (!prob.nu.dom.same_grid(prob.dom))
        throw ConfigError("solve_regularized: measure grid mismatch");
    for (double v : prob.nu.masses)
        if (v < 0.0) throw ConfigError("solve_regularized: measure must be nonnegative");
}

double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::fabs(a[i] - b[i]));
    return w;
}

struct LevelContext {
    const LinearSystem* sys;
    std::vector<double> dens;  // nu as interior density
    double gamma;
    double shift;
    double cg_tol;
    int cg_max_iter;

    std::vector<double> rhs(const std::vector<double>& v) const {
        std::vector<double> f(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            f[i] = dens[i] == 0.0
                       ? 0.0
                       : dens[i] / std::pow(shift + std::max(v[i], 0.0), gamma);
        return f;
    }

    // T(v): one linear solve of the frozen right-hand side
    std::vector<double> picard_map(const std::vector<double>& v,
                                   const std::vector<double>* warm) const {
        CgOptions o;
        o.tol = cg_tol;
        o.max_iter = cg_max_iter;
        o.x0 = warm;
        return sys->solve(rhs(v), o).x;
    }

    // one Newton step from v (convex nonlinearity: from a supersolution the
    // iterates decrease monotonically to the solution)
    std::vector<double> newton_step(const std::vector<double>& v) const {
        std::size_t n = v.size();
        std::vector<double> diag(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            double base = shift + std::max(v[i], 0.0);
            double f = dens[i] == 0.0 ? 0.0 : dens[i] / std::pow(base, gamma);
            double fp = dens[i] == 0.0 ? 0.0 : gamma * f / base;  // -d f/d u = fp >= 0
            diag[i] = fp;
            b[i] = f + fp * v[i];
        }
        CgOptions o;
        o.tol = cg_tol;
        o.max_iter = cg_max_iter;
        o.x0 = &v;
        o.diag_shift = &diag;
        return sys->solve(b, o).x;
    }
};

}  // namespace

SolveReport solve_regularized(const RegularizedProblem& prob,
                              const SingularSolverOptions& opts) {
    validate(prob);
    LinearSystem local;
    const LinearSystem* sys = opts.system;
    if (!sys) {
        local = assemble(prob.dom, prob.A);
        sys = &local;
    }

    SolveReport rep;
    if (prob.nu.total_mass == 0.0) {
        rep.solution = ScalarField(prob.dom, 0.0);
        return rep;
    }

    LevelContext ctx;
    ctx.sys = sys;
    ctx.dens = sys->load_from(prob.nu);
    ctx.gamma = prob.gamma;
    ctx.shift = 1.0 / prob.level_n;
    ctx.cg_tol = opts.linear_tol;
    ctx.cg_max_iter = opts.linear_max_iter;

    std::size_t n = sys->unknowns();

    if (!sys->is_m_matrix()) {
        // mixed-derivative stencil: no certified bracket, damped Picard
        rep.picard_fallback = true;
        rep.warnings.push_back(
            "mixed-derivative stencil is not an M-matrix; damped Picard fallback "
            "(no certified two-sided bounds)");
        double theta = 1.0 / (1.0 + prob.gamma);
        std::vector<double> u =
            opts.warm_start ? sys->restrict_interior(*opts.warm_start)
                            : std::vector<double>(n, 0.0);
        for (double& v : u) v = std::max(v, 0.0);
        double step = 0.0;
        for (int it = 1; it <= opts.max_outer; ++it) {
            std::vector<double> tu = ctx.picard_map(u, &u);
            step = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double next = u[i] + theta * (tu[i] - u[i]);
                step = std::max(step, std::fabs(next - u[i]));
                u[i] = std::max(next, 0.0);
            }
            rep.width_history.push_back(step);
            rep.outer_iterations = it;
            if (step <= opts.bracket_tol) break;
        }
        if (step > opts.bracket_tol)
            throw SolveError("damped Picard did not reach tolerance", rep.width_history);
        rep.bracket_width = step;
        rep.solution = sys->extend(u);
        rep.solution.zero_boundary();
        auto bumps = make_bump_basis(prob.dom);
        rep.weak_residual =
            weak_residual(rep.solution, prob.nu, prob.gamma, *sys, bumps, ctx.shift)
                .max_abs;
        return rep;
    }

    // certified bracket: lo a subsolution, hi = T(lo) a supersolution
    std::vector<double> lo =
        opts.warm_start ? sys->restrict_interior(*opts.warm_start)
                        : std::vector<double>(n, 0.0);
    for (double& v : lo) v = std::max(v, 0.0);
    std::vector<double> hi = ctx.picard_map(lo, &lo);
    for (std::size_t i = 0; i < n; ++i) hi[i] = std::max(hi[i], lo[i]);

    double width = sup_distance(lo, hi);
    rep.width_history.push_back(width);

    bool newton_phase = false;
    int it = 0;
    while (width > opts.bracket_tol && it < opts.max_outer) {
        ++it;
        if (!newton_phase && opts.newton_acceleration && rep.width_history.size() >= 2) {
            // alternation contracts like gamma*u/(1/n+u); switch once it stalls
            double prev = rep.width_history[rep.width_history.size() - 2];
            if (width > 0.5 * prev) newton_phase = true;
        }
        if (newton_phase) {
            // the residual Ku - nu/(1/n+u)^gamma is concave in u, so Newton
            // from a subsolution increases monotonically toward the solution
            std::vector<double> lo_next = ctx.newton_step(lo);
            for (std::size_t i = 0; i < n; ++i)
                lo_next[i] = std::clamp(lo_next[i], lo[i], hi[i]);
            std::vector<double> hi_next = ctx.picard_map(lo_next, &hi);
            for (std::size_t i = 0; i < n; ++i)
                hi_next[i] = std::clamp(hi_next[i], lo_next[i], hi[i]);
            lo = std::move(lo_next);
            hi = std::move(hi_next);
            rep.used_newton = true;
        } else {
            std::vector<double> lo_next = ctx.picard_map(hi, &lo);
            std::vector<double> hi_next = ctx.picard_map(lo, &hi);
            for (std::size_t i = 0; i < n; ++i) {
                lo_next[i] = std::max(lo[i], lo_next[i]);
                hi_next[i] = std::min(hi[i], std::max(hi_next[i], lo_next[i]));
            }
            lo = std::move(lo_next);
            hi = std::move(hi_next);
        }
        width = sup_distance(lo, hi);
        rep.width_history.push_back(width);
    }
    rep.outer_iterations = it;
    rep.bracket_width = width;
    if (width > opts.bracket_tol)
        throw SolveError(
            "bracket failed to contract to tolerance (stiff gamma/n combination; "
            "reduce the ladder step)",
            rep.width_history);

    // midpoint refined by one damped Picard step, kept inside the bracket
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 0.5 * (lo[i] + hi[i]);
    {
        std::vector<double> tu = ctx.picard_map(u, &u);
        double theta = 1.0 / (1.0 + prob.gamma);
        for (std::size_t i = 0; i < n; ++i)
            u[i] = std::clamp(u[i] + theta * (tu[i] - u[i]), lo[i], hi[i]);
    }
    if (opts.polish) {
        LevelContext tight = ctx;
        tight.cg_tol = std::min(ctx.cg_tol, 1e-13);
        for (int k = 0; k < 2; ++k) {
            u = tight.newton_step(u);
            for (double& v : u) v = std::max(v, 0.0);
        }
    }

    rep.solution = sys->extend(u);
    rep.solution.zero_boundary();
    auto bumps = make_bump_basis(prob.dom);
    rep.weak_residual =
        weak_residual(rep.solution, prob.nu, prob.gamma, *sys, bumps, ctx.shift).max_abs;
    return rep;
}

BarrierResult compute_barrier(const Domain& dom, const CoefficientField& A,
                              const ScalarField& mu_a_density, double gamma,
                              const SingularSolverOptions& opts) {
    BarrierResult out;
    if (!mu_a_density.domain().same_grid(dom))
        throw ConfigError("compute_barrier: density grid mismatch");
    bool zero = true;
    for (double v : mu_a_density.values())
        if (v != 0.0) zero = false;
    if (zero) {
        out.w = ScalarField(dom, 0.0);
        out.zero_data = true;  // positivity then comes from the first level
        return out;
    }

    DiscreteMeasure nu;
    nu.dom = dom;
    nu.masses.assign(dom.node_count(), 0.0);
    nu.provenance.source = "barrier:T1(mu_a)";
    nu.provenance.truncation_level = 1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        double d = truncate_value(mu_a_density[i], 1.0);
        if (d < 0.0) throw ConfigError("compute_barrier: mu_a must be nonnegative");
        nu.masses[i] = d * dom.node_weight(i);
        total += nu.masses[i];
    }
    nu.total_mass = total;

    RegularizedProblem prob{dom, A, std::move(nu), gamma, 1.0};
    out.w = solve_regularized(prob, opts).solution;
    return out;
}

LowerBoundReport check_lower_bound(const std::vector<ScalarField>& levels,
                                   const ScalarField& reference, const NodeMask& omega,
                                   double tol) {
    const Domain& dom = reference.domain();
    if (omega.size() != dom.node_count())
        throw ConfigError("check_lower_bound: mask size mismatch");
    LowerBoundReport rep;
    rep.pass = true;
    bool first = true;
    for (std::size_t i = 0; i < omega.size(); ++i) {
        if (!omega[i]) continue;
        if (first || reference[i] < rep.c_omega) rep.c_omega = reference[i];
        first = false;
    }
    if (first) throw ConfigError("check_lower_bound: empty mask");
    for (std::size_t lev = 0; lev < levels.size(); ++lev) {
        const ScalarField& u = levels[lev];
        if (!u.domain().same_grid(dom))
            throw ConfigError("check_lower_bound: level grid mismatch");
        for (std::size_t i = 0; i < omega.size(); ++i) {
            if (!omega[i]) continue;
            double viol = u[i] - reference[i];
            if (viol < rep.worst_violation) {
                rep.worst_violation = viol;
                rep.worst_node = i;
                rep.worst_level = lev;
            }
        }
    }
    rep.pass = rep.worst_violation >= -tol;
    return rep;
}

}  // namespace singlab
