#include "singlab/ladder.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

std::string scheme_name(Scheme s) {
    return s == Scheme::Split ? "split" : "monotone";
}

namespace {

double l2_distance(const ScalarField& a, const ScalarField& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double e = a[i] - b[i];
        acc += e * e * a.domain().node_weight(i);
    }
    return std::sqrt(acc);
}

bool diffs_decay(const std::vector<double>& diffs) {
    // the last up-to-three differences must be nonincreasing
    std::size_t m = diffs.size();
    std::size_t from = m > 3 ? m - 3 : 0;
    for (std::size_t k = from; k + 1 < m; ++k)
        if (diffs[k + 1] > diffs[k]) return false;
    return true;
}

}  // namespace

LadderResult run_ladder(const Domain& dom, const CoefficientField& A,
                        const MeasureSpec& spec, double gamma, const LadderConfig& cfg) {
    if (cfg.schedule.size() < 2)
        throw ConfigError("ladder.schedule", "needs at least two levels");
    for (std::size_t k = 0; k + 1 < cfg.schedule.size(); ++k)
        if (!(cfg.schedule[k] < cfg.schedule[k + 1]))
            throw ConfigError("ladder.schedule", "levels must be strictly increasing");
    if (!(cfg.schedule.front() >= 1.0))
        throw ConfigError("ladder.schedule", "levels must be >= 1");

    LadderResult res;
    res.scheme = cfg.scheme;
    res.gamma = gamma;
    res.exponents = sobolev_exponents(gamma, dom.dim());

    // existence threshold exponent: 2 for gamma >= 1; for gamma < 1 the split
    // scheme needs q'-diffuse data, the monotone construction q-diffuse
    double p_class = 2.0;
    if (gamma < 1.0 && dom.dim() >= 2)
        p_class = cfg.scheme == Scheme::Split ? res.exponents.q_prime : res.exponents.q;
    res.classification = classify_diffuseness(spec, p_class, dom.dim());

    double r = cfg.mollification_radius > 0.0 ? cfg.mollification_radius
                                              : 0.5 * dom.spacing();

    LinearSystem sys = assemble(dom, A);
    validate_ellipticity(A, dom);

    // level measures
    std::vector<DiscreteMeasure> level_measures;
    if (cfg.scheme == Scheme::Monotone) {
        level_measures = monotone_ladder(spec, dom, cfg.schedule, r);
    } else {
        DiscreteMeasure dens = discretize(spec.absolutely_continuous_part(), dom, r);
        DiscreteMeasure sing = discretize(spec.singular_part(), dom, r);
        for (double n : cfg.schedule)
            level_measures.push_back(add(truncate_measure(dens, n), sing));
    }

    // split-scheme barrier from T_1(mu_a)
    if (cfg.scheme == Scheme::Split) {
        ScalarField mu_a(dom, 0.0);
        if (spec.has_density()) {
            for (std::size_t i = 0; i < dom.node_count(); ++i) {
                auto p = dom.position(i);
                mu_a[i] = spec.density()->eval(p[0], p[1], p[2]);
            }
        }
        SingularSolverOptions bopts = cfg.solver;
        bopts.system = &sys;
        bopts.warm_start = nullptr;
        res.barrier = compute_barrier(dom, A, mu_a, gamma, bopts);
    }

    res.trace_eps = cfg.trace_eps;
    if (res.trace_eps.empty()) {
        double h = dom.spacing();
        res.trace_eps = {8 * h, 4 * h, 2 * h};
    }

    NodeMask omega = compact_subdomain(dom, cfg.omega_delta);
    const NodeMask* capture =
        cfg.capture_region.empty() ? nullptr : &cfg.capture_region;

    const ScalarField* prev = nullptr;
    for (std::size_t k = 0; k < cfg.schedule.size(); ++k) {
        double n = cfg.schedule[k];
        RegularizedProblem prob{dom, A, level_measures[k], gamma, n};
        SingularSolverOptions sopts = cfg.solver;
        sopts.system = &sys;
        sopts.warm_start = prev;  // previous level is a subsolution of this one

        LevelRecord rec;
        rec.n = n;
        rec.level_mass = level_measures[k].total_mass;
        try {
            SolveReport sr = solve_regularized(prob, sopts);
            rec.u = std::move(sr.solution);
            rec.outer_iterations = sr.outer_iterations;
            rec.bracket_width = sr.bracket_width;
            rec.weak_residual = sr.weak_residual;
        } catch (const SolveError& err) {
            res.failure = "level n=" + std::to_string(n) + ": " + err.what();
            break;
        }

        if (cfg.compute_diagnostics) {
            rec.norm_w1q = norm_w1q(rec.u, res.exponents.q);
            rec.local_h1_omega = local_h1(rec.u, omega);
            rec.power_energy = power_energy(rec.u, gamma);
            rec.trace = boundary_trace_profile(rec.u, res.trace_eps);
            rec.captured_mass = captured_mass(rec.u, level_measures[k], gamma, n, capture);
        }
        double mn = 0.0;
        bool first = true;
        for (std::size_t i = 0; i < omega.size(); ++i) {
            if (!omega[i]) continue;
            if (first || rec.u[i] < mn) mn = rec.u[i];
            first = false;
        }
        rec.min_on_omega = mn;

        if (prev && cfg.scheme == Scheme::Monotone) {
            for (std::size_t i = 0; i < rec.u.size(); ++i) {
                if ((*prev)[i] > rec.u[i] + cfg.monotone_tol) {
                    rec.monotone_ok = false;
                    break;
                }
            }
        }
        if (cfg.scheme == Scheme::Split && !res.barrier.zero_data) {
            for (std::size_t i = 0; i < rec.u.size(); ++i) {
                if (rec.u[i] < res.barrier.w[i] - cfg.barrier_tol) {
                    rec.barrier_ok = false;
                    break;
                }
            }
        }

        if (prev) res.successive_diffs.push_back(l2_distance(*prev, rec.u));
        res.levels.push_back(std::move(rec));
        prev = &res.levels.back().u;
    }

    if (!res.levels.empty()) {
        res.limit = res.levels.back().u;
        res.converged = !res.failure && res.successive_diffs.size() >= 1 &&
                        res.successive_diffs.back() <= cfg.convergence_tol &&
                        diffs_decay(res.successive_diffs);

        // positivity reference: barrier when available, else the first level
        const ScalarField& ref =
            (cfg.scheme == Scheme::Split && !res.barrier.zero_data) ? res.barrier.w
                                                                    : res.levels[0].u;
        std::vector<ScalarField> fields;
        fields.reserve(res.levels.size());
        for (const auto& lr : res.levels) fields.push_back(lr.u);
        double tol = cfg.scheme == Scheme::Split ? cfg.barrier_tol : cfg.monotone_tol;
        res.lower_bound = check_lower_bound(fields, ref, omega, tol);
    }
    return res;
}

LimitStatus extract_limit(const LadderResult& result, double tol) {
    if (result.levels.size() < 2)
        throw ConfigError("extract_limit: needs at least two completed levels");
    LimitStatus st;
    st.field = result.limit;
    st.last_diff = result.successive_diffs.back();
    st.converged = st.last_diff <= tol && diffs_decay(result.successive_diffs);
    return st;
}

}  // namespace singlab
