#pragma once

#include <optional>
#include <string>
#include <vector>

#include "singlab/diagnostics.hpp"
#include "singlab/measure.hpp"
#include "singlab/singular.hpp"

namespace singlab {

enum class Scheme { Split, Monotone };

std::string scheme_name(Scheme s);

struct LadderConfig {
    Scheme scheme = Scheme::Monotone;
    std::vector<double> schedule;   // strictly increasing, >= 2 entries
    SingularSolverOptions solver;
    double convergence_tol = 1e-3;  // successive L2 difference (decays like 1/n)
    double omega_delta = 0.1;       // compact subset for the positivity checks
    double barrier_tol = 1e-8;
    double monotone_tol = 1e-9;
    std::vector<double> trace_eps;  // empty -> {8h, 4h, 2h}
    double mollification_radius = 0.0;  // 0 -> h/2
    NodeMask capture_region;            // empty -> whole box
    bool compute_diagnostics = true;
};

struct LevelRecord {
    double n = 0.0;
    double level_mass = 0.0;        // mass of the level measure
    ScalarField u;
    int outer_iterations = 0;
    double bracket_width = 0.0;
    double weak_residual = 0.0;     // level weak form, built-in bumps
    double norm_w1q = 0.0;          // at q(gamma)
    double local_h1_omega = 0.0;
    double power_energy = 0.0;
    std::vector<double> trace;      // Phi(eps) per configured eps
    double captured_mass = 0.0;
    double min_on_omega = 0.0;
    bool monotone_ok = true;        // vs the previous level (monotone scheme)
    bool barrier_ok = true;         // vs the barrier (split scheme)
};

struct LadderResult {
    Scheme scheme = Scheme::Monotone;
    double gamma = 1.0;
    Exponents exponents;
    DiffusenessReport classification;
    std::vector<double> trace_eps;
    std::vector<LevelRecord> levels;
    std::vector<double> successive_diffs;  // L2 between consecutive levels
    ScalarField limit;                     // last completed level
    bool converged = false;
    BarrierResult barrier;                 // split scheme only
    LowerBoundReport lower_bound;
    std::optional<std::string> failure;    // stiffness error, partial results kept
};

/// Run the regularization sequence. Monotone scheme: the level measures are
/// the truncation ladder of the lumped measure and levels warm-start from
/// the previous solution. Split scheme: T_n(mu_a) plus the mollified
/// singular part at full mass, with the barrier check. A concentrated
/// classification is recorded but does not block the run.
LadderResult run_ladder(const Domain& dom, const CoefficientField& A,
                        const MeasureSpec& spec, double gamma, const LadderConfig& cfg);

struct LimitStatus {
    ScalarField field;
    bool converged = false;
    double last_diff = 0.0;
};

/// Converged iff the last successive L2 difference is below tol and the last
/// three differences decay monotonically.
LimitStatus extract_limit(const LadderResult& result, double tol);

}  // namespace singlab
