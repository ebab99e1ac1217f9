#pragma once

#include <optional>
#include <string>
#include <vector>

#include "singlab/elliptic.hpp"
#include "singlab/grid.hpp"
#include "singlab/measure.hpp"

namespace singlab {

/// One regularized level: -div(A grad u) = nu / (1/n + u)^gamma, u = 0 on
/// the boundary, with nu a nonnegative nodal measure and n >= 1 the level.
struct RegularizedProblem {
    Domain dom;
    CoefficientField A;
    DiscreteMeasure nu;
    double gamma = 1.0;
    double level_n = 1.0;
};

struct SingularSolverOptions {
    double bracket_tol = 1e-10;   // sup-norm width target
    int max_outer = 300;
    bool newton_acceleration = true;  // monotone Newton inside the bracket
    bool polish = true;               // extra Newton steps on the returned field
    double linear_tol = 1e-12;
    int linear_max_iter = 200000;
    const ScalarField* warm_start = nullptr;   // a subsolution, e.g. the previous level
    const LinearSystem* system = nullptr;      // preassembled matrix for (dom, A)
};

struct SolveReport {
    ScalarField solution;
    int outer_iterations = 0;
    double bracket_width = 0.0;
    double weak_residual = 0.0;  // level weak form against the built-in bumps
    std::vector<double> width_history;
    bool used_newton = false;
    bool picard_fallback = false;  // engaged when the stencil is not an M-matrix
    std::vector<std::string> warnings;
};

/// Solve one level by the order-reversing bracket: T(v) = K^{-1}(nu/(1/n+v)^gamma)
/// is antitone, lo_{k+1} = T(hi_k) and hi_{k+1} = T(lo_k) keep the solution
/// certified between them. When the alternation stalls (it does once
/// gamma*u/(1/n+u) reaches 1), monotone Newton steps on the upper bound take
/// over, still inside the bracket. Throws SolveError with the width history
/// if the bracket fails to contract within max_outer (stiff gamma/n; reduce
/// the ladder step).
SolveReport solve_regularized(const RegularizedProblem& prob,
                              const SingularSolverOptions& opts = {});

struct BarrierResult {
    ScalarField w;
    bool zero_data = false;  // mu_a vanished: use the first-level solution instead
};

/// Barrier from below: -div(A grad w) = T_1(mu_a) / (1 + w)^gamma. Every
/// split-scheme level dominates w nodewise (M-matrix comparison).
BarrierResult compute_barrier(const Domain& dom, const CoefficientField& A,
                              const ScalarField& mu_a_density, double gamma,
                              const SingularSolverOptions& opts = {});

struct LowerBoundReport {
    double c_omega = 0.0;        // min of the reference field over omega
    bool pass = false;
    double worst_violation = 0.0;  // most negative (u_level - reference) on omega
    std::size_t worst_node = 0;
    std::size_t worst_level = 0;
};

/// Verify u_level >= reference - tol on omega for every level.
LowerBoundReport check_lower_bound(const std::vector<ScalarField>& levels,
                                   const ScalarField& reference, const NodeMask& omega,
                                   double tol);

}  // namespace singlab
