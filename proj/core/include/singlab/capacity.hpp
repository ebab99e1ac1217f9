#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "singlab/grid.hpp"

namespace singlab {

/// Condenser problem for cap_p(K) = inf { integral |grad phi|^p : phi = 1 on
/// K, phi = 0 on the grounded set }. K is a built-in compact family strictly
/// inside the box; the ground is the box boundary, plus everything outside
/// the disc |x - center| < outer_radius when outer_radius is set (the
/// box-embedded annulus).
struct CondenserProblem {
    enum class SetKind { Ball, SegmentTube, PointNeighborhood };
    SetKind kind = SetKind::Ball;
    std::array<double, 3> center{0.5, 0.5, 0.5};
    std::array<double, 3> seg_a{0.0, 0.0, 0.0};
    std::array<double, 3> seg_b{0.0, 0.0, 0.0};
    double radius = 0.1;
    double p = 2.0;
    std::optional<double> outer_radius;
};

struct CapacityEstimate {
    double value = 0.0;            // upper bound on the discrete infimum
    int iterations = 0;            // descent iterations (p != 2)
    std::vector<double> energy_history;
    ScalarField potential;
};

/// p = 2: the harmonic condenser potential and its Dirichlet energy (one
/// linear solve; the reported energy is the same cell quadrature the descent
/// minimizes, so it is variationally consistent). p != 2: projected gradient
/// descent on the p-energy with Barzilai-Borwein steps and backtracking,
/// started from the p = 2 potential, stopping when the relative energy
/// decrease falls below tol. Throws SolveError on descent stagnation.
CapacityEstimate estimate_capacity(const Domain& dom, const CondenserProblem& cp,
                                   double tol = 1e-6);

enum class TrendVerdict { Vanishing, BoundedBelow, Inconclusive };

std::string trend_name(TrendVerdict v);

struct CapacityTrend {
    TrendVerdict verdict = TrendVerdict::Inconclusive;
    std::vector<double> radii;
    std::vector<double> estimates;
};

/// Estimates over a geometrically decreasing family of radii (>= 3).
/// Vanishing: every consecutive pair decreases by at least 25% per radius
/// halving. Bounded below: the last two estimates agree within 10%.
/// Anything else is reported inconclusive, never guessed.
CapacityTrend capacity_trend(const Domain& dom, const CondenserProblem& base,
                             const std::vector<double>& radii, double tol = 1e-6);

}  // namespace singlab
