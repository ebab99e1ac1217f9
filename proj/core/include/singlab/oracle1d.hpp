#pragma once

#include <vector>

#include "singlab/grid.hpp"

namespace singlab {

/// Closed form for -u'' = delta_{1/2}/u^gamma on (0,1):
/// u(x) = a*min(x, 1-x) with the kink balance 2a = (a/2)^{-gamma},
/// i.e. a = 2^{(gamma-1)/(gamma+1)}.
struct DiracOracle {
    double gamma = 1.0;
    double slope = 1.0;  // a
    double peak = 0.5;   // a/2

    double eval(double x) const;
    ScalarField sample(const Domain& dom) const;
    /// |2a - (a/2)^{-gamma}|, zero for the exact closed form.
    double jump_residual() const;
};

DiracOracle dirac_closed_form(double gamma);

/// High-accuracy solution of the symmetric two-point problem
///   -u'' = c / (shift + u)^gamma on (0,1), u(0)=u(1)=0, u > 0,
/// by shooting from the midpoint: adaptive Dormand-Prince integration of the
/// half problem with bisection on the peak value u(1/2). shift = 0 is the
/// singular equation; shift = 1 is the barrier equation.
class ShootingSolution {
public:
    double eval(double x) const;  // cubic Hermite between accepted steps
    double peak() const { return peak_; }
    /// Wall mismatch of the final trajectory (shortfall or leftover value).
    double boundary_residual() const { return residual_; }
    ScalarField sample(const Domain& dom) const;

    friend ShootingSolution shoot_constant_data(double gamma, double c, double tol,
                                                double shift);

private:
    // knots s = 0.5 - x from the midpoint toward the wall
    std::vector<double> s_, u_, up_;
    double peak_ = 0.0;
    double residual_ = 0.0;
};

ShootingSolution shoot_constant_data(double gamma, double c, double tol,
                                     double shift = 0.0);

}  // namespace singlab
