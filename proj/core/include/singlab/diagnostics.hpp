#pragma once

#include <optional>
#include <vector>

#include "singlab/elliptic.hpp"
#include "singlab/grid.hpp"
#include "singlab/measure.hpp"

namespace singlab {

struct Exponents {
    double q = 2.0;
    double q_prime = 2.0;
    std::optional<double> s;  // N >= 3 only
    bool oracle_regime = false;  // dim 1 falls outside the N >= 2 theory
};

/// gamma >= 1: q = q' = 2. gamma < 1 (N >= 2):
/// q = N(gamma+1)/(N-1+gamma), q' = N(gamma+1)/((N-1)gamma+1); Hoelder
/// conjugate pair. s = N(gamma+1)/(N-2) when N >= 3. N = 1 returns (2,2)
/// flagged as oracle regime.
Exponents sobolev_exponents(double gamma, int dim);

/// W^{1,q}_0 seminorm by cell quadrature of |grad u|^q with one-sided
/// differences per cell (for q = 2 and Dirichlet fields this reproduces the
/// assembly energy exactly).
double norm_w1q(const ScalarField& u, double q);

/// H^1 seminorm over the cells whose corners all lie in the mask.
double local_h1(const ScalarField& u, const NodeMask& omega);

/// || u^{(gamma+1)/2} ||_{H^1_0} (pointwise transform, then the seminorm).
double power_energy(const ScalarField& u, double gamma);

/// Phi(eps) = (1/eps) * integral of u over {dist(x, boundary) < eps},
/// trapezoid quadrature over the cells contained in the layer. Requires
/// eps >= h for every entry.
std::vector<double> boundary_trace_profile(const ScalarField& u,
                                           const std::vector<double>& eps_list);

/// Tensor-product hat functions on dyadic interior boxes (at least 5),
/// supports strictly inside the box.
std::vector<ScalarField> make_bump_basis(const Domain& dom);

struct WeakResidualReport {
    double max_abs = 0.0;
    std::vector<double> per_test;
};

/// max over test functions of |a_h(u, phi) - sum phi_i m_i/(shift+u_i)^gamma|.
/// shift = 0 tests the limit equation (requires u > 0 on every test support);
/// shift = 1/n tests a regularized level. Throws ConfigError when the
/// positivity required by the duality pairing fails on a support.
WeakResidualReport weak_residual(const ScalarField& u, const DiscreteMeasure& m,
                                 double gamma, const LinearSystem& sys,
                                 const std::vector<ScalarField>& test_set,
                                 double shift = 0.0);
WeakResidualReport weak_residual(const ScalarField& u, const DiscreteMeasure& m,
                                 double gamma, const CoefficientField& A,
                                 const std::vector<ScalarField>& test_set,
                                 double shift = 0.0);

/// Effective source mass sum_{region} m_i/(1/n + u_i)^gamma injected by a
/// level; its decay under refinement is the nonexistence signature for
/// concentrated data.
double captured_mass(const ScalarField& u, const DiscreteMeasure& m, double gamma,
                     double level_n, const NodeMask* region = nullptr);

struct FieldDistance {
    double l2 = 0.0;
    double linf = 0.0;
};

/// L2 (trapezoid-weighted) and sup distances between two fields on one grid.
FieldDistance cross_scheme_compare(const ScalarField& a, const ScalarField& b);

}  // namespace singlab
