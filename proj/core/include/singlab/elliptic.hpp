#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "singlab/expr.hpp"
#include "singlab/grid.hpp"
#include "singlab/measure.hpp"

namespace singlab {

/// Symmetric coefficient matrix A(x), constant or given by expressions.
class CoefficientField {
public:
    enum class Kind { Identity, Diagonal, Matrix };

    static CoefficientField identity();
    /// One expression broadcast to every axis, or one per axis.
    static CoefficientField diagonal(std::vector<Expression> entries);
    /// Full symmetric matrix; entries[d][e] must equal entries[e][d].
    static CoefficientField matrix(const std::vector<std::vector<Expression>>& entries);

    Kind kind() const { return kind_; }
    bool has_mixed_terms() const { return kind_ == Kind::Matrix; }
    double entry(int d, int e, const std::array<double, 3>& p) const;

private:
    Kind kind_ = Kind::Identity;
    std::vector<Expression> diag_;                 // Diagonal kind
    std::array<std::array<Expression, 3>, 3> mat_; // Matrix kind
};

struct EllipticityBounds {
    double alpha = 0.0;  // smallest sampled eigenvalue
    double beta = 0.0;   // largest sampled eigenvalue
};

/// Check (symmetry and positivity of A at every node, on the eigenbasis and
/// on pseudo-random unit directions). Throws ConfigError naming the node if
/// A is nonsymmetric or not positive definite somewhere.
EllipticityBounds validate_ellipticity(const CoefficientField& A, const Domain& dom);

struct CgOptions {
    double tol = 1e-12;            // relative residual, 2-norm
    int max_iter = 200000;
    const std::vector<double>* x0 = nullptr;          // warm start
    const std::vector<double>* diag_shift = nullptr;  // adds diag(shift) to the matrix
};

struct CgResult {
    std::vector<double> x;
    int iterations = 0;
    double rel_residual = 0.0;
};

/// Sparse SPD system over the interior nodes of a Domain, the discrete form
/// of -div(A grad u) with homogeneous Dirichlet data.
class LinearSystem {
public:
    const Domain& domain() const { return dom_; }
    std::size_t unknowns() const { return node_of_.size(); }
    bool is_m_matrix() const { return m_matrix_; }

    std::int64_t interior_index(std::size_t node) const { return interior_of_[node]; }
    std::size_t node_of(std::size_t k) const { return node_of_[k]; }

    /// y = (K + diag(shift)) x over interior unknowns.
    void apply(const std::vector<double>& x, std::vector<double>& y,
               const std::vector<double>* diag_shift = nullptr) const;

    /// Preconditioned conjugate gradients (symmetric Gauss-Seidel
    /// preconditioner; direct tridiagonal solve in 1D). Throws SolveError
    /// with the residual history if the iteration cap is hit.
    CgResult solve(const std::vector<double>& b, const CgOptions& opts = {}) const;

    std::vector<double> restrict_interior(const ScalarField& u) const;
    ScalarField extend(const std::vector<double>& interior_values) const;

    /// Lumped measure load: mass / cell volume at each interior node.
    std::vector<double> load_from(const DiscreteMeasure& m) const;
    /// Density load: nodal values used directly.
    std::vector<double> load_from(const ScalarField& density) const;

    /// Discrete bilinear form a_h(u, phi) = <K u, phi> * h^N (interior dot).
    double bilinear(const ScalarField& u, const ScalarField& phi) const;

    friend LinearSystem assemble(const Domain& dom, const CoefficientField& A);

private:
    Domain dom_;
    std::vector<std::int64_t> interior_of_;
    std::vector<std::size_t> node_of_;
    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> vals_;
    std::vector<std::size_t> diag_pos_;
    bool m_matrix_ = true;

    void solve_tridiagonal(const std::vector<double>& b,
                           const std::vector<double>* diag_shift,
                           std::vector<double>& x) const;
};

/// Assemble the symmetric stencil: flux form with face-averaged coefficients
/// on the axes; centered cross differences for mixed terms (Matrix kind),
/// which sacrifices the M-matrix sign pattern.
LinearSystem assemble(const Domain& dom, const CoefficientField& A);

/// Solve with a measure or density load. For an M-matrix and nonnegative
/// load, roundoff-scale negative entries are snapped to zero so the discrete
/// maximum principle holds exactly in the output.
ScalarField solve_linear(const LinearSystem& sys, const DiscreteMeasure& load,
                         double tol = 1e-12, const ScalarField* warm = nullptr);
ScalarField solve_linear(const LinearSystem& sys, const ScalarField& density_load,
                         double tol = 1e-12, const ScalarField* warm = nullptr);

}  // namespace singlab
