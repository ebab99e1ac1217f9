#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "singlab/expr.hpp"
#include "singlab/grid.hpp"

namespace singlab {

/// Point mass strictly inside the box.
struct Atom {
    std::array<double, 3> point{0.5, 0.5, 0.5};
    double weight = 1.0;
};

/// Polyline carrying a constant nonnegative linear density.
struct Curve {
    std::vector<std::array<double, 3>> polyline;
    double linear_density = 1.0;
    double length() const;
};

/// Symbolic nonnegative measure mu = mu_a + mu_s: an absolutely continuous
/// density part plus atoms and curve-concentrated parts.
class MeasureSpec {
public:
    static MeasureSpec from_density(Expression density);
    static MeasureSpec from_density(double constant);
    static MeasureSpec from_atom(const Atom& atom);
    static MeasureSpec from_segment(const std::array<double, 3>& a,
                                    const std::array<double, 3>& b,
                                    double linear_density);

    MeasureSpec& set_density(Expression density);
    MeasureSpec& add_atom(const Atom& atom);
    MeasureSpec& add_curve(const Curve& curve);

    const std::optional<Expression>& density() const { return density_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::vector<Curve>& curves() const { return curves_; }
    bool has_density() const { return density_.has_value(); }
    bool has_singular_part() const { return !atoms_.empty() || !curves_.empty(); }
    bool empty() const { return !has_density() && !has_singular_part(); }

    /// Density-only / singular-only restrictions (the mu_a + mu_s split).
    MeasureSpec absolutely_continuous_part() const;
    MeasureSpec singular_part() const;

    /// Total mass with the density part integrated by the grid's tensor
    /// trapezoid rule (exact for constants; the same quadrature discretize
    /// uses, so lumping conserves mass to roundoff).
    double mass(const Domain& dom) const;

private:
    std::optional<Expression> density_;
    std::vector<Atom> atoms_;
    std::vector<Curve> curves_;
};

/// Where a DiscreteMeasure came from.
struct MeasureProvenance {
    std::string source;
    double mollification_radius = 0.0;
    std::optional<double> truncation_level;
};

/// Nodal lumped-mass discretization of a MeasureSpec.
struct DiscreteMeasure {
    Domain dom;
    std::vector<double> masses;  // one nonnegative mass per node
    double total_mass = 0.0;
    MeasureProvenance provenance;

    bool is_zero() const { return total_mass == 0.0; }
};

/// Lump a MeasureSpec onto the grid. Atoms go to the nearest node when
/// r == h/2 and are otherwise spread by a normalized hat bump of radius r;
/// curves are integrated by the composite midpoint rule with step <= h/2;
/// the density is sampled nodally with trapezoid weights.
/// Requires r >= h/2 and atoms/curve vertices strictly inside the box.
DiscreteMeasure discretize(const MeasureSpec& spec, const Domain& dom,
                           double mollification_radius);
DiscreteMeasure discretize(const MeasureSpec& spec, const Domain& dom);

/// Pointwise two-sided truncation T_k(s) = max(-k, min(s, k)).
double truncate_value(double s, double k);
std::vector<double> truncate(const std::vector<double>& density_values, double k);

/// Truncate the lumped density of m at level n (masses are scaled by the
/// node quadrature weight, clamped, and scaled back).
DiscreteMeasure truncate_measure(const DiscreteMeasure& m, double level);

/// Increasing sequence of discrete measures: level-n truncation of the
/// mesh-scale lumping, nodewise nondecreasing along the schedule.
std::vector<DiscreteMeasure> monotone_ladder(const MeasureSpec& spec, const Domain& dom,
                                             const std::vector<double>& schedule,
                                             double mollification_radius);
std::vector<DiscreteMeasure> monotone_ladder(const MeasureSpec& spec, const Domain& dom,
                                             const std::vector<double>& schedule);

/// sum_i u_i m_i; for u >= 0 this satisfies the duality bound
/// integrate(u, m) <= max(u) * total_mass exactly.
double integrate(const ScalarField& u, const DiscreteMeasure& m);

DiscreteMeasure add(const DiscreteMeasure& a, const DiscreteMeasure& b);

enum class Diffuseness { Diffuse, Concentrated };

struct ComponentVerdict {
    std::string component;   // "density", "atom[k]", "curve[k]"
    Diffuseness verdict = Diffuseness::Diffuse;
    bool borderline = false; // capacity-zero equality case
    std::string label() const;
};

struct DiffusenessReport {
    std::vector<ComponentVerdict> components;
    Diffuseness aggregate = Diffuseness::Diffuse;  // concentrated if any part is
    bool borderline = false;
    double p = 2.0;
    int dim = 2;
};

/// Rule-based classification against the p-capacity thresholds: densities
/// are always diffuse; a point is diffuse iff p > N; a curve iff p > N-1;
/// equality cases are concentrated with the borderline flag set.
DiffusenessReport classify_diffuseness(const MeasureSpec& spec, double p, int dim);

}  // namespace singlab
