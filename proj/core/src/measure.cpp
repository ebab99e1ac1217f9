#include "singlab/measure.hpp"

#include <algorithm>
#include <cmath>

#include "singlab/errors.hpp"

namespace singlab {

double Curve::length() const {
    double len = 0.0;
    for (std::size_t s = 0; s + 1 < polyline.size(); ++s) {
        double d2 = 0.0;
        for (int a = 0; a < 3; ++a) {
            double d = polyline[s + 1][a] - polyline[s][a];
            d2 += d * d;
        }
        len += std::sqrt(d2);
    }
    return len;
}

MeasureSpec MeasureSpec::from_density(Expression density) {
    MeasureSpec s;
    s.density_ = std::move(density);
    return s;
}

MeasureSpec MeasureSpec::from_density(double constant) {
    return from_density(Expression::constant(constant));
}

MeasureSpec MeasureSpec::from_atom(const Atom& atom) {
    MeasureSpec s;
    s.add_atom(atom);
    return s;
}

MeasureSpec MeasureSpec::from_segment(const std::array<double, 3>& a,
                                      const std::array<double, 3>& b,
                                      double linear_density) {
    MeasureSpec s;
    Curve c;
    c.polyline = {a, b};
    c.linear_density = linear_density;
    s.add_curve(c);
    return s;
}

MeasureSpec& MeasureSpec::set_density(Expression density) {
    density_ = std::move(density);
    return *this;
}

MeasureSpec& MeasureSpec::add_atom(const Atom& atom) {
    if (!(atom.weight > 0.0))
        throw ConfigError("measure.atoms", "atom weight must be positive");
    atoms_.push_back(atom);
    return *this;
}

MeasureSpec& MeasureSpec::add_curve(const Curve& curve) {
    if (curve.polyline.size() < 2)
        throw ConfigError("measure.curves", "polyline needs at least two vertices");
    if (curve.linear_density < 0.0)
        throw ConfigError("measure.curves", "linear density must be nonnegative");
    curves_.push_back(curve);
    return *this;
}

MeasureSpec MeasureSpec::absolutely_continuous_part() const {
    MeasureSpec s;
    s.density_ = density_;
    return s;
}

MeasureSpec MeasureSpec::singular_part() const {
    MeasureSpec s;
    s.atoms_ = atoms_;
    s.curves_ = curves_;
    return s;
}

double MeasureSpec::mass(const Domain& dom) const {
    double total = 0.0;
    if (density_) {
        for (std::size_t i = 0; i < dom.node_count(); ++i) {
            auto p = dom.position(i);
            double v = density_->eval(p[0], p[1], p[2]);
            if (v < 0.0)
                throw ConfigError("measure.density", "negative density at a grid node");
            total += v * dom.node_weight(i);
        }
    }
    for (const auto& a : atoms_) total += a.weight;
    for (const auto& c : curves_) total += c.linear_density * c.length();
    return total;
}

namespace {

void lump_point_mass(const Domain& dom, const std::array<double, 3>& point, double mass,
                     double radius, std::vector<double>& masses) {
    double h = dom.spacing();
    if (radius <= 0.5 * h * (1.0 + 1e-12)) {
        masses[dom.nearest_node(point)] += mass;
        return;
    }
    // normalized hat bump of the given radius
    std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dom.dim(); ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor(
                                (point[a] - radius - dom.extents()[a][0]) / h)));
        hi[a] = std::min(dom.resolution() - 1,
                         static_cast<int>(std::ceil(
                             (point[a] + radius - dom.extents()[a][0]) / h)));
    }
    std::vector<std::pair<std::size_t, double>> w;
    double wsum = 0.0;
    std::array<int, 3> c{0, 0, 0};
    for (c[2] = lo[2]; c[2] <= hi[2]; ++c[2])
        for (c[1] = lo[1]; c[1] <= hi[1]; ++c[1])
            for (c[0] = lo[0]; c[0] <= hi[0]; ++c[0]) {
                std::size_t idx = dom.index_of(c);
                auto p = dom.position(idx);
                double r2 = 0.0;
                for (int a = 0; a < dom.dim(); ++a)
                    r2 += (p[a] - point[a]) * (p[a] - point[a]);
                double wgt = std::max(0.0, 1.0 - std::sqrt(r2) / radius);
                if (wgt > 0.0) {
                    w.emplace_back(idx, wgt);
                    wsum += wgt;
                }
            }
    if (w.empty() || wsum <= 0.0) {
        masses[dom.nearest_node(point)] += mass;
        return;
    }
    for (const auto& [idx, wgt] : w) masses[idx] += mass * wgt / wsum;
}

}  // namespace

DiscreteMeasure discretize(const MeasureSpec& spec, const Domain& dom,
                           double mollification_radius) {
    double h = dom.spacing();
    if (mollification_radius < 0.5 * h * (1.0 - 1e-12))
        throw ConfigError("measure.mollification_radius",
                          "must be at least half the grid spacing");

    DiscreteMeasure m;
    m.dom = dom;
    m.masses.assign(dom.node_count(), 0.0);
    m.provenance.mollification_radius = mollification_radius;
    m.provenance.source = "measure-spec";

    if (spec.density()) {
        const auto& f = *spec.density();
        for (std::size_t i = 0; i < dom.node_count(); ++i) {
            auto p = dom.position(i);
            double v = f.eval(p[0], p[1], p[2]);
            if (v < 0.0)
                throw ConfigError("measure.density", "negative density at a grid node");
            m.masses[i] += v * dom.node_weight(i);
        }
    }
    for (const auto& a : spec.atoms()) {
        if (!dom.contains_strictly(a.point))
            throw ConfigError("measure.atoms", "atom lies outside the open box");
        lump_point_mass(dom, a.point, a.weight, mollification_radius, m.masses);
    }
    for (const auto& c : spec.curves()) {
        for (const auto& v : c.polyline)
            if (!dom.contains_strictly(v))
                throw ConfigError("measure.curves", "polyline vertex outside the open box");
        for (std::size_t s = 0; s + 1 < c.polyline.size(); ++s) {
            const auto& p0 = c.polyline[s];
            const auto& p1 = c.polyline[s + 1];
            double len2 = 0.0;
            for (int a = 0; a < 3; ++a) len2 += (p1[a] - p0[a]) * (p1[a] - p0[a]);
            double len = std::sqrt(len2);
            if (len == 0.0) continue;
            // composite midpoint with step <= h/2
            auto pieces = static_cast<std::size_t>(std::ceil(len / (0.5 * h)));
            double ds = len / static_cast<double>(pieces);
            for (std::size_t k = 0; k < pieces; ++k) {
                double t = (static_cast<double>(k) + 0.5) / static_cast<double>(pieces);
                std::array<double, 3> mid{};
                for (int a = 0; a < 3; ++a) mid[a] = p0[a] + t * (p1[a] - p0[a]);
                lump_point_mass(dom, mid, c.linear_density * ds, mollification_radius,
                                m.masses);
            }
        }
    }

    double total = 0.0;
    for (double v : m.masses) total += v;
    m.total_mass = total;
    return m;
}

DiscreteMeasure discretize(const MeasureSpec& spec, const Domain& dom) {
    return discretize(spec, dom, 0.5 * dom.spacing());
}

double truncate_value(double s, double k) { return std::max(-k, std::min(s, k)); }

std::vector<double> truncate(const std::vector<double>& density_values, double k) {
    if (!(k > 0.0)) throw ConfigError("truncate: level k must be positive");
    std::vector<double> out(density_values.size());
    for (std::size_t i = 0; i < density_values.size(); ++i)
        out[i] = truncate_value(density_values[i], k);
    return out;
}

DiscreteMeasure truncate_measure(const DiscreteMeasure& m, double level) {
    if (!(level > 0.0)) throw ConfigError("truncate_measure: level must be positive");
    DiscreteMeasure out = m;
    double total = 0.0;
    for (std::size_t i = 0; i < m.masses.size(); ++i) {
        double w = m.dom.node_weight(i);
        out.masses[i] = std::min(m.masses[i], level * w);
        total += out.masses[i];
    }
    out.total_mass = total;
    out.provenance.truncation_level = level;
    return out;
}

std::vector<DiscreteMeasure> monotone_ladder(const MeasureSpec& spec, const Domain& dom,
                                             const std::vector<double>& schedule,
                                             double mollification_radius) {
    for (std::size_t k = 0; k + 1 < schedule.size(); ++k)
        if (!(schedule[k] < schedule[k + 1]))
            throw ConfigError("ladder.schedule", "levels must be strictly increasing");
    DiscreteMeasure base = discretize(spec, dom, mollification_radius);
    std::vector<DiscreteMeasure> out;
    out.reserve(schedule.size());
    for (double n : schedule) out.push_back(truncate_measure(base, n));
    return out;
}

std::vector<DiscreteMeasure> monotone_ladder(const MeasureSpec& spec, const Domain& dom,
                                             const std::vector<double>& schedule) {
    return monotone_ladder(spec, dom, schedule, 0.5 * dom.spacing());
}

double integrate(const ScalarField& u, const DiscreteMeasure& m) {
    if (!u.domain().same_grid(m.dom))
        throw ConfigError("integrate: field and measure live on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < m.masses.size(); ++i)
        if (m.masses[i] != 0.0) s += u[i] * m.masses[i];
    return s;
}

DiscreteMeasure add(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (!a.dom.same_grid(b.dom))
        throw ConfigError("add: measures live on different grids");
    DiscreteMeasure out = a;
    for (std::size_t i = 0; i < out.masses.size(); ++i) out.masses[i] += b.masses[i];
    out.total_mass = a.total_mass + b.total_mass;
    out.provenance.source = a.provenance.source + "+" + b.provenance.source;
    return out;
}

std::string ComponentVerdict::label() const {
    if (borderline) return "borderline";
    return verdict == Diffuseness::Diffuse ? "diffuse" : "concentrated";
}

namespace {

ComponentVerdict classify_lower_dimensional(const std::string& name, double p,
                                            int set_dimension, int dim) {
    // A compact set of dimension k has zero p-capacity iff p <= N - k.
    ComponentVerdict v;
    v.component = name;
    double threshold = static_cast<double>(dim - set_dimension);
    if (p > threshold + 1e-12) {
        v.verdict = Diffuseness::Diffuse;
    } else {
        v.verdict = Diffuseness::Concentrated;
        v.borderline = std::fabs(p - threshold) <= 1e-12;
    }
    return v;
}

}  // namespace

DiffusenessReport classify_diffuseness(const MeasureSpec& spec, double p, int dim) {
    if (!(p > 1.0)) throw ConfigError("classify_diffuseness: requires p > 1");
    DiffusenessReport rep;
    rep.p = p;
    rep.dim = dim;
    if (spec.has_density()) {
        ComponentVerdict v;
        v.component = "density";
        v.verdict = Diffuseness::Diffuse;
        rep.components.push_back(v);
    }
    for (std::size_t k = 0; k < spec.atoms().size(); ++k)
        rep.components.push_back(classify_lower_dimensional(
            "atom[" + std::to_string(k) + "]", p, 0, dim));
    for (std::size_t k = 0; k < spec.curves().size(); ++k)
        rep.components.push_back(classify_lower_dimensional(
            "curve[" + std::to_string(k) + "]", p, 1, dim));

    for (const auto& c : rep.components) {
        if (c.verdict == Diffuseness::Concentrated) rep.aggregate = Diffuseness::Concentrated;
        rep.borderline = rep.borderline || c.borderline;
    }
    return rep;
}

}  // namespace singlab
