#include <doctest.h>

#include <cmath>
#include <random>

#include "singlab/errors.hpp"
#include "singlab/expr.hpp"
#include "singlab/measure.hpp"

using namespace singlab;

TEST_CASE("expression parsing and evaluation") {
    Expression e = Expression::parse("1 + 0.5*sin(pi*x) - y^2");
    CHECK(e.eval(0.5, 2.0) == doctest::Approx(1.0 + 0.5 - 4.0).epsilon(1e-14));
    CHECK(Expression::parse("min(x, 1-x)").eval(0.7) == doctest::Approx(0.3));
    CHECK(Expression::parse("2^3^2").eval(0) == doctest::Approx(512.0));  // right assoc
    CHECK(Expression::parse("1+2").is_constant());
    CHECK(!Expression::parse("x").is_constant());
    CHECK_THROWS_AS(Expression::parse("foo(x)"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("1 +"), ConfigError);
    CHECK_THROWS_AS(Expression::parse("x y"), ConfigError);
}

TEST_CASE("atom on a grid node is lumped exactly") {
    Domain dom = Domain::unit_box(1, 5);  // node at 0.5
    DiscreteMeasure m = discretize(MeasureSpec::from_atom({{0.5, 0, 0}, 1.0}), dom);
    CHECK(m.total_mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(m.masses[2] == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t i = 0; i < 5; ++i)
        if (i != 2) CHECK(m.masses[i] == 0.0);
}

TEST_CASE("unit density on the unit square carries unit mass") {
    Domain dom = Domain::unit_box(2, 33);
    DiscreteMeasure m = discretize(MeasureSpec::from_density(1.0), dom);
    CHECK(std::fabs(m.total_mass - 1.0) <= 1e-12);
}

TEST_CASE("segment with linear density 2 and length 1/2 has mass 1") {
    Domain dom = Domain::unit_box(2, 33);
    MeasureSpec spec =
        MeasureSpec::from_segment({0.5, 0.25, 0}, {0.5, 0.75, 0}, 2.0);
    DiscreteMeasure m = discretize(spec, dom);
    CHECK(m.total_mass == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("atoms outside the open box are rejected") {
    Domain dom = Domain::unit_box(2, 9);
    CHECK_THROWS_AS(discretize(MeasureSpec::from_atom({{1.0, 0.5, 0}, 1.0}), dom),
                    ConfigError);
    CHECK_THROWS_AS(discretize(MeasureSpec::from_atom({{1.5, 0.5, 0}, 1.0}), dom),
                    ConfigError);
}

TEST_CASE("mollification radius below h/2 is rejected") {
    Domain dom = Domain::unit_box(1, 9);
    MeasureSpec spec = MeasureSpec::from_atom({{0.5, 0, 0}, 1.0});
    CHECK_THROWS_AS(discretize(spec, dom, 0.25 * dom.spacing()), ConfigError);
}

TEST_CASE("bump mollification preserves the atom mass") {
    Domain dom = Domain::unit_box(2, 33);
    MeasureSpec spec = MeasureSpec::from_atom({{0.47, 0.52, 0}, 2.5});
    DiscreteMeasure m = discretize(spec, dom, 4.0 * dom.spacing());
    CHECK(m.total_mass == doctest::Approx(2.5).epsilon(1e-13));
    std::size_t touched = 0;
    for (double v : m.masses) touched += v != 0.0;
    CHECK(touched > 1);
}

TEST_CASE("truncation formula") {
    CHECK(truncate_value(3.0, 2.0) == 2.0);
    CHECK(truncate_value(-3.0, 2.0) == -2.0);  // signed variant
    CHECK(truncate_value(1.5, 2.0) == 1.5);    // identity below the level
    std::vector<double> v{0.0, 5.0, 0.7};
    auto t = truncate(v, 1.0);
    CHECK(t[0] == 0.0);
    CHECK(t[1] == 1.0);
    CHECK(t[2] == 0.7);
    CHECK_THROWS_AS(truncate(v, 0.0), ConfigError);
}

TEST_CASE("constant density ladder is the truncation ladder") {
    Domain dom = Domain::unit_box(1, 9);
    auto ladder = monotone_ladder(MeasureSpec::from_density(5.0), dom, {2.0, 10.0});
    CHECK(ladder.size() == 2);
    // level 2: density clipped to 2 -> total mass 2; level 10: full mass 5
    CHECK(ladder[0].total_mass == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(ladder[1].total_mass == doctest::Approx(5.0).epsilon(1e-13));
}

TEST_CASE("atom ladder reaches full weight once n exceeds 1/cell volume") {
    Domain dom = Domain::unit_box(2, 17);
    double h = dom.spacing();
    double n_full = 1.0 / (h * h);
    auto ladder = monotone_ladder(MeasureSpec::from_atom({{0.5, 0.5, 0}, 1.0}), dom,
                                  {n_full / 4.0, n_full, 4.0 * n_full});
    CHECK(ladder[0].total_mass == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(ladder[1].total_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(ladder[2].total_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ladder masses are nodewise nondecreasing for random specs") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> pos(0.15, 0.85), wgt(0.1, 3.0);
    Domain dom = Domain::unit_box(2, 21);
    for (int trial = 0; trial < 8; ++trial) {
        MeasureSpec spec;
        spec.set_density(Expression::constant(wgt(rng)));
        int atoms = 1 + static_cast<int>(rng() % 3);
        for (int a = 0; a < atoms; ++a)
            spec.add_atom({{pos(rng), pos(rng), 0}, wgt(rng)});
        auto ladder = monotone_ladder(spec, dom, {3.0, 11.0, 47.0, 200.0});
        for (std::size_t k = 0; k + 1 < ladder.size(); ++k)
            for (std::size_t i = 0; i < ladder[k].masses.size(); ++i)
                CHECK(ladder[k].masses[i] <= ladder[k + 1].masses[i] + 1e-15);
    }
}

TEST_CASE("strictly increasing schedule is required") {
    Domain dom = Domain::unit_box(1, 9);
    CHECK_THROWS_AS(
        monotone_ladder(MeasureSpec::from_density(1.0), dom, {10.0, 10.0}),
        ConfigError);
}

TEST_CASE("measure quadrature and the duality bound") {
    Domain dom = Domain::unit_box(1, 9);
    DiscreteMeasure m = discretize(MeasureSpec::from_atom({{0.5, 0, 0}, 1.0}), dom);

    ScalarField u(dom, 3.0);
    double v = integrate(u, m);
    CHECK(v == doctest::Approx(3.0));
    CHECK(v <= u.max() * m.total_mass + 1e-15);

    ScalarField zero_on_support(dom, 1.0);
    zero_on_support[dom.nearest_node({0.5, 0, 0})] = 0.0;
    CHECK(integrate(zero_on_support, m) == 0.0);

    ScalarField tent(dom);
    for (std::size_t i = 0; i < dom.node_count(); ++i) {
        double x = dom.position(i)[0];
        tent[i] = std::min(x, 1.0 - x);
    }
    DiscreteMeasure m2 = discretize(MeasureSpec::from_atom({{0.5, 0, 0}, 2.0}), dom);
    CHECK(integrate(tent, m2) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("duality bound holds for random nonnegative fields") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> val(0.0, 2.0);
    Domain dom = Domain::unit_box(2, 13);
    MeasureSpec spec;
    spec.set_density(Expression::constant(0.3));
    spec.add_atom({{0.31, 0.62, 0}, 1.7});
    DiscreteMeasure m = discretize(spec, dom);
    for (int trial = 0; trial < 16; ++trial) {
        ScalarField u(dom);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = val(rng);
        CHECK(integrate(u, m) <= u.max() * m.total_mass + 1e-12);
    }
}

TEST_CASE("grid mismatch is an error") {
    Domain a = Domain::unit_box(1, 9), b = Domain::unit_box(1, 17);
    DiscreteMeasure m = discretize(MeasureSpec::from_density(1.0), a);
    ScalarField u(b, 1.0);
    CHECK_THROWS_AS(integrate(u, m), ConfigError);
}

TEST_CASE("diffuseness classification against the capacity thresholds") {
    MeasureSpec atom = MeasureSpec::from_atom({{0.5, 0.5, 0}, 1.0});

    DiffusenessReport r = classify_diffuseness(atom, 2.0, 2);
    CHECK(r.aggregate == Diffuseness::Concentrated);
    CHECK(r.components[0].borderline);  // p = N exactly
    CHECK(r.components[0].label() == "borderline");

    r = classify_diffuseness(atom, 3.0, 2);  // p > N: every set has capacity
    CHECK(r.aggregate == Diffuseness::Diffuse);

    MeasureSpec seg = MeasureSpec::from_segment({0.5, 0.25, 0}, {0.5, 0.75, 0}, 2.0);
    r = classify_diffuseness(seg, 2.0, 2);  // p = 2 > N - 1 = 1
    CHECK(r.aggregate == Diffuseness::Diffuse);

    r = classify_diffuseness(seg, 1.0 + 1e-9, 2);  // p barely above 1 = N - 1
    CHECK(r.aggregate == Diffuseness::Diffuse);

    MeasureSpec dens = MeasureSpec::from_density(1.0);
    r = classify_diffuseness(dens, 1.5, 3);
    CHECK(r.aggregate == Diffuseness::Diffuse);

    // atom in 3d at p = 2 < N: concentrated outright, not borderline
    r = classify_diffuseness(atom, 2.0, 3);
    CHECK(r.aggregate == Diffuseness::Concentrated);
    CHECK(!r.components[0].borderline);

    MeasureSpec mixed = MeasureSpec::from_density(1.0);
    mixed.add_atom({{0.5, 0.5, 0}, 1.0});
    r = classify_diffuseness(mixed, 2.0, 2);
    CHECK(r.aggregate == Diffuseness::Concentrated);  // any concentrated part decides
    CHECK(r.components.size() == 2);
}

TEST_CASE("mass accounting matches the symbolic total") {
    Domain dom = Domain::unit_box(2, 41);
    MeasureSpec spec;
    spec.set_density(Expression::constant(2.0));
    spec.add_atom({{0.25, 0.75, 0}, 0.5});
    spec.add_curve({{{0.3, 0.3, 0}, {0.7, 0.3, 0}, {0.7, 0.7, 0}}, 1.5});
    DiscreteMeasure m = discretize(spec, dom);
    double expected = spec.mass(dom);
    CHECK(std::fabs(m.total_mass - expected) <= 1e-9 * expected);
}
