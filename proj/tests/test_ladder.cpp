#include <doctest.h>

#include <cmath>

#include "singlab/errors.hpp"
#include "singlab/ladder.hpp"
#include "singlab/oracle1d.hpp"

using namespace singlab;

namespace {

LadderConfig basic_config(Scheme s, std::vector<double> schedule) {
    LadderConfig cfg;
    cfg.scheme = s;
    cfg.schedule = std::move(schedule);
    return cfg;
}

}  // namespace

TEST_CASE("1D Dirac ladder converges to the closed form") {
    Domain dom = Domain::unit_box(1, 257);
    MeasureSpec spec = MeasureSpec::from_atom({{0.5, 0, 0}, 1.0});
    LadderResult res =
        run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                   basic_config(Scheme::Monotone, {10.0, 100.0, 1000.0, 10000.0}));
    CHECK(!res.failure);
    CHECK(res.levels.size() == 4);
    CHECK(res.converged);

    DiracOracle oracle = dirac_closed_form(1.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < dom.node_count(); ++i)
        worst = std::max(worst, std::fabs(res.limit[i] - oracle.eval(dom.position(i)[0])));
    CHECK(worst <= 1e-3);

    for (const auto& lev : res.levels) CHECK(lev.monotone_ok);
    CHECK(res.lower_bound.pass);
    CHECK(res.lower_bound.c_omega > 0.0);
    // in one dimension a point has positive 2-capacity (p = 2 > N = 1), which
    // is exactly why the Dirac problem has the tent solution here
    CHECK(res.classification.aggregate == Diffuseness::Diffuse);
}

TEST_CASE("monotone levels are nodewise nondecreasing") {
    Domain dom = Domain::unit_box(2, 33);
    MeasureSpec spec = MeasureSpec::from_segment({0.5, 0.25, 0}, {0.5, 0.75, 0}, 2.0);
    LadderResult res = run_ladder(dom, CoefficientField::identity(), spec, 1.5,
                                  basic_config(Scheme::Monotone, {10.0, 50.0, 250.0}));
    CHECK(!res.failure);
    for (std::size_t k = 0; k + 1 < res.levels.size(); ++k)
        for (std::size_t i = 0; i < dom.node_count(); ++i)
            CHECK(res.levels[k].u[i] <= res.levels[k + 1].u[i] + 1e-9);
}

TEST_CASE("zero measure ladder is trivially converged") {
    Domain dom = Domain::unit_box(1, 33);
    MeasureSpec spec = MeasureSpec::from_density(0.0);
    LadderResult res = run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                                  basic_config(Scheme::Monotone, {10.0, 100.0}));
    CHECK(res.converged);
    for (const auto& lev : res.levels) CHECK(lev.u.max_abs() == 0.0);
}

TEST_CASE("extract_limit decides on decay of the differences") {
    LadderResult synthetic;
    synthetic.levels.resize(4);
    synthetic.limit = ScalarField(Domain::unit_box(1, 5), 0.0);

    synthetic.successive_diffs = {0.1, 0.01, 0.001};
    CHECK(extract_limit(synthetic, 0.01).converged);

    synthetic.successive_diffs = {0.001, 0.01, 0.001};  // oscillating
    CHECK(!extract_limit(synthetic, 0.01).converged);

    synthetic.successive_diffs = {0.1, 0.01, 0.02};  // growing tail
    CHECK(!extract_limit(synthetic, 0.05).converged);

    LadderResult too_short;
    too_short.levels.resize(1);
    CHECK_THROWS_AS(extract_limit(too_short, 0.01), ConfigError);
}

TEST_CASE("split and monotone schemes coincide for bounded density data") {
    Domain dom = Domain::unit_box(1, 65);
    MeasureSpec spec = MeasureSpec::from_density(Expression::parse("1 + x"));
    std::vector<double> schedule{10.0, 100.0};
    LadderResult split = run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                                    basic_config(Scheme::Split, schedule));
    LadderResult mono = run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                                   basic_config(Scheme::Monotone, schedule));
    REQUIRE(split.levels.size() == mono.levels.size());
    for (std::size_t k = 0; k < split.levels.size(); ++k) {
        double worst = 0.0;
        for (std::size_t i = 0; i < dom.node_count(); ++i)
            worst = std::max(worst,
                             std::fabs(split.levels[k].u[i] - mono.levels[k].u[i]));
        CHECK(worst <= 1e-8);
    }
    CHECK(split.lower_bound.pass);       // barrier reference
    CHECK(!split.barrier.zero_data);
    for (const auto& lev : split.levels) CHECK(lev.barrier_ok);
}

TEST_CASE("warm-started levels match cold reruns") {
    Domain dom = Domain::unit_box(1, 129);
    MeasureSpec spec = MeasureSpec::from_atom({{0.5, 0, 0}, 1.0});
    LadderResult res =
        run_ladder(dom, CoefficientField::identity(), spec, 2.0,
                   basic_config(Scheme::Monotone, {10.0, 100.0, 1000.0}));
    REQUIRE(!res.failure);

    // cold re-solve of the last level
    DiscreteMeasure base = discretize(spec, dom);
    DiscreteMeasure nu = truncate_measure(base, 1000.0);
    RegularizedProblem prob{dom, CoefficientField::identity(), nu, 2.0, 1000.0};
    ScalarField cold = solve_regularized(prob).solution;
    double worst = 0.0;
    for (std::size_t i = 0; i < dom.node_count(); ++i)
        worst = std::max(worst, std::fabs(cold[i] - res.limit[i]));
    CHECK(worst <= 1e-8);
}

TEST_CASE("2D segment ladder with gamma = 1/2 converges") {
    Domain dom = Domain::unit_box(2, 65);
    MeasureSpec spec = MeasureSpec::from_segment({0.5, 0.25, 0}, {0.5, 0.75, 0}, 2.0);
    LadderConfig cfg =
        basic_config(Scheme::Monotone, {10.0, 100.0, 1000.0, 10000.0});
    LadderResult res = run_ladder(dom, CoefficientField::identity(), spec, 0.5, cfg);
    CHECK(!res.failure);
    CHECK(res.converged);
    // segment is diffuse for the gamma < 1 monotone threshold q(1/2) = 2 > N-1
    CHECK(res.classification.aggregate == Diffuseness::Diffuse);
}

TEST_CASE("3D ladder smoke test") {
    Domain dom = Domain::unit_box(3, 17);
    MeasureSpec spec = MeasureSpec::from_atom({{0.5, 0.5, 0.5}, 1.0});
    LadderResult res = run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                                  basic_config(Scheme::Monotone, {10.0, 100.0}));
    CHECK(!res.failure);
    CHECK(res.levels.size() == 2);
    CHECK(res.limit.max() > 0.0);
    // a point in three dimensions has zero 2-capacity, strictly below the
    // borderline: concentrated without the flag
    CHECK(res.classification.aggregate == Diffuseness::Concentrated);
    CHECK(!res.classification.borderline);
}

TEST_CASE("schedule validation") {
    Domain dom = Domain::unit_box(1, 17);
    MeasureSpec spec = MeasureSpec::from_density(1.0);
    CHECK_THROWS_AS(run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                               basic_config(Scheme::Monotone, {10.0})),
                    ConfigError);
    CHECK_THROWS_AS(run_ladder(dom, CoefficientField::identity(), spec, 1.0,
                               basic_config(Scheme::Monotone, {10.0, 5.0})),
                    ConfigError);
}

TEST_CASE("stiffness failure keeps the completed levels") {
    // without the Newton accelerator the alternation contracts only while
    // gamma*u/(1/n+u) < 1: the n=1 level passes, the deep level stalls
    Domain dom = Domain::unit_box(1, 65);
    MeasureSpec spec = MeasureSpec::from_atom({{0.5, 0, 0}, 1.0});
    LadderConfig cfg = basic_config(Scheme::Monotone, {1.0, 1e6});
    cfg.solver.newton_acceleration = false;
    cfg.solver.max_outer = 200;
    cfg.solver.polish = false;
    LadderResult res = run_ladder(dom, CoefficientField::identity(), spec, 2.0, cfg);
    CHECK(res.failure.has_value());
    CHECK(res.levels.size() == 1);  // first level completed before the stall
    CHECK(!res.converged);
}
