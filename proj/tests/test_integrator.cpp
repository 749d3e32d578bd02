#include <doctest.h>

#include "allee/bifurcation.hpp"
#include "allee/equilibria.hpp"
#include "allee/errors.hpp"
#include "allee/integrator.hpp"
#include "support.hpp"

using namespace allee;
using allee::test::Gen;

TEST_CASE("predator decays exponentially on the y axis")
{
    const Parameters p = test::fig4();
    IntegratorConfig cfg;
    cfg.tEnd = 10.0;
    const Trajectory tr = integrate(p, State(0.0, 2.0), cfg);
    for (const auto& smp : tr.samples) {
        CHECK(smp.state.x() == 0.0);
        CHECK(smp.state.y() == doctest::Approx(2.0 * std::exp(-p.s * smp.t)).epsilon(1e-8));
    }
}

TEST_CASE("axes are invariant")
{
    Gen gen(21);
    for (int i = 0; i < 20; ++i) {
        const Parameters p = gen.parameters();
        IntegratorConfig cfg;
        cfg.tEnd = 50.0;
        const Trajectory onX = integrate(p, State(gen.uniform(0.01, p.k1), 0.0), cfg);
        const Trajectory onY = integrate(p, State(0.0, gen.uniform(0.01, p.k1)), cfg);
        for (const auto& smp : onX.samples) {
            CHECK(std::abs(smp.state.y()) <= 1e-10);
        }
        for (const auto& smp : onY.samples) {
            CHECK(std::abs(smp.state.x()) <= 1e-10);
        }
    }
}

TEST_CASE("forward then backward returns to the start")
{
    // Figure parameter sets; random parameters can blow up in finite backward time.
    Gen gen(22);
    double worst = 0.0;
    for (const Parameters& p : {test::fig2(), test::fig5(), test::fig6(), test::fig8()}) {
        for (int i = 0; i < 10; ++i) {
            const State start(gen.uniform(0.2, p.k1), gen.uniform(0.2, p.k1));
            IntegratorConfig cfg;
            cfg.tEnd = 1.0;
            const State mid = integrate(p, start, cfg).back();
            cfg.direction = Direction::Backward;
            const Trajectory back = integrate(p, mid, cfg);
            CHECK(back.samples.back().t == doctest::Approx(-1.0));
            worst = std::max(worst, (back.back() - start).norm() / (cfg.relTol * std::max(1.0, start.norm())));
        }
    }
    MESSAGE("worst round-trip error in units of rel_tol: " << worst);
    CHECK(worst <= 100.0);
}

TEST_CASE("end state converges as tolerances shrink")
{
    const Parameters p = test::fig4().with(ParamId::S, 0.76);
    auto endAt = [&](double rel) {
        IntegratorConfig cfg;
        cfg.tEnd = 40.0;
        cfg.relTol = rel;
        cfg.absTol = rel * 1e-3;
        return integrate(p, State(2.0, 1.0), cfg).back();
    };
    const State coarse = endAt(1e-6);
    const State mid = endAt(1e-8);
    const State fine = endAt(1e-11);
    CHECK((mid - fine).norm() < (coarse - fine).norm());
    CHECK((mid - fine).norm() < 1e-5);
}

TEST_CASE("section crossing time is located on the dense output")
{
    // y(t) = 2 exp(-s t) hits 0.5 at t = ln(4)/s.
    const Parameters p = test::fig4();
    IntegratorConfig cfg;
    cfg.tEnd = 20.0;
    Section sec{[](const State& z) { return z.y() - 0.5; }, CrossingDirection::Falling, true};
    const Trajectory tr = integrate(p, State(0.0, 2.0), cfg, {sec});
    REQUIRE(tr.terminalEvent);
    CHECK(tr.terminalEvent->kind == EventKind::SectionCrossing);
    CHECK(tr.terminalEvent->t == doctest::Approx(std::log(4.0) / p.s).epsilon(1e-9));
    CHECK(tr.back().y() == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("non-terminal crossings are recorded in order")
{
    const Parameters p = test::fig4();
    IntegratorConfig cfg;
    cfg.tEnd = 20.0;
    Section a{[](const State& z) { return z.y() - 1.5; }, CrossingDirection::Any, false};
    Section b{[](const State& z) { return z.y() - 0.5; }, CrossingDirection::Any, false};
    const Trajectory tr = integrate(p, State(0.0, 2.0), cfg, {b, a});
    REQUIRE(tr.crossings.size() == 2);
    CHECK(tr.crossings[0].sectionId == 1);
    CHECK(tr.crossings[1].sectionId == 0);
    CHECK(tr.crossings[0].t < tr.crossings[1].t);
}

TEST_CASE("stopping rules")
{
    const Parameters p = test::fig4();
    SUBCASE("box exit")
    {
        IntegratorConfig cfg;
        cfg.tEnd = 50.0;
        cfg.boxMax = 2.5;
        const Trajectory tr = integrate(p, State(0.0, 2.0), cfg, {});
        CHECK(!tr.terminalEvent);
        cfg.direction = Direction::Backward;
        const Trajectory up = integrate(p, State(0.0, 2.0), cfg);
        REQUIRE(up.terminalEvent);
        CHECK(up.terminalEvent->kind == EventKind::BoxExit);
        CHECK(up.back().y() == doctest::Approx(2.5).epsilon(1e-8));
    }
    SUBCASE("convergence")
    {
        IntegratorConfig cfg;
        cfg.tEnd = 1e4;
        cfg.convergeTol = 1e-9;
        const Trajectory tr = integrate(p, State(0.5, 0.0), cfg);
        REQUIRE(tr.terminalEvent);
        CHECK(tr.terminalEvent->kind == EventKind::Converged);
        CHECK(tr.back().norm() < 1e-6);
    }
    SUBCASE("arc length")
    {
        IntegratorConfig cfg;
        cfg.tEnd = 1e4;
        cfg.maxArcLength = 1.0;
        const Trajectory tr = integrate(p, State(0.0, 2.0), cfg);
        REQUIRE(tr.terminalEvent);
        CHECK(tr.terminalEvent->kind == EventKind::ArcLength);
        // The rule fires on the first accepted step that passes the limit.
        CHECK(tr.arcLength() >= 1.0);
        Trajectory shorter = tr;
        shorter.samples.pop_back();
        CHECK(shorter.arcLength() < 1.0);
    }
    SUBCASE("step budget")
    {
        IntegratorConfig cfg;
        cfg.tEnd = 1e3;
        cfg.maxStep = 1e-3;
        cfg.maxSteps = 100;
        CHECK_THROWS_AS(integrate(p, State(2.0, 1.0), cfg), StepFailure);
    }
}

TEST_CASE("invalid integrator settings")
{
    IntegratorConfig cfg;
    cfg.relTol = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = IntegratorConfig{};
    cfg.tEnd = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("starting on E1 stays put")
{
    const Parameters p = test::fig2();
    IntegratorConfig cfg;
    cfg.tEnd = 100.0;
    for (const auto& smp : integrate(p, State(p.k1, 0.0), cfg).samples) {
        CHECK((smp.state - State(p.k1, 0.0)).norm() < 1e-8);
    }
}

TEST_CASE("components are eventually bounded by k1")
{
    // Both panels of the Hopf figure: a cycle at s = 0.75, a focus at s = 0.76.
    for (double s : {0.75, 0.76}) {
        const Parameters p = test::fig4().with(ParamId::S, s);
        IntegratorConfig cfg;
        cfg.tEnd = 1e3;
        cfg.maxStep = 0.5;
        double mx = 0.0;
        double my = 0.0;
        double sum = 0.0;
        for (const auto& smp : integrate(p, State(2.2, 1.35), cfg).samples) {
            if (smp.t > 800.0) {
                mx = std::max(mx, smp.state.x());
                my = std::max(my, smp.state.y());
                sum = std::max(sum, smp.state.x() + smp.state.y());
            }
        }
        CHECK(mx <= p.k1 + 1e-3);
        CHECK(my <= p.k1 + 1e-3);
        // The bound does not extend to x + y: the attractor itself sits above k1.
        CHECK(sum > p.k1 + 0.5);
    }
}

TEST_CASE("the box of side k1 + 0.5 is not invariant near its far corner")
{
    const Parameters p = test::fig4();
    const State corner(p.k1 + 0.5, p.k1 + 0.5);
    CHECK(vectorField(p, corner).y() > 0.0);
    IntegratorConfig cfg;
    cfg.tEnd = 5.0;
    double maxY = 0.0;
    for (const auto& smp : integrate(p, corner, cfg).samples) {
        maxY = std::max(maxY, smp.state.y());
    }
    CHECK(maxY > p.k1 + 0.5);
}

TEST_CASE("limit cycles of the Hopf figures")
{
    SUBCASE("strong Allee set: cycle on the unstable-focus side")
    {
        const Parameters p = test::fig4();
        const Equilibrium e = trackInterior(p, 0.75, 2.2);
        const auto cyc = cycleAround(p, e.state);
        REQUIRE(cyc);
        CHECK(cyc->stable());
        CHECK(cyc->residual < 1e-7);
        CHECK(cyc->amplitude() > 0.1);
        const OmegaLimit calm = classifyOmegaLimit(p.with(ParamId::S, 0.76), State(2.2, 1.35), 2000.0);
        CHECK(calm.kind == OmegaLimit::Kind::Equilibrium);
    }
    SUBCASE("weak-growth set: cycle only just below the Hopf value")
    {
        const Parameters p = test::fig5();
        const Equilibrium near = trackInterior(p, 0.142, 2.7);
        CHECK(cycleAround(p.with(ParamId::S, 0.142), near.state));
        const Equilibrium calm = trackInterior(p, 0.15, 2.7);
        CHECK(calm.cls == StabilityClass::StableFocus);
        CHECK(!cycleAround(p.with(ParamId::S, 0.15), calm.state));
    }
    SUBCASE("negative Allee threshold at k0 = -0.3")
    {
        const Parameters p = test::fig8();
        const auto focus = interiorEquilibria(p);
        REQUIRE(focus.size() == 1);
        const auto cyc = cycleAround(p, focus.front().state);
        REQUIRE(cyc);
        CHECK(cyc->stable());
    }
}

TEST_CASE("first return rejects seeds outside the quadrant")
{
    const Parameters p = test::fig4();
    const LineSection sec{State(2.0, 1.4), State(0.0, 1.0)};
    CHECK(!detectLimitCycle(p, State(-1.0, 1.4), sec));
}
