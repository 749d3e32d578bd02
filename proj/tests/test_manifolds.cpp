#include <doctest.h>

#include "allee/errors.hpp"
#include "allee/manifolds.hpp"
#include "support.hpp"

using namespace allee;

namespace {

ManifoldBranch grow(const Parameters& p, ManifoldSpec spec) { return growManifold(p, spec); }

} // namespace

TEST_CASE("saddle eigendirections at E2")
{
    const Parameters p = test::fig6();
    const State e2(p.k0, 0.0);
    const SaddleDirections d = saddleEigendirections(p, e2);
    CHECK(d.stableEigenvalue < 0.0);
    CHECK(d.unstableEigenvalue > 0.0);
    CHECK(d.stable.norm() == doctest::Approx(1.0));
    CHECK(d.stable.y() > 0.0);
    const Eigen::Matrix2d J = jacobian(p, e2).m;
    CHECK((J * d.stable - d.stableEigenvalue * d.stable).norm() < 1e-12);
    CHECK((J * d.unstable - d.unstableEigenvalue * d.unstable).norm() < 1e-12);
}

TEST_CASE("stable slope at E2 matches the closed form and exceeds the prey-nullcline slope")
{
    const Parameters p = test::fig6();
    const SaddleDirections d = saddleEigendirections(p, State(p.k0, 0.0));
    const double computed = d.stable.y() / d.stable.x();
    const double l2 = d.stableEigenvalue;
    const double alpha1 =
        (-l2 + p.r1 * p.k0 * (1.0 - p.k0 / p.k1)) * (p.b + p.h * p.lambda * p.k0) / (p.lambda * p.k0);
    CHECK(std::abs(computed - alpha1) <= 1e-8 * std::max(1.0, std::abs(alpha1)));
    CHECK(stableSlopeAtE2(p, l2) == doctest::Approx(alpha1).epsilon(1e-12));
    CHECK(alpha1 > preyNullclineSlopeAtE2(p));
}

TEST_CASE("saddle check")
{
    // Below the lower admissible lambda E1 is a stable node.
    const Parameters p = test::fig6().with(ParamId::Lambda, 0.1);
    CHECK_THROWS_AS(saddleEigendirections(p, State(p.k1, 0.0)), NotSaddle);
    CHECK_THROWS_AS(growManifold(p, unstableManifoldE1()), NotSaddle);
}

TEST_CASE("admissible lambda interval")
{
    const Parameters p = test::fig6();
    const Interval a = admissibleLambda(p);
    const double one = 1.0 - p.s * p.h;
    CHECK(a.lo == doctest::Approx(p.s * p.b / (p.k1 * one)));
    CHECK(a.hi == doctest::Approx(p.s * p.b / (p.k0 * one)));
    CHECK(a.lo < 0.9773);
    CHECK(a.hi > 0.9776);
}

TEST_CASE("manifold crossings lie on the predator nullcline")
{
    for (double lambda : {0.9773, 0.97745, 0.9776}) {
        const Parameters p = test::fig6().with(ParamId::Lambda, lambda);
        for (const ManifoldSpec& spec : {stableManifoldE2(), unstableManifoldE1()}) {
            const ManifoldBranch br = growManifold(p, spec);
            REQUIRE(br.crossing);
            CHECK(std::abs(predatorPerCapitaRate(p, br.crossing->x(), br.crossing->y())) < 1e-9);
            CHECK(br.exitReason == EventKind::SectionCrossing);
        }
    }
}

TEST_CASE("crossings are insensitive to halving the launch offset")
{
    const Parameters p = test::fig6();
    for (const auto& make : {stableManifoldE2, unstableManifoldE1}) {
        const ManifoldBranch a = grow(p, make(1e-6));
        const ManifoldBranch b = grow(p, make(5e-7));
        REQUIRE(a.crossing);
        REQUIRE(b.crossing);
        CHECK((*a.crossing - *b.crossing).norm() < 1e-5);
    }
}

TEST_CASE("stable manifold of E2 leaves above the prey nullcline")
{
    const Parameters p = test::fig6();
    const ManifoldBranch br = growManifold(p, stableManifoldE2());
    int checked = 0;
    for (const auto& smp : br.path.samples) {
        const double x = smp.state.x();
        if (x <= p.k0 || x >= p.k0 + 0.2 * (p.k1 - p.k0) || smp.state.y() <= 0.0) {
            continue;
        }
        const auto y1 = solvePreyNullcline(p, x);
        REQUIRE(y1);
        CHECK(smp.state.y() > *y1);
        ++checked;
    }
    CHECK(checked > 3);
}

TEST_CASE("gap decreases across the heteroclinic bracket")
{
    const Parameters p = test::fig6();
    double previous = 1e300;
    for (int i = 0; i < 5; ++i) {
        const double lambda = 0.9773 + 0.0003 * i / 4.0;
        const double g = gapSample(p, lambda).gap();
        CHECK(g < previous);
        previous = g;
    }
    // Computed orientation: the E2 stable manifold is above at 0.9773 and below at 0.9776.
    CHECK(gapSample(p, 0.9773).gap() > 0.0);
    CHECK(gapSample(p, 0.9776).gap() < 0.0);
}

TEST_CASE("heteroclinic lambda")
{
    const Parameters p = test::fig6();
    const BifurcationPoint bp = heteroclinicFind(p, {0.9773, 0.9776});
    CHECK(bp.criticalValue > 0.9773);
    CHECK(bp.criticalValue < 0.9776);
    CHECK(bp.diag("bracket_width") <= 1e-6);
    CHECK(bp.diag("gap_lo") * bp.diag("gap_hi") <= 0.0);
    CHECK(std::abs(bp.diag("crossing_mismatch_y")) < 1e-5);
    CHECK(bp.kind == BifurcationKind::Heteroclinic);

    const BifurcationPoint wide = heteroclinicFind(p, {0.97, 0.98});
    CHECK(std::abs(wide.criticalValue - bp.criticalValue) < 1e-6);
}

TEST_CASE("heteroclinic bracket without a sign change")
{
    CHECK_THROWS_AS(heteroclinicFind(test::fig6(), {0.9776, 0.98}), BracketError);
}
