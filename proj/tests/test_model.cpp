#include <doctest.h>

#include "allee/errors.hpp"
#include "allee/model.hpp"
#include "support.hpp"

using namespace allee;
using allee::test::Gen;

namespace {

Eigen::Matrix2d fdJacobian(const Parameters& p, const State& z)
{
    Eigen::Matrix2d J;
    for (int k = 0; k < 2; ++k) {
        const double h = 1e-6 * std::max(1.0, std::abs(z[k]));
        State a = z;
        State b = z;
        a[k] += h;
        b[k] -= h;
        J.col(k) = (vectorField(p, a) - vectorField(p, b)) / (2.0 * h);
    }
    return J;
}

// Central differences of the analytic Jacobian: column k holds d/dz_k of (J11, J12, J21, J22).
Eigen::Matrix<double, 4, 2> fdHessian(const Parameters& p, const State& z)
{
    Eigen::Matrix<double, 4, 2> H;
    for (int k = 0; k < 2; ++k) {
        const double h = 1e-5 * std::max(1.0, std::abs(z[k]));
        State a = z;
        State b = z;
        a[k] += h;
        b[k] -= h;
        const Eigen::Matrix2d d = (jacobian(p, a).m - jacobian(p, b).m) / (2.0 * h);
        H.col(k) << d(0, 0), d(0, 1), d(1, 0), d(1, 1);
    }
    return H;
}

} // namespace

TEST_CASE("vector field factors into per-capita rates")
{
    Gen gen(11);
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const State z = gen.interiorState(p);
        const State f = vectorField(p, z);
        const State pc = perCapita(p, z);
        CHECK(f.x() == doctest::Approx(z.x() * pc.x()).epsilon(1e-13));
        CHECK(f.y() == doctest::Approx(z.y() * pc.y()).epsilon(1e-13));
    }
}

TEST_CASE("analytic Jacobian matches finite differences on 200 random states")
{
    Gen gen(12);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const State z = gen.interiorState(p);
        const Eigen::Matrix2d J = jacobian(p, z).m;
        const double err = (fdJacobian(p, z) - J).cwiseAbs().maxCoeff() / std::max(J.cwiseAbs().maxCoeff(), 1e-12);
        worst = std::max(worst, err);
    }
    MESSAGE("worst Jacobian relative error " << worst);
    CHECK(worst < 1e-6);
}

TEST_CASE("second derivatives match differences of the Jacobian on 200 random states")
{
    Gen gen(13);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const State z = gen.interiorState(p);
        const SecondDerivs d = secondDerivs(p, z);
        Eigen::Matrix<double, 4, 2> H;
        H << d.f1xx, d.f1xy, d.f1xy, d.f1yy, d.f2xx, d.f2xy, d.f2xy, d.f2yy;
        const double err = (fdHessian(p, z) - H).cwiseAbs().maxCoeff() / std::max(H.cwiseAbs().maxCoeff(), 1e-12);
        worst = std::max(worst, err);
    }
    MESSAGE("worst Hessian relative error " << worst);
    CHECK(worst < 1e-4);
}

TEST_CASE("predation terms are antisymmetric between the two equations")
{
    Gen gen(14);
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const SecondDerivs d = secondDerivs(p, gen.interiorState(p));
        CHECK(d.f2xy == -d.f1xy);
        CHECK(d.f2yy == -d.f1yy);
    }
}

TEST_CASE("per-capita partials match finite differences")
{
    Gen gen(15);
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const State z = gen.interiorState(p);
        const PerCapitaPartials d = perCapitaPartials(p, z.x(), z.y());
        const double hx = 1e-6 * std::max(1.0, z.x());
        const double hy = 1e-6 * std::max(1.0, z.y());
        const State dx = (perCapita(p, State(z.x() + hx, z.y())) - perCapita(p, State(z.x() - hx, z.y()))) / (2 * hx);
        const State dy = (perCapita(p, State(z.x(), z.y() + hy)) - perCapita(p, State(z.x(), z.y() - hy))) / (2 * hy);
        const double scale = std::max({std::abs(d.f1x), std::abs(d.f1y), std::abs(d.f2x), std::abs(d.f2y), 1e-12});
        CHECK(std::abs(dx.x() - d.f1x) / scale < 1e-6);
        CHECK(std::abs(dy.x() - d.f1y) / scale < 1e-6);
        CHECK(std::abs(dx.y() - d.f2x) / scale < 1e-6);
        CHECK(std::abs(dy.y() - d.f2y) / scale < 1e-6);
    }
}

TEST_CASE("x f1x + y f2y equals the Jacobian trace where both rates vanish")
{
    // At an interior equilibrium J = diag(x, y) times the per-capita partials.
    const Parameters p = test::fig4();
    // Interior point of the s = 0.75 panel, recovered by Newton on the field.
    State z(2.1, 1.4);
    for (int it = 0; it < 50; ++it) {
        z -= jacobian(p, z).m.lu().solve(vectorField(p, z));
    }
    REQUIRE(vectorField(p, z).norm() < 1e-12);
    const PerCapitaPartials d = perCapitaPartials(p, z.x(), z.y());
    CHECK(z.x() * d.f1x + z.y() * d.f2y == doctest::Approx(jacobian(p, z).trace()).epsilon(1e-12));
}

TEST_CASE("quartic G equals (g1 - g2) times the g2 denominator")
{
    Gen gen(16);
    for (int i = 0; i < 1000; ++i) {
        const Parameters p = gen.parameters();
        const double x = gen.uniform(0.0, p.k1);
        const double den = g2Denominator(p, x);
        if (std::abs(den) < 1e-6) {
            continue;
        }
        const double direct = (nullclineG1(p, x) - nullclineG2(p, x)) * den;
        CHECK(std::abs(gPoly(p, x) - direct) <= 1e-10 * std::max(1.0, gPolyScale(p, x)));
    }
}

TEST_CASE("G derivatives match finite differences")
{
    Gen gen(17);
    for (int i = 0; i < 200; ++i) {
        const Parameters p = gen.parameters();
        const double x = gen.uniform(0.1, p.k1);
        const double h = 1e-5;
        const double d1 = (gPoly(p, x + h) - gPoly(p, x - h)) / (2 * h);
        const double d2 = (gPolyDerivative(p, x + h) - gPolyDerivative(p, x - h)) / (2 * h);
        CHECK(test::relErr(gPolyDerivative(p, x), d1, gPolyScale(p, x)) < 1e-7);
        CHECK(test::relErr(gPolySecondDerivative(p, x), d2, gPolyScale(p, x)) < 1e-7);
    }
}

TEST_CASE("G is affine in lambda with slope -(1 - s h) x")
{
    Gen gen(18);
    for (int i = 0; i < 100; ++i) {
        const Parameters p = gen.parameters();
        const double x = gen.uniform(0.0, p.k1);
        const double slope = gPoly(p.with(ParamId::Lambda, p.lambda + 1.0), x) - gPoly(p, x);
        CHECK(slope == doctest::Approx(-(1.0 - p.s * p.h) * x).epsilon(1e-9).scale(gPolyScale(p, x)));
    }
}

TEST_CASE("g1 at x = 2 with the transcritical-figure parameters")
{
    CHECK(nullclineG1(test::fig2(), 2.0) == doctest::Approx(1.0 / 0.75).epsilon(1e-14));
}

TEST_CASE("prey nullcline root zeroes the prey rate")
{
    Gen gen(19);
    int hits = 0;
    for (int i = 0; i < 500; ++i) {
        const Parameters p = gen.parameters();
        const double x = gen.uniform(0.01, p.k1);
        if (const auto y = solvePreyNullcline(p, x); y && *y > 0.0) {
            ++hits;
            CHECK(std::abs(preyPerCapitaRate(p, x, *y)) < 1e-10 * std::max(1.0, p.r1 * p.k1));
        }
    }
    CHECK(hits > 50);
}

TEST_CASE("predator rate on the y axis is -s")
{
    const Parameters p = test::fig4();
    CHECK(predatorPerCapitaRate(p, 0.0, 0.7) == doctest::Approx(-p.s));
}

TEST_CASE("parameter validation")
{
    Parameters p = test::fig4();
    CHECK_NOTHROW(p.validate());
    CHECK_THROWS_AS(p.with(ParamId::K0, 3.0).validate(), DomainError);
    CHECK_THROWS_AS(p.with(ParamId::S, 0.0).validate(), DomainError);
    CHECK_THROWS_AS(p.with(ParamId::A, -0.1).validate(), DomainError);
    CHECK(p.with(ParamId::K0, -1.0).regime() == Regime::Weak);
    CHECK(p.regime() == Regime::Strong);
}

TEST_CASE("g2 refuses to evaluate at its pole")
{
    const Parameters p = test::fig4();
    const double pole = p.s / (p.A * (1.0 - p.s * p.h));
    CHECK_THROWS_AS(nullclineG2(p, pole), PoleError);
}

TEST_CASE("long double evaluation agrees with double")
{
    const Parameters p = test::fig6();
    const auto pl = p.cast<long double>();
    const State z(1.7, 0.4);
    const auto fl = vectorField(pl, StateT<long double>(1.7L, 0.4L));
    const State f = vectorField(p, z);
    CHECK(static_cast<double>(fl.x()) == doctest::Approx(f.x()).epsilon(1e-14));
    CHECK(static_cast<double>(fl.y()) == doctest::Approx(f.y()).epsilon(1e-14));
}
