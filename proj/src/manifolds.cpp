#include "allee/manifolds.hpp"

#include <array>
#include <cmath>
#include <string>

#include "allee/parallel.hpp"

namespace allee {

namespace {

// Unit eigenvector of J for the real eigenvalue mu, oriented into the upper half-plane.
State eigenvector(const Jacobian2& J, double mu)
{
    const Eigen::Matrix2d M = J.m - mu * Eigen::Matrix2d::Identity();
    const Eigen::Vector2d r0 = M.row(0).transpose();
    const Eigen::Vector2d r1 = M.row(1).transpose();
    const Eigen::Vector2d& big = r0.norm() >= r1.norm() ? r0 : r1;
    State v(-big.y(), big.x());
    v.normalize();
    const bool flip = std::abs(v.y()) > 1e-14 ? v.y() < 0.0 : v.x() < 0.0;
    return flip ? State(-v) : v;
}

} // namespace

SaddleDirections saddleEigendirections(const Parameters& p, const State& eq)
{
    const Jacobian2 J = jacobian(p, eq);
    if (!(J.determinant() < 0.0)) {
        throw NotSaddle("equilibrium is not a saddle (det J >= 0)");
    }
    const auto ev = J.eigenvalues();
    SaddleDirections out;
    out.stableEigenvalue = ev[0].real();
    out.unstableEigenvalue = ev[1].real();
    out.stable = eigenvector(J, out.stableEigenvalue);
    out.unstable = eigenvector(J, out.unstableEigenvalue);
    return out;
}

double stableSlopeAtE2(const Parameters& p, double negativeEigenvalue)
{
    const double growth = p.r1 * p.k0 * (1.0 - p.k0 / p.k1);
    return (-negativeEigenvalue + growth) * (p.b + p.h * p.lambda * p.k0) / (p.lambda * p.k0);
}

double preyNullclineSlopeAtE2(const Parameters& p)
{
    return p.r1 * (1.0 - p.k0 / p.k1) * (p.b + p.h * p.k0 * p.lambda) / p.lambda;
}

ManifoldSpec stableManifoldE2(double epsilonScale)
{
    ManifoldSpec s;
    s.origin = EquilibriumKind::E2;
    s.sense = ManifoldSense::Stable;
    s.epsilonScale = epsilonScale;
    return s;
}

ManifoldSpec unstableManifoldE1(double epsilonScale)
{
    ManifoldSpec s;
    s.origin = EquilibriumKind::E1;
    s.sense = ManifoldSense::Unstable;
    s.epsilonScale = epsilonScale;
    return s;
}

ManifoldBranch growManifold(const Parameters& p, const ManifoldSpec& spec)
{
    ManifoldBranch br;
    br.origin = classifyBoundary(p, spec.origin);
    br.side = spec.side;
    br.sense = spec.sense;
    const SaddleDirections dirs = saddleEigendirections(p, br.origin.state);
    br.eigendirection = spec.sense == ManifoldSense::Stable ? dirs.stable : dirs.unstable;

    const double eps = spec.epsilonScale * p.k1;
    const State launch = br.origin.state + eps * spec.side * br.eigendirection;

    IntegratorConfig cfg;
    cfg.relTol = 1e-11;
    cfg.absTol = 1e-14;
    cfg.maxStep = 0.05 * p.k1;
    cfg.tEnd = 1e5;
    cfg.direction = spec.sense == ManifoldSense::Stable ? Direction::Backward : Direction::Forward;
    cfg.boxMax = p.k1 + (spec.delta > 0.0 ? spec.delta : p.k1);
    cfg.maxArcLength = 100.0 * p.k1;

    std::vector<Section> sections;
    if (spec.stopAtSection) {
        sections.push_back({[&p](const State& z) { return predatorPerCapitaRate(p, z.x(), z.y()); },
                            CrossingDirection::Any, true});
    }
    br.path = integrate(p, launch, cfg, sections);
    if (br.path.terminalEvent) {
        br.exitReason = br.path.terminalEvent->kind;
        if (br.path.terminalEvent->kind == EventKind::SectionCrossing) {
            br.crossing = br.path.terminalEvent->state;
        }
    }
    if (spec.stopAtSection && spec.requireCrossing && !br.crossing) {
        std::string why = "time horizon";
        if (br.exitReason) {
            switch (*br.exitReason) {
            case EventKind::BoxExit: why = "box exit"; break;
            case EventKind::AxisApproach: why = "axis approach"; break;
            case EventKind::Converged: why = "converged to an equilibrium"; break;
            case EventKind::ArcLength: why = "arc length limit"; break;
            case EventKind::SectionCrossing: break;
            }
        }
        throw NoCrossing("manifold from " + br.origin.label() + " never reached the predator nullcline (" + why + ")");
    }
    return br;
}

GapSample gapSample(const Parameters& p, double lambda)
{
    const Parameters q = p.with(ParamId::Lambda, lambda);
    GapSample g;
    g.lambda = lambda;
    g.cross1 = *growManifold(q, stableManifoldE2()).crossing;
    g.cross2 = *growManifold(q, unstableManifoldE1()).crossing;
    return g;
}

Interval admissibleLambda(const Parameters& p)
{
    const double oneMinus = 1.0 - p.s * p.h;
    return {p.s * p.b / (p.k1 * oneMinus), p.s * p.b / (p.k0 * oneMinus)};
}

BifurcationPoint heteroclinicFind(const Parameters& p, Interval bracket, double width)
{
    std::array<GapSample, 2> ends;
    parallelFor(2, [&](std::size_t i) { ends[i] = gapSample(p, i == 0 ? bracket.lo : bracket.hi); });
    GapSample lo = ends[0];
    GapSample hi = ends[1];
    if ((lo.gap() < 0.0) == (hi.gap() < 0.0)) {
        throw BracketError("gap has the same sign at both ends of the lambda bracket");
    }
    const double gapLo = lo.gap();
    const double gapHi = hi.gap();
    while (hi.lambda - lo.lambda > width) {
        const GapSample mid = gapSample(p, 0.5 * (lo.lambda + hi.lambda));
        if ((mid.gap() < 0.0) == (lo.gap() < 0.0)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    const Interval adm = admissibleLambda(p);
    BifurcationPoint bp;
    bp.kind = BifurcationKind::Heteroclinic;
    bp.param = ParamId::Lambda;
    bp.criticalValue = 0.5 * (lo.lambda + hi.lambda);
    const GapSample at = gapSample(p, bp.criticalValue);
    bp.location = 0.5 * (at.cross1 + at.cross2);
    bp.add("bracket_lo", lo.lambda);
    bp.add("bracket_hi", hi.lambda);
    bp.add("bracket_width", hi.lambda - lo.lambda);
    bp.add("gap_at_input_lo", gapLo);
    bp.add("gap_at_input_hi", gapHi);
    bp.add("gap_lo", lo.gap());
    bp.add("gap_hi", hi.gap());
    bp.add("gap_at_critical", at.gap());
    bp.add("crossing_mismatch_x", std::abs(at.cross1.x() - at.cross2.x()));
    bp.add("crossing_mismatch_y", std::abs(at.cross1.y() - at.cross2.y()));
    bp.add("admissible_lo", adm.lo);
    bp.add("admissible_hi", adm.hi);
    if (!(bp.criticalValue > adm.lo && bp.criticalValue < adm.hi)) {
        bp.notes.push_back("critical lambda lies outside the admissible interval");
    }
    return bp;
}

} // namespace allee
