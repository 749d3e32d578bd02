#include "allee/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace allee {

std::string_view bifurcationKindName(BifurcationKind k)
{
    switch (k) {
    case BifurcationKind::Transcritical: return "transcritical";
    case BifurcationKind::SaddleNode: return "saddle_node";
    case BifurcationKind::Hopf: return "hopf";
    case BifurcationKind::TranscriticalOnCycle: return "transcritical_on_cycle";
    case BifurcationKind::Heteroclinic: return "heteroclinic";
    }
    return "?";
}

double BifurcationPoint::diag(std::string_view name) const
{
    for (const auto& d : diagnostics) {
        if (d.name == name) {
            return d.value;
        }
    }
    throw std::out_of_range("no diagnostic named " + std::string(name));
}

bool BifurcationPoint::has(std::string_view name) const
{
    return std::any_of(diagnostics.begin(), diagnostics.end(), [&](const Diagnostic& d) { return d.name == name; });
}

bool SotomayorValues::transcritical() const
{
    return std::abs(wFmu) < kSotomayorTol && std::abs(wDFmuV) > kSotomayorTol && std::abs(wD2fVV) > kSotomayorTol;
}

bool SotomayorValues::saddleNode() const
{
    return std::abs(wFmu) > kSotomayorTol && std::abs(wD2fVV) > kSotomayorTol;
}

namespace {

// Unit vector orthogonal to the larger of two 2-vectors, largest component positive.
State orthogonalTo(const State& a, const State& b)
{
    const State& big = a.norm() >= b.norm() ? a : b;
    State v(-big.y(), big.x());
    v.normalize();
    const double lead = std::abs(v.x()) >= std::abs(v.y()) ? v.x() : v.y();
    return lead < 0.0 ? State(-v) : v;
}

double fdStep(double value) { return 1e-6 * std::max(1.0, std::abs(value)); }

} // namespace

SotomayorValues sotomayor(const Parameters& p, const State& eq, ParamId param)
{
    const Jacobian2 J = jacobian(p, eq);
    const double norm = J.m.cwiseAbs().maxCoeff();
    const auto ev = J.eigenvalues();
    const bool firstIsZero = std::abs(ev[0]) <= std::abs(ev[1]);
    const auto zero = firstIsZero ? ev[0] : ev[1];
    const auto other = firstIsZero ? ev[1] : ev[0];
    if (std::abs(zero) >= kSotomayorTol * std::max(norm, 1e-300)) {
        throw GateError("Jacobian has no zero eigenvalue at the candidate point");
    }
    if (std::abs(other.real()) <= 1e-6) {
        if (norm > 0.0) {
            throw NotSemisimple("zero eigenvalue is defective (Jacobian is nilpotent)");
        }
        throw GateError("Jacobian vanishes at the candidate point");
    }

    SotomayorValues out;
    out.zeroEigenvalue = zero.real();
    out.otherEigenvalue = other.real();
    // Right null vector is orthogonal to the rows, left null vector to the columns.
    out.W = orthogonalTo(State(J.m.col(0)), State(J.m.col(1)));
    out.V = orthogonalTo(State(J.m.row(0).transpose()), State(J.m.row(1).transpose()));
    out.V /= out.W.dot(out.V);

    const double value = p[param];
    const double step = fdStep(value);
    const Parameters plus = p.with(param, value + step);
    const Parameters minus = p.with(param, value - step);
    const State fMu = (vectorField(plus, eq) - vectorField(minus, eq)) / (2.0 * step);
    const Eigen::Matrix2d dfMu = (jacobian(plus, eq).m - jacobian(minus, eq).m) / (2.0 * step);
    out.wFmu = out.W.dot(fMu);
    out.wDFmuV = out.W.dot(dfMu * out.V);

    const SecondDerivs d2 = secondDerivs(p, eq);
    const double v1 = out.V.x();
    const double v2 = out.V.y();
    const State quad(d2.f1xx * v1 * v1 + 2.0 * d2.f1xy * v1 * v2 + d2.f1yy * v2 * v2,
                     d2.f2xx * v1 * v1 + 2.0 * d2.f2xy * v1 * v2 + d2.f2yy * v2 * v2);
    out.wD2fVV = out.W.dot(quad);
    return out;
}

double countChangeLambda(const Parameters& p, double guess, double halfWidth, double tol)
{
    double lo = guess - halfWidth;
    double hi = guess + halfWidth;
    const std::size_t cLo = interiorCount(p.with(ParamId::Lambda, lo));
    const std::size_t cHi = interiorCount(p.with(ParamId::Lambda, hi));
    if (cLo == cHi) {
        throw BracketError("interior count is the same at both ends of the lambda bracket");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (interiorCount(p.with(ParamId::Lambda, mid)) == cLo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

BifurcationPoint transcriticalLambda(const Parameters& p, EquilibriumKind which)
{
    if (which != EquilibriumKind::E1 && which != EquilibriumKind::E2) {
        throw DomainError("transcritical lambda is defined at E1 or E2");
    }
    const double oneMinus = 1.0 - p.s * p.h;
    if (!(oneMinus > 0.0)) {
        throw GateError("transcritical lambda needs 1 - s h > 0");
    }
    const bool atE2 = which == EquilibriumKind::E2;
    if (atE2 && !(p.k0 > 0.0)) {
        throw GateError("E2 exists only under a strong Allee effect (k0 > 0)");
    }
    const double xe = atE2 ? p.k0 : p.k1;
    const double lc = p.s * p.b / (xe * oneMinus);

    double nondegeneracy;
    if (atE2) {
        const double t = 2.0 * p.k0 * p.k0 * p.r1 * (p.k1 - p.k0);
        nondegeneracy = (p.s * p.b * p.k1 - t) * lc + p.A * p.b * t;
    } else {
        const double den = p.b + p.h * p.k1 * lc;
        nondegeneracy = p.s * p.b * p.k1 * den * den * lc / (p.r1 * p.k1 * (p.k0 - p.k1)) + lc - p.A * p.b;
    }
    if (std::abs(nondegeneracy) < 1e-10) {
        throw GateError("transcritical nondegeneracy expression vanishes");
    }

    BifurcationPoint bp;
    bp.kind = BifurcationKind::Transcritical;
    bp.param = ParamId::Lambda;
    bp.criticalValue = lc;
    bp.location = State(xe, 0.0);
    bp.add("nondegeneracy_expr", nondegeneracy);

    const Parameters atCrit = p.with(ParamId::Lambda, lc);
    const SotomayorValues sv = sotomayor(atCrit, bp.location, ParamId::Lambda);
    bp.add("WT_f_mu", sv.wFmu);
    bp.add("WT_Df_mu_V", sv.wDFmuV);
    bp.add("WT_D2f_VV", sv.wD2fVV);
    bp.add("sotomayor_transcritical", sv.transcritical() ? 1.0 : 0.0);

    const double delta = 1e-3;
    const Parameters below = p.with(ParamId::Lambda, lc - delta);
    const Parameters above = p.with(ParamId::Lambda, lc + delta);
    bp.add("count_below", static_cast<double>(interiorCount(below)));
    bp.add("count_above", static_cast<double>(interiorCount(above)));
    bp.add("boundary_mu2_below", classifyBoundary(below, which).eigenvalues[1].real());
    bp.add("boundary_mu2_above", classifyBoundary(above, which).eigenvalues[1].real());
    try {
        const double located = countChangeLambda(p, lc, delta);
        bp.add("count_change_lambda", located);
        bp.add("count_change_error", std::abs(located - lc));
    } catch (const BracketError&) {
        bp.notes.push_back("interior count does not change across lambda_c +/- 1e-3");
    }
    return bp;
}

BifurcationPoint saddleNodeLambda(const Parameters& p, Interval bracket)
{
    double lo = bracket.lo;
    double hi = bracket.hi;
    const std::size_t cLo = interiorCount(p.with(ParamId::Lambda, lo));
    const std::size_t cHi = interiorCount(p.with(ParamId::Lambda, hi));
    const auto diff = static_cast<long>(cLo) - static_cast<long>(cHi);
    if (std::labs(diff) != 2) {
        throw BracketError("interior counts at the bracket ends (" + std::to_string(cLo) + ", " +
                           std::to_string(cHi) + ") do not differ by 2");
    }
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        if (interiorCount(p.with(ParamId::Lambda, mid)) == cLo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Start Newton from the midpoint of the closest root pair on the two-root side.
    const Parameters side = p.with(ParamId::Lambda, cLo > cHi ? lo : hi);
    const auto roots = gRootsInRange(side);
    double x = 0.5 * (std::max(0.0, p.k0) + p.k1);
    double bestGap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
        const double gap = roots[i + 1].x - roots[i].x;
        if (gap < bestGap) {
            bestGap = gap;
            x = 0.5 * (roots[i].x + roots[i + 1].x);
        }
    }
    if (roots.size() == 1) {
        x = roots.front().x;
    }

    // Newton on (G, G_x) = 0 in (x, lambda). G is affine in lambda with slope -(1 - sh) x.
    double lam = 0.5 * (lo + hi);
    const double oneMinus = 1.0 - p.s * p.h;
    for (int it = 0; it < 50; ++it) {
        const Parameters q = p.with(ParamId::Lambda, lam);
        const double g = gPoly(q, x);
        const double gx = gPolyDerivative(q, x);
        const double scale = gPolyScale(q, x);
        if (std::abs(g) < 1e-14 * scale && std::abs(gx) < 1e-12 * scale) {
            break;
        }
        Eigen::Matrix2d M;
        M << gx, -oneMinus * x, gPolySecondDerivative(q, x), -oneMinus;
        const Eigen::Vector2d step = M.fullPivLu().solve(Eigen::Vector2d(-g, -gx));
        if (!step.allFinite()) {
            break;
        }
        x += step(0);
        lam += step(1);
        if (std::abs(step(0)) < 1e-16 * std::max(1.0, std::abs(x)) &&
            std::abs(step(1)) < 1e-16 * std::max(1.0, std::abs(lam))) {
            break;
        }
    }

    const Parameters q = p.with(ParamId::Lambda, lam);
    BifurcationPoint bp;
    bp.kind = BifurcationKind::SaddleNode;
    bp.param = ParamId::Lambda;
    bp.criticalValue = lam;
    bp.location = State(x, nullclineG1(q, x));
    const double scale = gPolyScale(q, x);
    bp.add("bisection_lo", lo);
    bp.add("bisection_hi", hi);
    bp.add("G_residual", gPoly(q, x));
    bp.add("Gx_residual", gPolyDerivative(q, x));
    bp.add("G_scale", scale);
    bp.add("lambda_minus_Ab", lam - p.A * p.b);
    bp.add("count_lo", static_cast<double>(cLo));
    bp.add("count_hi", static_cast<double>(cHi));
    const Jacobian2 J = jacobian(q, bp.location);
    bp.add("trace", J.trace());
    bp.add("det", J.determinant());
    try {
        const SotomayorValues sv = sotomayor(q, bp.location, ParamId::Lambda);
        bp.add("WT_f_mu", sv.wFmu);
        bp.add("WT_D2f_VV", sv.wD2fVV);
        bp.add("sotomayor_saddle_node", sv.saddleNode() ? 1.0 : 0.0);
    } catch (const Error& e) {
        bp.notes.push_back(std::string("Sotomayor values unavailable: ") + e.what());
    }
    return bp;
}

Equilibrium trackInterior(const Parameters& p, double s, double nearX)
{
    const auto eqs = interiorEquilibria(p.with(ParamId::S, s));
    const Equilibrium* best = nullptr;
    for (const auto& e : eqs) {
        if (!best || std::abs(e.state.x() - nearX) < std::abs(best->state.x() - nearX)) {
            best = &e;
        }
    }
    if (!best || std::abs(best->state.x() - nearX) > 0.1 * p.k1) {
        throw BranchLost("interior equilibrium branch lost at s = " + std::to_string(s));
    }
    return *best;
}

namespace {

double traceOn(const Parameters& p, double s, const Equilibrium& e)
{
    return jacobian(p.with(ParamId::S, s), e.state).trace();
}

} // namespace

BifurcationPoint hopfS(const Parameters& p, int branch, Interval bracket)
{
    const auto start = interiorEquilibria(p.with(ParamId::S, bracket.lo));
    if (branch < 0 || static_cast<std::size_t>(branch) >= start.size()) {
        throw BranchLost("no interior equilibrium with index " + std::to_string(branch) + " at s = " +
                         std::to_string(bracket.lo));
    }

    // Follow the branch across the bracket; stop at the first trace sign change.
    const int samples = 64;
    double sPrev = bracket.lo;
    Equilibrium ePrev = start[static_cast<std::size_t>(branch)];
    double trPrev = traceOn(p, sPrev, ePrev);
    bool found = false;
    double sNext = sPrev;
    Equilibrium eNext = ePrev;
    for (int i = 1; i <= samples && !found; ++i) {
        sNext = i == samples ? bracket.hi : bracket.lo + bracket.width() * i / samples;
        eNext = trackInterior(p, sNext, ePrev.state.x());
        const double trNext = traceOn(p, sNext, eNext);
        if ((trPrev < 0.0) != (trNext < 0.0) || trNext == 0.0) {
            found = true;
            break;
        }
        sPrev = sNext;
        ePrev = eNext;
        trPrev = trNext;
    }
    if (!found) {
        throw BracketError("trace does not change sign along the branch in the s bracket");
    }

    double lo = sPrev;
    double hi = sNext;
    Equilibrium eLo = ePrev;
    double sStar = 0.5 * (lo + hi);
    Equilibrium eStar = trackInterior(p, sStar, eLo.state.x());
    for (int it = 0; it < 200; ++it) {
        sStar = 0.5 * (lo + hi);
        eStar = trackInterior(p, sStar, eLo.state.x());
        const double tr = traceOn(p, sStar, eStar);
        if (std::abs(tr) < 1e-12 || hi - lo < 1e-15) {
            break;
        }
        if ((tr < 0.0) == (trPrev < 0.0)) {
            lo = sStar;
            eLo = eStar;
        } else {
            hi = sStar;
        }
    }

    const Parameters q = p.with(ParamId::S, sStar);
    const Jacobian2 J = jacobian(q, eStar.state);
    const double det = J.determinant();
    if (!(det > 0.0)) {
        throw GateError("determinant is not positive at the trace zero");
    }
    const auto ev = J.eigenvalues();

    BifurcationPoint bp;
    bp.kind = BifurcationKind::Hopf;
    bp.param = ParamId::S;
    bp.criticalValue = sStar;
    bp.location = eStar.state;
    bp.add("trace", J.trace());
    bp.add("det", det);
    bp.add("eig_re", ev[1].real());
    bp.add("eig_im", ev[1].imag());
    bp.add("im_minus_sqrt_det", std::abs(ev[1].imag()) - std::sqrt(det));

    const double h = fdStep(sStar);
    const double partial =
        (traceOn(p, sStar + h, eStar) - traceOn(p, sStar - h, eStar)) / (2.0 * h);
    bp.add("dTr_ds", partial);
    const Equilibrium ePlus = trackInterior(p, sStar + h, eStar.state.x());
    const Equilibrium eMinus = trackInterior(p, sStar - h, eStar.state.x());
    bp.add("dTr_ds_branch", (traceOn(p, sStar + h, ePlus) - traceOn(p, sStar - h, eMinus)) / (2.0 * h));
    bp.add("branch_index", static_cast<double>(eStar.index));
    return bp;
}

std::optional<PeriodicOrbit> cycleAround(const Parameters& p, const State& eq)
{
    LineSection sec;
    sec.origin = eq;
    sec.normal = State(0.0, 1.0);
    const double scale = std::max({eq.x(), eq.y(), 1e-3});
    CycleOptions opts;
    opts.maxIterations = 80;
    for (double frac : {0.05, 0.2, 0.5, 0.01}) {
        for (double sign : {1.0, -1.0}) {
            const State seed = eq + State(sign * frac * scale, 0.0);
            if (seed.x() <= 0.0) {
                continue;
            }
            auto orbit = detectLimitCycle(p, seed, sec, opts);
            if (orbit) {
                return orbit;
            }
        }
    }
    return std::nullopt;
}

HopfCriticality hopfCriticality(const Parameters& p, const BifurcationPoint& hopf, const std::vector<double>& offsets)
{
    HopfCriticality out;
    const double slope = hopf.diag("dTr_ds_branch");
    out.unstableSide = slope < 0.0 ? -1.0 : 1.0;
    bool allStable = !offsets.empty();
    for (double off : offsets) {
        HopfProbe probe;
        probe.offset = out.unstableSide * off;
        const double s = hopf.criticalValue + probe.offset;
        try {
            const Equilibrium e = trackInterior(p, s, hopf.location.x());
            probe.cycle = cycleAround(p.with(ParamId::S, s), e.state);
        } catch (const Error&) {
            probe.cycle.reset();
        }
        allStable = allStable && probe.cycle && probe.cycle->stable();
        out.probes.push_back(probe);
    }
    out.amplitudesShrink = allStable;
    for (std::size_t i = 1; allStable && i < out.probes.size(); ++i) {
        const bool closer = std::abs(out.probes[i].offset) < std::abs(out.probes[i - 1].offset);
        const bool smaller = out.probes[i].cycle->amplitude() < out.probes[i - 1].cycle->amplitude();
        out.amplitudesShrink = out.amplitudesShrink && (closer == smaller);
    }
    out.label = allStable ? "supercritical (empirical)" : "undetermined (empirical)";
    return out;
}

K0OriginReport transcriticalK0Origin(const Parameters& p, double probeK0)
{
    K0OriginReport rep;
    const Parameters atZero = p.with(ParamId::K0, 0.0);
    const SotomayorValues sv = sotomayor(atZero, State(0.0, 0.0), ParamId::K0);
    BifurcationPoint& bp = rep.point;
    bp.kind = BifurcationKind::TranscriticalOnCycle;
    bp.param = ParamId::K0;
    bp.criticalValue = 0.0;
    bp.location = State(0.0, 0.0);
    bp.add("V_x", sv.V.x());
    bp.add("V_y", sv.V.y());
    bp.add("W_x", sv.W.x());
    bp.add("W_y", sv.W.y());
    bp.add("WT_f_mu", sv.wFmu);
    bp.add("WT_Df_mu_V", sv.wDFmuV);
    bp.add("WT_D2f_VV", sv.wD2fVV);
    bp.add("sotomayor_transcritical", sv.transcritical() ? 1.0 : 0.0);

    rep.probeK0 = probeK0;
    const Parameters probe = p.with(ParamId::K0, probeK0);
    std::vector<State> seeds;
    for (const auto& e : interiorEquilibria(probe)) {
        seeds.push_back(e.state + State(0.01 * p.k1, 0.0));
    }
    seeds.push_back(State(0.5 * p.k1, 0.5 * p.k1));
    seeds.push_back(State(0.9 * p.k1, 0.1 * p.k1));
    for (const auto& seed : seeds) {
        OmegaLimit lim = classifyOmegaLimit(probe, seed, 2000.0);
        if (lim.kind == OmegaLimit::Kind::Cycle && lim.cycle && lim.cycle->stable() && !rep.cycle) {
            rep.cycle = lim.cycle;
        }
        rep.limits.push_back(std::move(lim));
    }
    bp.add("probe_k0", probeK0);
    bp.add("cycle_found", rep.cycle ? 1.0 : 0.0);
    if (rep.cycle) {
        bp.add("cycle_amplitude", rep.cycle->amplitude());
        bp.add("cycle_period", rep.cycle->period);
        bp.add("cycle_multiplier", rep.cycle->multiplier);
    }
    return rep;
}

} // namespace allee
