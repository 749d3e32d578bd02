#include "allee/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace allee {

std::string_view kindName(EquilibriumKind k)
{
    switch (k) {
    case EquilibriumKind::E0: return "E0";
    case EquilibriumKind::E1: return "E1";
    case EquilibriumKind::E2: return "E2";
    case EquilibriumKind::Interior: return "interior";
    }
    return "?";
}

std::string_view className(StabilityClass c)
{
    switch (c) {
    case StabilityClass::StableNode: return "stable_node";
    case StabilityClass::StableFocus: return "stable_focus";
    case StabilityClass::Saddle: return "saddle";
    case StabilityClass::UnstableNode: return "unstable_node";
    case StabilityClass::UnstableFocus: return "unstable_focus";
    case StabilityClass::NonHyperbolic: return "nonhyperbolic";
    }
    return "?";
}

std::string Equilibrium::label() const
{
    if (kind == EquilibriumKind::Interior) {
        return "E*" + std::to_string(index + 1);
    }
    return std::string(kindName(kind));
}

StabilityClass classifyJacobian(const Jacobian2& J)
{
    const double norm = std::max(J.m.cwiseAbs().maxCoeff(), 1e-300);
    const double tol = kHyperbolicTol * norm;
    const auto ev = J.eigenvalues();
    if (std::abs(ev[0].real()) < tol || std::abs(ev[1].real()) < tol || std::abs(J.determinant()) < tol * norm) {
        return StabilityClass::NonHyperbolic;
    }
    if (ev[0].imag() != 0.0) {
        return ev[0].real() < 0.0 ? StabilityClass::StableFocus : StabilityClass::UnstableFocus;
    }
    if (ev[0].real() < 0.0 && ev[1].real() > 0.0) {
        return StabilityClass::Saddle;
    }
    return ev[1].real() < 0.0 ? StabilityClass::StableNode : StabilityClass::UnstableNode;
}

namespace {

// Threshold rule for the two triangular eigenvalues of a boundary equilibrium.
StabilityClass classifyPair(double mu1, double mu2, double scale)
{
    const double tol = 1e-10 * std::max(1.0, scale);
    if (std::abs(mu1) < tol || std::abs(mu2) < tol) {
        return StabilityClass::NonHyperbolic;
    }
    if (mu1 < 0.0 && mu2 < 0.0) {
        return StabilityClass::StableNode;
    }
    if (mu1 > 0.0 && mu2 > 0.0) {
        return StabilityClass::UnstableNode;
    }
    return StabilityClass::Saddle;
}

} // namespace

Equilibrium classifyBoundary(const Parameters& p, EquilibriumKind which)
{
    Equilibrium eq;
    eq.kind = which;
    double mu1 = 0.0;
    double mu2 = 0.0;
    switch (which) {
    case EquilibriumKind::E0:
        eq.state = State(0.0, 0.0);
        mu1 = -p.r1 * p.k0;
        mu2 = -p.s;
        eq.degenerate = p.k0 == 0.0;
        break;
    case EquilibriumKind::E1:
        eq.state = State(p.k1, 0.0);
        mu1 = p.r1 * p.k1 * (p.k0 / p.k1 - 1.0);
        mu2 = p.lambda * p.k1 / (p.b + p.h * p.k1 * p.lambda) - p.s;
        break;
    case EquilibriumKind::E2:
        if (!(p.k0 > 0.0)) {
            throw DomainError("E2 exists only under a strong Allee effect (k0 > 0)");
        }
        eq.state = State(p.k0, 0.0);
        mu1 = p.r1 * p.k0 * (1.0 - p.k0 / p.k1);
        mu2 = p.lambda * p.k0 / (p.b + p.h * p.k0 * p.lambda) - p.s;
        break;
    case EquilibriumKind::Interior: throw DomainError("classifyBoundary needs E0, E1 or E2");
    }
    eq.eigenvalues = {std::complex<double>(mu1, 0.0), std::complex<double>(mu2, 0.0)};
    eq.cls = classifyPair(mu1, mu2, std::max(std::abs(mu1), std::abs(mu2)));
    return eq;
}

std::vector<Equilibrium> boundaryEquilibria(const Parameters& p)
{
    std::vector<Equilibrium> out;
    out.push_back(classifyBoundary(p, EquilibriumKind::E0));
    out.push_back(classifyBoundary(p, EquilibriumKind::E1));
    if (p.k0 > 0.0) {
        out.push_back(classifyBoundary(p, EquilibriumKind::E2));
    }
    return out;
}

namespace {

template <typename F>
double bisect(F&& f, double a, double b, double fa)
{
    for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = f(m);
        if (fm == 0.0) {
            return m;
        }
        if ((fm < 0.0) == (fa < 0.0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

// Newton polish that never leaves [a, b].
double polish(const Parameters& p, double x, double a, double b)
{
    for (int it = 0; it < 8; ++it) {
        const double g = gPoly(p, x);
        const double dg = gPolyDerivative(p, x);
        if (std::abs(g) < 1e-15 * gPolyScale(p, x) || dg == 0.0) {
            break;
        }
        const double next = x - g / dg;
        if (!(next > a && next < b)) {
            break;
        }
        x = next;
    }
    return x;
}

} // namespace

std::vector<InteriorRoot> gRootsInRange(const Parameters& p, int cells)
{
    const double lo = std::max(0.0, p.k0);
    const double hi = p.k1;
    std::vector<InteriorRoot> roots;
    if (!(hi > lo)) {
        return roots;
    }
    auto G = [&p](double x) { return gPoly(p, x); };
    auto dG = [&p](double x) { return gPolyDerivative(p, x); };
    const double width = (hi - lo) / cells;

    std::vector<double> xs(cells + 1);
    std::vector<double> gs(cells + 1);
    for (int i = 0; i <= cells; ++i) {
        xs[i] = i == cells ? hi : lo + i * width;
        gs[i] = G(xs[i]);
    }
    auto addSimple = [&](double a, double b, double ga) {
        const double r = polish(p, bisect(G, a, b, ga), a, b);
        roots.push_back({r, 1});
    };

    for (int i = 0; i < cells; ++i) {
        const double a = xs[i];
        const double b = xs[i + 1];
        const double ga = gs[i];
        const double gb = gs[i + 1];
        if (ga == 0.0) {
            if (i > 0) {
                roots.push_back({a, 1});
            }
            continue;
        }
        if (gb != 0.0 && (ga < 0.0) != (gb < 0.0)) {
            addSimple(a, b, ga);
            continue;
        }
        if (gb == 0.0) {
            continue;
        }
        // Same sign at both ends: a critical point inside may hide a double
        // root or a pair of close roots.
        const double da = dG(a);
        const double db = dG(b);
        if ((da < 0.0) == (db < 0.0) || da == 0.0 || db == 0.0) {
            continue;
        }
        const double xc = bisect(dG, a, b, da);
        const double gc = G(xc);
        const double scale = gPolyScale(p, xc);
        if (std::abs(gc) < 1e-12 * scale) {
            roots.push_back({xc, 2});
        } else if ((gc < 0.0) != (ga < 0.0)) {
            addSimple(a, xc, ga);
            addSimple(xc, b, gc);
        }
    }

    std::sort(roots.begin(), roots.end(), [](const InteriorRoot& l, const InteriorRoot& r) { return l.x < r.x; });
    std::vector<InteriorRoot> merged;
    for (const auto& r : roots) {
        if (!(r.x > lo && r.x < hi)) {
            continue;
        }
        if (!merged.empty() && std::abs(r.x - merged.back().x) < 1e-8) {
            merged.back().multiplicity = 2;
            continue;
        }
        merged.push_back(r);
    }
    for (auto& r : merged) {
        if (r.multiplicity == 1 && std::abs(dG(r.x)) < 1e-6 * gPolyScale(p, r.x)) {
            r.multiplicity = 2;
        }
    }
    return merged;
}

NullclineCrossCheck nullclineCrossCheck(const Parameters& p, const State& st)
{
    const double x = st.x();
    const double y = st.y();
    const auto d = perCapitaPartials(p, x, y);
    NullclineCrossCheck c;
    c.slopePrey = -d.f1x / d.f1y;
    c.slopePredator = -d.f2x / d.f2y;
    c.detFromSlopes = x * y * d.f1y * d.f2y * (c.slopePredator - c.slopePrey);
    c.traceFromSlopes = y * d.f2y - x * d.f1y * c.slopePrey;
    const Jacobian2 J = jacobian(p, st);
    c.detDirect = J.determinant();
    c.traceDirect = J.trace();
    // Reference magnitudes keep the check meaningful when det or trace vanish.
    const double detScale =
        std::max({std::abs(c.detDirect), std::abs(J.a11() * J.a22()), std::abs(J.a12() * J.a21())});
    const double trScale = std::max({std::abs(c.traceDirect), std::abs(J.a11()), std::abs(J.a22())});
    c.agrees = std::abs(c.detFromSlopes - c.detDirect) <= 1e-8 * detScale &&
               std::abs(c.traceFromSlopes - c.traceDirect) <= 1e-8 * trScale;
    return c;
}

Equilibrium classifyInterior(const Parameters& p, Equilibrium eq)
{
    if (eq.kind != EquilibriumKind::Interior) {
        throw DomainError("classifyInterior needs an interior equilibrium");
    }
    const Jacobian2 J = jacobian(p, eq.state);
    eq.eigenvalues = J.eigenvalues();
    eq.cls = eq.multiplicity > 1 ? StabilityClass::NonHyperbolic : classifyJacobian(J);
    const auto check = nullclineCrossCheck(p, eq.state);
    if (!check.agrees) {
        throw std::logic_error("nullcline-slope determinant/trace disagree with the Jacobian");
    }
    return eq;
}

std::vector<Equilibrium> interiorEquilibria(const Parameters& p)
{
    std::vector<Equilibrium> out;
    for (const auto& r : gRootsInRange(p)) {
        const double y = nullclineG1(p, r.x);
        if (!(y > 0.0)) {
            continue;
        }
        const double den = g2Denominator(p, r.x);
        if (std::abs(den) <= 1e-14 * (p.s + std::abs(p.A * (p.s * p.h - 1.0) * r.x))) {
            continue;
        }
        Equilibrium eq;
        eq.kind = EquilibriumKind::Interior;
        eq.state = State(r.x, y);
        eq.multiplicity = r.multiplicity;
        eq.index = static_cast<int>(out.size());
        out.push_back(classifyInterior(p, eq));
    }
    return out;
}

std::size_t interiorCount(const Parameters& p)
{
    std::size_t n = 0;
    for (const auto& r : gRootsInRange(p)) {
        if (nullclineG1(p, r.x) > 0.0) {
            ++n;
        }
    }
    return n;
}

std::vector<Equilibrium> allEquilibria(const Parameters& p)
{
    auto out = boundaryEquilibria(p);
    for (auto& e : interiorEquilibria(p)) {
        out.push_back(std::move(e));
    }
    return out;
}

bool twoEquilibriaHypothesis(const Parameters& p)
{
    if (!(p.s * p.h < 1.0)) {
        return false;
    }
    if (p.k0 > p.k1 / 2.0) {
        return true;
    }
    if (p.k0 < 0.0 && p.lambda < p.A * p.b) {
        return true;
    }
    const double oneMinus = 1.0 - p.s * p.h;
    return p.k0 < 0.0 && p.lambda > p.A * p.b &&
           p.r1 / p.s * (1.0 + p.k0 / p.k1) < p.A * (p.lambda - p.A * p.b) * oneMinus * oneMinus / (p.s * p.s);
}

} // namespace allee
