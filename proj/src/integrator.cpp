#include "allee/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace allee {

namespace {

// Dormand-Prince 5(4) tableau. The field is autonomous, so the nodes c_i are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;
// Dense output (Hairer, contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct Dense {
    State r1, r2, r3, r4, r5;

    State at(double theta) const
    {
        const double eta = 1.0 - theta;
        return r1 + theta * (r2 + eta * (r3 + theta * (r4 + eta * r5)));
    }
};

struct PendingEvent {
    double theta;
    int order;
    bool terminal;
    Event event;
};

double errorNorm(const State& err, const State& y0, const State& y1, double atol, double rtol)
{
    double sum = 0.0;
    for (int i = 0; i < 2; ++i) {
        const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        sum += (err[i] / sc) * (err[i] / sc);
    }
    return std::sqrt(sum / 2.0);
}

bool crosses(double g0, double g1, CrossingDirection dir)
{
    const bool rising = g0 < 0.0 && g1 >= 0.0;
    const bool falling = g0 > 0.0 && g1 <= 0.0;
    switch (dir) {
    case CrossingDirection::Rising: return rising;
    case CrossingDirection::Falling: return falling;
    case CrossingDirection::Any: return rising || falling;
    }
    return false;
}

// Bisection for the sign change of g along the interpolant on theta in [0, 1].
double locate(const std::function<double(const State&)>& g, const Dense& dense, double g0, double h)
{
    double lo = 0.0;
    double hi = 1.0;
    const double stop = std::max(1e-13 / std::max(std::abs(h), 1e-300), 1e-15);
    for (int it = 0; it < 200 && hi - lo > stop; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(dense.at(mid));
        if ((gm < 0.0) == (g0 < 0.0) && gm != 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace

void IntegratorConfig::validate() const
{
    if (!(relTol > 0.0 && relTol < 1.0) || !(absTol > 0.0 && absTol < 1.0)) {
        throw DomainError("integrator tolerances must lie in (0, 1)");
    }
    if (!(maxStep > 0.0)) {
        throw DomainError("integrator max_step must be positive");
    }
    if (!(tEnd >= 0.0)) {
        throw DomainError("integrator t_end must be non-negative");
    }
}

double Trajectory::arcLength() const
{
    double len = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        len += (samples[i].state - samples[i - 1].state).norm();
    }
    return len;
}

Trajectory integrate(const Parameters& p, const State& init, const IntegratorConfig& cfg,
                     const std::vector<Section>& sections)
{
    cfg.validate();
    if (!init.allFinite()) {
        throw DomainError("initial state is not finite");
    }
    const double sigma = cfg.direction == Direction::Forward ? 1.0 : -1.0;
    auto field = [&](const State& z) -> State { return sigma * vectorField(p, z); };

    // Built-in stop conditions share the section machinery; order breaks ties.
    struct Builtin {
        std::function<double(const State&)> fn;
        CrossingDirection dir;
        EventKind kind;
        int axis;
    };
    std::vector<Builtin> builtins;
    if (cfg.boxMax) {
        const double m = *cfg.boxMax;
        builtins.push_back({[m](const State& z) { return m - z.x(); }, CrossingDirection::Falling, EventKind::BoxExit, 0});
        builtins.push_back({[m](const State& z) { return m - z.y(); }, CrossingDirection::Falling, EventKind::BoxExit, 1});
        builtins.push_back({[](const State& z) { return z.x(); }, CrossingDirection::Falling, EventKind::BoxExit, 0});
        builtins.push_back({[](const State& z) { return z.y(); }, CrossingDirection::Falling, EventKind::BoxExit, 1});
    }
    if (cfg.axisThreshold) {
        const double a = *cfg.axisThreshold;
        builtins.push_back(
            {[a](const State& z) { return z.x() - a; }, CrossingDirection::Falling, EventKind::AxisApproach, 0});
        builtins.push_back(
            {[a](const State& z) { return z.y() - a; }, CrossingDirection::Falling, EventKind::AxisApproach, 1});
    }

    Trajectory traj;
    traj.samples.push_back({0.0, init});

    State y0 = init;
    State k1 = field(y0);
    double tau = 0.0;
    double arc = 0.0;

    // Initial step from the scale of the field.
    double h;
    {
        const double d0 = std::sqrt(0.5 * (y0.array() / (cfg.absTol + cfg.relTol * y0.array().abs())).square().sum());
        const double d1n =
            std::sqrt(0.5 * (k1.array() / (cfg.absTol + cfg.relTol * y0.array().abs())).square().sum());
        h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h = std::min({h, cfg.maxStep, std::max(cfg.tEnd, 1e-12)});
    }

    if (cfg.convergeTol && vectorField(p, y0).norm() < *cfg.convergeTol) {
        traj.terminalEvent = Event{EventKind::Converged, 0, -1, 0.0, y0};
        return traj;
    }

    int rejectStreak = 0;
    std::size_t accepted = 0;
    while (tau < cfg.tEnd) {
        bool lastStep = false;
        if (tau + h >= cfg.tEnd) {
            h = cfg.tEnd - tau;
            lastStep = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(tau))) {
            if (lastStep) {
                break;
            }
            throw StepFailure("step size underflow at t = " + std::to_string(sigma * tau));
        }

        const State k2 = field(y0 + h * a21 * k1);
        const State k3 = field(y0 + h * (a31 * k1 + a32 * k2));
        const State k4 = field(y0 + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = field(y0 + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = field(y0 + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State y1 = y0 + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const State k7 = field(y1);
        const State errv = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double err = errorNorm(errv, y0, y1, cfg.absTol, cfg.relTol);
        if (!y1.allFinite() || !std::isfinite(err)) {
            err = std::numeric_limits<double>::infinity();
        }

        if (err > 1.0) {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h *= fac;
            if (++rejectStreak > 200) {
                throw StepFailure("too many rejected steps at t = " + std::to_string(sigma * tau));
            }
            continue;
        }
        rejectStreak = 0;
        if (++accepted > cfg.maxSteps) {
            throw StepFailure("step budget exhausted at t = " + std::to_string(sigma * tau));
        }

        Dense dense;
        dense.r1 = y0;
        dense.r2 = y1 - y0;
        dense.r3 = h * k1 - dense.r2;
        dense.r4 = dense.r2 - h * k7 - dense.r3;
        dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

        std::vector<PendingEvent> pending;
        for (std::size_t i = 0; i < sections.size(); ++i) {
            const auto& sec = sections[i];
            const double g0 = sec.fn(y0);
            const double g1 = sec.fn(y1);
            if (crosses(g0, g1, sec.crossing)) {
                const double theta = locate(sec.fn, dense, g0, h);
                const State z = dense.at(theta);
                pending.push_back({theta, static_cast<int>(i), sec.terminal,
                                   Event{EventKind::SectionCrossing, i, -1, sigma * (tau + theta * h), z}});
            }
        }
        for (std::size_t i = 0; i < builtins.size(); ++i) {
            const auto& b = builtins[i];
            const double g0 = b.fn(y0);
            const double g1 = b.fn(y1);
            if (crosses(g0, g1, b.dir)) {
                const double theta = locate(b.fn, dense, g0, h);
                const State z = dense.at(theta);
                pending.push_back({theta, static_cast<int>(sections.size() + i), true,
                                   Event{b.kind, 0, b.axis, sigma * (tau + theta * h), z}});
            }
        }
        const double stepArc = (y1 - y0).norm();
        if (cfg.maxArcLength && arc + stepArc > *cfg.maxArcLength) {
            pending.push_back({1.0, 1 << 20, true, Event{EventKind::ArcLength, 0, -1, sigma * (tau + h), y1}});
        }
        if (cfg.convergeTol && vectorField(p, y1).norm() < *cfg.convergeTol) {
            pending.push_back({1.0, (1 << 20) + 1, true, Event{EventKind::Converged, 0, -1, sigma * (tau + h), y1}});
        }
        std::sort(pending.begin(), pending.end(), [](const PendingEvent& a, const PendingEvent& b) {
            return a.theta != b.theta ? a.theta < b.theta : a.order < b.order;
        });
        for (const auto& ev : pending) {
            if (!ev.terminal) {
                traj.crossings.push_back(ev.event);
                continue;
            }
            traj.samples.push_back({ev.event.t, ev.event.state});
            traj.terminalEvent = ev.event;
            return traj;
        }

        tau += h;
        arc += stepArc;
        traj.samples.push_back({sigma * tau, y1});
        y0 = y1;
        k1 = k7;
        if (lastStep) {
            break;
        }
        const double fac = err == 0.0 ? 10.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 10.0);
        h = std::min(h * fac, cfg.maxStep);
    }
    return traj;
}

std::string_view omegaKindName(OmegaLimit::Kind k)
{
    switch (k) {
    case OmegaLimit::Kind::Equilibrium: return "equilibrium";
    case OmegaLimit::Kind::Cycle: return "cycle";
    case OmegaLimit::Kind::Undecided: return "undecided";
    }
    return "?";
}

LineSection sectionAcrossFlow(const Parameters& p, const State& at)
{
    const State f = vectorField(p, at);
    const double n = f.norm();
    if (!(n > 0.0)) {
        throw DomainError("no flow direction at an equilibrium");
    }
    return {at, f / n};
}

namespace {

struct Return {
    double xi;
    double period;
    State min, max;
};

std::optional<Return> firstReturn(const Parameters& p, const LineSection& sec, const State& tangent, double xi,
                                  const CycleOptions& opts)
{
    const State start = sec.origin + xi * tangent;
    if (!(start.x() > 0.0 && start.y() > 0.0) || vectorField(p, start).dot(sec.normal) <= 0.0) {
        return std::nullopt;
    }
    IntegratorConfig cfg;
    cfg.relTol = opts.relTol;
    cfg.absTol = opts.absTol;
    cfg.maxStep = opts.maxStep;
    cfg.tEnd = opts.horizon;
    cfg.convergeTol = 1e-11;
    Section s{[&sec](const State& z) { return sec.normal.dot(z - sec.origin); }, CrossingDirection::Rising, true};
    Trajectory tr;
    try {
        tr = integrate(p, start, cfg, {s});
    } catch (const StepFailure&) {
        return std::nullopt;
    }
    if (!tr.terminalEvent || tr.terminalEvent->kind != EventKind::SectionCrossing) {
        return std::nullopt;
    }
    Return r;
    r.xi = tangent.dot(tr.terminalEvent->state - sec.origin);
    r.period = tr.terminalEvent->t;
    r.min = r.max = start;
    for (const auto& smp : tr.samples) {
        r.min = r.min.cwiseMin(smp.state);
        r.max = r.max.cwiseMax(smp.state);
    }
    return r;
}

} // namespace

std::optional<PeriodicOrbit> detectLimitCycle(const Parameters& p, const State& seed, const LineSection& section,
                                              const CycleOptions& opts)
{
    LineSection sec = section;
    const double nn = sec.normal.norm();
    if (!(nn > 0.0)) {
        throw DomainError("section normal must be nonzero");
    }
    sec.normal /= nn;
    const State tangent(-sec.normal.y(), sec.normal.x());

    // Carry the seed onto the section.
    double xiA;
    {
        IntegratorConfig cfg;
        cfg.relTol = opts.relTol;
        cfg.absTol = opts.absTol;
        cfg.maxStep = opts.maxStep;
        cfg.tEnd = opts.horizon;
        cfg.convergeTol = 1e-11;
        const double g0 = sec.normal.dot(seed - sec.origin);
        if (std::abs(g0) < 1e-14 && vectorField(p, seed).dot(sec.normal) > 0.0) {
            xiA = tangent.dot(seed - sec.origin);
        } else {
            Section s{[&sec](const State& z) { return sec.normal.dot(z - sec.origin); }, CrossingDirection::Rising,
                      true};
            const Trajectory tr = integrate(p, seed, cfg, {s});
            if (!tr.terminalEvent || tr.terminalEvent->kind != EventKind::SectionCrossing) {
                return std::nullopt;
            }
            xiA = tangent.dot(tr.terminalEvent->state - sec.origin);
        }
    }

    auto retA = firstReturn(p, sec, tangent, xiA, opts);
    if (!retA) {
        return std::nullopt;
    }
    double dA = retA->xi - xiA;
    double xiB = retA->xi;
    auto retB = firstReturn(p, sec, tangent, xiB, opts);
    if (!retB) {
        return std::nullopt;
    }
    double dB = retB->xi - xiB;

    // Secant iteration on d(xi) = P(xi) - xi. Once d changes sign the root is kept
    // bracketed and steps falling outside the bracket are replaced by bisection.
    // Without a bracket, extrapolation is capped at 1000 return displacements, which
    // leaves room for return maps with slope close to 1.
    struct Bracket {
        double lo, dLo, hi;
    };
    std::optional<Bracket> bracket;
    auto update = [&bracket](double xa, double da, double xb, double db) {
        if (bracket) {
            if ((db < 0.0) == (bracket->dLo < 0.0)) {
                bracket->lo = xb;
                bracket->dLo = db;
            } else {
                bracket->hi = xb;
            }
        } else if ((da < 0.0) != (db < 0.0)) {
            bracket = Bracket{xa, da, xb};
        }
    };
    update(xiA, dA, xiB, dB);
    double slope = 0.0;
    for (int it = 0; it < opts.maxIterations && std::abs(dB) >= opts.residualTol; ++it) {
        const double denom = dB - dA;
        double xiC = retB->xi;
        if (denom != 0.0 && std::isfinite(denom)) {
            xiC = xiB - dB * (xiB - xiA) / denom;
        }
        if (bracket) {
            const auto [lo, hi] = std::minmax(bracket->lo, bracket->hi);
            if (!std::isfinite(xiC) || !(xiC > lo && xiC < hi)) {
                xiC = 0.5 * (lo + hi);
            }
        } else {
            const double limit = 1000.0 * std::max(std::abs(dB), std::abs(dA));
            if (!std::isfinite(xiC) || std::abs(xiC - xiB) > limit) {
                xiC = xiB + std::copysign(limit, xiC - xiB);
            }
        }
        auto retC = firstReturn(p, sec, tangent, xiC, opts);
        if (!retC) {
            if (bracket) {
                return std::nullopt;
            }
            // Fall back to plain iteration of the return map.
            xiC = retB->xi;
            retC = firstReturn(p, sec, tangent, xiC, opts);
            if (!retC) {
                return std::nullopt;
            }
        }
        const double dC = retC->xi - xiC;
        update(xiB, dB, xiC, dC);
        xiA = xiB;
        dA = dB;
        xiB = xiC;
        retB = retC;
        dB = dC;
    }
    if (std::abs(dB) >= opts.residualTol) {
        return std::nullopt;
    }
    if (xiB != xiA && dB != dA) {
        slope = 1.0 + (dB - dA) / (xiB - xiA);
    }

    PeriodicOrbit orbit;
    orbit.sectionPoint = sec.origin + xiB * tangent;
    orbit.period = retB->period;
    orbit.min = retB->min;
    orbit.max = retB->max;
    orbit.residual = std::abs(dB);
    orbit.multiplier = slope;

    // A vanishing orbit is the equilibrium itself, not a cycle.
    const double extent = (orbit.max - orbit.min).norm();
    if (extent < 1e-6 * (1.0 + orbit.sectionPoint.norm()) || vectorField(p, orbit.sectionPoint).norm() < 1e-8) {
        return std::nullopt;
    }
    return orbit;
}

std::optional<PeriodicOrbit> findLimitCycle(const Parameters& p, const State& seed, double transient,
                                            const CycleOptions& opts)
{
    IntegratorConfig cfg;
    cfg.relTol = opts.relTol;
    cfg.absTol = opts.absTol;
    cfg.maxStep = opts.maxStep;
    cfg.tEnd = transient;
    cfg.convergeTol = 1e-11;
    const Trajectory tr = integrate(p, seed, cfg);
    if (tr.terminalEvent && tr.terminalEvent->kind == EventKind::Converged) {
        return std::nullopt;
    }
    const State end = tr.back();
    if (vectorField(p, end).norm() < 1e-10) {
        return std::nullopt;
    }
    return detectLimitCycle(p, end, sectionAcrossFlow(p, end), opts);
}

OmegaLimit classifyOmegaLimit(const Parameters& p, const State& init, double horizon)
{
    IntegratorConfig cfg;
    cfg.relTol = 1e-10;
    cfg.absTol = 1e-14;
    cfg.maxStep = 1.0;
    cfg.tEnd = horizon;
    const Trajectory tr = integrate(p, init, cfg);

    OmegaLimit out;
    out.point = tr.back();
    const double windowStart = 0.95 * horizon;
    double displacement = 0.0;
    for (const auto& smp : tr.samples) {
        if (smp.t >= windowStart) {
            displacement = std::max(displacement, (smp.state - out.point).norm());
        }
    }
    if (vectorField(p, out.point).norm() < 1e-8 && displacement < 1e-7) {
        out.kind = OmegaLimit::Kind::Equilibrium;
        return out;
    }
    if (vectorField(p, out.point).norm() > 0.0) {
        out.cycle = detectLimitCycle(p, out.point, sectionAcrossFlow(p, out.point));
        if (out.cycle) {
            out.kind = OmegaLimit::Kind::Cycle;
        }
    }
    return out;
}

} // namespace allee
