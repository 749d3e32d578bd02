#include "allee/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "allee/integrator.hpp"
#include "allee/parallel.hpp"

namespace allee {

void Region::validate() const
{
    if (!(x.width() > 0.0) || !(y.width() > 0.0)) {
        throw DomainError("region ranges must have positive length");
    }
    if (gridN < 2) {
        throw DomainError("region grid needs at least 2 samples per axis");
    }
    if (!(inset >= 0.0) || 2.0 * inset >= std::min(x.width(), y.width())) {
        throw DomainError("region inset swallows the region");
    }
}

double Region::xAt(int i) const
{
    const double lo = x.lo + inset;
    const double hi = x.hi - inset;
    return i == gridN - 1 ? hi : lo + (hi - lo) * i / (gridN - 1);
}

double Region::yAt(int j) const
{
    const double lo = y.lo + inset;
    const double hi = y.hi - inset;
    return j == gridN - 1 ? hi : lo + (hi - lo) * j / (gridN - 1);
}

CubicMax maxPreyNullcline(const Parameters& p)
{
    const double lo = std::max(0.0, p.k0);
    const double hi = p.k1;
    auto g = [&p](double x) { return nullclineG1(p, x); };

    // g1 is a cubic with a single hump on [max(0,k0), k1], so golden section applies.
    const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo;
    double b = hi;
    double c = b - invPhi * (b - a);
    double d = a + invPhi * (b - a);
    double gc = g(c);
    double gd = g(d);
    while (b - a > 1e-11 * std::max(1.0, hi)) {
        if (gc > gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - invPhi * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + invPhi * (b - a);
            gd = g(d);
        }
    }
    CubicMax best{0.5 * (a + b), g(0.5 * (a + b))};
    for (double x : {lo, hi}) {
        if (g(x) > best.value) {
            best = {x, g(x)};
        }
    }
    return best;
}

Region buildD0(const Parameters& p, int gridN)
{
    Region r;
    r.x = {0.0, p.k1};
    r.y = {0.0, std::max(p.k1, maxPreyNullcline(p).value)};
    r.gridN = gridN;
    r.inset = 1e-6 * p.k1;
    return r;
}

std::string_view verdictName(Verdict v)
{
    switch (v) {
    case Verdict::AllNegative: return "AllNegative";
    case Verdict::AllPositive: return "AllPositive";
    case Verdict::Mixed: return "Mixed";
    }
    return "?";
}

const ChecklistEntry* CertificateReport::find(std::string_view name) const
{
    for (const auto& e : checklist) {
        if (e.name == name) {
            return &e;
        }
    }
    return nullptr;
}

double traceAt(const Parameters& p, double x, double y)
{
    const auto d = perCapitaPartials(p, x, y);
    return x * d.f1x + y * d.f2y;
}

CertificateReport traceGridCertificate(const Parameters& p, const Region& region, unsigned threads)
{
    region.validate();
    const int n = region.gridN;
    struct RowExtrema {
        TraceSample lo{std::numeric_limits<double>::infinity(), State::Zero()};
        TraceSample hi{-std::numeric_limits<double>::infinity(), State::Zero()};
    };
    std::vector<RowExtrema> rows(static_cast<std::size_t>(n));
    parallelFor(
        rows.size(),
        [&](std::size_t i) {
            const double x = region.xAt(static_cast<int>(i));
            RowExtrema& r = rows[i];
            for (int j = 0; j < n; ++j) {
                const double y = region.yAt(j);
                const double t = traceAt(p, x, y);
                if (t < r.lo.value) {
                    r.lo = {t, State(x, y)};
                }
                if (t > r.hi.value) {
                    r.hi = {t, State(x, y)};
                }
            }
        },
        threads);

    CertificateReport rep;
    rep.kind = "trace";
    rep.minTrace = rows.front().lo;
    rep.maxTrace = rows.front().hi;
    for (const auto& r : rows) {
        if (r.lo.value < rep.minTrace.value) {
            rep.minTrace = r.lo;
        }
        if (r.hi.value > rep.maxTrace.value) {
            rep.maxTrace = r.hi;
        }
    }
    if (rep.maxTrace.value < -kTraceMargin) {
        rep.verdict = Verdict::AllNegative;
    } else if (rep.minTrace.value > kTraceMargin) {
        rep.verdict = Verdict::AllPositive;
    } else {
        rep.verdict = Verdict::Mixed;
    }
    rep.passed = rep.verdict != Verdict::Mixed;
    rep.notes.push_back("sampled on a " + std::to_string(n) + "x" + std::to_string(n) +
                        " grid; a sampling certificate, not a proof");
    return rep;
}

double DulacSample::relError() const
{
    const double diff = std::abs(divergence - traceOverXY);
    return reference > 0.0 ? diff / reference : diff;
}

DulacSample dulacAt(const Parameters& p, double x, double y)
{
    const State st(x, y);
    const State f = vectorField(p, st);
    const Jacobian2 J = jacobian(p, st);
    const double D = 1.0 / (x * y);
    const double Dx = -1.0 / (x * x * y);
    const double Dy = -1.0 / (x * y * y);
    DulacSample s;
    const double main = D * (J.a11() + J.a22());
    s.divergence = main + f.x() * Dx + f.y() * Dy;
    s.traceOverXY = traceAt(p, x, y) / (x * y);
    s.reference = std::max({std::abs(s.divergence), std::abs(s.traceOverXY), std::abs(main)});
    return s;
}

double dulacMaxRelError(const Parameters& p, const Region& region, unsigned threads)
{
    region.validate();
    const int n = region.gridN;
    std::vector<double> worst(static_cast<std::size_t>(n), 0.0);
    parallelFor(
        worst.size(),
        [&](std::size_t i) {
            const double x = region.xAt(static_cast<int>(i));
            for (int j = 0; j < n; ++j) {
                worst[i] = std::max(worst[i], dulacAt(p, x, region.yAt(j)).relError());
            }
        },
        threads);
    return *std::max_element(worst.begin(), worst.end());
}

namespace {

ChecklistEntry lessThan(std::string name, double lhs, double rhs)
{
    return {std::move(name), lhs, rhs, lhs < rhs};
}

ChecklistEntry greaterThan(std::string name, double lhs, double rhs)
{
    return {std::move(name), lhs, rhs, lhs > rhs};
}

// g2 at x, or NaN at its pole (a NaN side fails every comparison).
double g2OrNan(const Parameters& p, double x)
{
    try {
        return nullclineG2(p, x);
    } catch (const PoleError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

std::vector<State> randomStarts(const Region& box, const SimulationOptions& sim)
{
    std::mt19937_64 rng(sim.seed);
    std::uniform_real_distribution<double> ux(box.x.lo, box.x.hi);
    std::uniform_real_distribution<double> uy(box.y.lo, box.y.hi);
    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(sim.runs));
    for (int i = 0; i < sim.runs; ++i) {
        double x = ux(rng);
        double y = uy(rng);
        out.emplace_back(std::max(x, 1e-3 * box.x.hi), std::max(y, 1e-3 * box.y.hi));
    }
    return out;
}

} // namespace

CertificateReport checkCorollaryGlobalStability(const Parameters& p, const SimulationOptions& sim)
{
    CertificateReport rep;
    rep.kind = "corollary";
    const double ymax = std::max(p.k1, maxPreyNullcline(p).value);
    const double excess = p.lambda - p.A * p.b;
    const double oneMinus = 1.0 - p.s * p.h;

    rep.checklist.push_back({"k0_eq_minus_k1", p.k0, -p.k1, std::abs(p.k0 + p.k1) <= 1e-12 * std::max(1.0, p.k1)});
    rep.checklist.push_back(greaterThan("lambda_gt_Ab", p.lambda, p.A * p.b));
    rep.checklist.push_back(lessThan("Ak1_lt_s", p.A * p.k1, p.s));
    rep.checklist.push_back(lessThan("growth_lt_cooperation", p.r1 / p.s * (1.0 + p.k0 / p.k1),
                                     p.A * excess * oneMinus * oneMinus / (p.s * p.s)));
    const double hCap1 = excess / std::pow(p.lambda + p.A * ymax, 2);
    const double hCap2 = (p.lambda * p.k1 - p.s * p.b) / (p.s * p.lambda * p.k1);
    rep.checklist.push_back(lessThan("h_lt_min", p.h, std::min(hCap1, hCap2)));

    const Region d0 = buildD0(p);
    const CertificateReport trace = traceGridCertificate(p, d0);
    rep.verdict = trace.verdict;
    rep.minTrace = trace.minTrace;
    rep.maxTrace = trace.maxTrace;

    rep.passed = std::all_of(rep.checklist.begin(), rep.checklist.end(), [](const auto& e) { return e.passed; });
    if (!rep.passed) {
        return rep;
    }

    const auto interior = interiorEquilibria(p);
    if (interior.size() != 1) {
        rep.notes.push_back("expected a unique interior equilibrium, found " + std::to_string(interior.size()));
        rep.passed = false;
        return rep;
    }
    const State target = interior.front().state;

    SimulationSummary summary;
    summary.runs = sim.runs;
    summary.seed = sim.seed;
    summary.horizon = sim.horizon > 0.0 ? sim.horizon : 5000.0;
    summary.tolerance = 1e-5;
    const auto starts = randomStarts(d0, sim);
    std::vector<double> dist(starts.size());
    parallelFor(starts.size(), [&](std::size_t i) {
        IntegratorConfig cfg;
        cfg.tEnd = summary.horizon;
        cfg.maxStep = 5.0;
        cfg.convergeTol = 1e-12;
        dist[i] = (integrate(p, starts[i], cfg).back() - target).norm();
    });
    for (double d : dist) {
        summary.worst = std::max(summary.worst, d);
        summary.agreeing += d < summary.tolerance ? 1 : 0;
    }
    rep.simulation = summary;
    rep.passed = summary.allAgree();
    return rep;
}

CertificateReport checkExtinction(const Parameters& p, const SimulationOptions& sim)
{
    CertificateReport rep;
    rep.kind = "extinction";
    const double oneMinus = 1.0 - p.s * p.h;
    const double excess = p.lambda - p.A * p.b;
    const double g2k1 = g2OrNan(p, p.k1);
    const double g2k0 = g2OrNan(p, p.k0);

    rep.checklist.push_back(greaterThan("one_minus_sh_pos", oneMinus, 0.0));
    rep.checklist.push_back(greaterThan("k0_gt_half_k1", p.k0, p.k1 / 2.0));
    rep.checklist.push_back(lessThan("case_i_lambda_lt_Ab", excess, 0.0));
    rep.checklist.push_back(lessThan("case_i_g2_k1_neg", g2k1, 0.0));
    rep.checklist.push_back(greaterThan("case_i_g2_k0_pos", g2k0, 0.0));
    rep.checklist.push_back(greaterThan("case_ii_lambda_gt_Ab", excess, 0.0));
    rep.checklist.push_back(greaterThan("case_ii_g2_k1_pos", g2k1, 0.0));
    rep.checklist.push_back(lessThan("case_ii_g2_k0_neg", g2k0, 0.0));

    const Region d0 = buildD0(p);
    const CertificateReport trace = traceGridCertificate(p, d0);
    rep.verdict = trace.verdict;
    rep.minTrace = trace.minTrace;
    rep.maxTrace = trace.maxTrace;
    rep.checklist.push_back(greaterThan("trace_positive_on_D0", trace.minTrace.value, kTraceMargin));

    auto ok = [&rep](std::string_view name) { return rep.find(name)->passed; };
    const bool gates = ok("one_minus_sh_pos") && ok("k0_gt_half_k1");
    const bool caseOne = ok("case_i_lambda_lt_Ab") && ok("case_i_g2_k1_neg") && ok("case_i_g2_k0_pos");
    const bool caseTwo = ok("case_ii_lambda_gt_Ab") && ok("case_ii_g2_k1_pos") && ok("case_ii_g2_k0_neg");
    const bool signs = gates && (caseOne || caseTwo);
    rep.passed = signs && ok("trace_positive_on_D0");
    if (caseOne || caseTwo) {
        rep.notes.push_back(caseOne ? "sign conditions of case i hold" : "sign conditions of case ii hold");
    }
    if (!signs) {
        return rep;
    }

    SimulationSummary summary;
    summary.runs = sim.runs;
    summary.seed = sim.seed;
    summary.horizon = sim.horizon > 0.0 ? sim.horizon : 1e4;
    summary.tolerance = 1e-6;
    const auto starts = randomStarts(d0, sim);
    std::vector<double> finalY(starts.size());
    parallelFor(starts.size(), [&](std::size_t i) {
        IntegratorConfig cfg;
        cfg.tEnd = summary.horizon;
        cfg.maxStep = 5.0;
        cfg.convergeTol = 1e-14;
        finalY[i] = integrate(p, starts[i], cfg).back().y();
    });
    for (double y : finalY) {
        summary.worst = std::max(summary.worst, y);
        summary.agreeing += y < summary.tolerance ? 1 : 0;
    }
    rep.simulation = summary;
    if (!summary.allAgree()) {
        rep.passed = false;
    }
    return rep;
}

std::optional<Parameters> findExtinctionCaseTwo(std::uint64_t seed, int samples)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < samples; ++i) {
        Parameters p;
        p.k1 = 1.0 + 9.0 * unit(rng);
        p.k0 = p.k1 * (0.5 + 0.5 * unit(rng));
        p.r1 = 0.05 + 2.0 * unit(rng);
        p.A = 0.01 + 2.0 * unit(rng);
        p.b = 0.05 + 3.0 * unit(rng);
        p.s = 0.05 + 1.5 * unit(rng);
        p.h = (0.99 * unit(rng)) / p.s;
        p.lambda = p.A * p.b + 0.01 + 3.0 * unit(rng);
        if (!(p.k0 < p.k1) || !(1.0 - p.s * p.h > 0.0)) {
            continue;
        }
        const double g2k1 = g2OrNan(p, p.k1);
        const double g2k0 = g2OrNan(p, p.k0);
        if (g2k1 > 0.0 && g2k0 < 0.0) {
            return p;
        }
    }
    return std::nullopt;
}

} // namespace allee
