#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allee/equilibria.hpp"
#include "allee/model.hpp"

namespace allee {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Open rectangle (x.lo, x.hi) x (y.lo, y.hi) sampled on an inset grid.
struct Region {
    Interval x;
    Interval y;
    int gridN = 400;    ///< samples per axis
    double inset = 0.0; ///< distance kept from every edge when sampling

    void validate() const;
    /// i-th sample abscissa / ordinate, i in [0, gridN).
    double xAt(int i) const;
    double yAt(int j) const;
};

/// Largest value of the prey-nullcline cubic on [max(0,k0), k1] and where it is attained.
struct CubicMax {
    double x = 0.0;
    double value = 0.0;
};

CubicMax maxPreyNullcline(const Parameters& p);

/// (0,k1) x (0, max{k1, max g1}), sampled 400 x 400 with inset 1e-6 k1.
Region buildD0(const Parameters& p, int gridN = 400);

enum class Verdict { AllNegative, AllPositive, Mixed };
std::string_view verdictName(Verdict v);

struct ChecklistEntry {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

struct SimulationSummary {
    int runs = 0;
    int agreeing = 0;       ///< runs ending where the certificate predicts
    double worst = 0.0;     ///< largest distance (or y) over all runs
    double horizon = 0.0;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    bool allAgree() const { return runs > 0 && agreeing == runs; }
};

struct TraceSample {
    double value = 0.0;
    State at = State::Zero();
};

struct CertificateReport {
    std::string kind;
    Verdict verdict = Verdict::Mixed;
    TraceSample minTrace;
    TraceSample maxTrace;
    std::vector<ChecklistEntry> checklist;
    std::optional<SimulationSummary> simulation;
    bool passed = false;
    std::vector<std::string> notes;

    /// The sample that decides the verdict: the maximum for AllNegative and Mixed,
    /// the minimum for AllPositive.
    const TraceSample& extremal() const { return verdict == Verdict::AllPositive ? minTrace : maxTrace; }
    const ChecklistEntry* find(std::string_view name) const;
};

inline constexpr double kTraceMargin = 1e-12;

/// Trace x f1_x + y f2_y at one point.
double traceAt(const Parameters& p, double x, double y);

/// Sign certificate for the trace on the region's grid. Sampling only: a clean verdict
/// is evidence on the grid, not a proof for the open set.
CertificateReport traceGridCertificate(const Parameters& p, const Region& region, unsigned threads = 0);

/// div(D F) with D = 1/(xy) via the product rule, next to trace/(xy).
struct DulacSample {
    double divergence = 0.0;
    double traceOverXY = 0.0;
    double reference = 0.0; ///< magnitude the error is measured against
    double relError() const;
};

DulacSample dulacAt(const Parameters& p, double x, double y);

/// Worst relative Dulac mismatch over the region's grid.
double dulacMaxRelError(const Parameters& p, const Region& region, unsigned threads = 0);

struct SimulationOptions {
    int runs = 50;
    std::uint64_t seed = 20240601;
    double horizon = 0.0; ///< 0 picks the check's default
};

/// Global-stability gate for a weak Allee effect with k0 = -k1. When every condition
/// passes, 50 random starts must converge to the unique interior equilibrium within 1e-5.
CertificateReport checkCorollaryGlobalStability(const Parameters& p, const SimulationOptions& sim = {});

/// Predator-extinction gate for a strong Allee effect with k0 > k1/2: the two sign cases
/// on g2(k0), g2(k1) plus a positive trace on D0. Whenever the sign conditions of a case
/// pass, 50 random starts are simulated to t = 1e4 and must reach y < 1e-6.
CertificateReport checkExtinction(const Parameters& p, const SimulationOptions& sim = {});

/// Random search for a parameter set meeting the sign conditions of the second extinction
/// case (lambda > Ab, g2(k1) > 0, g2(k0) < 0) with sh < 1 and k0 > k1/2.
std::optional<Parameters> findExtinctionCaseTwo(std::uint64_t seed, int samples);

} // namespace allee
