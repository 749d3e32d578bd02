#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allee/certificates.hpp"
#include "allee/equilibria.hpp"
#include "allee/integrator.hpp"
#include "allee/model.hpp"

namespace allee {

enum class BifurcationKind { Transcritical, SaddleNode, Hopf, TranscriticalOnCycle, Heteroclinic };
std::string_view bifurcationKindName(BifurcationKind k);

struct Diagnostic {
    std::string name;
    double value = 0.0;
};

struct BifurcationPoint {
    BifurcationKind kind = BifurcationKind::Transcritical;
    ParamId param = ParamId::Lambda;
    double criticalValue = 0.0;
    State location = State::Zero();
    std::vector<Diagnostic> diagnostics; ///< in insertion order
    std::vector<std::string> notes;

    void add(std::string name, double value) { diagnostics.push_back({std::move(name), value}); }
    /// Value of a named diagnostic; std::out_of_range if absent.
    double diag(std::string_view name) const;
    bool has(std::string_view name) const;
};

/// Eigenvector-projected derivative tests at an equilibrium with a simple zero eigenvalue.
/// W is the unit left null vector (largest component positive), V the right null vector
/// scaled so W^T V = 1.
struct SotomayorValues {
    State V = State::Zero();
    State W = State::Zero();
    double zeroEigenvalue = 0.0;
    double otherEigenvalue = 0.0;
    double wFmu = 0.0;   ///< W^T f_mu
    double wDFmuV = 0.0; ///< W^T [D f_mu V]
    double wD2fVV = 0.0; ///< W^T [D^2 f (V, V)]

    bool transcritical() const;
    bool saddleNode() const;
};

inline constexpr double kSotomayorTol = 1e-8;

/// Throws GateError when J(eq) has no simple zero eigenvalue (|mu0| < 1e-8 |J| and the
/// other |Re| > 1e-6), NotSemisimple when the zero eigenvalue is defective.
SotomayorValues sotomayor(const Parameters& p, const State& eq, ParamId param);

/// Closed-form transcritical lambda at E1 or E2, with the Sotomayor triple and a
/// root-count cross-check. GateError when 1 - sh <= 0, k0 <= 0 for E2, or the
/// nondegeneracy expression vanishes within 1e-10.
BifurcationPoint transcriticalLambda(const Parameters& p, EquilibriumKind which);

/// Lambda at which the interior count changes near `guess`, by bisection on the count
/// over [guess - halfWidth, guess + halfWidth] down to width `tol`.
double countChangeLambda(const Parameters& p, double guess, double halfWidth = 1e-3, double tol = 1e-12);

/// Saddle-node of interior equilibria in lambda. BracketError unless the interior
/// counts at the bracket ends differ by exactly 2.
BifurcationPoint saddleNodeLambda(const Parameters& p, Interval bracket);

/// Interior equilibrium nearest to `nearX` at death rate s; BranchLost when none lies
/// within 0.1 k1.
Equilibrium trackInterior(const Parameters& p, double s, double nearX);

/// Hopf point in s on interior branch `branch` (0-based index at bracket.lo).
/// BracketError without a trace sign change, BranchLost if the branch disappears,
/// GateError if det <= 0 at the root.
BifurcationPoint hopfS(const Parameters& p, int branch, Interval bracket);

/// Cycles found at s* + offset on the side where the focus is unstable.
struct HopfProbe {
    double offset = 0.0; ///< signed s - s*
    std::optional<PeriodicOrbit> cycle;
};

struct HopfCriticality {
    std::string label; ///< "supercritical (empirical)" or "undetermined (empirical)"
    double unstableSide = 0.0; ///< sign of s - s* where Tr > 0
    std::vector<HopfProbe> probes;
    bool amplitudesShrink = false; ///< amplitude decreases monotonically as |offset| -> 0
};

HopfCriticality hopfCriticality(const Parameters& p, const BifurcationPoint& hopf,
                                const std::vector<double>& offsets = {1e-3, 5e-4, 1e-4});

/// Looks for a cycle around equilibrium `eq` with a line section through it.
std::optional<PeriodicOrbit> cycleAround(const Parameters& p, const State& eq);

struct K0OriginReport {
    BifurcationPoint point;
    double probeK0 = 0.0;
    std::vector<OmegaLimit> limits; ///< one per seed
    std::optional<PeriodicOrbit> cycle;
};

/// Sotomayor values at E0 for k0 = 0 (parameter k0), then omega-limit classification at
/// k0 = probeK0 from a fixed set of seeds.
K0OriginReport transcriticalK0Origin(const Parameters& p, double probeK0);

} // namespace allee
