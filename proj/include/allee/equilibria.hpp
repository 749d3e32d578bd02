#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include "allee/model.hpp"

namespace allee {

enum class EquilibriumKind { E0, E1, E2, Interior };

enum class StabilityClass { StableNode, StableFocus, Saddle, UnstableNode, UnstableFocus, NonHyperbolic };

std::string_view kindName(EquilibriumKind k);
std::string_view className(StabilityClass c);

struct Equilibrium {
    State state = State::Zero();
    EquilibriumKind kind = EquilibriumKind::Interior;
    int index = 0;        ///< interior equilibria: 0-based, by ascending x
    int multiplicity = 1; ///< 2 for a double root of G
    bool degenerate = false;
    std::array<std::complex<double>, 2> eigenvalues{};
    StabilityClass cls = StabilityClass::NonHyperbolic;

    /// "E0", "E1", "E2" or "E*1", "E*2", ...
    std::string label() const;
};

/// Hyperbolicity threshold on |Re mu|, relative to the Jacobian norm.
inline constexpr double kHyperbolicTol = 1e-9;

/// Class from a Jacobian's eigenvalues. |Re| or |det| below tolerance => NonHyperbolic.
StabilityClass classifyJacobian(const Jacobian2& J);

/// E0 and E1 always; E2 iff k0 > 0. At k0 = 0 the E0 entry is flagged degenerate.
std::vector<Equilibrium> boundaryEquilibria(const Parameters& p);

/// Closed-form classification of E0/E1/E2. DomainError for E2 unless k0 > 0.
Equilibrium classifyBoundary(const Parameters& p, EquilibriumKind which);

struct InteriorRoot {
    double x;
    int multiplicity;
};

/// Roots of G in (max(0,k0), k1): 2048-cell sign scan, bisection, Newton polish,
/// plus critical-point probing for double or closely spaced roots.
std::vector<InteriorRoot> gRootsInRange(const Parameters& p, int cells = 2048);

/// Interior equilibria sorted by x, each classified.
std::vector<Equilibrium> interiorEquilibria(const Parameters& p);

std::size_t interiorCount(const Parameters& p);

/// Determinant and trace of J(E*) rebuilt from the nullcline slopes
/// dy_i/dx = -f^(i)_x / f^(i)_y, next to the direct values.
struct NullclineCrossCheck {
    double slopePrey = 0.0;     ///< dy1/dx
    double slopePredator = 0.0; ///< dy2/dx
    double detFromSlopes = 0.0;
    double traceFromSlopes = 0.0;
    double detDirect = 0.0;
    double traceDirect = 0.0;
    bool agrees = false; ///< both within 1e-8 relative
};

NullclineCrossCheck nullclineCrossCheck(const Parameters& p, const State& st);

/// Fills eigenvalues and class of an interior equilibrium. Throws std::logic_error
/// if the slope-based det/trace disagree with the direct Jacobian.
Equilibrium classifyInterior(const Parameters& p, Equilibrium eq);

/// All equilibria, boundary first then interior by ascending x.
std::vector<Equilibrium> allEquilibria(const Parameters& p);

/// Hypothesis of the at-most-two-interior-equilibria bound:
/// sh < 1 and one of k0 > k1/2; k0 < 0, lambda < Ab; k0 < 0, lambda > Ab with the r1/s bound.
bool twoEquilibriaHypothesis(const Parameters& p);

} // namespace allee
