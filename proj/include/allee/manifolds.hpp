#pragma once

#include <optional>
#include <vector>

#include "allee/bifurcation.hpp"
#include "allee/certificates.hpp"
#include "allee/equilibria.hpp"
#include "allee/integrator.hpp"

namespace allee {

struct SaddleDirections {
    State stable = State::Zero();   ///< unit, pointing into y >= 0 (x > 0 if y = 0)
    State unstable = State::Zero();
    double stableEigenvalue = 0.0;
    double unstableEigenvalue = 0.0;
};

/// Eigendirections of a hyperbolic saddle. NotSaddle when det J >= 0.
SaddleDirections saddleEigendirections(const Parameters& p, const State& eq);

/// Closed-form slope of the stable manifold at E2, given its negative eigenvalue.
double stableSlopeAtE2(const Parameters& p, double negativeEigenvalue);
/// Slope of the prey nullcline at E2.
double preyNullclineSlopeAtE2(const Parameters& p);

enum class ManifoldSense { Stable, Unstable };

struct ManifoldSpec {
    EquilibriumKind origin = EquilibriumKind::E2;
    ManifoldSense sense = ManifoldSense::Stable;
    int side = +1;               ///< +1 follows the eigendirection, -1 the opposite way
    double epsilonScale = 1e-6;  ///< launch offset in units of k1
    double delta = 0.0;          ///< box (0, k1 + delta]^2; 0 picks delta = k1
    bool stopAtSection = true;   ///< stop on f^(2) = 0
    bool requireCrossing = true; ///< NoCrossing when the section is not reached
};

struct ManifoldBranch {
    Equilibrium origin;
    State eigendirection = State::Zero();
    int side = +1;
    ManifoldSense sense = ManifoldSense::Stable;
    Trajectory path;
    std::optional<State> crossing; ///< point on f^(2) = 0
    std::optional<EventKind> exitReason;
};

/// Integrates one branch (backward for stable, forward for unstable) until it meets the
/// predator nullcline f^(2) = 0, leaves the box, or its length exceeds 100 k1.
ManifoldBranch growManifold(const Parameters& p, const ManifoldSpec& spec);

/// The two branches whose crossings define the gap: stable manifold of E2 and unstable
/// manifold of E1, both on the y > 0 side.
ManifoldSpec stableManifoldE2(double epsilonScale = 1e-6);
ManifoldSpec unstableManifoldE1(double epsilonScale = 1e-6);

struct GapSample {
    double lambda = 0.0;
    State cross1 = State::Zero(); ///< stable manifold of E2 on f^(2) = 0
    State cross2 = State::Zero(); ///< unstable manifold of E1 on f^(2) = 0
    double y1() const { return cross1.y(); }
    double y2() const { return cross2.y(); }
    double gap() const { return y1() - y2(); }
};

GapSample gapSample(const Parameters& p, double lambda);

/// Lambda interval on which E1 and E2 are both saddles: (sb/(k1(1-sh)), sb/(k0(1-sh))).
Interval admissibleLambda(const Parameters& p);

/// Heteroclinic lambda by bisection on the sign of the gap down to width 1e-6.
/// BracketError on equal signs; NoCrossing propagates.
BifurcationPoint heteroclinicFind(const Parameters& p, Interval bracket, double width = 1e-6);

} // namespace allee
