#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "allee/model.hpp"

namespace allee {

enum class Direction { Forward, Backward };

struct IntegratorConfig {
    double relTol = 1e-9;
    double absTol = 1e-12;
    double maxStep = 1.0;
    double tEnd = 100.0; ///< time span; backward runs go to -tEnd
    Direction direction = Direction::Forward;

    /// Stop when x or y leaves [0, boxMax] (inclusive).
    std::optional<double> boxMax;
    /// Stop when x or y drops below this threshold.
    std::optional<double> axisThreshold;
    /// Stop once |F| falls below this at an accepted step.
    std::optional<double> convergeTol;
    /// Stop once the path length exceeds this.
    std::optional<double> maxArcLength;
    /// Accepted-step budget; exceeding it raises StepFailure.
    std::size_t maxSteps = 2'000'000;

    void validate() const;
};

enum class CrossingDirection { Any, Rising, Falling };

/// A scalar section g(state) = 0. Crossings are located on the dense output.
struct Section {
    std::function<double(const State&)> fn;
    CrossingDirection crossing = CrossingDirection::Any;
    bool terminal = true;
};

enum class EventKind { SectionCrossing, BoxExit, AxisApproach, Converged, ArcLength };

struct Event {
    EventKind kind{};
    std::size_t sectionId = 0; ///< index into the section list (SectionCrossing)
    int axis = -1;             ///< 0 = x, 1 = y (AxisApproach, BoxExit)
    double t = 0.0;
    State state = State::Zero();
};

struct Sample {
    double t;
    State state;
};

struct Trajectory {
    std::vector<Sample> samples;
    std::optional<Event> terminalEvent;
    /// Non-terminal section crossings, in time order.
    std::vector<Event> crossings;

    const State& back() const { return samples.back().state; }
    double arcLength() const;
};

/// Dormand-Prince 5(4) with the standard fourth-order dense output.
/// Event times are refined by bisection on the interpolant to 1e-12 of the step.
Trajectory integrate(const Parameters& p, const State& init, const IntegratorConfig& cfg,
                     const std::vector<Section>& sections = {});

struct PeriodicOrbit {
    double period = 0.0;
    State sectionPoint = State::Zero();
    State min = State::Zero(); ///< componentwise bounds over one period
    State max = State::Zero();
    double residual = 0.0;       ///< |P(z) - z|
    double multiplier = 0.0;     ///< slope of the return map at the fixed point
    bool stable() const { return multiplier > -1.0 && multiplier < 1.0; }
    double amplitude() const { return max.x() - min.x(); }
};

/// Straight line through `origin` crossed in the direction of `normal`.
struct LineSection {
    State origin = State::Zero();
    State normal = State::UnitX();
};

/// Line section through `at`, normal to the flow there.
LineSection sectionAcrossFlow(const Parameters& p, const State& at);

struct CycleOptions {
    double horizon = 2000.0; ///< max time for one return
    double residualTol = 1e-7;
    int maxIterations = 60;
    double relTol = 1e-11;
    double absTol = 1e-13;
    double maxStep = 0.5;
};

/// Fixed point of the first-return map on `section`, via secant iteration on the
/// section coordinate. std::nullopt when no return happens within the horizon or
/// when the iteration collapses onto an equilibrium.
std::optional<PeriodicOrbit> detectLimitCycle(const Parameters& p, const State& seed, const LineSection& section,
                                              const CycleOptions& opts = {});

/// Integrates a transient from `seed`, then looks for a cycle on a section across the flow.
std::optional<PeriodicOrbit> findLimitCycle(const Parameters& p, const State& seed, double transient = 500.0,
                                            const CycleOptions& opts = {});

struct OmegaLimit {
    enum class Kind { Equilibrium, Cycle, Undecided } kind = Kind::Undecided;
    State point = State::Zero();         ///< final state (the equilibrium when Kind::Equilibrium)
    std::optional<PeriodicOrbit> cycle;
};

std::string_view omegaKindName(OmegaLimit::Kind k);

/// Classifies the forward limit set from `init` over `horizon`.
OmegaLimit classifyOmegaLimit(const Parameters& p, const State& init, double horizon);

} // namespace allee
