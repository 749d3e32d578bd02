#pragma once

#include <random>

#include "allee/equilibria.hpp"
#include "allee/model.hpp"

namespace allee::test {

// Parameter sets behind the eight figures. Each returns the first panel's values;
// callers override the varied parameter with Parameters::with.
inline Parameters fig1Left() { return {0.45, 3.0, -1.0, 0.2, 0.8, 0.5, 0.7, 0.73}; }
inline Parameters fig1Right() { return {1.2, 5.0, 1.0, 1.2, 0.2, 0.5, 0.9, 0.6}; }
inline Parameters fig2() { return {1.5, 3.0, 1.0, 0.3, 0.8, 0.5, 0.7, 0.75}; }
inline Parameters fig3() { return {1.5, 3.0, 1.0, 0.2, 0.8, 0.5, 0.7, 0.8}; }
inline Parameters fig4() { return {1.5, 3.0, 1.0, 0.3, 0.8, 0.5, 0.7, 0.75}; }
inline Parameters fig5() { return {0.3, 4.0, 1.0, 0.1, 0.1, 3.5, 0.9, 0.1}; }
inline Parameters fig6() { return {0.6, 5.0, 0.5, 0.9776, 0.1, 1.5, 0.9, 0.44}; }
inline Parameters fig8() { return {1.5, 3.0, -0.3, 0.3, 0.8, 0.5, 0.7, 0.5}; }

inline Parameters extinctionFixture() { return {1.5, 3.5, 2.0, 0.7, 1.4, 1.0, 0.7, 0.8}; }
inline Parameters globalStabilityFixture() { return {1.0, 2.0, -2.0, 1.0, 0.1, 1.0, 0.3, 0.5}; }

/// Seeded generator for property tests.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    /// Valid parameter set spanning both Allee regimes.
    Parameters parameters()
    {
        Parameters p;
        p.r1 = uniform(0.2, 2.0);
        p.k1 = uniform(1.0, 6.0);
        p.k0 = uniform(-p.k1, 0.9 * p.k1);
        p.lambda = uniform(0.05, 2.0);
        p.A = uniform(0.01, 1.0);
        p.b = uniform(0.1, 3.0);
        p.h = uniform(0.1, 1.2);
        p.s = uniform(0.1, 1.0);
        return p;
    }

    State interiorState(const Parameters& p) { return {uniform(0.01, 1.5 * p.k1), uniform(0.01, 1.5 * p.k1)}; }

private:
    std::mt19937_64 rng_;
};

// Draws until the sample satisfies the at-most-two hypothesis; the branch is chosen first
// so all three sub-cases are represented.
inline Parameters hypothesisSample(Gen& gen)
{
    for (;;) {
        Parameters p = gen.parameters();
        p.h = gen.uniform(0.05, 0.95 / p.s);
        const double branch = gen.uniform(0.0, 3.0);
        if (branch < 1.0) {
            p.k0 = gen.uniform(0.5 * p.k1 + 1e-6, 0.95 * p.k1);
        } else if (branch < 2.0) {
            p.k0 = gen.uniform(-p.k1, -1e-3);
            p.lambda = gen.uniform(0.01, 0.99) * p.A * p.b;
        } else {
            p.k0 = gen.uniform(-0.999 * p.k1, -1e-3);
            p.r1 = gen.uniform(0.001, 0.2);
            p.lambda = p.A * p.b + gen.uniform(0.1, 3.0);
        }
        if (twoEquilibriaHypothesis(p)) {
            return p;
        }
    }
}

inline double relErr(double a, double b, double floor = 1e-12)
{
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

} // namespace allee::test
