#pragma once

// Closed-form evaluation of the predator-prey field with a prey Allee
// effect and saturating hunting cooperation:
//
//   dx/dt = r1 x (1 - x/k1)(x - k0) - (lambda + A y) x y / (b + y + h x (lambda + A y))
//   dy/dt = (lambda + A y) x y / (b + y + h x (lambda + A y)) - s y
//
// Everything here is header-only and templated on the scalar type.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <string_view>

#include "allee/errors.hpp"

namespace allee {

enum class Regime { Weak, Degenerate, Strong };

enum class ParamId { R1, K1, K0, Lambda, A, B, H, S };

inline constexpr std::array<ParamId, 8> kAllParams = {ParamId::R1, ParamId::K1, ParamId::K0, ParamId::Lambda,
                                                      ParamId::A,  ParamId::B,  ParamId::H,  ParamId::S};

inline std::string_view paramName(ParamId id)
{
    switch (id) {
    case ParamId::R1: return "r1";
    case ParamId::K1: return "k1";
    case ParamId::K0: return "k0";
    case ParamId::Lambda: return "lambda";
    case ParamId::A: return "A";
    case ParamId::B: return "b";
    case ParamId::H: return "h";
    case ParamId::S: return "s";
    }
    return "?";
}

inline std::optional<ParamId> paramFromName(std::string_view name)
{
    for (auto id : kAllParams) {
        if (paramName(id) == name) {
            return id;
        }
    }
    return std::nullopt;
}

inline std::string_view regimeName(Regime r)
{
    switch (r) {
    case Regime::Weak: return "weak";
    case Regime::Degenerate: return "degenerate";
    case Regime::Strong: return "strong";
    }
    return "?";
}

template <typename Scalar>
struct ParametersT {
    Scalar r1{};     ///< intrinsic prey growth rate
    Scalar k1{};     ///< carrying capacity
    Scalar k0{};     ///< Allee threshold, any sign, k0 < k1
    Scalar lambda{}; ///< baseline attack coefficient
    Scalar A{};      ///< cooperation gain
    Scalar b{};      ///< half-saturation constant
    Scalar h{};      ///< handling time
    Scalar s{};      ///< predator death rate

    Regime regime() const
    {
        if (k0 > Scalar(0)) {
            return Regime::Strong;
        }
        if (k0 < Scalar(0)) {
            return Regime::Weak;
        }
        return Regime::Degenerate;
    }

    Scalar& operator[](ParamId id)
    {
        switch (id) {
        case ParamId::R1: return r1;
        case ParamId::K1: return k1;
        case ParamId::K0: return k0;
        case ParamId::Lambda: return lambda;
        case ParamId::A: return A;
        case ParamId::B: return b;
        case ParamId::H: return h;
        case ParamId::S: return s;
        }
        return s;
    }

    Scalar operator[](ParamId id) const { return const_cast<ParametersT&>(*this)[id]; }

    ParametersT with(ParamId id, Scalar value) const
    {
        ParametersT out = *this;
        out[id] = value;
        return out;
    }

    /// Throws DomainError unless k1 > max(k0, 0) and r1, k1, lambda, A, b, h, s > 0.
    void validate() const
    {
        auto positive = [](Scalar v, const char* name) {
            if (!(v > Scalar(0))) {
                throw DomainError(std::string("parameter ") + name + " must be positive");
            }
        };
        positive(r1, "r1");
        positive(k1, "k1");
        positive(lambda, "lambda");
        positive(A, "A");
        positive(b, "b");
        positive(h, "h");
        positive(s, "s");
        if (!(k1 > k0)) {
            throw DomainError("parameter k1 must exceed k0");
        }
    }

    template <typename T>
    ParametersT<T> cast() const
    {
        return {T(r1), T(k1), T(k0), T(lambda), T(A), T(b), T(h), T(s)};
    }
};

using Parameters = ParametersT<double>;

/// Phase-plane point: x() is prey density, y() predator density.
template <typename Scalar>
using StateT = Eigen::Matrix<Scalar, 2, 1>;
using State = StateT<double>;

template <typename Scalar>
struct Jacobian2T {
    Eigen::Matrix<Scalar, 2, 2> m;

    Scalar a11() const { return m(0, 0); }
    Scalar a12() const { return m(0, 1); }
    Scalar a21() const { return m(1, 0); }
    Scalar a22() const { return m(1, 1); }
    Scalar trace() const { return m(0, 0) + m(1, 1); }
    Scalar determinant() const { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

    /// Roots of mu^2 - tr mu + det, ordered by ascending real part
    /// (conjugate pairs ordered by ascending imaginary part).
    std::array<std::complex<Scalar>, 2> eigenvalues() const
    {
        using std::abs;
        using std::sqrt;
        const Scalar half = trace() / Scalar(2);
        const Scalar det = determinant();
        const Scalar disc = half * half - det;
        if (disc >= Scalar(0)) {
            const Scalar root = sqrt(disc);
            const Scalar big = half >= Scalar(0) ? half + root : half - root;
            const Scalar small = big != Scalar(0) ? det / big : Scalar(0);
            const Scalar lo = big < small ? big : small;
            const Scalar hi = big < small ? small : big;
            return {std::complex<Scalar>(lo, 0), std::complex<Scalar>(hi, 0)};
        }
        const Scalar im = sqrt(-disc);
        return {std::complex<Scalar>(half, -im), std::complex<Scalar>(half, im)};
    }
};
using Jacobian2 = Jacobian2T<double>;

/// Second partial derivatives of (f1, f2) = (x f^(1), y f^(2)).
template <typename Scalar>
struct SecondDerivsT {
    Scalar f1xx{}, f2xx{}, f1yy{}, f2yy{}, f1xy{}, f2xy{};
};
using SecondDerivs = SecondDerivsT<double>;

/// First partials of the per-capita rates f^(1), f^(2).
template <typename Scalar>
struct PerCapitaPartialsT {
    Scalar f1x{}, f1y{}, f2x{}, f2y{};
};
using PerCapitaPartials = PerCapitaPartialsT<double>;

namespace detail {

/// Shared subexpressions: u = lambda + A y, D = b + y + h x u, q = y u.
template <typename Scalar>
struct Terms {
    Scalar u, D, q, dq, Dy;

    Terms(const ParametersT<Scalar>& p, Scalar x, Scalar y)
        : u(p.lambda + p.A * y),
          D(p.b + y + p.h * x * (p.lambda + p.A * y)),
          q(y * (p.lambda + p.A * y)),
          dq(p.lambda + Scalar(2) * p.A * y),
          Dy(Scalar(1) + p.h * p.A * x)
    {
    }
};

} // namespace detail

/// Per-capita prey growth f(x) = r1 (1 - x/k1)(x - k0).
template <typename Scalar>
Scalar preyPerCapitaGrowth(const ParametersT<Scalar>& p, Scalar x)
{
    return p.r1 * (Scalar(1) - x / p.k1) * (x - p.k0);
}

template <typename Scalar>
Scalar preyGrowth(const ParametersT<Scalar>& p, Scalar x)
{
    return x * preyPerCapitaGrowth(p, x);
}

/// Per-predator consumption rate (lambda + A y) x / (b + y + h x (lambda + A y)).
template <typename Scalar>
Scalar functionalResponse(const ParametersT<Scalar>& p, Scalar x, Scalar y)
{
    const detail::Terms<Scalar> t(p, x, y);
    return t.u * x / t.D;
}

template <typename Scalar>
StateT<Scalar> vectorField(const ParametersT<Scalar>& p, const StateT<Scalar>& st)
{
    const Scalar x = st.x();
    const Scalar y = st.y();
    const Scalar predation = functionalResponse(p, x, y) * y;
    return {preyGrowth(p, x) - predation, predation - p.s * y};
}

/// f^(1) without domain checks; defined for all x, y >= 0.
template <typename Scalar>
Scalar preyPerCapitaRate(const ParametersT<Scalar>& p, Scalar x, Scalar y)
{
    const detail::Terms<Scalar> t(p, x, y);
    return preyPerCapitaGrowth(p, x) - t.q / t.D;
}

/// f^(2) without domain checks; its zero set is the section used for manifolds.
template <typename Scalar>
Scalar predatorPerCapitaRate(const ParametersT<Scalar>& p, Scalar x, Scalar y)
{
    return functionalResponse(p, x, y) - p.s;
}

/// (f^(1), f^(2)); per-capita rates are undefined at zero population.
template <typename Scalar>
StateT<Scalar> perCapita(const ParametersT<Scalar>& p, const StateT<Scalar>& st)
{
    if (!(st.x() > Scalar(0)) || !(st.y() > Scalar(0))) {
        throw DomainError("per-capita rates need x > 0 and y > 0");
    }
    return {preyPerCapitaRate(p, st.x(), st.y()), predatorPerCapitaRate(p, st.x(), st.y())};
}

template <typename Scalar>
PerCapitaPartialsT<Scalar> perCapitaPartials(const ParametersT<Scalar>& p, Scalar x, Scalar y)
{
    const detail::Terms<Scalar> t(p, x, y);
    const Scalar D2 = t.D * t.D;
    PerCapitaPartialsT<Scalar> d;
    d.f1x = p.r1 * (Scalar(1) + p.k0 / p.k1 - Scalar(2) * x / p.k1) + t.u * t.u * p.h * y / D2;
    d.f1y = -(t.dq * t.D - t.q * t.Dy) / D2;
    d.f2x = t.u * (p.b + y) / D2;
    d.f2y = x * (p.A * p.b - p.lambda) / D2;
    return d;
}

template <typename Scalar>
Jacobian2T<Scalar> jacobian(const ParametersT<Scalar>& p, const StateT<Scalar>& st)
{
    const Scalar x = st.x();
    const Scalar y = st.y();
    const detail::Terms<Scalar> t(p, x, y);
    const Scalar D2 = t.D * t.D;
    // H = x q / D is the predation flux.
    const Scalar Hx = t.q * (p.b + y) / D2;
    const Scalar Hy = x * (t.dq * t.D - t.q * t.Dy) / D2;
    const Scalar growthDx =
        preyPerCapitaGrowth(p, x) + p.r1 * x * (Scalar(1) + p.k0 / p.k1 - Scalar(2) * x / p.k1);
    Jacobian2T<Scalar> J;
    J.m << growthDx - Hx, -Hy, Hx, Hy - p.s;
    return J;
}

template <typename Scalar>
SecondDerivsT<Scalar> secondDerivs(const ParametersT<Scalar>& p, const StateT<Scalar>& st)
{
    const Scalar x = st.x();
    const Scalar y = st.y();
    const detail::Terms<Scalar> t(p, x, y);
    const Scalar D3 = t.D * t.D * t.D;
    const Scalar by = p.b + y;
    const Scalar Hxx = -Scalar(2) * t.q * by * p.h * t.u / D3;
    const Scalar Hxy = ((t.dq * by + t.q) * t.D - Scalar(2) * t.q * by * t.Dy) / D3;
    const Scalar Hyy =
        x * (Scalar(2) * p.A * t.D * t.D - Scalar(2) * t.Dy * t.dq * t.D + Scalar(2) * t.q * t.Dy * t.Dy) / D3;
    const Scalar growthDxx = p.r1 * (Scalar(2) + Scalar(2) * p.k0 / p.k1 - Scalar(6) * x / p.k1);
    SecondDerivsT<Scalar> d;
    d.f1xx = growthDxx - Hxx;
    d.f2xx = Hxx;
    d.f1yy = -Hyy;
    d.f2yy = Hyy;
    d.f1xy = -Hxy;
    d.f2xy = Hxy;
    return d;
}

/// Predator-nullcline parameterization g1(x) = (r1/s) x (1 - x/k1)(x - k0).
template <typename Scalar>
Scalar nullclineG1(const ParametersT<Scalar>& p, Scalar x)
{
    return preyGrowth(p, x) / p.s;
}

template <typename Scalar>
Scalar g2Denominator(const ParametersT<Scalar>& p, Scalar x)
{
    return p.s + p.A * (p.s * p.h - Scalar(1)) * x;
}

/// g2(x) = ((lambda - s h lambda) x - s b) / (s + A (s h - 1) x); solves f^(2)(x, y) = 0 for y.
template <typename Scalar>
Scalar nullclineG2(const ParametersT<Scalar>& p, Scalar x)
{
    using std::abs;
    const Scalar den = g2Denominator(p, x);
    const Scalar scale = p.s + abs(p.A * (p.s * p.h - Scalar(1)) * x);
    if (abs(den) <= Scalar(1e-14) * scale) {
        throw PoleError("g2 evaluated at its pole");
    }
    return ((p.lambda - p.s * p.h * p.lambda) * x - p.s * p.b) / den;
}

/// Non-negative y with f^(1)(x, y) = 0, from
///   A y^2 + (lambda - f(x)(1 + h A x)) y - f(x)(b + h lambda x) = 0.
template <typename Scalar>
std::optional<Scalar> solvePreyNullcline(const ParametersT<Scalar>& p, Scalar x)
{
    using std::sqrt;
    const Scalar f = preyPerCapitaGrowth(p, x);
    const Scalar qa = p.A;
    const Scalar qb = p.lambda - f * (Scalar(1) + p.h * p.A * x);
    const Scalar qc = -f * (p.b + p.h * p.lambda * x);
    if (qc == Scalar(0)) {
        return qb >= Scalar(0) ? std::optional<Scalar>(Scalar(0)) : std::optional<Scalar>(-qb / qa);
    }
    const Scalar disc = qb * qb - Scalar(4) * qa * qc;
    if (disc < Scalar(0)) {
        return std::nullopt;
    }
    const Scalar root = sqrt(disc);
    // Larger root, in the cancellation-free form for each sign of qb.
    const Scalar y = qb > Scalar(0) ? Scalar(-2) * qc / (qb + root) : (-qb + root) / (Scalar(2) * qa);
    if (y < Scalar(0)) {
        return std::nullopt;
    }
    return y;
}

/// Coefficients c0..c4 (ascending powers) of G(x) = (g1(x) - g2(x)) (s + A(sh - 1)x).
template <typename Scalar>
std::array<Scalar, 5> gCoeffs(const ParametersT<Scalar>& p)
{
    const Scalar a = p.A * (Scalar(1) - p.s * p.h);
    const Scalar c = p.r1 / p.s;
    return {
        p.s * p.b,
        -c * p.s * p.k0 - p.lambda * (Scalar(1) - p.s * p.h),
        c * (p.s + p.s * p.k0 / p.k1 + a * p.k0),
        -c * (a + p.s / p.k1 + a * p.k0 / p.k1),
        c * a / p.k1,
    };
}

template <typename Scalar>
Scalar hornerEval(const std::array<Scalar, 5>& c, Scalar x)
{
    return (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0];
}

template <typename Scalar>
Scalar gPoly(const ParametersT<Scalar>& p, Scalar x)
{
    return hornerEval(gCoeffs(p), x);
}

template <typename Scalar>
Scalar gPolyDerivative(const ParametersT<Scalar>& p, Scalar x)
{
    const auto c = gCoeffs(p);
    return ((Scalar(4) * c[4] * x + Scalar(3) * c[3]) * x + Scalar(2) * c[2]) * x + c[1];
}

template <typename Scalar>
Scalar gPolySecondDerivative(const ParametersT<Scalar>& p, Scalar x)
{
    const auto c = gCoeffs(p);
    return (Scalar(12) * c[4] * x + Scalar(6) * c[3]) * x + Scalar(2) * c[2];
}

/// Magnitude sum |c_i| |x|^i, the reference for relative G residuals.
template <typename Scalar>
Scalar gPolyScale(const ParametersT<Scalar>& p, Scalar x)
{
    using std::abs;
    const auto c = gCoeffs(p);
    Scalar total{0};
    Scalar pw{1};
    for (const auto& ci : c) {
        total += abs(ci) * pw;
        pw *= abs(x);
    }
    return total;
}

} // namespace allee
