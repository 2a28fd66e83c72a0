#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "opbell/errors.hpp"
#include "opbell/functions.hpp"

namespace opbell {

struct ChordCoefficients {
    double mu;
    double lambda;

    double eval(double t) const { return mu * t + lambda; }
};

enum class ConstMethod { ClosedForm, GridOracle };

inline const char* to_string(ConstMethod m) {
    return m == ConstMethod::ClosedForm ? "closed-form" : "grid-oracle";
}

struct ConstantResult {
    double value;
    double argmax_t;
    ConstMethod method;
    ScalarFunction f;
    IntervalBounds bounds;
};

// Chord of f through (m, f(m)) and (M, f(M)).
inline ChordCoefficients chord(const ScalarFunction& f, const IntervalBounds& b) {
    if (b.m == b.M) throw DegenerateChord("chord: degenerate interval m == M");
    double fm = f.eval(b.m), fM = f.eval(b.M);
    double span = b.M - b.m;
    return ChordCoefficients{(fM - fm) / span, (b.M * fm - b.m * fM) / span};
}

namespace detail {

// f must be nonzero and of one sign on [m, M]; the ratio chord/f is
// meaningless otherwise. Cataloged zeros are tested exactly, everything
// else by a coarse scan.
inline void require_sign_definite(const ScalarFunction& f, const IntervalBounds& b) {
    const double eps = 1e-12;
    switch (f.kind()) {
        case FuncKind::Exp:
            return;
        case FuncKind::PowerOneMinus:
            if (nearly_integer(f.param()) && f.param() >= 1.0 && b.m <= 1.0 + eps &&
                b.M >= 1.0 - eps)
                throw SignChange("kantorovich: f vanishes at t=1 inside [m, M]");
            break;
        case FuncKind::Power:
            if (nearly_integer(f.param()) && f.param() >= 1.0 && b.m <= eps && b.M >= -eps)
                throw SignChange("kantorovich: f vanishes at t=0 inside [m, M]");
            break;
        case FuncKind::Affine: {
            double a = f.param(), c = f.param2();
            if (a == 0.0 && c == 0.0)
                throw SignChange("kantorovich: f identically zero");
            if (a != 0.0) {
                double root = -c / a;
                if (root >= b.m - eps && root <= b.M + eps)
                    throw SignChange("kantorovich: affine f vanishes inside [m, M]");
            }
            break;
        }
        case FuncKind::Tabulated:
            break;
    }
    const int scan = 4097;
    double f0 = f.eval(b.m);
    if (f0 == 0.0) throw SignChange("kantorovich: f(m) = 0");
    bool positive = f0 > 0.0;
    for (int i = 1; i < scan; ++i) {
        double t = b.m + (b.M - b.m) * static_cast<double>(i) / (scan - 1);
        double y = f.eval(t);
        if (y == 0.0 || (y > 0.0) != positive)
            throw SignChange("kantorovich: f changes sign on [m, M] near t=" +
                             ScalarFunction::format_double(t));
    }
}

// Analytic shape where the catalog pins it; numeric probe for Tabulated.
inline Shape shape_of(const ScalarFunction& f, const IntervalBounds& b) {
    double p = f.param();
    switch (f.kind()) {
        case FuncKind::Affine:
            return Shape::Affine;
        case FuncKind::Exp:
            return Shape::Convex;
        case FuncKind::PowerOneMinus: {
            // f'' = p(p-1)(1-t)^{p-2}; the base only goes negative on the
            // integer-exponent branch, right of 1
            if (p == 0.0 || p == 1.0) return Shape::Affine;
            double base;
            if (b.M <= 1.0)
                base = 1.0;
            else if (b.m >= 1.0)
                base = nearly_integer(p) && (std::llround(p) % 2 != 0) ? -1.0 : 1.0;
            else
                return Shape::Neither;
            return p * (p - 1.0) * base > 0.0 ? Shape::Convex : Shape::Concave;
        }
        case FuncKind::Power: {
            // f'' = p(p-1) t^{p-2}, same story left of 0
            if (p == 0.0 || p == 1.0) return Shape::Affine;
            double base;
            if (b.m >= 0.0)
                base = 1.0;
            else if (b.M <= 0.0)
                base = nearly_integer(p) && (std::llround(p) % 2 != 0) ? -1.0 : 1.0;
            else
                return Shape::Neither;
            return p * (p - 1.0) * base > 0.0 ? Shape::Convex : Shape::Concave;
        }
        case FuncKind::Tabulated:
            return shape_on(f, b, 257);
    }
    return Shape::Neither;
}

} // namespace detail

struct CriticalPointInfo {
    double t1;       // clamped into [m, M]
    double t1_raw;
    double t0;       // chord zero, diagnostic only
    ChordCoefficients coeffs;
};

// Stationary point of the ratio (mu t + lambda)/(1-t)^r:
// t1 = -(lambda r + mu)/(mu (r-1)); t0 = -lambda/mu is the chord zero.
inline CriticalPointInfo power_critical_info(double r, const IntervalBounds& b) {
    ChordCoefficients c = chord(ScalarFunction::power_one_minus(r), b);
    if (std::abs(c.mu) < 1e-14)
        throw DegenerateChord("power_critical_point: chord slope vanishes (mu ~ 0)");
    if (std::abs(r - 1.0) < 1e-14)
        throw DegenerateChord("power_critical_point: formula degenerates at r = 1");
    double t1 = -(c.lambda * r + c.mu) / (c.mu * (r - 1.0));
    return CriticalPointInfo{std::clamp(t1, b.m, b.M), t1, -c.lambda / c.mu, c};
}

inline double power_critical_point(double r, const IntervalBounds& b) {
    return power_critical_info(r, b).t1;
}

// Stationary point of (mu t + lambda)/e^t: t1 = (mu - lambda)/mu.
inline CriticalPointInfo exp_critical_info(const IntervalBounds& b) {
    ChordCoefficients c = chord(ScalarFunction::exponential(), b);
    if (std::abs(c.mu) < 1e-14)
        throw DegenerateChord("exp_critical_point: chord slope vanishes (mu ~ 0)");
    double t1 = (c.mu - c.lambda) / c.mu;
    return CriticalPointInfo{std::clamp(t1, b.m, b.M), t1, -c.lambda / c.mu, c};
}

inline double exp_critical_point(const IntervalBounds& b) {
    return exp_critical_info(b).t1;
}

inline constexpr int kKantorovichGridPoints = 1000001;
inline constexpr int kDefectGridPoints = 100001;

// K(m,M,f): extremal value of chord(t)/f(t) over [m,M]. For convex positive
// f this is the maximum (>= 1, the reading the power theorem needs); for
// concave positive f the chord lies under f and the binding constant is the
// minimum (<= 1). A global sign flip of f leaves the ratio unchanged while
// flipping the shape, so sign-negative f is folded into the same rule.
inline ConstantResult kantorovich(const ScalarFunction& f, const IntervalBounds& b,
                                  std::optional<ConstMethod> force = std::nullopt) {
    if (b.m == b.M) {
        f.eval(b.m);
        return ConstantResult{1.0, b.m, ConstMethod::ClosedForm, f, b};
    }
    if (f.kind() == FuncKind::Affine) {
        detail::require_sign_definite(f, b);
        return ConstantResult{1.0, b.m, ConstMethod::ClosedForm, f, b};
    }
    detail::require_sign_definite(f, b);

    ChordCoefficients c = chord(f, b);
    Shape shape = detail::shape_of(f, b);
    bool negative = f.eval(b.m) < 0.0;
    bool want_max;
    switch (shape) {
        case Shape::Concave: want_max = false; break;
        case Shape::Convex: want_max = true; break;
        case Shape::Affine: want_max = true; break;   // ratio is constant 1
        default: want_max = true; break;              // literal reading
    }
    if (negative) want_max = !want_max;

    bool closed_ok =
        f.kind() == FuncKind::PowerOneMinus || f.kind() == FuncKind::Exp;
    ConstMethod method = force.value_or(closed_ok ? ConstMethod::ClosedForm
                                                  : ConstMethod::GridOracle);
    if (method == ConstMethod::ClosedForm && !closed_ok)
        throw InvalidArgument("kantorovich: no closed form for " + f.spec_string());

    auto ratio = [&](double t) { return c.eval(t) / f.eval(t); };
    double best_v, best_t;
    auto better = [&](double v) { return want_max ? v > best_v : v < best_v; };

    if (method == ConstMethod::ClosedForm) {
        double t1;
        try {
            t1 = f.kind() == FuncKind::Exp ? exp_critical_point(b)
                                           : power_critical_point(f.param(), b);
        } catch (const DegenerateChord&) {
            t1 = b.m; // endpoints alone decide (flat chord or r = 1)
        }
        best_t = b.m;
        best_v = ratio(b.m);
        for (double t : {b.M, t1}) {
            double v = ratio(t);
            if (better(v)) {
                best_v = v;
                best_t = t;
            }
        }
    } else {
        best_t = b.m;
        best_v = ratio(b.m);
        for (int i = 1; i < kKantorovichGridPoints; ++i) {
            double t = b.m + (b.M - b.m) * static_cast<double>(i) /
                                 (kKantorovichGridPoints - 1);
            double v = ratio(t);
            if (better(v)) {
                best_v = v;
                best_t = t;
            }
        }
    }
    return ConstantResult{best_v, best_t, method, f, b};
}

namespace detail {

// Shared scan for the additive defect constants: extremum of f - chord.
// For concave f the gap is one-signed, so the symmetric magnitude equals
// the literal extremal formulas; see README for the convex-side convention.
inline ConstantResult defect_scan(const ScalarFunction& f, const IntervalBounds& b,
                                  bool negate) {
    if (b.m == b.M) {
        f.eval(b.m);
        return ConstantResult{0.0, b.m, ConstMethod::ClosedForm, f, b};
    }
    if (f.kind() == FuncKind::Affine)
        return ConstantResult{0.0, b.m, ConstMethod::ClosedForm, f, b};
    ChordCoefficients c = chord(f, b);
    double best_v = 0.0, best_t = b.m;
    for (int i = 0; i < kDefectGridPoints; ++i) {
        double t = b.m + (b.M - b.m) * static_cast<double>(i) / (kDefectGridPoints - 1);
        double gap = std::abs(f.eval(t) - c.eval(t));
        if (gap > best_v) {
            best_v = gap;
            best_t = t;
        }
    }
    return ConstantResult{negate ? -best_v : best_v, best_t, ConstMethod::GridOracle, f, b};
}

} // namespace detail

// Additive defect constants. beta_tilde is the largest absolute gap between
// f and its chord on [m,M]; beta is its exact negation, so the two-sided
// defect bounds read beta <= . <= beta_tilde everywhere they are used.
inline ConstantResult beta_tilde(const ScalarFunction& f, const IntervalBounds& b) {
    return detail::defect_scan(f, b, false);
}

inline ConstantResult beta(const ScalarFunction& f, const IntervalBounds& b) {
    return detail::defect_scan(f, b, true);
}

} // namespace opbell
