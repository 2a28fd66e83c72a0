#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "opbell/errors.hpp"

namespace opbell {

// Numerical slack granted at domain endpoints before eval refuses a point.
inline constexpr double kDomainMargin = 1e-12;

inline bool nearly_integer(double x) {
    return std::abs(x - std::round(x)) < 1e-12;
}

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = true;
    bool hi_closed = true;

    bool contains(double t, double margin = kDomainMargin) const {
        bool ok_lo = std::isinf(lo) || (lo_closed ? t >= lo - margin : t > lo + margin);
        bool ok_hi = std::isinf(hi) || (hi_closed ? t <= hi + margin : t < hi - margin);
        return ok_lo && ok_hi;
    }

    // Pull a value that drifted past a *closed* endpoint (by at most the
    // margin) back onto it; open endpoints are left alone.
    double clamp_closed(double t) const {
        if (!std::isinf(lo) && lo_closed && t < lo) t = lo;
        if (!std::isinf(hi) && hi_closed && t > hi) t = hi;
        return t;
    }

    std::string describe() const {
        std::ostringstream os;
        os << (lo_closed ? '[' : '(');
        if (std::isinf(lo)) os << "-inf"; else os << lo;
        os << ", ";
        if (std::isinf(hi)) os << "inf"; else os << hi;
        os << (hi_closed ? ']' : ')');
        return os.str();
    }
};

struct IntervalBounds {
    double m;
    double M;

    IntervalBounds(double m_, double M_) : m(m_), M(M_) {
        if (!(m <= M)) throw InvalidArgument("IntervalBounds: need m <= M");
        if (!std::isfinite(m) || !std::isfinite(M))
            throw InvalidArgument("IntervalBounds: bounds must be finite");
    }
};

enum class FuncKind { PowerOneMinus, Power, Exp, Affine, Tabulated };

enum class Shape { Concave, Convex, Affine, Neither };

inline const char* to_string(Shape s) {
    switch (s) {
        case Shape::Concave: return "concave";
        case Shape::Convex: return "convex";
        case Shape::Affine: return "affine";
        default: return "neither";
    }
}

// Closed catalog of scalar functions admitted into the functional calculus.
// Everything is value-semantic and immutable after construction.
class ScalarFunction {
public:
    static ScalarFunction power_one_minus(double r) {
        ScalarFunction f(FuncKind::PowerOneMinus);
        f.p1_ = r;
        if (nearly_integer(r) && r >= -0.5) {
            f.p1_ = std::round(r);
            f.domain_ = Interval{}; // integer exponent: entire line
        } else {
            f.domain_ = Interval{-std::numeric_limits<double>::infinity(), 1.0, true, false};
        }
        return f;
    }

    static ScalarFunction power(double p) {
        ScalarFunction f(FuncKind::Power);
        f.p1_ = p;
        if (nearly_integer(p) && p >= -0.5) {
            f.p1_ = std::round(p);
            f.domain_ = Interval{};
        } else if (p > 0.0 && p <= 1.0) {
            f.domain_ = Interval{0.0, std::numeric_limits<double>::infinity(), true, true};
        } else {
            f.domain_ = Interval{0.0, std::numeric_limits<double>::infinity(), false, true};
        }
        return f;
    }

    static ScalarFunction exponential() {
        ScalarFunction f(FuncKind::Exp);
        f.domain_ = Interval{};
        return f;
    }

    static ScalarFunction affine(double a, double b) {
        ScalarFunction f(FuncKind::Affine);
        f.p1_ = a;
        f.p2_ = b;
        f.domain_ = Interval{};
        return f;
    }

    static ScalarFunction tabulated(std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() != ys.size() || xs.size() < 2)
            throw InvalidArgument("tabulated: need >= 2 matching nodes");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw InvalidArgument("tabulated: nodes must be strictly increasing");
        ScalarFunction f(FuncKind::Tabulated);
        f.domain_ = Interval{xs.front(), xs.back(), true, true};
        f.xs_ = std::move(xs);
        f.ys_ = std::move(ys);
        return f;
    }

    FuncKind kind() const { return kind_; }
    const Interval& domain() const { return domain_; }
    double param() const { return p1_; }       // r, p, or a
    double param2() const { return p2_; }      // b for affine

    double eval(double t) const {
        if (!domain_.contains(t))
            throw DomainViolation("eval: t=" + format_double(t) + " outside domain " +
                                  domain_.describe() + " of " + spec_string());
        t = domain_.clamp_closed(t);
        switch (kind_) {
            case FuncKind::PowerOneMinus: return std::pow(1.0 - t, p1_);
            case FuncKind::Power: return std::pow(t, p1_);
            case FuncKind::Exp: return std::exp(t);
            case FuncKind::Affine: return p1_ * t + p2_;
            case FuncKind::Tabulated: return interp(t);
        }
        return 0.0; // unreachable
    }

    double operator()(double t) const { return eval(t); }

    std::string spec_string() const {
        std::ostringstream os;
        switch (kind_) {
            case FuncKind::PowerOneMinus: os << "power-one-minus:r=" << format_double(p1_); break;
            case FuncKind::Power: os << "power:p=" << format_double(p1_); break;
            case FuncKind::Exp: os << "exp"; break;
            case FuncKind::Affine:
                os << "affine:a=" << format_double(p1_) << ",b=" << format_double(p2_);
                break;
            case FuncKind::Tabulated: os << "tabulated:" << xs_.size() << " nodes"; break;
        }
        return os.str();
    }

    static std::string format_double(double x) {
        std::ostringstream os;
        os.precision(17);
        os << x;
        return os.str();
    }

private:
    explicit ScalarFunction(FuncKind k) : kind_(k) {}

    double interp(double t) const {
        auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
        std::size_t hi = static_cast<std::size_t>(it - xs_.begin());
        if (hi == 0) return ys_.front();
        if (hi == xs_.size()) return ys_.back();
        std::size_t lo = hi - 1;
        double w = (t - xs_[lo]) / (xs_[hi] - xs_[lo]);
        return ys_[lo] + w * (ys_[hi] - ys_[lo]);
    }

    FuncKind kind_;
    Interval domain_;
    double p1_ = 0.0;
    double p2_ = 0.0;
    std::vector<double> xs_, ys_;
};

// Spec strings: "power-one-minus:r=3", "power:p=0.5", "exp", "affine:a=1,b=0".
inline ScalarFunction parse_function_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

    auto get = [&](const std::string& key) -> double {
        std::string token = key + "=";
        auto pos = args.find(token);
        if (pos == std::string::npos)
            throw ParseError("function spec '" + spec + "': missing " + key + "=");
        auto end = args.find(',', pos);
        std::string num = args.substr(pos + token.size(),
                                      end == std::string::npos ? std::string::npos
                                                               : end - pos - token.size());
        try {
            std::size_t used = 0;
            double v = std::stod(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
            return v;
        } catch (const std::exception&) {
            throw ParseError("function spec '" + spec + "': bad number '" + num + "'");
        }
    };

    if (head == "power-one-minus") return ScalarFunction::power_one_minus(get("r"));
    if (head == "power") return ScalarFunction::power(get("p"));
    if (head == "exp") {
        if (!args.empty()) throw ParseError("function spec 'exp' takes no arguments");
        return ScalarFunction::exponential();
    }
    if (head == "affine") return ScalarFunction::affine(get("a"), get("b"));
    throw ParseError("unknown function spec '" + spec + "'");
}

// Shape classification on [b.m, b.M] from second differences of a uniform
// sample. Affine wins when all second differences vanish at scale.
inline Shape shape_on(const ScalarFunction& f, const IntervalBounds& b, int samples = 257) {
    if (samples < 3) throw InvalidArgument("shape_on: need >= 3 samples");
    std::vector<double> y(static_cast<std::size_t>(samples));
    double scale = 1.0;
    for (int i = 0; i < samples; ++i) {
        double t = b.m + (b.M - b.m) * static_cast<double>(i) / (samples - 1);
        y[static_cast<std::size_t>(i)] = f.eval(t);
        scale = std::max(scale, std::abs(y[static_cast<std::size_t>(i)]));
    }
    double tol = 1e-10 * scale;
    bool all_le = true, all_ge = true;
    for (int i = 1; i + 1 < samples; ++i) {
        double d2 = y[static_cast<std::size_t>(i + 1)] - 2.0 * y[static_cast<std::size_t>(i)] +
                    y[static_cast<std::size_t>(i - 1)];
        if (d2 > tol) all_le = false;
        if (d2 < -tol) all_ge = false;
    }
    if (all_le && all_ge) return Shape::Affine;
    if (all_le) return Shape::Concave;
    if (all_ge) return Shape::Convex;
    return Shape::Neither;
}

} // namespace opbell
