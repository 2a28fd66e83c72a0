#include <catch2/catch_amalgamated.hpp>

#include "opbell/opbell.hpp"
#include "test_util.hpp"

using namespace opbell;

TEST_CASE("chord coefficients") {
    // f = (1-t)^3 on [0.1, 0.5]: mu = -1.51, lambda = 0.88 by hand
    auto c = chord(ScalarFunction::power_one_minus(3), IntervalBounds(0.1, 0.5));
    CHECK(c.mu == Catch::Approx(-1.51).margin(1e-12));
    CHECK(c.lambda == Catch::Approx(0.88).margin(1e-12));
    CHECK(c.eval(0.1) == Catch::Approx(0.729).margin(1e-12));
    CHECK_THROWS_AS(chord(ScalarFunction::exponential(), IntervalBounds(0.3, 0.3)),
                    DegenerateChord);
}

TEST_CASE("power critical point formula") {
    IntervalBounds b(0.1, 0.5);
    auto info = power_critical_info(3.0, b);
    CHECK(info.t1 == Catch::Approx(1.13 / 3.02).margin(1e-12)); // -(lambda r + mu)/(mu (r-1))
    CHECK(info.t0 == Catch::Approx(0.88 / 1.51).margin(1e-12));
    CHECK(info.coeffs.mu < 0.0);
    CHECK(info.coeffs.lambda > 0.0);

    // r < -1: the slope flips sign, but the intercept only goes negative once
    // the window satisfies (M/m) <= ((1-m)/(1-M))^{-r}; the often-quoted
    // unconditional "lambda < 0 for r < -1" is false below that line
    auto neg = power_critical_info(-2.0, IntervalBounds(0.1, 0.5));
    CHECK(neg.coeffs.mu > 0.0);
    // (0.5/0.81 - 0.1*4)/0.4, hand value; positive because m + M < 1 here
    CHECK(neg.coeffs.lambda == Catch::Approx(0.5432098765432098).margin(1e-12));
    auto negwide = power_critical_info(-2.0, IntervalBounds(0.3, 0.8));
    CHECK(negwide.coeffs.mu > 0.0);
    CHECK(negwide.coeffs.lambda < 0.0); // m + M >= 1 restores the textbook sign

    // symmetric window for r=2 gives a flat chord
    CHECK_THROWS_AS(power_critical_info(2.0, IntervalBounds(0.4, 1.6)), DegenerateChord);
}

TEST_CASE("exp critical point formula agrees with an independent maximizer") {
    IntervalBounds b(0.1, 0.9);
    auto info = exp_critical_info(b);
    CHECK(info.t1 == Catch::Approx(0.447227).margin(1e-5)); // hand value

    auto c = info.coeffs;
    double oracle = testutil::golden_argmax(
        [&](double t) { return c.eval(t) / std::exp(t); }, b.m, b.M);
    CHECK(std::abs(info.t1 - oracle) <= 1e-6);
}

TEST_CASE("kantorovich constant for concave sqrt") {
    // K(1/4, 1, sqrt) = 2*sqrt(2)/3 at t = 1/2, derived by hand from the
    // stationary point of (t/ (3/4) ... ) -- the minimum chord/function ratio
    auto res = kantorovich(ScalarFunction::power(0.5), IntervalBounds(0.25, 1.0));
    CHECK(res.method == ConstMethod::GridOracle);
    CHECK(res.value == Catch::Approx(2.0 * std::sqrt(2.0) / 3.0).margin(1e-9));
    CHECK(res.argmax_t == Catch::Approx(0.5).margin(1e-5));
    CHECK(res.value <= 1.0);
    CHECK(res.value > 0.0);
}

TEST_CASE("kantorovich closed form matches the grid and the golden section") {
    for (auto [r, m, M] : {std::tuple{3.0, 0.1, 0.5}, {4.0, 0.2, 0.8}, {-2.0, 0.1, 0.6},
                           {2.5, 0.05, 0.4}, {-3.0, 0.15, 0.5}}) {
        ScalarFunction f = ScalarFunction::power_one_minus(r);
        IntervalBounds b(m, M);
        auto closed = kantorovich(f, b, ConstMethod::ClosedForm);
        auto grid = kantorovich(f, b, ConstMethod::GridOracle);
        CHECK(closed.value >= 1.0);
        CHECK(std::abs(closed.value - grid.value) <= 1e-8 * closed.value);
        CHECK(std::abs(closed.argmax_t - grid.argmax_t) <= 1e-4);

        auto c = chord(f, b);
        double t_star = testutil::golden_argmax(
            [&](double t) { return c.eval(t) / f.eval(t); }, m, M);
        double k_star = std::max({c.eval(t_star) / f.eval(t_star), c.eval(m) / f.eval(m),
                                  c.eval(M) / f.eval(M)});
        CHECK(closed.value == Catch::Approx(k_star).margin(1e-9));
    }
}

TEST_CASE("kantorovich for exp agrees with the golden section") {
    IntervalBounds b(0.1, 0.9);
    auto res = kantorovich(ScalarFunction::exponential(), b, ConstMethod::ClosedForm);
    auto c = chord(ScalarFunction::exponential(), b);
    double t_star =
        testutil::golden_argmax([&](double t) { return c.eval(t) / std::exp(t); }, b.m, b.M);
    CHECK(res.value == Catch::Approx(c.eval(t_star) / std::exp(t_star)).margin(1e-10));
    CHECK(res.value >= 1.0);
}

TEST_CASE("affine and degenerate windows are exact") {
    auto aff = kantorovich(ScalarFunction::affine(2.0, 1.0), IntervalBounds(0.1, 0.9));
    CHECK(aff.value == 1.0);
    CHECK(aff.method == ConstMethod::ClosedForm);
    CHECK(aff.argmax_t == 0.1);

    auto pt = kantorovich(ScalarFunction::power(0.5), IntervalBounds(0.3, 0.3));
    CHECK(pt.value == 1.0);
    CHECK(pt.argmax_t == 0.3);

    CHECK(beta(ScalarFunction::affine(-1.0, 2.0), IntervalBounds(0.1, 0.9)).value == 0.0);
    CHECK(beta_tilde(ScalarFunction::power(2), IntervalBounds(0.2, 0.2)).value == 0.0);
}

TEST_CASE("kantorovich rejects sign changes and non-catalog closed forms") {
    CHECK_THROWS_AS(
        kantorovich(ScalarFunction::power_one_minus(3), IntervalBounds(0.5, 1.5)),
        SignChange);
    CHECK_THROWS_AS(
        kantorovich(ScalarFunction::affine(1.0, -0.5), IntervalBounds(0.1, 0.9)),
        SignChange);
    CHECK_THROWS_AS(
        kantorovich(ScalarFunction::power(0.5), IntervalBounds(0.25, 1.0),
                    ConstMethod::ClosedForm),
        InvalidArgument);
}

TEST_CASE("negative functions flip through the sign rule") {
    // (1-t)^3 on [1.2, 1.5] is negative and concave; K comes from the
    // flipped (positive convex) ratio, so it sits at or above 1
    auto res = kantorovich(ScalarFunction::power_one_minus(3), IntervalBounds(1.2, 1.5));
    CHECK(res.value >= 1.0);
    auto f = ScalarFunction::power_one_minus(3);
    auto c = chord(f, IntervalBounds(1.2, 1.5));
    double t_star = testutil::golden_argmax(
        [&](double t) { return c.eval(t) / f.eval(t); }, 1.2, 1.5);
    double k_star = std::max({c.eval(t_star) / f.eval(t_star), c.eval(1.2) / f.eval(1.2),
                              c.eval(1.5) / f.eval(1.5)});
    CHECK(res.value == Catch::Approx(k_star).margin(1e-9));
}

TEST_CASE("defect constants for sqrt on [1/4, 1]") {
    // chord: mu = 2/3, lambda = 1/3; max of sqrt(t) - chord at t = 9/16 is 1/24
    auto bt = beta_tilde(ScalarFunction::power(0.5), IntervalBounds(0.25, 1.0));
    CHECK(bt.value == Catch::Approx(1.0 / 24.0).margin(1e-9));
    CHECK(bt.argmax_t == Catch::Approx(0.5625).margin(1e-4));

    auto be = beta(ScalarFunction::power(0.5), IntervalBounds(0.25, 1.0));
    CHECK(be.value == -bt.value); // exact by construction
    CHECK(be.argmax_t == bt.argmax_t);
}

TEST_CASE("defect constant for exp on [0, 1]") {
    // interior argmax at ln(e-1); value 1 + (e-1)(ln(e-1) - 1)
    auto bt = beta_tilde(ScalarFunction::exponential(), IntervalBounds(0.0, 1.0));
    double e1 = std::exp(1.0) - 1.0;
    CHECK(bt.value == Catch::Approx(1.0 + e1 * (std::log(e1) - 1.0)).margin(1e-9));
    CHECK(bt.argmax_t == Catch::Approx(std::log(e1)).margin(1e-4));
}

TEST_CASE("beta_tilde equals minus beta bitwise across the catalog") {
    Rng rng(21);
    std::vector<ScalarFunction> fs = {
        ScalarFunction::power(0.5), ScalarFunction::power(2), ScalarFunction::exponential(),
        ScalarFunction::power_one_minus(3), ScalarFunction::affine(1.5, 0.2),
        ScalarFunction::tabulated({0.0, 0.4, 1.0}, {0.1, 0.8, 0.3})};
    for (const auto& f : fs)
        for (int i = 0; i < 10; ++i) {
            double m = rng.uniform(0.05, 0.45);
            double M = m + rng.uniform(0.05, 0.5);
            auto bt = beta_tilde(f, IntervalBounds(m, M));
            auto be = beta(f, IntervalBounds(m, M));
            CHECK(be.value == -bt.value);
            CHECK(be.argmax_t == bt.argmax_t);
            CHECK(bt.value >= 0.0);
        }
}

TEST_CASE("kantorovich grows with the window for the power family") {
    // recorded observation used by the sweep: widening [m, M] cannot shrink K
    double prev = 1.0;
    for (double M : {0.2, 0.3, 0.4, 0.5, 0.6}) {
        auto res = kantorovich(ScalarFunction::power_one_minus(3), IntervalBounds(0.1, M),
                               ConstMethod::ClosedForm);
        CHECK(res.value >= prev - 1e-12);
        prev = res.value;
    }
}
