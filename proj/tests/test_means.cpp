#include <catch2/catch_amalgamated.hpp>

#include "opbell/opbell.hpp"
#include "test_util.hpp"

using namespace opbell;

TEST_CASE("weight validation") {
    CHECK_THROWS_AS(Weight(-0.1), InvalidArgument);
    CHECK_THROWS_AS(Weight(1.1), InvalidArgument);
    CHECK_NOTHROW(Weight(0.0));
    CHECK_NOTHROW(Weight(1.0));
}

TEST_CASE("arithmetic mean is entrywise and exact at the endpoints") {
    SymMatrix A = SymMatrix::diagonal({1.0, 3.0});
    SymMatrix B = SymMatrix::diagonal({5.0, 1.0});
    SymMatrix M = arith_mean(A, B, Weight(0.25));
    CHECK(M(0, 0) == Catch::Approx(2.0).margin(1e-15));
    CHECK(M(1, 1) == Catch::Approx(2.5).margin(1e-15));
    CHECK(arith_mean(A, B, Weight(0.0)).equals(A, 0.0));
    CHECK(arith_mean(A, B, Weight(1.0)).equals(B, 0.0));
}

TEST_CASE("geometric mean on commuting matrices multiplies spectra") {
    SymMatrix A = SymMatrix::diagonal({1.0, 4.0});
    SymMatrix B = SymMatrix::diagonal({4.0, 1.0});
    SymMatrix G = geom_mean(A, B, Weight(0.5));
    CHECK(G(0, 0) == Catch::Approx(2.0).margin(1e-12));
    CHECK(G(1, 1) == Catch::Approx(2.0).margin(1e-12));
    CHECK(G(0, 1) == Catch::Approx(0.0).margin(1e-12));

    SymMatrix C = SymMatrix::diagonal({2.0, 8.0});
    SymMatrix D = SymMatrix::diagonal({8.0, 2.0});
    SymMatrix H = geom_mean(C, D, Weight(0.25));
    CHECK(H(0, 0) == Catch::Approx(std::pow(2.0, 1.5)).margin(1e-12));
    CHECK(H(1, 1) == Catch::Approx(std::pow(2.0, 2.5)).margin(1e-12));
}

TEST_CASE("geometric mean basic identities") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + rng.uniform_int(3);
        SymMatrix A = random_symmetric_in(n, 0.1, 2.0, rng);
        SymMatrix B = random_symmetric_in(n, 0.1, 2.0, rng);
        double v = rng.uniform();

        SymMatrix G = geom_mean(A, B, Weight(v));
        // symmetry in the weight
        CHECK(G.equals(geom_mean(B, A, Weight(1.0 - v)), 1e-11));
        // congruence under scaling
        SymMatrix G3 = geom_mean(A * 3.0, B * 3.0, Weight(v));
        CHECK(G3.equals(G * 3.0, 1e-10));
        // AGM in the Loewner order
        auto rel = loewner_compare(G, arith_mean(A, B, Weight(v)), 1e-9).relation;
        CHECK((rel == Loewner::LessEq || rel == Loewner::Equal));
    }
    SymMatrix A = random_symmetric_in(3, 0.5, 1.5, rng);
    CHECK(geom_mean(A, A, Weight(0.3)).equals(A, 1e-11));
}

TEST_CASE("geometric mean endpoint weights") {
    Rng rng(9);
    SymMatrix A = random_symmetric_in(3, 0.2, 1.0, rng);
    SymMatrix B = random_symmetric_in(3, 0.2, 1.0, rng);
    CHECK(geom_mean(A, B, Weight(0.0)).equals(A, 1e-11));
    CHECK(geom_mean(A, B, Weight(1.0)).equals(B, 1e-11));
}

TEST_CASE("geometric mean rejects bad inputs but accepts singular B") {
    SymMatrix singular = SymMatrix::diagonal({0.0, 1.0});
    SymMatrix pd = SymMatrix::identity(2);
    CHECK_THROWS_AS(geom_mean(singular, pd, Weight(0.5)), NotPositiveDefinite);
    CHECK_THROWS_AS(geom_mean(pd, SymMatrix::diagonal({-0.1, 1.0}), Weight(0.5)), NotPSD);

    // PSD (not PD) on the right is fine
    SymMatrix G = geom_mean(pd, singular, Weight(0.5));
    CHECK(G(0, 0) == Catch::Approx(0.0).margin(1e-12));
    CHECK(G(1, 1) == Catch::Approx(1.0).margin(1e-12));
}
