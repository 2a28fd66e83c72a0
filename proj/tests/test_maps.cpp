#include <catch2/catch_amalgamated.hpp>

#include "opbell/opbell.hpp"
#include "test_util.hpp"

using namespace opbell;

TEST_CASE("every random map is unital, positive, and linear") {
    for (MapKind kind : all_map_kinds()) {
        for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
            PositiveMap phi = random_map(kind, 4, seed);
            CHECK(phi.verify_normalized());

            Rng rng(seed * 31 + 7);
            SymMatrix X = random_symmetric_in(4, 0.0, 2.0, rng);
            SymMatrix Y = random_symmetric_in(4, -1.0, 1.0, rng);
            CHECK(is_psd(phi.apply(X), 1e-10));

            SymMatrix lin = phi.apply(X * 0.7 + Y * (-1.3));
            SymMatrix rhs = phi.apply(X) * 0.7 + phi.apply(Y) * (-1.3);
            CHECK((lin - rhs).max_abs() <= 1e-11);

            // linearity makes the map commute with arithmetic means
            SymMatrix c1 = phi.apply(arith_mean(X, Y + SymMatrix::identity(4) * 2.0, Weight(0.3)));
            SymMatrix c2 = arith_mean(phi.apply(X), phi.apply(Y + SymMatrix::identity(4) * 2.0),
                                      Weight(0.3));
            CHECK((c1 - c2).max_abs() <= 1e-11);
        }
    }
}

TEST_CASE("map kinds act as documented") {
    SymMatrix X = SymMatrix::from_rows(
        {{1.0, 0.5, 0.2}, {0.5, 2.0, -0.3}, {0.2, -0.3, 3.0}});

    SECTION("identity") { CHECK(PositiveMap::identity(3).apply(X).equals(X, 0.0)); }

    SECTION("vector state is the quadratic form") {
        std::vector<double> u = {0.6, 0.8, 0.0};
        SymMatrix out = PositiveMap::vector_state(u).apply(X);
        CHECK(out.dim() == 1);
        // 0.36*1 + 0.64*2 + 2*0.48*0.5
        CHECK(out(0, 0) == Catch::Approx(2.12).margin(1e-12));
    }

    SECTION("pinching zeroes off-block entries") {
        PositiveMap phi = PositiveMap::pinching(3, {{0}, {1, 2}});
        SymMatrix out = phi.apply(X);
        CHECK(out(0, 1) == 0.0);
        CHECK(out(0, 2) == 0.0);
        CHECK(out(1, 2) == X(1, 2));
        CHECK(out(0, 0) == X(0, 0));
    }

    SECTION("trace map averages the diagonal") {
        SymMatrix out = PositiveMap::trace_normalized(3).apply(X);
        CHECK(out(0, 0) == Catch::Approx(2.0).margin(1e-14));
        CHECK(out(0, 1) == 0.0);
    }

    SECTION("isometry compression conjugates") {
        // columns e1, e3
        PositiveMap phi = PositiveMap::isometry({{1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}});
        SymMatrix out = phi.apply(X);
        CHECK(out.dim() == 2);
        CHECK(out(0, 0) == X(0, 0));
        CHECK(out(0, 1) == X(0, 2));
        CHECK(out(1, 1) == X(2, 2));
    }

    SECTION("mixture averages its parts") {
        PositiveMap phi = PositiveMap::mixture(
            {0.5, 0.5}, {PositiveMap::identity(3), PositiveMap::trace_normalized(3)});
        SymMatrix out = phi.apply(X);
        CHECK(out(0, 0) == Catch::Approx(0.5 * 1.0 + 0.5 * 2.0).margin(1e-14));
        CHECK(out(0, 1) == Catch::Approx(0.25).margin(1e-14));
    }
}

TEST_CASE("map construction validation") {
    CHECK_THROWS_AS(PositiveMap::pinching(3, {{0}, {1}}), InvalidArgument);      // misses 2
    CHECK_THROWS_AS(PositiveMap::pinching(3, {{0, 1}, {1, 2}}), InvalidArgument); // overlap
    CHECK_THROWS_AS(PositiveMap::mixture({0.7, 0.7}, {PositiveMap::identity(2),
                                                      PositiveMap::identity(2)}),
                    InvalidArgument);
    // construction is lenient; normalization is a separate verification
    CHECK_FALSE(PositiveMap::vector_state({0.0, 0.0}).verify_normalized());

    // a non-isometric V constructs (lenient), but fails verification
    PositiveMap skew = PositiveMap::isometry({{1.0, 0.0}, {0.0, 0.5}});
    CHECK_FALSE(skew.verify_normalized());
}

TEST_CASE("map spec strings parse back") {
    SymMatrix X = SymMatrix::from_rows({{1.0, 0.5, 0.0}, {0.5, 2.0, 0.1}, {0.0, 0.1, 0.7}});
    for (const char* spec : {"identity", "trace", "pinching:blocks=1|2,3",
                             "mix:0.5*identity+0.5*trace"}) {
        PositiveMap phi = parse_map_spec(spec, 3);
        PositiveMap again = parse_map_spec(phi.spec_string(), 3);
        CHECK((phi.apply(X) - again.apply(X)).max_abs() == 0.0);
    }
    // seeded specs regenerate the same map
    PositiveMap v1 = parse_map_spec("vector-state:seed=7", 3);
    PositiveMap v2 = parse_map_spec("vector-state:seed=7", 3);
    CHECK((v1.apply(X) - v2.apply(X)).max_abs() == 0.0);
    PositiveMap i1 = parse_map_spec("isometry:k=2,seed=9", 3);
    PositiveMap i2 = parse_map_spec("isometry:k=2,seed=9", 3);
    CHECK((i1.apply(X) - i2.apply(X)).max_abs() == 0.0);
    CHECK(i1.n_out() == 2);
    CHECK_THROWS_AS(parse_map_spec("teleport", 3), ParseError);
}

TEST_CASE("map json round trip preserves the action") {
    SymMatrix X = SymMatrix::from_rows({{1.0, -0.2, 0.3, 0.0},
                                        {-0.2, 0.5, 0.1, 0.2},
                                        {0.3, 0.1, 2.0, -0.4},
                                        {0.0, 0.2, -0.4, 1.5}});
    for (MapKind kind : all_map_kinds()) {
        PositiveMap phi = random_map(kind, 4, 123);
        PositiveMap back = map_from_json(to_json(phi));
        CHECK(back.kind() == phi.kind());
        CHECK((phi.apply(X) - back.apply(X)).max_abs() == 0.0);
    }
}

TEST_CASE("random maps are deterministic in the seed") {
    SymMatrix X = SymMatrix::from_rows({{2.0, 0.3}, {0.3, 1.0}});
    for (MapKind kind : all_map_kinds()) {
        PositiveMap a = random_map(kind, 2, 99);
        PositiveMap b = random_map(kind, 2, 99);
        CHECK((a.apply(X) - b.apply(X)).max_abs() == 0.0);
    }
    // different seeds give a different isometry
    PositiveMap a = random_map(MapKind::IsometryCompression, 4, 1);
    PositiveMap b = random_map(MapKind::IsometryCompression, 4, 2);
    SymMatrix Y = SymMatrix::diagonal({1.0, 2.0, 3.0, 4.0});
    CHECK((a.apply(Y) - b.apply(Y)).max_abs() > 1e-6);
}
