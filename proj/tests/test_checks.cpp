#include <catch2/catch_amalgamated.hpp>

#include "opbell/opbell.hpp"
#include "test_util.hpp"

using namespace opbell;

namespace {

Instance contraction_pair(double r, double v) {
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::diagonal({0.2, 0.5});
    inst.B = SymMatrix::diagonal({0.4, 0.1});
    inst.v = v;
    inst.r = r;
    inst.map = PositiveMap::identity(2);
    return inst;
}

} // namespace

TEST_CASE("counterexample reproduces the pinned 2x2 instance") {
    CheckReport rep = reproduce_counterexample();
    REQUIRE(rep.lhs);
    REQUIRE(rep.rhs);
    const double lhs_gold[2][2] = {{-0.25, -0.25}, {-0.25, 0.25}};
    const double rhs_gold[2][2] = {{-1.5, -1.0}, {-1.0, 0.0}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs((*rep.lhs)(i, j) - lhs_gold[i][j]) <= 1e-12);
            CHECK(std::abs((*rep.rhs)(i, j) - rhs_gold[i][j]) <= 1e-12);
        }
    CHECK(rep.verdict == Verdict::Incomparable);
    // eigenvalues of rhs - lhs are (-1.5 +- sqrt(3.25))/2: one each side of 0
    CHECK(*rep.min_eig_gap ==
          Catch::Approx((-1.5 - std::sqrt(3.25)) / 2.0).margin(1e-12));
}

TEST_CASE("classical bellman on a commuting pair matches scalar arithmetic") {
    Instance inst = contraction_pair(0.5, 0.3);
    CheckReport rep = check_bellman_classic(inst);
    CHECK(rep.verdict == Verdict::Holds);
    // diagonal instance: entries are plain scalar expressions
    double l0 = 0.7 * std::pow(0.8, 0.5) + 0.3 * std::pow(0.6, 0.5);
    double r0 = std::pow(1.0 - (0.7 * 0.2 + 0.3 * 0.4), 0.5);
    CHECK((*rep.lhs)(0, 0) == Catch::Approx(l0).margin(1e-12));
    CHECK((*rep.rhs)(0, 0) == Catch::Approx(r0).margin(1e-12));
    CHECK(*rep.min_eig_gap >= -1e-9);
}

TEST_CASE("classical bellman hypothesis gates") {
    CHECK(check_bellman_classic(contraction_pair(1.5, 0.3)).verdict ==
          Verdict::HypothesisUnmet);
    Instance bad = contraction_pair(0.5, 0.3);
    bad.A = SymMatrix::diagonal({1.2, 0.5});
    CHECK(check_bellman_classic(bad).verdict == Verdict::HypothesisUnmet);
    Instance badv = contraction_pair(0.5, 1.7);
    CHECK_THROWS_AS(check_bellman_classic(badv), InvalidArgument);
}

TEST_CASE("reversed bellman at r=2 has an explicit defect") {
    // identity map: rhs - lhs = v(1-v)(A-B)^2, diagonal here
    Instance inst = contraction_pair(2.0, 0.3);
    CheckReport rep = check_bellman_reversed(inst);
    CHECK(rep.verdict == Verdict::Holds);
    double defect0 = 0.3 * 0.7 * (0.2 - 0.4) * (0.2 - 0.4);
    double defect1 = 0.3 * 0.7 * (0.5 - 0.1) * (0.5 - 0.1);
    CHECK(*rep.min_eig_gap == Catch::Approx(std::min(defect0, defect1)).margin(1e-12));

    Instance same = inst;
    same.B = same.A;
    CheckReport eq = check_bellman_reversed(same);
    CHECK(eq.verdict == Verdict::Holds);
    CHECK(*eq.min_eig_gap == Catch::Approx(0.0).margin(1e-13));
}

TEST_CASE("reversed bellman near-singularity gate for negative powers") {
    Instance inst = contraction_pair(-0.5, 0.5);
    inst.A = SymMatrix::diagonal({1.0 - 1e-8, 0.5});
    CheckReport rep = check_bellman_reversed(inst);
    CHECK(rep.verdict == Verdict::HypothesisUnmet);
    CHECK(rep.note.find("singular") != std::string::npos);

    // r = 1 is linear: both sides coincide, no strict gate needed
    Instance lin = contraction_pair(1.0, 0.4);
    lin.A = SymMatrix::diagonal({1.0, 0.5});
    CheckReport eq = check_bellman_reversed(lin);
    CHECK(eq.verdict == Verdict::Holds);
    CHECK(*eq.min_eig_gap == Catch::Approx(0.0).margin(1e-13));

    CHECK(check_bellman_reversed(contraction_pair(0.5, 0.5)).verdict ==
          Verdict::HypothesisUnmet); // r inside (0, 1)
}

TEST_CASE("geometric chain holds linkwise and collapses when A = B") {
    Instance inst = contraction_pair(-0.5, 0.4);
    CheckReport rep = check_geometric_chain(inst);
    CHECK(rep.verdict == Verdict::Holds);
    REQUIRE(rep.links.size() == 3);
    for (const auto& l : rep.links) CHECK(l.gap >= -1e-9);

    inst.B = inst.A;
    CheckReport eq = check_geometric_chain(inst);
    for (const auto& l : eq.links) CHECK(std::abs(l.gap) <= 1e-12);
}

TEST_CASE("vector jensen against hand arithmetic") {
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::diagonal({1.0, 4.0});
    inst.f_spec = "power:p=0.5";
    double s = 1.0 / std::sqrt(2.0);
    inst.u = std::vector<double>{s, s};
    CheckReport rep = check_jensen_vector(inst);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK((*rep.lhs)(0, 0) == Catch::Approx(1.5).margin(1e-12));
    CHECK((*rep.rhs)(0, 0) == Catch::Approx(std::sqrt(2.5)).margin(1e-12));

    inst.f_spec = "exp"; // convex: rejected by the shape gate
    CHECK(check_jensen_vector(inst).verdict == Verdict::HypothesisUnmet);
    inst.f_spec = "power:p=0.5";
    inst.u = std::vector<double>{1.0, 1.0};
    CHECK(check_jensen_vector(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("map jensen sandwich carries its constant") {
    Instance inst;
    inst.n = 3;
    inst.A = SymMatrix::diagonal({0.25, 0.49, 1.0});
    inst.f_spec = "power:p=0.5";
    inst.map = PositiveMap::trace_normalized(3);
    inst.bounds = IntervalBounds(0.25, 1.0);
    CheckReport rep = check_map_jensen(inst);
    CHECK(rep.verdict == Verdict::Holds);
    REQUIRE(rep.links.size() == 2);
    CHECK(rep.constants.at("K") == Catch::Approx(2.0 * std::sqrt(2.0) / 3.0).margin(1e-9));

    inst.bounds = IntervalBounds(0.5, 1.0); // spectrum leaks below m
    CHECK(check_map_jensen(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("concave and convex propositions hold on fixed instances") {
    Instance inst;
    inst.n = 3;
    Rng rng(31);
    inst.A = random_symmetric_in(3, 0.1, 0.9, rng);
    inst.B = random_symmetric_in(3, 0.1, 0.9, rng);
    inst.v = 0.35;
    inst.map = random_map(MapKind::Pinching, 3, 5);
    inst.bounds = IntervalBounds(0.1, 0.9);

    inst.f_spec = "power:p=0.5";
    CheckReport con = check_prop_concave(inst);
    CHECK(con.verdict == Verdict::Holds);
    CHECK(con.links.size() == 2);
    CHECK(con.constants.at("K") <= 1.0);
    CHECK(con.constants.at("K2") == Catch::Approx(con.constants.at("K") * con.constants.at("K")));

    inst.f_spec = "exp";
    CheckReport cvx = check_prop_convex(inst);
    CHECK(cvx.verdict == Verdict::Holds);
    CHECK(cvx.constants.at("K") >= 1.0);

    inst.f_spec = "power:p=0.5"; // concave where convexity is required
    CHECK(check_prop_convex(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("power theorem wiring") {
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::diagonal({0.1, 0.5});
    inst.B = SymMatrix::diagonal({0.3, 0.2});
    inst.v = 0.5;
    inst.r = 3.0;
    inst.map = PositiveMap::identity(2);
    inst.bounds = IntervalBounds(0.1, 0.5);
    CheckReport rep = check_thm_power(inst);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.constants.at("K") == Catch::Approx(1.285126769500667).margin(1e-9));
    CHECK(std::abs(rep.constants.at("K") - rep.constants.at("K_grid")) <=
          1e-8 * rep.constants.at("K"));

    inst.r = 1.5; // falls back into the reversal window
    CHECK(check_thm_power(inst).verdict == Verdict::HypothesisUnmet);
    inst.r = 3.0;
    inst.bounds = IntervalBounds(0.1, 1.0); // M too close to 1
    CHECK(check_thm_power(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("exp corollary scalar case reduces to the kantorovich bound") {
    Instance inst;
    inst.n = 1;
    inst.A = SymMatrix::diagonal({0.2});
    inst.B = SymMatrix::diagonal({0.7});
    inst.v = 0.4;
    inst.map = PositiveMap::identity(1);
    inst.bounds = IntervalBounds(0.2, 0.7);
    CheckReport rep = check_exp_corollary(inst);
    CHECK(rep.verdict == Verdict::Holds);
    double K = rep.constants.at("K");
    double lhs = std::exp(0.6 * 0.2 + 0.4 * 0.7);
    double rhs = K * K * (0.6 * std::exp(0.2) + 0.4 * std::exp(0.7));
    CHECK((*rep.lhs)(0, 0) == Catch::Approx(lhs).margin(1e-12));
    CHECK((*rep.rhs)(0, 0) == Catch::Approx(rhs).margin(1e-12));
}

TEST_CASE("defect lemmas bound the gap by beta tilde") {
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::diagonal({0.25, 1.0});
    inst.B = SymMatrix::diagonal({0.5, 0.3});
    inst.v = 0.5;
    inst.f_spec = "power:p=0.5";
    inst.bounds = IntervalBounds(0.25, 1.0);
    CheckReport rep = check_lemma_mean_defect(inst);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.constants.at("beta_tilde") == Catch::Approx(1.0 / 24.0).margin(1e-9));
    CHECK(rep.constants.at("beta") == -rep.constants.at("beta_tilde"));

    inst.map = PositiveMap::trace_normalized(2);
    CheckReport mp = check_lemma_map_defect(inst);
    CHECK(mp.verdict == Verdict::Holds);

    // affine f: zero defect, links collapse to equalities
    inst.f_spec = "affine:a=0.5,b=0.1";
    CheckReport aff = check_lemma_mean_defect(inst);
    CHECK(aff.verdict == Verdict::Holds);
    CHECK(std::abs(*aff.min_eig_gap) <= 1e-12);
}

TEST_CASE("additive theorem is sharp at scalar coincidence") {
    // n=1, A=B: lhs = f(c), rhs = f(c) + 2*beta_tilde, so the gap is exactly
    // the additive allowance
    Instance inst;
    inst.n = 1;
    inst.A = SymMatrix::diagonal({0.49});
    inst.B = inst.A;
    inst.v = 0.5;
    inst.f_spec = "power:p=0.5";
    inst.map = PositiveMap::identity(1);
    inst.bounds = IntervalBounds(0.25, 1.0);
    CheckReport rep = check_additive_theorem(inst);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(*rep.min_eig_gap == Catch::Approx(2.0 / 24.0).margin(1e-9));
}

TEST_CASE("additive corollary mirrors the power theorem gates") {
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::diagonal({0.15, 0.4});
    inst.B = SymMatrix::diagonal({0.3, 0.45});
    inst.v = 0.25;
    inst.r = 3.0;
    inst.map = PositiveMap::trace_normalized(2);
    inst.bounds = IntervalBounds(0.1, 0.5);
    CheckReport rep = check_additive_corollary(inst);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.constants.at("beta_tilde") > 0.0);

    inst.r = 2.0;
    CHECK(check_additive_corollary(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("scalar bellman equality and strict cases") {
    Instance inst;
    inst.n = 2;
    inst.r = 2.0;
    inst.a = std::vector<double>{0.3, 0.4};
    inst.b = std::vector<double>{0.6, 0.8};
    inst.a_cap = 1.0;
    inst.b_cap = 2.0;
    // proportional sides: Minkowski equality
    CheckReport eq = check_scalar_bellman(inst);
    CHECK(eq.verdict == Verdict::Holds);
    CHECK(std::abs(*eq.min_eig_gap) <= 1e-12);

    inst.a = std::vector<double>{0.6, 0.8};
    inst.b = std::vector<double>{0.8, 0.6};
    inst.a_cap = std::sqrt(2.0);
    inst.b_cap = std::sqrt(2.0);
    CheckReport st = check_scalar_bellman(inst);
    CHECK(st.verdict == Verdict::Holds);
    // lhs = 2, rhs = sqrt(8 - 2*1.4^2)
    CHECK((*st.lhs)(0, 0) == Catch::Approx(2.0).margin(1e-12));
    CHECK((*st.rhs)(0, 0) == Catch::Approx(std::sqrt(8.0 - 2.0 * 1.96)).margin(1e-12));

    inst.r = 2.5;
    CHECK(check_scalar_bellman(inst).verdict == Verdict::HypothesisUnmet);
    inst.r = 2.0;
    inst.a_cap = 0.5; // cap violated: 0.6^2 + 0.8^2 = 1 > 0.25
    CHECK(check_scalar_bellman(inst).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("scalar remark chain holds and gates the mixed sum") {
    Instance inst;
    inst.n = 2;
    inst.r = 3.0;
    inst.m1 = 1.2;
    inst.m2 = 0.8;
    inst.bounds = IntervalBounds(0.1, 0.9);
    // sum (a_k/M1)^(1/3) = 0.4 + 0.3 = 0.7, comfortably inside [m, M]
    inst.a = std::vector<double>{1.2 * 0.064, 1.2 * 0.027};
    inst.b = std::vector<double>{0.8 * 0.125, 0.8 * 0.008};
    CheckReport rep = check_scalar_remark_chain(inst);
    CHECK(rep.verdict == Verdict::Holds);
    REQUIRE(rep.links.size() == 3);
    CHECK(rep.constants.at("xi") ==
          Catch::Approx(std::pow(rep.constants.at("K"), 2.0)).margin(1e-12));
    CHECK(rep.constants.at("sum_a") == Catch::Approx(0.7).margin(1e-12));

    // concentrated opposing splits push the mixed sum past 1
    Instance hot = inst;
    hot.a = std::vector<double>{0.512, 0.001};
    hot.b = std::vector<double>{0.001, 0.512};
    hot.m1 = 1.0;
    hot.m2 = 1.0;
    CheckReport gate = check_scalar_remark_chain(hot);
    CHECK(gate.verdict == Verdict::HypothesisUnmet);
    CHECK(gate.note.find("mixed sum") != std::string::npos);

    Instance lowr = inst;
    lowr.r = 2.0;
    CHECK(check_scalar_remark_chain(lowr).verdict == Verdict::HypothesisUnmet);
}

TEST_CASE("instances replay identically through json") {
    Rng rng(63);
    Instance inst;
    inst.n = 3;
    inst.seed = 909;
    inst.A = random_symmetric_in(3, 0.1, 0.9, rng);
    inst.B = random_symmetric_in(3, 0.1, 0.9, rng);
    inst.v = 0.62;
    inst.map = random_map(MapKind::Mixture, 3, 17);
    inst.bounds = IntervalBounds(0.1, 0.9);
    inst.f_spec = "power:p=0.5";

    Instance back = instance_from_json(to_json(inst));
    CheckReport r1 = check_prop_concave(inst);
    CheckReport r2 = check_prop_concave(back);
    CHECK(r1.verdict == r2.verdict);
    CHECK(*r1.min_eig_gap == *r2.min_eig_gap); // bitwise, not approximate
}

TEST_CASE("dispatcher knows every id and rejects strangers") {
    CHECK(check_ids().size() == 16);
    Instance dummy;
    CHECK_THROWS_AS(run_check("bellman-quartic", dummy, {}), UnknownCheck);
    CheckReport rep = run_check("counterexample", dummy, {});
    CHECK(rep.verdict == Verdict::Incomparable);
}
