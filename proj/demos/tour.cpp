// A short tour of the library surface: one hand-built check, one constant,
// one random campaign. Build with the demo_tour target.

#include <cstdio>

#include "opbell/opbell.hpp"

using namespace opbell;

int main() {
    // 1. a single hand-built instance of the classical inequality
    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::from_rows({{0.30, 0.10}, {0.10, 0.50}});
    inst.B = SymMatrix::diagonal({0.60, 0.20});
    inst.v = 0.25;
    inst.r = 0.5;
    inst.map = PositiveMap::trace_normalized(2);
    CheckReport rep = check_bellman_classic(inst);
    std::printf("bellman-classic: %s (min eigenvalue gap %.6f)\n",
                to_string(rep.verdict), *rep.min_eig_gap);

    // 2. the sharpness constant for f(t) = (1-t)^3 on [0.1, 0.5]
    ConstantResult K = kantorovich(ScalarFunction::power_one_minus(3.0),
                                   IntervalBounds(0.1, 0.5), ConstMethod::ClosedForm);
    std::printf("K((1-t)^3, [0.1, 0.5]) = %.12f at t = %.6f\n", K.value, K.argmax_t);

    // 3. a seeded campaign: 200 random instances, every map kind in rotation
    CampaignConfig cfg;
    cfg.check_id = "thm-power";
    cfg.trials = 200;
    cfg.n = 4;
    cfg.bounds = IntervalBounds(0.1, 0.5);
    cfg.r_strategy.ranges.push_back({3.0, 3.0});
    cfg.seed = 7;
    CampaignReport campaign = run_campaign(cfg);
    std::printf("campaign: %d holds, %d violated, worst gap %.3e at trial %d\n",
                campaign.counts.at("holds"), campaign.counts.at("violated"),
                *campaign.worst_gap, *campaign.worst_trial);

    // 4. the pinned 2x2 instance that defeats the naive extension
    CheckReport cx = reproduce_counterexample();
    std::printf("counterexample verdict: %s\n", to_string(cx.verdict));
    return 0;
}
