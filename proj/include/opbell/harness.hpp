#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "opbell/checks.hpp"
#include "opbell/rng.hpp"

namespace opbell {

// Random A = Q diag(e) Q^T with eigenvalues uniform in [lo, hi]. A point
// window returns lo * I exactly, so degenerate sweeps stay bit-clean.
inline SymMatrix random_symmetric_in(int n, double lo, double hi, Rng& rng) {
    if (n < 1 || n > kMaxDim) throw InvalidArgument("random_symmetric_in: bad dimension");
    if (!(hi >= lo)) throw InvalidArgument("random_symmetric_in: need lo <= hi");
    if (lo == hi) return SymMatrix::identity(n) * lo;
    std::vector<double> eig(static_cast<std::size_t>(n));
    for (auto& e : eig) e = rng.uniform(lo, hi);
    auto q = detail::random_isometry_cols(n, n, rng);
    SymMatrix s(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
                acc += q[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] *
                       eig[static_cast<std::size_t>(k)] *
                       q[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
            s.set(i, j, acc);
        }
    return s;
}

// How r is drawn: a union of closed ranges, a point range meaning "fixed".
struct RStrategy {
    struct Range {
        double lo, hi;
    };
    std::vector<Range> ranges;

    bool empty() const { return ranges.empty(); }

    double draw(Rng& rng) const {
        if (ranges.empty()) throw InvalidConfig("r strategy is empty");
        const Range& pick =
            ranges.size() == 1
                ? ranges.front()
                : ranges[static_cast<std::size_t>(rng.uniform_int(static_cast<int>(ranges.size())))];
        return pick.lo == pick.hi ? pick.lo : rng.uniform(pick.lo, pick.hi);
    }
};

struct CampaignConfig {
    std::string check_id;
    int trials = 100;
    int n = 4;
    IntervalBounds bounds{0.0, 0.95}; // spectral window for generated A, B
    RStrategy r_strategy;
    std::optional<double> v_fixed;    // absent: v ~ U[0, 1] per trial
    std::vector<MapKind> map_kinds = all_map_kinds();
    std::string f_spec;               // empty for checks that fix their own f
    std::uint64_t seed = 1;
    double tol = 1e-9;
    bool power_first = false;
};

inline nlohmann::json to_json(const CampaignConfig& cfg) {
    nlohmann::json ranges = nlohmann::json::array();
    for (const auto& rr : cfg.r_strategy.ranges)
        ranges.push_back(nlohmann::json::array({rr.lo, rr.hi}));
    nlohmann::json maps = nlohmann::json::array();
    for (auto k : cfg.map_kinds) maps.push_back(to_string(k));
    return nlohmann::json{{"check_id", cfg.check_id},
                          {"trials", cfg.trials},
                          {"n", cfg.n},
                          {"bounds", {{"m", cfg.bounds.m}, {"M", cfg.bounds.M}}},
                          {"r_ranges", ranges},
                          {"v", cfg.v_fixed ? nlohmann::json(*cfg.v_fixed) : nlohmann::json(nullptr)},
                          {"map_kinds", maps},
                          {"f", cfg.f_spec},
                          {"seed", cfg.seed},
                          {"tol", cfg.tol},
                          {"power_first", cfg.power_first}};
}

inline CampaignConfig config_from_json(const nlohmann::json& j) {
    CampaignConfig cfg;
    cfg.check_id = j.at("check_id").get<std::string>();
    cfg.trials = j.at("trials").get<int>();
    cfg.n = j.at("n").get<int>();
    cfg.bounds = IntervalBounds(j.at("bounds").at("m").get<double>(),
                                j.at("bounds").at("M").get<double>());
    for (const auto& rr : j.at("r_ranges"))
        cfg.r_strategy.ranges.push_back({rr.at(0).get<double>(), rr.at(1).get<double>()});
    if (!j.at("v").is_null()) cfg.v_fixed = j.at("v").get<double>();
    cfg.map_kinds.clear();
    for (const auto& mk : j.at("map_kinds"))
        cfg.map_kinds.push_back(map_kind_from_string(mk.get<std::string>()));
    cfg.f_spec = j.at("f").get<std::string>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.tol = j.at("tol").get<double>();
    cfg.power_first = j.at("power_first").get<bool>();
    return cfg;
}

namespace detail {

struct CheckNeeds {
    bool A = false, B = false, v = false, r = false, map = false, u = false;
    bool bounds = false, f = false, scalar = false, remark = false, fixed = false;
};

inline CheckNeeds needs_of(const std::string& id) {
    CheckNeeds n;
    if (id == "bellman-classic" || id == "bellman-reversed" || id == "geometric-chain") {
        n.A = n.B = n.v = n.r = n.map = true;
    } else if (id == "jensen-vector") {
        n.A = n.u = n.f = true;
    } else if (id == "map-jensen") {
        n.A = n.map = n.bounds = n.f = true;
    } else if (id == "prop-concave" || id == "prop-convex") {
        n.A = n.B = n.v = n.map = n.bounds = n.f = true;
    } else if (id == "thm-power" || id == "additive-corollary") {
        n.A = n.B = n.v = n.r = n.map = n.bounds = true;
    } else if (id == "exp-corollary") {
        n.A = n.B = n.v = n.map = n.bounds = true;
    } else if (id == "lemma-mean-defect") {
        n.A = n.B = n.v = n.bounds = n.f = true;
    } else if (id == "lemma-map-defect") {
        n.A = n.map = n.bounds = n.f = true;
    } else if (id == "additive-theorem") {
        n.A = n.B = n.v = n.map = n.bounds = n.f = true;
    } else if (id == "counterexample") {
        n.fixed = true;
    } else if (id == "scalar-bellman") {
        n.r = n.scalar = true;
    } else if (id == "scalar-remark-chain") {
        n.r = n.bounds = n.remark = true;
    } else {
        throw UnknownCheck("unknown check id '" + id + "'");
    }
    return n;
}

} // namespace detail

// Draw order is fixed per check: A, B, v, r, map, extras. Changing it would
// silently re-key every published seed, so don't.
inline Instance generate_instance(const CampaignConfig& cfg, int trial) {
    detail::CheckNeeds needs = detail::needs_of(cfg.check_id);
    Instance inst;
    inst.n = cfg.n;
    inst.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    if (needs.fixed) return inst; // the pinned counterexample ignores draws

    Rng rng(inst.seed);
    if (needs.A) inst.A = random_symmetric_in(cfg.n, cfg.bounds.m, cfg.bounds.M, rng);
    if (needs.B) inst.B = random_symmetric_in(cfg.n, cfg.bounds.m, cfg.bounds.M, rng);
    if (needs.v) inst.v = cfg.v_fixed ? *cfg.v_fixed : rng.uniform();
    if (needs.r) inst.r = cfg.r_strategy.draw(rng);
    if (needs.map) {
        MapKind kind = cfg.map_kinds[static_cast<std::size_t>(trial) % cfg.map_kinds.size()];
        inst.map = random_map(kind, cfg.n, rng.next_u64());
    }
    if (needs.u) {
        std::vector<double> u = rng.gaussian_vector(cfg.n);
        double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        while (norm < 1e-6) {
            u = rng.gaussian_vector(cfg.n);
            norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
        }
        for (auto& x : u) x /= norm;
        inst.u = u;
    }
    if (needs.bounds) inst.bounds = cfg.bounds;
    if (needs.f && !cfg.f_spec.empty()) inst.f_spec = cfg.f_spec;

    if (needs.scalar) {
        // lists inside their caps with a uniform slack factor
        double r = *inst.r;
        int terms = std::min(cfg.n, 5);
        auto draw_side = [&](std::vector<double>& xs) {
            xs.resize(static_cast<std::size_t>(terms));
            double s = 0.0;
            for (auto& x : xs) {
                x = rng.uniform(0.1, 1.0);
                s += std::pow(x, r);
            }
            double slack = rng.uniform(0.3, 1.0);
            return std::pow(s / slack, 1.0 / r);
        };
        std::vector<double> a, b;
        double a_cap = draw_side(a);
        double b_cap = draw_side(b);
        inst.a = a;
        inst.b = b;
        inst.a_cap = a_cap;
        inst.b_cap = b_cap;
    }
    if (needs.remark) {
        // draw the scaled sums in [m, M] and split them across terms
        double r = *inst.r;
        int terms = std::max(1, std::min(cfg.n, 4));
        double m1 = rng.uniform(0.5, 2.0);
        double m2 = rng.uniform(0.5, 2.0);
        double sa = rng.uniform(cfg.bounds.m, cfg.bounds.M);
        double sb = rng.uniform(cfg.bounds.m, cfg.bounds.M);
        auto split = [&](double total, double scale) {
            std::vector<double> probs(static_cast<std::size_t>(terms));
            double ps = 0.0;
            for (auto& p : probs) {
                p = rng.uniform(0.5, 1.0);
                ps += p;
            }
            std::vector<double> xs(probs.size());
            for (std::size_t i = 0; i < probs.size(); ++i)
                xs[i] = scale * std::pow(total * probs[i] / ps, r);
            return xs;
        };
        inst.a = split(sa, m1);
        inst.b = split(sb, m2);
        inst.m1 = m1;
        inst.m2 = m2;
    }
    return inst;
}

struct ViolationRecord {
    int trial;
    CheckReport report;
};

struct CampaignReport {
    CampaignConfig config;
    std::map<std::string, int> counts; // verdict string -> count, all four keys
    int evaluated = 0;                 // trials that produced a gap
    std::optional<int> worst_trial;
    std::optional<double> worst_gap;
    std::optional<CheckReport> worst_report;
    std::optional<double> median_gap;
    double runtime_seconds = 0.0;
    std::vector<ViolationRecord> violations; // strictly Violated trials
};

inline nlohmann::json to_json(const CampaignReport& rep) {
    nlohmann::json j;
    j["schema"] = "opbell-report/1";
    j["config"] = to_json(rep.config);
    j["counts"] = rep.counts;
    j["evaluated"] = rep.evaluated;
    if (rep.worst_trial) {
        j["worst"] = nlohmann::json{{"trial", *rep.worst_trial},
                                    {"gap", *rep.worst_gap},
                                    {"report", to_json(*rep.worst_report)}};
    } else {
        j["worst"] = nullptr;
    }
    j["median_gap"] = rep.median_gap ? nlohmann::json(*rep.median_gap) : nlohmann::json(nullptr);
    j["runtime_seconds"] = rep.runtime_seconds;
    nlohmann::json viol = nlohmann::json::array();
    for (const auto& v : rep.violations)
        viol.push_back(nlohmann::json{{"trial", v.trial}, {"report", to_json(v.report)}});
    j["violations"] = viol;
    return j;
}

inline CampaignReport run_campaign(const CampaignConfig& cfg, int threads = 1) {
    if (cfg.trials < 1) throw InvalidConfig("trials must be >= 1");
    if (cfg.n < 1 || cfg.n > kMaxDim) throw InvalidConfig("n must be in [1, 16]");
    detail::CheckNeeds needs = detail::needs_of(cfg.check_id); // throws on unknown id
    if (needs.r && cfg.r_strategy.empty())
        throw InvalidConfig("check '" + cfg.check_id + "' needs an r strategy");
    if (needs.f && cfg.f_spec.empty())
        throw InvalidConfig("check '" + cfg.check_id + "' needs a scalar function");
    if (needs.map && cfg.map_kinds.empty())
        throw InvalidConfig("check '" + cfg.check_id + "' needs at least one map kind");
    if (!cfg.f_spec.empty()) parse_function_spec(cfg.f_spec); // fail fast on typos

    auto t0 = std::chrono::steady_clock::now();
    ConstantsCache cache;
    CheckOptions opt{cfg.tol, cfg.power_first, &cache};

    struct Outcome {
        Verdict verdict = Verdict::HypothesisUnmet;
        std::optional<double> gap;
    };
    std::vector<Outcome> outcomes(static_cast<std::size_t>(cfg.trials));

    auto run_trial = [&](int trial) {
        CheckReport rep = run_check(cfg.check_id, generate_instance(cfg, trial), opt);
        outcomes[static_cast<std::size_t>(trial)] = Outcome{rep.verdict, rep.min_eig_gap};
    };

    if (threads <= 1 || cfg.trials == 1) {
        for (int t = 0; t < cfg.trials; ++t) run_trial(t);
    } else {
        int workers = std::min(threads, cfg.trials);
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    for (int t = w; t < cfg.trials; t += workers) run_trial(t);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    CampaignReport out;
    out.config = cfg;
    out.counts = {{"holds", 0}, {"violated", 0}, {"incomparable", 0}, {"hypothesis-unmet", 0}};
    std::vector<double> gaps;
    gaps.reserve(outcomes.size());
    for (int t = 0; t < cfg.trials; ++t) {
        const Outcome& oc = outcomes[static_cast<std::size_t>(t)];
        out.counts[to_string(oc.verdict)] += 1;
        if (oc.gap) {
            gaps.push_back(*oc.gap);
            if (!out.worst_gap || *oc.gap < *out.worst_gap) {
                out.worst_gap = *oc.gap;
                out.worst_trial = t;
            }
        }
        if (oc.verdict == Verdict::Violated)
            out.violations.push_back(ViolationRecord{t, {}});
    }
    out.evaluated = static_cast<int>(gaps.size());
    if (!gaps.empty()) {
        std::sort(gaps.begin(), gaps.end());
        std::size_t mid = gaps.size() / 2;
        out.median_gap = gaps.size() % 2 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
    }
    // regenerate the interesting trials; generation is pure in (seed, trial)
    if (out.worst_trial)
        out.worst_report = run_check(cfg.check_id, generate_instance(cfg, *out.worst_trial), opt);
    for (auto& v : out.violations)
        v.report = run_check(cfg.check_id, generate_instance(cfg, v.trial), opt);
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ----- replay ----------------------------------------------------------------

struct ReplayResult {
    Verdict original_verdict;
    std::optional<double> original_gap;
    CheckReport replayed;
    bool match = false;
};

// index >= 0 selects violations[index]; -1 selects the worst trial.
inline ReplayResult replay_from_report(const nlohmann::json& report_json, int index = -1) {
    if (!report_json.contains("schema") ||
        report_json.at("schema").get<std::string>() != "opbell-report/1")
        throw InvalidConfig("unrecognized report schema");
    CampaignConfig cfg = config_from_json(report_json.at("config"));

    nlohmann::json entry;
    if (index < 0) {
        if (report_json.at("worst").is_null())
            throw InvalidConfig("report has no evaluated trials to replay");
        entry = report_json.at("worst").at("report");
    } else {
        const auto& viol = report_json.at("violations");
        if (index >= static_cast<int>(viol.size()))
            throw InvalidConfig("violation index out of range");
        entry = viol.at(static_cast<std::size_t>(index)).at("report");
    }

    ReplayResult res;
    res.original_verdict = verdict_from_string(entry.at("verdict").get<std::string>());
    if (!entry.at("min_eig_gap").is_null())
        res.original_gap = entry.at("min_eig_gap").get<double>();

    Instance inst = instance_from_json(entry.at("instance"));
    CheckOptions opt{cfg.tol, cfg.power_first, nullptr};
    res.replayed = run_check(entry.at("check_id").get<std::string>(), inst, opt);

    bool gap_match = !res.original_gap == !res.replayed.min_eig_gap &&
                     (!res.original_gap ||
                      std::abs(*res.original_gap - *res.replayed.min_eig_gap) <= 1e-14);
    res.match = res.replayed.verdict == res.original_verdict && gap_match;
    return res;
}

// ----- sweep ------------------------------------------------------------------

struct SweepRow {
    double r, m, M;
    double K, K2;
    double argmax_closed, argmax_grid;
    double worst_gap;
};

// Cross-tabulates the sharpness constant for (1-t)^r against trial campaigns
// of the power theorem. Cells with r back inside [-1,0] u [1,2], or with an
// invalid window, are skipped.
inline std::vector<SweepRow> run_sweep(const std::vector<double>& rs,
                                       const std::vector<double>& ms,
                                       const std::vector<double>& Ms, int trials, int n,
                                       std::uint64_t seed, double tol = 1e-9) {
    if (trials < 1) throw InvalidConfig("trials must be >= 1");
    std::vector<SweepRow> rows;
    std::uint64_t cell = 0;
    for (double r : rs)
        for (double m : ms)
            for (double M : Ms) {
                ++cell;
                if (!(m > 0.0) || !(m < M) || M > 1.0 - 1e-6) continue;
                if (detail::in_reversal_window(r)) continue;
                ScalarFunction f = ScalarFunction::power_one_minus(r);
                IntervalBounds b(m, M);
                ConstantResult closed = kantorovich(f, b, ConstMethod::ClosedForm);
                ConstantResult grid = kantorovich(f, b, ConstMethod::GridOracle);

                CampaignConfig cfg;
                cfg.check_id = "thm-power";
                cfg.trials = trials;
                cfg.n = n;
                cfg.bounds = b;
                cfg.r_strategy.ranges.push_back({r, r});
                cfg.seed = derive_seed(seed, cell);
                cfg.tol = tol;
                CampaignReport rep = run_campaign(cfg);

                rows.push_back(SweepRow{r, m, M, closed.value, closed.value * closed.value,
                                        closed.argmax_t, grid.argmax_t,
                                        rep.worst_gap ? *rep.worst_gap
                                                      : std::numeric_limits<double>::quiet_NaN()});
            }
    return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "r,m,M,K,K2,argmax_closed,argmax_grid,worst_gap\n";
    char buf[64];
    auto put = [&](double x, char sep) {
        std::snprintf(buf, sizeof buf, "%.17g%c", x, sep);
        out += buf;
    };
    for (const auto& row : rows) {
        put(row.r, ',');
        put(row.m, ',');
        put(row.M, ',');
        put(row.K, ',');
        put(row.K2, ',');
        put(row.argmax_closed, ',');
        put(row.argmax_grid, ',');
        put(row.worst_gap, '\n');
    }
    return out;
}

} // namespace opbell
