// opbell — campaign driver for the operator Bellman inequality toolkit.
//
// Subcommands: verify, constant, counterexample, sweep, replay.
// Exit codes: 0 all holds (or expected outcome), 1 at least one violation
// (or replay mismatch), 2 configuration error, 3 every trial rejected by
// hypothesis gates.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opbell/opbell.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolated = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAllUnmet = 3;

std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw opbell::InvalidConfig(std::string("cannot parse ") + what + " '" + s + "'");
    }
}

// "3" or "0:1" or "-1:0,1:2" -> union of draw ranges
opbell::RStrategy parse_r_strategy(const std::string& s) {
    opbell::RStrategy rs;
    for (const auto& part : split_list(s, ',')) {
        auto ends = split_list(part, ':');
        if (ends.size() == 1) {
            double x = parse_double(ends[0], "r");
            rs.ranges.push_back({x, x});
        } else if (ends.size() == 2) {
            double lo = parse_double(ends[0], "r"), hi = parse_double(ends[1], "r");
            if (hi < lo) throw opbell::InvalidConfig("r range '" + part + "' is reversed");
            rs.ranges.push_back({lo, hi});
        } else {
            throw opbell::InvalidConfig("bad r component '" + part + "' (want x or lo:hi)");
        }
    }
    if (rs.ranges.empty()) throw opbell::InvalidConfig("empty r specification");
    return rs;
}

// "0.3" or "start:stop:step" (inclusive stop, within half a step)
std::vector<double> parse_grid(const std::string& s, const char* what) {
    auto parts = split_list(s, ':');
    if (parts.size() == 1) return {parse_double(parts[0], what)};
    if (parts.size() != 3)
        throw opbell::InvalidConfig(std::string("bad ") + what + " grid '" + s +
                                    "' (want value or start:stop:step)");
    double start = parse_double(parts[0], what);
    double stop = parse_double(parts[1], what);
    double step = parse_double(parts[2], what);
    if (!(step > 0.0)) throw opbell::InvalidConfig("grid step must be positive");
    std::vector<double> out;
    for (double x = start; x <= stop + step * 0.5; x += step) out.push_back(x);
    if (out.empty()) throw opbell::InvalidConfig(std::string("empty ") + what + " grid");
    return out;
}

std::vector<opbell::MapKind> parse_map_kinds(const std::string& s) {
    if (s == "all") return opbell::all_map_kinds();
    std::vector<opbell::MapKind> kinds;
    for (const auto& name : split_list(s, ','))
        kinds.push_back(opbell::map_kind_from_string(name));
    if (kinds.empty()) throw opbell::InvalidConfig("empty map kind list");
    return kinds;
}

struct CheckDefaults {
    std::string r;      // empty: check takes no r
    std::string f;      // empty: check fixes its own f (or takes none)
    double m, M;
};

CheckDefaults defaults_for(const std::string& id) {
    if (id == "bellman-classic") return {"0:1", "", 0.0, 0.95};
    if (id == "bellman-reversed") return {"-1:0,1:2", "", 0.0, 0.95};
    if (id == "geometric-chain") return {"-1:0", "", 0.05, 0.9};
    if (id == "jensen-vector") return {"", "power:p=0.5", 0.0, 0.95};
    if (id == "map-jensen") return {"", "power:p=0.5", 0.1, 0.9};
    if (id == "prop-concave") return {"", "power:p=0.5", 0.1, 0.9};
    if (id == "prop-convex") return {"", "exp", 0.1, 0.9};
    if (id == "thm-power") return {"-3,-2,2.5,3,4", "", 0.1, 0.5};
    if (id == "exp-corollary") return {"", "", 0.1, 0.9};
    if (id == "lemma-mean-defect") return {"", "power:p=0.5", 0.1, 0.9};
    if (id == "lemma-map-defect") return {"", "power:p=0.5", 0.1, 0.9};
    if (id == "additive-theorem") return {"", "power:p=0.5", 0.1, 0.9};
    if (id == "additive-corollary") return {"3,-2", "", 0.1, 0.5};
    if (id == "scalar-bellman") return {"1,2,3,4", "", 0.0, 1.0};
    if (id == "scalar-remark-chain") return {"2.000000001:5", "", 0.1, 0.9};
    return {"", "", 0.0, 0.95}; // counterexample and anything fixed
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream os(path, std::ios::binary);
    if (!os) throw opbell::InvalidConfig("cannot open '" + path + "' for writing");
    os << text;
}

int exit_code_for(const opbell::CampaignReport& rep) {
    if (rep.counts.at("violated") > 0) return kExitViolated;
    if (rep.counts.at("hypothesis-unmet") == rep.config.trials) return kExitAllUnmet;
    return kExitOk;
}

int cmd_verify(const std::string& check, int trials, int n, double m, double M,
               const std::string& r_spec, const std::string& v_spec,
               const std::string& map_spec, const std::string& f_spec, std::uint64_t seed,
               double tol, const std::string& variant, int threads,
               const std::string& out_path) {
    const auto& ids = opbell::check_ids();
    if (std::find(ids.begin(), ids.end(), check) == ids.end())
        throw opbell::InvalidConfig("unknown check '" + check + "' (see --help for the list)");
    CheckDefaults dft = defaults_for(check);

    opbell::CampaignConfig cfg;
    cfg.check_id = check;
    cfg.trials = trials;
    cfg.n = n;
    cfg.bounds = opbell::IntervalBounds(std::isnan(m) ? dft.m : m, std::isnan(M) ? dft.M : M);
    std::string r_eff = r_spec.empty() ? dft.r : r_spec;
    if (!r_eff.empty()) cfg.r_strategy = parse_r_strategy(r_eff);
    if (v_spec != "uniform") cfg.v_fixed = parse_double(v_spec, "v");
    cfg.map_kinds = parse_map_kinds(map_spec);
    cfg.f_spec = f_spec.empty() ? dft.f : f_spec;
    cfg.seed = seed;
    cfg.tol = tol;
    if (variant == "power-first")
        cfg.power_first = true;
    else if (!variant.empty() && variant != "default")
        throw opbell::InvalidConfig("unknown variant '" + variant + "'");

    opbell::CampaignReport rep = opbell::run_campaign(cfg, threads);
    nlohmann::json j = opbell::to_json(rep);
    if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");

    std::printf("%s: trials=%d holds=%d violated=%d incomparable=%d unmet=%d\n",
                check.c_str(), cfg.trials, rep.counts.at("holds"), rep.counts.at("violated"),
                rep.counts.at("incomparable"), rep.counts.at("hypothesis-unmet"));
    if (rep.worst_gap)
        std::printf("worst_gap=%.17g (trial %d)  median_gap=%.17g\n", *rep.worst_gap,
                    *rep.worst_trial, *rep.median_gap);
    std::printf("runtime=%.3fs%s\n", rep.runtime_seconds,
                out_path.empty() ? "" : ("  report=" + out_path).c_str());
    return exit_code_for(rep);
}

int cmd_constant(const std::string& f_spec, double m, double M, const std::string& method) {
    opbell::ScalarFunction f = opbell::parse_function_spec(f_spec);
    opbell::IntervalBounds b(m, M);
    std::optional<opbell::ConstMethod> mth;
    if (method == "closed")
        mth = opbell::ConstMethod::ClosedForm;
    else if (method == "grid")
        mth = opbell::ConstMethod::GridOracle;
    else if (method != "auto")
        throw opbell::InvalidConfig("unknown method '" + method + "' (auto|closed|grid)");
    opbell::ConstantResult res = opbell::kantorovich(f, b, mth);
    nlohmann::json j{{"f", f.spec_string()},
                     {"m", m},
                     {"M", M},
                     {"value", res.value},
                     {"argmax_t", res.argmax_t},
                     {"method", opbell::to_string(res.method)}};
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_counterexample() {
    opbell::CheckReport rep = opbell::reproduce_counterexample();
    const double golden_lhs[2][2] = {{-0.25, -0.25}, {-0.25, 0.25}};
    const double golden_rhs[2][2] = {{-1.5, -1.0}, {-1.0, 0.0}};
    bool match = true;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            match = match && std::abs((*rep.lhs)(i, j) - golden_lhs[i][j]) <= 1e-12;
            match = match && std::abs((*rep.rhs)(i, j) - golden_rhs[i][j]) <= 1e-12;
        }
    match = match && rep.verdict == opbell::Verdict::Incomparable;

    nlohmann::json j = opbell::to_json(rep);
    j["golden_match"] = match;
    std::cout << j.dump(2) << "\n";
    return match ? kExitOk : kExitViolated;
}

int cmd_sweep(const std::string& r_spec, const std::string& m_spec, const std::string& M_spec,
              int trials, int n, std::uint64_t seed, double tol, const std::string& out_path) {
    auto rows = opbell::run_sweep(parse_grid(r_spec, "r"), parse_grid(m_spec, "m"),
                                  parse_grid(M_spec, "M"), trials, n, seed, tol);
    if (rows.empty())
        throw opbell::InvalidConfig("sweep grid is empty after filtering invalid cells");
    write_text(out_path, opbell::sweep_csv(rows));
    if (!out_path.empty())
        std::printf("%zu rows -> %s\n", rows.size(), out_path.c_str());
    return kExitOk;
}

int cmd_replay(const std::string& from_path, int index) {
    std::ifstream is(from_path, std::ios::binary);
    if (!is) throw opbell::InvalidConfig("cannot open report '" + from_path + "'");
    nlohmann::json report_json;
    try {
        is >> report_json;
    } catch (const nlohmann::json::exception& e) {
        throw opbell::InvalidConfig(std::string("cannot parse report: ") + e.what());
    }
    opbell::ReplayResult res = opbell::replay_from_report(report_json, index);
    std::printf("original: verdict=%s gap=%.17g\n", opbell::to_string(res.original_verdict),
                res.original_gap ? *res.original_gap : std::nan(""));
    std::printf("replayed: verdict=%s gap=%.17g\n", opbell::to_string(res.replayed.verdict),
                res.replayed.min_eig_gap ? *res.replayed.min_eig_gap : std::nan(""));
    std::printf("match: %s\n", res.match ? "true" : "false");
    return res.match ? kExitOk : kExitViolated;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"opbell — stress-tests operator Bellman inequalities on random instances"};
    app.require_subcommand(1);

    std::string check, r_spec, v_spec = "uniform", map_spec = "all", f_spec, variant;
    std::string out_path, from_path, method = "auto";
    std::string m_spec = "0.1", M_spec = "0.5";
    int trials = 100, n = 4, threads = 1, index = -1;
    double m = std::numeric_limits<double>::quiet_NaN();
    double M = std::numeric_limits<double>::quiet_NaN();
    double tol = 1e-9;
    std::uint64_t seed = 42;

    std::string id_list;
    for (const auto& id : opbell::check_ids()) id_list += "\n  " + id;

    auto* verify = app.add_subcommand("verify", "run a campaign of one check" + id_list);
    verify->add_option("--check", check, "check id")->required();
    verify->add_option("--trials", trials, "number of trials (default 100)");
    verify->add_option("--n", n, "matrix dimension, 1..16 (default 4)");
    verify->add_option("--m", m, "lower spectral bound (default per check)");
    verify->add_option("--M", M, "upper spectral bound (default per check)");
    verify->add_option("--r", r_spec, "power: x, lo:hi, or comma union (default per check)");
    verify->add_option("--v", v_spec, "weight: 'uniform' or a fixed value in [0,1]");
    verify->add_option("--map", map_spec, "'all' or comma list: identity,vector-state,isometry,pinching,trace,mixture");
    verify->add_option("--f", f_spec, "scalar function spec, e.g. power:p=0.5, exp, power-one-minus:r=3");
    verify->add_option("--seed", seed, "campaign seed (default 42)");
    verify->add_option("--tol", tol, "Loewner tolerance (default 1e-9)");
    verify->add_option("--variant", variant, "'power-first' applies the power before the map");
    verify->add_option("--threads", threads, "worker threads (default 1; result is identical)");
    verify->add_option("--out", out_path, "write the JSON report here");

    auto* constant = app.add_subcommand("constant", "print the sharpness constant K(m, M, f)");
    constant->add_option("--f", f_spec, "scalar function spec")->required();
    constant->add_option("--m", m, "interval lower end")->required();
    constant->add_option("--M", M, "interval upper end")->required();
    constant->add_option("--method", method, "auto|closed|grid (default auto)");

    app.add_subcommand("counterexample",
                       "reproduce the 2x2 instance where the r=3 reversal fails");

    auto* sweep = app.add_subcommand(
        "sweep", "tabulate K, K^2, argmax and campaign worst gaps over a parameter grid\n"
                 "CSV columns: r,m,M,K,K2,argmax_closed,argmax_grid,worst_gap (17 sig. digits)");
    sweep->add_option("--r", r_spec, "r grid: value or start:stop:step")->required();
    sweep->add_option("--m", m_spec, "m grid (default 0.1)");
    sweep->add_option("--M", M_spec, "M grid (default 0.5)");
    sweep->add_option("--trials", trials, "trials per cell (default 100)");
    sweep->add_option("--n", n, "matrix dimension (default 4)");
    sweep->add_option("--seed", seed, "base seed (default 42)");
    sweep->add_option("--tol", tol, "Loewner tolerance (default 1e-9)");
    sweep->add_option("--out", out_path, "CSV path (default stdout)");

    auto* replay = app.add_subcommand("replay", "re-run a recorded trial from a report");
    replay->add_option("--from", from_path, "campaign report JSON")->required();
    replay->add_option("--index", index,
                       "violation index; -1 replays the worst trial (default -1)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (verify->parsed())
            return cmd_verify(check, trials, n, m, M, r_spec, v_spec, map_spec, f_spec, seed,
                              tol, variant, threads, out_path);
        if (constant->parsed()) return cmd_constant(f_spec, m, M, method);
        if (app.get_subcommand("counterexample")->parsed()) return cmd_counterexample();
        if (sweep->parsed())
            return cmd_sweep(r_spec, m_spec, M_spec, trials, n, seed, tol, out_path);
        if (replay->parsed()) return cmd_replay(from_path, index);
    } catch (const opbell::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitConfig;
}
