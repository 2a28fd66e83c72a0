#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "opbell/constants.hpp"
#include "opbell/errors.hpp"
#include "opbell/functions.hpp"
#include "opbell/maps.hpp"
#include "opbell/matrix.hpp"
#include "opbell/means.hpp"

namespace opbell {

enum class Verdict { Holds, Violated, Incomparable, HypothesisUnmet };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Violated: return "violated";
        case Verdict::Incomparable: return "incomparable";
        default: return "hypothesis-unmet";
    }
}

inline Verdict verdict_from_string(const std::string& s) {
    if (s == "holds") return Verdict::Holds;
    if (s == "violated") return Verdict::Violated;
    if (s == "incomparable") return Verdict::Incomparable;
    if (s == "hypothesis-unmet") return Verdict::HypothesisUnmet;
    throw ParseError("unknown verdict '" + s + "'");
}

// Everything a checker may consume. Fields are engaged per check; the JSON
// form round-trips bit-exactly, which is what makes violation replay work.
struct Instance {
    int n = 0;
    std::uint64_t seed = 0;
    std::optional<SymMatrix> A, B;
    std::optional<double> v;
    std::optional<double> r;
    std::optional<std::string> f_spec;
    std::optional<PositiveMap> map;
    std::optional<IntervalBounds> bounds;
    std::optional<std::vector<double>> u;
    std::optional<std::vector<double>> a, b;
    std::optional<double> a_cap, b_cap;
    std::optional<double> m1, m2;
};

inline nlohmann::json to_json(const Instance& inst) {
    nlohmann::json j;
    j["n"] = inst.n;
    j["seed"] = inst.seed;
    if (inst.A) j["A"] = to_json(*inst.A);
    if (inst.B) j["B"] = to_json(*inst.B);
    if (inst.v) j["v"] = *inst.v;
    if (inst.r) j["r"] = *inst.r;
    if (inst.f_spec) j["f"] = *inst.f_spec;
    if (inst.map) {
        j["map"] = to_json(*inst.map);
        j["map_spec"] = inst.map->spec_string();
    }
    if (inst.bounds) j["bounds"] = nlohmann::json{{"m", inst.bounds->m}, {"M", inst.bounds->M}};
    if (inst.u) j["u"] = *inst.u;
    if (inst.a) j["a"] = *inst.a;
    if (inst.b) j["b"] = *inst.b;
    if (inst.a_cap) j["a_cap"] = *inst.a_cap;
    if (inst.b_cap) j["b_cap"] = *inst.b_cap;
    if (inst.m1) j["m1"] = *inst.m1;
    if (inst.m2) j["m2"] = *inst.m2;
    return j;
}

inline Instance instance_from_json(const nlohmann::json& j) {
    Instance inst;
    inst.n = j.at("n").get<int>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("A")) inst.A = matrix_from_json(j.at("A"));
    if (j.contains("B")) inst.B = matrix_from_json(j.at("B"));
    if (j.contains("v")) inst.v = j.at("v").get<double>();
    if (j.contains("r")) inst.r = j.at("r").get<double>();
    if (j.contains("f")) inst.f_spec = j.at("f").get<std::string>();
    if (j.contains("map")) inst.map = map_from_json(j.at("map"));
    if (j.contains("bounds"))
        inst.bounds = IntervalBounds(j.at("bounds").at("m").get<double>(),
                                     j.at("bounds").at("M").get<double>());
    if (j.contains("u")) inst.u = j.at("u").get<std::vector<double>>();
    if (j.contains("a")) inst.a = j.at("a").get<std::vector<double>>();
    if (j.contains("b")) inst.b = j.at("b").get<std::vector<double>>();
    if (j.contains("a_cap")) inst.a_cap = j.at("a_cap").get<double>();
    if (j.contains("b_cap")) inst.b_cap = j.at("b_cap").get<double>();
    if (j.contains("m1")) inst.m1 = j.at("m1").get<double>();
    if (j.contains("m2")) inst.m2 = j.at("m2").get<double>();
    return inst;
}

// Memo for K / beta-tilde values inside a campaign; keys encode the exact
// inputs, values are pure, so concurrent fills cannot change the outcome.
class ConstantsCache {
public:
    double get(const std::string& key, const std::function<double()>& compute) {
        {
            std::lock_guard<std::mutex> lk(mu_);
            auto it = vals_.find(key);
            if (it != vals_.end()) return it->second;
        }
        double v = compute();
        std::lock_guard<std::mutex> lk(mu_);
        return vals_.emplace(key, v).first->second;
    }

private:
    std::mutex mu_;
    std::map<std::string, double> vals_;
};

struct CheckOptions {
    double tol = 1e-9;
    bool power_first = false; // alternative reading of Phi(I - A nabla B)^r
    ConstantsCache* cache = nullptr;
};

struct Link {
    std::string name;
    double gap;     // smallest eigenvalue of rhs - lhs for this link
    double tol_eff;
    bool holds;
};

struct CheckReport {
    std::string check_id;
    Verdict verdict = Verdict::HypothesisUnmet;
    std::optional<SymMatrix> lhs, rhs;
    std::optional<double> min_eig_gap;
    double tol = 0.0;
    double tol_eff = 0.0;
    std::vector<Link> links;
    std::map<std::string, double> constants;
    std::string note;
    Instance instance;
};

inline nlohmann::json to_json(const CheckReport& rep) {
    nlohmann::json j;
    j["check_id"] = rep.check_id;
    j["verdict"] = to_string(rep.verdict);
    j["lhs"] = rep.lhs ? to_json(*rep.lhs) : nlohmann::json(nullptr);
    j["rhs"] = rep.rhs ? to_json(*rep.rhs) : nlohmann::json(nullptr);
    j["min_eig_gap"] = rep.min_eig_gap ? nlohmann::json(*rep.min_eig_gap)
                                       : nlohmann::json(nullptr);
    j["tol"] = rep.tol;
    j["tol_eff"] = rep.tol_eff;
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : rep.links)
        links.push_back(nlohmann::json{
            {"name", l.name}, {"gap", l.gap}, {"tol_eff", l.tol_eff}, {"holds", l.holds}});
    j["links"] = links;
    j["constants"] = rep.constants;
    j["note"] = rep.note;
    j["instance"] = to_json(rep.instance);
    return j;
}

namespace detail {

inline const SymMatrix& need(const std::optional<SymMatrix>& m, const char* what) {
    if (!m) throw InvalidArgument(std::string("instance missing ") + what);
    return *m;
}

template <typename T>
inline const T& need_v(const std::optional<T>& x, const char* what) {
    if (!x) throw InvalidArgument(std::string("instance missing ") + what);
    return *x;
}

inline CheckReport unmet(CheckReport rep, const std::string& why) {
    rep.verdict = Verdict::HypothesisUnmet;
    rep.note = why;
    return rep;
}

// Directed claim lhs <= rhs appended as a named link.
inline void add_link(CheckReport& rep, const std::string& name, const SymMatrix& lhs,
                     const SymMatrix& rhs, double tol) {
    auto lv = loewner_compare(lhs, rhs, tol);
    bool ok = lv.relation == Loewner::LessEq || lv.relation == Loewner::Equal;
    rep.links.push_back(Link{name, lv.min_eig_ba, lv.tol_eff, ok});
    if (!rep.lhs) {
        rep.lhs = lhs;
        rep.rhs = rhs;
    }
}

inline void finalize_directed(CheckReport& rep) {
    bool all = true;
    for (std::size_t i = 0; i < rep.links.size(); ++i) {
        const auto& l = rep.links[i];
        if (!rep.min_eig_gap || l.gap < *rep.min_eig_gap) {
            rep.min_eig_gap = l.gap;
            rep.tol_eff = l.tol_eff;
        }
        all = all && l.holds;
    }
    rep.verdict = all ? Verdict::Holds : Verdict::Violated;
}

inline SymMatrix scalar1(double x) {
    SymMatrix s(1);
    s.set(0, 0, x);
    return s;
}

inline bool in_unit_window(double r) { return r >= -1e-12 && r <= 1.0 + 1e-12; }

inline bool in_reversal_window(double r) {
    return (r >= -1.0 - 1e-12 && r <= 1e-12) || (r >= 1.0 - 1e-12 && r <= 2.0 + 1e-12);
}

inline bool positive_on(const ScalarFunction& f, const IntervalBounds& b) {
    const int samples = 257;
    if (b.m == b.M) return f.eval(b.m) > 0.0;
    for (int i = 0; i < samples; ++i) {
        double t = b.m + (b.M - b.m) * static_cast<double>(i) / (samples - 1);
        if (!(f.eval(t) > 0.0)) return false;
    }
    return true;
}

inline bool concave_like(const ScalarFunction& f, const IntervalBounds& b) {
    Shape s = b.m == b.M ? Shape::Affine : shape_on(f, b, 257);
    return s == Shape::Concave || s == Shape::Affine;
}

inline bool convex_like(const ScalarFunction& f, const IntervalBounds& b) {
    Shape s = b.m == b.M ? Shape::Affine : shape_on(f, b, 257);
    return s == Shape::Convex || s == Shape::Affine;
}

inline std::string cache_tag(const IntervalBounds& b) {
    return ScalarFunction::format_double(b.m) + "|" + ScalarFunction::format_double(b.M);
}

inline double cached_kantorovich(const CheckOptions& opt, const ScalarFunction& f,
                                 const IntervalBounds& b,
                                 std::optional<ConstMethod> method = std::nullopt) {
    auto compute = [&] { return kantorovich(f, b, method).value; };
    if (!opt.cache || f.kind() == FuncKind::Tabulated) return compute();
    std::string key = "K|" + std::string(method ? to_string(*method) : "auto") + "|" +
                      f.spec_string() + "|" + cache_tag(b);
    return opt.cache->get(key, compute);
}

inline double cached_beta_tilde(const CheckOptions& opt, const ScalarFunction& f,
                                const IntervalBounds& b) {
    auto compute = [&] { return beta_tilde(f, b).value; };
    if (!opt.cache || f.kind() == FuncKind::Tabulated) return compute();
    return opt.cache->get("BT|" + f.spec_string() + "|" + cache_tag(b), compute);
}

inline ScalarFunction instance_function(const Instance& inst) {
    return parse_function_spec(need_v(inst.f_spec, "f"));
}

} // namespace detail

// ----- Bellman family ------------------------------------------------------

inline CheckReport check_bellman_classic(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "bellman-classic";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    double r = detail::need_v(inst.r, "r");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");

    if (!detail::in_unit_window(r))
        return detail::unmet(rep, "r outside [0, 1]");
    if (!spectrum_in(A, 0.0, 1.0, 1e-9) || !spectrum_in(B, 0.0, 1.0, 1e-9))
        return detail::unmet(rep, "A, B must be positive contractions (spectra in [0, 1])");

    SymMatrix I = SymMatrix::identity(A.dim());
    SymMatrix X = I - A, Y = I - B;
    SymMatrix Z = I - arith_mean(A, B, w);
    ScalarFunction fr = ScalarFunction::power(r);

    SymMatrix lhs = phi.apply(arith_mean(apply_function(X, fr), apply_function(Y, fr), w));
    SymMatrix rhs = opt.power_first ? phi.apply(apply_function(Z, fr))
                                    : apply_function(phi.apply(Z), fr);
    detail::add_link(rep, "bellman", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_bellman_reversed(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "bellman-reversed";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    double r = detail::need_v(inst.r, "r");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");

    if (!detail::in_reversal_window(r))
        return detail::unmet(rep, "r outside [-1, 0] u [1, 2]");
    if (!spectrum_in(A, 0.0, 1.0, 1e-9) || !spectrum_in(B, 0.0, 1.0, 1e-9))
        return detail::unmet(rep, "A, B must be positive contractions (spectra in [0, 1])");

    SymMatrix I = SymMatrix::identity(A.dim());
    SymMatrix X = I - A, Y = I - B;
    SymMatrix Z = I - arith_mean(A, B, w);
    bool needs_strict = r < 0.0 || !nearly_integer(r);
    if (needs_strict) {
        // negative and fractional powers amplify conditioning near the edge
        if (min_eigenvalue(X) < 1e-6 || min_eigenvalue(Y) < 1e-6 || min_eigenvalue(Z) < 1e-6)
            return detail::unmet(rep, "I-A, I-B, or I-A nabla B nearly singular (margin 1e-6)");
    }
    ScalarFunction fr = ScalarFunction::power(r);

    SymMatrix lhs = opt.power_first ? phi.apply(apply_function(Z, fr))
                                    : apply_function(phi.apply(Z), fr);
    SymMatrix rhs = phi.apply(arith_mean(apply_function(X, fr), apply_function(Y, fr), w));
    detail::add_link(rep, "bellman-reversed", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_geometric_chain(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "geometric-chain";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    double r = detail::need_v(inst.r, "r");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");

    if (r < -1.0 - 1e-12 || r > 1e-12)
        return detail::unmet(rep, "r outside [-1, 0]");
    if (!spectrum_in(A, 0.0, 1.0, 1e-9) || !spectrum_in(B, 0.0, 1.0, 1e-9))
        return detail::unmet(rep, "A, B must be positive contractions (spectra in [0, 1])");

    SymMatrix I = SymMatrix::identity(A.dim());
    SymMatrix X = I - A, Y = I - B;
    SymMatrix Z = I - arith_mean(A, B, w);
    if (min_eigenvalue(X) < 1e-6 || min_eigenvalue(Y) < 1e-6 || min_eigenvalue(Z) < 1e-6)
        return detail::unmet(rep, "I-A, I-B, or I-A nabla B nearly singular (margin 1e-6)");

    ScalarFunction fr = ScalarFunction::power(r);
    SymMatrix Xr = apply_function(X, fr), Yr = apply_function(Y, fr);
    SymMatrix e1 = opt.power_first ? phi.apply(apply_function(Z, fr))
                                   : apply_function(phi.apply(Z), fr);
    SymMatrix e2 = geom_mean(apply_function(phi.apply(X), fr),
                             apply_function(phi.apply(Y), fr), w);
    SymMatrix e3 = phi.apply(geom_mean(Xr, Yr, w));
    SymMatrix e4 = phi.apply(arith_mean(Xr, Yr, w));

    detail::add_link(rep, "power-vs-geometric", e1, e2, opt.tol);
    detail::add_link(rep, "geometric-vs-mapped-geometric", e2, e3, opt.tol);
    detail::add_link(rep, "mapped-geometric-vs-arithmetic", e3, e4, opt.tol);
    rep.lhs = e1;
    rep.rhs = e4;
    detail::finalize_directed(rep);
    return rep;
}

// ----- Jensen / Kantorovich family ----------------------------------------

inline CheckReport check_jensen_vector(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "jensen-vector";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    ScalarFunction f = detail::instance_function(inst);
    const std::vector<double>& u = detail::need_v(inst.u, "u");

    double norm2 = 0.0;
    for (double x : u) norm2 += x * x;
    if (std::abs(std::sqrt(norm2) - 1.0) > 1e-12)
        return detail::unmet(rep, "u is not a unit vector");
    auto d = spectral_decompose(A);
    IntervalBounds hull(d.eigenvalues.front(), d.eigenvalues.back());
    if (!detail::concave_like(f, hull))
        return detail::unmet(rep, "f is not concave on the spectral hull of A");

    double lhs = apply_function(A, f).quad_form(u);
    double rhs = f.eval(A.quad_form(u));
    detail::add_link(rep, "vector-jensen", detail::scalar1(lhs), detail::scalar1(rhs), opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_map_jensen(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "map-jensen";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    ScalarFunction f = detail::instance_function(inst);
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectrum(A) not within [m, M]");
    if (!detail::concave_like(f, b))
        return detail::unmet(rep, "f is not concave on [m, M]");
    if (!detail::positive_on(f, b))
        return detail::unmet(rep, "f is not positive on [m, M]");

    double K = detail::cached_kantorovich(opt, f, b);
    rep.constants["K"] = K;
    SymMatrix PhifA = phi.apply(apply_function(A, f));
    SymMatrix fPhiA = apply_function(phi.apply(A), f);
    detail::add_link(rep, "lower", PhifA * K, fPhiA, opt.tol);
    detail::add_link(rep, "upper", fPhiA, PhifA * (1.0 / K), opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_prop_concave(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "prop-concave";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    Weight w(detail::need_v(inst.v, "v"));
    ScalarFunction f = detail::instance_function(inst);
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");
    if (!detail::concave_like(f, b))
        return detail::unmet(rep, "f is not concave on [m, M]");
    if (!detail::positive_on(f, b))
        return detail::unmet(rep, "f is not positive on [m, M]");

    double K = detail::cached_kantorovich(opt, f, b);
    rep.constants["K"] = K;
    rep.constants["K2"] = K * K;
    SymMatrix fA = apply_function(A, f), fB = apply_function(B, f);
    SymMatrix mean = arith_mean(A, B, w);

    SymMatrix lhs = arith_mean(phi.apply(fA), phi.apply(fB), w);
    SymMatrix rhs = apply_function(phi.apply(mean), f) * (1.0 / (K * K));
    detail::add_link(rep, "proposition", lhs, rhs, opt.tol);
    // the proof's standalone intermediate: f(A) nabla f(B) <= (1/K) f(A nabla B)
    detail::add_link(rep, "mean-inequality", arith_mean(fA, fB, w),
                     apply_function(mean, f) * (1.0 / K), opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_prop_convex(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "prop-convex";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    Weight w(detail::need_v(inst.v, "v"));
    ScalarFunction f = detail::instance_function(inst);
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");
    if (!detail::convex_like(f, b))
        return detail::unmet(rep, "f is not convex on [m, M]");
    if (!detail::positive_on(f, b))
        return detail::unmet(rep, "f is not positive on [m, M]");

    double K = detail::cached_kantorovich(opt, f, b);
    rep.constants["K"] = K;
    rep.constants["K2"] = K * K;
    SymMatrix mean = arith_mean(A, B, w);
    SymMatrix lhs = apply_function(phi.apply(mean), f) * (1.0 / (K * K));
    SymMatrix rhs = arith_mean(phi.apply(apply_function(A, f)),
                               phi.apply(apply_function(B, f)), w);
    detail::add_link(rep, "proposition-convex", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_thm_power(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "thm-power";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    double r = detail::need_v(inst.r, "r");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (detail::in_reversal_window(r))
        return detail::unmet(rep, "r inside [-1, 0] u [1, 2]; the reversal regime applies there");
    if (!(b.m > 0.0) || b.M > 1.0 - 1e-6)
        return detail::unmet(rep, "need 0 < m <= M < 1 (margin 1e-6 at 1)");
    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");

    ScalarFunction f = ScalarFunction::power_one_minus(r);
    double K = detail::cached_kantorovich(opt, f, b, ConstMethod::ClosedForm);
    double Kg = detail::cached_kantorovich(opt, f, b, ConstMethod::GridOracle);
    rep.constants["K"] = K;
    rep.constants["K_grid"] = Kg;
    rep.constants["K2"] = K * K;

    SymMatrix mean = arith_mean(A, B, w);
    SymMatrix lhs = apply_function(phi.apply(mean), f); // (I - Phi(A nabla B))^r
    SymMatrix rhs = phi.apply(arith_mean(apply_function(A, f), apply_function(B, f), w)) *
                    (K * K);
    detail::add_link(rep, "power-theorem", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_exp_corollary(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "exp-corollary";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");

    ScalarFunction f = ScalarFunction::exponential();
    double K = detail::cached_kantorovich(opt, f, b, ConstMethod::ClosedForm);
    rep.constants["K"] = K;
    rep.constants["K2"] = K * K;
    SymMatrix mean = arith_mean(A, B, w);
    SymMatrix lhs = apply_function(phi.apply(mean), f);
    SymMatrix rhs = phi.apply(arith_mean(apply_function(A, f), apply_function(B, f), w)) *
                    (K * K);
    detail::add_link(rep, "exp-corollary", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

// ----- additive (defect) family --------------------------------------------

inline CheckReport check_lemma_mean_defect(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "lemma-mean-defect";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    Weight w(detail::need_v(inst.v, "v"));
    ScalarFunction f = detail::instance_function(inst);
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!(b.m > 0.0))
        return detail::unmet(rep, "need 0 < m");
    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");
    if (!detail::concave_like(f, b))
        return detail::unmet(rep, "f is not concave on [m, M]");

    double bt = detail::cached_beta_tilde(opt, f, b);
    rep.constants["beta"] = -bt;
    rep.constants["beta_tilde"] = bt;
    SymMatrix D = arith_mean(apply_function(A, f), apply_function(B, f), w) -
                  apply_function(arith_mean(A, B, w), f);
    SymMatrix I = SymMatrix::identity(A.dim());
    detail::add_link(rep, "lower", I * (-bt), D, opt.tol);
    detail::add_link(rep, "upper", D, I * bt, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_lemma_map_defect(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "lemma-map-defect";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    ScalarFunction f = detail::instance_function(inst);
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectrum(A) not within [m, M]");
    if (!detail::concave_like(f, b))
        return detail::unmet(rep, "f is not concave on [m, M]");

    double bt = detail::cached_beta_tilde(opt, f, b);
    rep.constants["beta_tilde"] = bt;
    SymMatrix D = apply_function(phi.apply(A), f) - phi.apply(apply_function(A, f));
    SymMatrix I = SymMatrix::identity(D.dim());
    detail::add_link(rep, "lower", I * (-bt), D, opt.tol);
    detail::add_link(rep, "upper", D, I * bt, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_additive_theorem(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "additive-theorem";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    Weight w(detail::need_v(inst.v, "v"));
    ScalarFunction f = detail::instance_function(inst);
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");
    if (!detail::concave_like(f, b))
        return detail::unmet(rep, "f is not concave on [m, M]");

    double bt = detail::cached_beta_tilde(opt, f, b);
    rep.constants["beta_tilde"] = bt;
    SymMatrix mean = arith_mean(A, B, w);
    SymMatrix lhs = apply_function(phi.apply(mean), f);
    SymMatrix rhs = arith_mean(phi.apply(apply_function(A, f)),
                               phi.apply(apply_function(B, f)), w) +
                    SymMatrix::identity(phi.n_out()) * (2.0 * bt);
    detail::add_link(rep, "additive-theorem", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_additive_corollary(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "additive-corollary";
    rep.tol = opt.tol;
    rep.instance = inst;
    const SymMatrix& A = detail::need(inst.A, "A");
    const SymMatrix& B = detail::need(inst.B, "B");
    double r = detail::need_v(inst.r, "r");
    Weight w(detail::need_v(inst.v, "v"));
    const PositiveMap& phi = detail::need_v(inst.map, "map");
    const IntervalBounds& b = detail::need_v(inst.bounds, "bounds");

    if (detail::in_reversal_window(r))
        return detail::unmet(rep, "r inside [-1, 0] u [1, 2]; the reversal regime applies there");
    if (!(b.m > 0.0) || b.M > 1.0 - 1e-6)
        return detail::unmet(rep, "need 0 < m <= M < 1 (margin 1e-6 at 1)");
    if (!spectrum_in(A, b.m, b.M, 1e-9) || !spectrum_in(B, b.m, b.M, 1e-9))
        return detail::unmet(rep, "spectra not within [m, M]");

    ScalarFunction f = ScalarFunction::power_one_minus(r);
    double bt = detail::cached_beta_tilde(opt, f, b);
    rep.constants["beta_tilde"] = bt;
    SymMatrix mean = arith_mean(A, B, w);
    SymMatrix lhs = apply_function(phi.apply(mean), f);
    SymMatrix rhs = phi.apply(arith_mean(apply_function(A, f), apply_function(B, f), w)) +
                    SymMatrix::identity(phi.n_out()) * (2.0 * bt);
    detail::add_link(rep, "additive-corollary", lhs, rhs, opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

// ----- fixed and scalar checks ---------------------------------------------

// The 2x2 instance showing the reversal fails for r = 3. Note A is not a
// contraction (norm about 2.618); reproduced verbatim anyway, flagged below.
inline CheckReport reproduce_counterexample(const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "counterexample";
    rep.tol = opt.tol;

    Instance inst;
    inst.n = 2;
    inst.A = SymMatrix::from_rows({{2, 1}, {1, 1}});
    inst.B = SymMatrix::from_rows({{1, 0}, {0, 0}});
    inst.v = 0.5;
    inst.r = 3.0;
    inst.map = PositiveMap::identity(2);
    rep.instance = inst;

    SymMatrix I = SymMatrix::identity(2);
    Weight w(0.5);
    ScalarFunction cube = ScalarFunction::power(3);
    SymMatrix Z = I - arith_mean(*inst.A, *inst.B, w);
    SymMatrix lhs = apply_function(inst.map->apply(Z), cube);
    SymMatrix rhs = inst.map->apply(
        arith_mean(apply_function(I - *inst.A, cube), apply_function(I - *inst.B, cube), w));

    auto lv = loewner_compare(lhs, rhs, opt.tol);
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.min_eig_gap = lv.min_eig_ba;
    rep.tol_eff = lv.tol_eff;
    rep.links.push_back(Link{"claimed-direction", lv.min_eig_ba, lv.tol_eff,
                             lv.relation == Loewner::LessEq || lv.relation == Loewner::Equal});
    rep.links.push_back(Link{"reverse-direction", lv.min_eig_ab, lv.tol_eff,
                             lv.relation == Loewner::GreaterEq || lv.relation == Loewner::Equal});
    switch (lv.relation) {
        case Loewner::Incomparable: rep.verdict = Verdict::Incomparable; break;
        case Loewner::LessEq:
        case Loewner::Equal: rep.verdict = Verdict::Holds; break;
        default: rep.verdict = Verdict::Violated; break;
    }
    rep.note = "A exceeds the contraction hypothesis (operator norm ~ 2.618); "
               "the two sides are expected to be Loewner-incomparable";
    return rep;
}

inline CheckReport check_counterexample(const Instance&, const CheckOptions& opt = {}) {
    return reproduce_counterexample(opt);
}

inline CheckReport check_scalar_bellman(const Instance& inst, const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "scalar-bellman";
    rep.tol = opt.tol;
    rep.instance = inst;
    const std::vector<double>& a = detail::need_v(inst.a, "a");
    const std::vector<double>& b = detail::need_v(inst.b, "b");
    double a_cap = detail::need_v(inst.a_cap, "a_cap");
    double b_cap = detail::need_v(inst.b_cap, "b_cap");
    double r = detail::need_v(inst.r, "r");

    if (!nearly_integer(r) || r < 1.0 - 1e-12)
        return detail::unmet(rep, "r must be a positive integer");
    r = std::round(r);
    if (a.size() != b.size() || a.empty())
        return detail::unmet(rep, "a and b must be nonempty lists of equal length");
    for (double x : a)
        if (!(x > 0.0)) return detail::unmet(rep, "entries of a must be positive");
    for (double x : b)
        if (!(x > 0.0)) return detail::unmet(rep, "entries of b must be positive");
    if (!(a_cap > 0.0) || !(b_cap > 0.0))
        return detail::unmet(rep, "caps must be positive");

    auto pow_sum = [&](const std::vector<double>& xs) {
        double s = 0.0;
        for (double x : xs) s += std::pow(x, r);
        return s;
    };
    double sa = pow_sum(a), sb = pow_sum(b);
    double ca = std::pow(a_cap, r), cb = std::pow(b_cap, r);
    double cap_tol = 1e-12;
    if (sa > ca * (1.0 + cap_tol) + cap_tol || sb > cb * (1.0 + cap_tol) + cap_tol)
        return detail::unmet(rep, "cap constraint sum x^r <= cap^r violated");

    std::vector<double> ab(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) ab[i] = a[i] + b[i];
    double lhs = std::pow(std::max(ca - sa, 0.0), 1.0 / r) +
                 std::pow(std::max(cb - sb, 0.0), 1.0 / r);
    double rhs = std::pow(std::max(std::pow(a_cap + b_cap, r) - pow_sum(ab), 0.0), 1.0 / r);
    detail::add_link(rep, "scalar-bellman", detail::scalar1(lhs), detail::scalar1(rhs), opt.tol);
    detail::finalize_directed(rep);
    return rep;
}

inline CheckReport check_scalar_remark_chain(const Instance& inst,
                                             const CheckOptions& opt = {}) {
    CheckReport rep;
    rep.check_id = "scalar-remark-chain";
    rep.tol = opt.tol;
    rep.instance = inst;
    const std::vector<double>& a = detail::need_v(inst.a, "a");
    const std::vector<double>& b = detail::need_v(inst.b, "b");
    double m1 = detail::need_v(inst.m1, "m1");
    double m2 = detail::need_v(inst.m2, "m2");
    double r = detail::need_v(inst.r, "r");
    const IntervalBounds& bnd = detail::need_v(inst.bounds, "bounds");

    if (!(r > 2.0 + 1e-9)) return detail::unmet(rep, "need r > 2");
    if (a.size() != b.size() || a.empty())
        return detail::unmet(rep, "a and b must be nonempty lists of equal length");
    for (double x : a)
        if (!(x > 0.0)) return detail::unmet(rep, "entries of a must be positive");
    for (double x : b)
        if (!(x > 0.0)) return detail::unmet(rep, "entries of b must be positive");
    if (!(m1 > 0.0) || !(m2 > 0.0)) return detail::unmet(rep, "need M1, M2 > 0");
    if (!(bnd.m > 0.0) || bnd.M > 1.0 - 1e-6)
        return detail::unmet(rep, "need 0 < m <= M < 1 (margin 1e-6 at 1)");

    double v = m2 / (m1 + m2);
    double sa = 0.0, sb = 0.0, smid = 0.0, sum_ab = 0.0, ssa = 0.0, ssb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += std::pow(a[i] / m1, 1.0 / r);
        sb += std::pow(b[i] / m2, 1.0 / r);
        smid += std::pow((1.0 - v) * (a[i] / m1) + v * (b[i] / m2), 1.0 / r);
        sum_ab += std::pow(a[i] + b[i], 1.0 / r);
        ssa += std::pow(a[i], 1.0 / r);
        ssb += std::pow(b[i], 1.0 / r);
    }
    if (sa < bnd.m - 1e-9 || sa > bnd.M + 1e-9 || sb < bnd.m - 1e-9 || sb > bnd.M + 1e-9)
        return detail::unmet(rep, "scaled sums sum (x/Mi)^(1/r) must lie in [m, M]");
    if (smid > 1.0 - 1e-9)
        return detail::unmet(rep, "mixed sum exceeds 1; (1-t)^r leaves its domain");

    ScalarFunction f = ScalarFunction::power_one_minus(r);
    double K = detail::cached_kantorovich(opt, f, bnd, ConstMethod::ClosedForm);
    double xi = K * K;
    rep.constants["K"] = K;
    rep.constants["xi"] = xi;
    rep.constants["sum_a"] = sa;
    rep.constants["sum_b"] = sb;

    double mean_s = (1.0 - v) * sa + v * sb;
    double l1 = std::pow(1.0 - smid, r);
    double r1 = std::pow(1.0 - mean_s, r);
    double r2 = xi * ((1.0 - v) * std::pow(1.0 - sa, r) + v * std::pow(1.0 - sb, r));
    // final display, evaluated from the raw inputs
    double dl = std::pow(std::pow(m1 + m2, 1.0 / r) - sum_ab, r) / (m1 + m2);
    double dr = xi *
                (std::pow(std::pow(m1, 1.0 / r) - ssa, r) +
                 std::pow(std::pow(m2, 1.0 / r) - ssb, r)) /
                (m1 + m2);

    detail::add_link(rep, "concavity-step", detail::scalar1(l1), detail::scalar1(r1), opt.tol);
    detail::add_link(rep, "kantorovich-step", detail::scalar1(r1), detail::scalar1(r2), opt.tol);
    detail::add_link(rep, "combined-display", detail::scalar1(dl), detail::scalar1(dr), opt.tol);
    rep.lhs = detail::scalar1(dl);
    rep.rhs = detail::scalar1(dr);
    detail::finalize_directed(rep);
    return rep;
}

// ----- registry -------------------------------------------------------------

inline const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids = {
        "bellman-classic", "bellman-reversed", "geometric-chain", "jensen-vector",
        "map-jensen", "prop-concave", "prop-convex", "thm-power",
        "exp-corollary", "lemma-mean-defect", "lemma-map-defect", "additive-theorem",
        "additive-corollary", "counterexample", "scalar-bellman", "scalar-remark-chain"};
    return ids;
}

inline CheckReport run_check(const std::string& id, const Instance& inst,
                             const CheckOptions& opt = {}) {
    if (id == "bellman-classic") return check_bellman_classic(inst, opt);
    if (id == "bellman-reversed") return check_bellman_reversed(inst, opt);
    if (id == "geometric-chain") return check_geometric_chain(inst, opt);
    if (id == "jensen-vector") return check_jensen_vector(inst, opt);
    if (id == "map-jensen") return check_map_jensen(inst, opt);
    if (id == "prop-concave") return check_prop_concave(inst, opt);
    if (id == "prop-convex") return check_prop_convex(inst, opt);
    if (id == "thm-power") return check_thm_power(inst, opt);
    if (id == "exp-corollary") return check_exp_corollary(inst, opt);
    if (id == "lemma-mean-defect") return check_lemma_mean_defect(inst, opt);
    if (id == "lemma-map-defect") return check_lemma_map_defect(inst, opt);
    if (id == "additive-theorem") return check_additive_theorem(inst, opt);
    if (id == "additive-corollary") return check_additive_corollary(inst, opt);
    if (id == "counterexample") return check_counterexample(inst, opt);
    if (id == "scalar-bellman") return check_scalar_bellman(inst, opt);
    if (id == "scalar-remark-chain") return check_scalar_remark_chain(inst, opt);
    throw UnknownCheck("unknown check id '" + id + "'");
}

} // namespace opbell
