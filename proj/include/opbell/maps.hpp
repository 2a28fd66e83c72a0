#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opbell/errors.hpp"
#include "opbell/matrix.hpp"
#include "opbell/rng.hpp"

namespace opbell {

enum class MapKind { Identity, VectorState, IsometryCompression, Pinching, TraceNormalized, Mixture };

inline const char* to_string(MapKind k) {
    switch (k) {
        case MapKind::Identity: return "identity";
        case MapKind::VectorState: return "vector-state";
        case MapKind::IsometryCompression: return "isometry";
        case MapKind::Pinching: return "pinching";
        case MapKind::TraceNormalized: return "trace";
        default: return "mixture";
    }
}

// Normalized positive linear map Phi: Sym(n_in) -> Sym(n_out). Factories
// validate shape only; verify_normalized() is the semantic check (unit u,
// orthonormal V, Phi(I) = I), and random_map / the spec-string parser refuse
// to hand out maps that fail it.
class PositiveMap {
public:
    static PositiveMap identity(int n) {
        PositiveMap p(MapKind::Identity, n, n);
        return p;
    }

    // X |-> (u^T X u) as a 1x1 matrix
    static PositiveMap vector_state(std::vector<double> u) {
        if (u.empty()) throw InvalidArgument("vector_state: empty vector");
        PositiveMap p(MapKind::VectorState, static_cast<int>(u.size()), 1);
        p.u_ = std::move(u);
        return p;
    }

    // X |-> V^T X V with V an n x k isometry (columns orthonormal)
    static PositiveMap isometry(std::vector<std::vector<double>> v_rows) {
        if (v_rows.empty() || v_rows.front().empty())
            throw InvalidArgument("isometry: empty V");
        int n = static_cast<int>(v_rows.size());
        int k = static_cast<int>(v_rows.front().size());
        for (const auto& row : v_rows)
            if (static_cast<int>(row.size()) != k)
                throw InvalidArgument("isometry: ragged V");
        if (k > n) throw InvalidArgument("isometry: need k <= n");
        PositiveMap p(MapKind::IsometryCompression, n, k);
        p.v_ = std::move(v_rows);
        return p;
    }

    // X |-> sum_b P_b X P_b over a partition of {0,...,n-1} into blocks
    static PositiveMap pinching(int n, std::vector<std::vector<int>> blocks) {
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        for (const auto& blk : blocks)
            for (int i : blk) {
                if (i < 0 || i >= n) throw InvalidArgument("pinching: index out of range");
                if (seen[static_cast<std::size_t>(i)])
                    throw InvalidArgument("pinching: blocks overlap");
                seen[static_cast<std::size_t>(i)] = true;
            }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw InvalidArgument("pinching: blocks must cover every index");
        PositiveMap p(MapKind::Pinching, n, n);
        p.blocks_ = std::move(blocks);
        return p;
    }

    // X |-> (tr X / n) I
    static PositiveMap trace_normalized(int n) {
        return PositiveMap(MapKind::TraceNormalized, n, n);
    }

    static PositiveMap mixture(std::vector<double> weights, std::vector<PositiveMap> parts) {
        if (weights.size() != parts.size() || parts.empty())
            throw InvalidArgument("mixture: weights/components mismatch");
        int n_in = parts.front().n_in_, n_out = parts.front().n_out_;
        double sum = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (parts[i].kind_ == MapKind::Mixture)
                throw InvalidArgument("mixture: components must not be mixtures");
            if (parts[i].n_in_ != n_in || parts[i].n_out_ != n_out)
                throw DimensionMismatch("mixture: components must share dimensions");
            if (weights[i] < 0.0) throw InvalidArgument("mixture: negative weight");
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw InvalidArgument("mixture: weights must sum to 1");
        PositiveMap p(MapKind::Mixture, n_in, n_out);
        p.weights_ = std::move(weights);
        p.parts_ = std::move(parts);
        return p;
    }

    MapKind kind() const { return kind_; }
    int n_in() const { return n_in_; }
    int n_out() const { return n_out_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<std::vector<double>>& v() const { return v_; }
    const std::vector<std::vector<int>>& blocks() const { return blocks_; }
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<PositiveMap>& parts() const { return parts_; }

    SymMatrix apply(const SymMatrix& X) const {
        if (X.dim() != n_in_)
            throw DimensionMismatch("PositiveMap::apply: input dim " + std::to_string(X.dim()) +
                                    " != " + std::to_string(n_in_));
        switch (kind_) {
            case MapKind::Identity:
                return X;
            case MapKind::VectorState: {
                SymMatrix out(1);
                out.set(0, 0, X.quad_form(u_));
                return out;
            }
            case MapKind::IsometryCompression: {
                SymMatrix out(n_out_);
                for (int a = 0; a < n_out_; ++a)
                    for (int b = a; b < n_out_; ++b) {
                        double s = 0.0;
                        for (int i = 0; i < n_in_; ++i)
                            for (int j = 0; j < n_in_; ++j)
                                s += v_[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] *
                                     X(i, j) *
                                     v_[static_cast<std::size_t>(j)][static_cast<std::size_t>(b)];
                        out.set(a, b, s);
                    }
                return out;
            }
            case MapKind::Pinching: {
                SymMatrix out(n_in_);
                for (const auto& blk : blocks_)
                    for (int i : blk)
                        for (int j : blk)
                            if (j >= i) out.set(i, j, X(i, j));
                return out;
            }
            case MapKind::TraceNormalized:
                return SymMatrix::identity(n_in_) * (X.trace() / n_in_);
            case MapKind::Mixture: {
                SymMatrix out(n_out_);
                for (std::size_t i = 0; i < parts_.size(); ++i)
                    out = out + parts_[i].apply(X) * weights_[i];
                return out;
            }
        }
        throw Error("unreachable");
    }

    bool verify_normalized() const {
        SymMatrix img = apply(SymMatrix::identity(n_in_));
        SymMatrix I = SymMatrix::identity(n_out_);
        return (img - I).max_abs() <= 1e-10;
    }

    std::string spec_string() const {
        std::ostringstream os;
        switch (kind_) {
            case MapKind::Identity: os << "identity"; break;
            case MapKind::TraceNormalized: os << "trace"; break;
            case MapKind::VectorState: os << "vector-state:n=" << n_in_; break;
            case MapKind::IsometryCompression: os << "isometry:k=" << n_out_; break;
            case MapKind::Pinching: {
                os << "pinching:blocks=";
                for (std::size_t b = 0; b < blocks_.size(); ++b) {
                    if (b) os << '|';
                    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
                        if (i) os << ',';
                        os << blocks_[b][static_cast<std::size_t>(i)] + 1; // 1-based outside
                    }
                }
                break;
            }
            case MapKind::Mixture: {
                os << "mix:";
                for (std::size_t i = 0; i < parts_.size(); ++i) {
                    if (i) os << '+';
                    os << weights_[i] << '*' << parts_[i].spec_string();
                }
                break;
            }
        }
        return os.str();
    }

private:
    PositiveMap(MapKind k, int n_in, int n_out) : kind_(k), n_in_(n_in), n_out_(n_out) {
        if (n_in < 1 || n_in > kMaxDim || n_out < 1 || n_out > kMaxDim)
            throw InvalidArgument("PositiveMap: dimension out of range");
    }

    MapKind kind_;
    int n_in_;
    int n_out_;
    std::vector<double> u_;
    std::vector<std::vector<double>> v_;
    std::vector<std::vector<int>> blocks_;
    std::vector<double> weights_;
    std::vector<PositiveMap> parts_;
};

namespace detail {

// Haar-ish orthogonal n x k block: gaussian columns, Gram-Schmidt twice,
// R_ii > 0 sign convention makes the result unique for a given stream.
inline std::vector<std::vector<double>> random_isometry_cols(int n, int k, Rng& rng) {
    std::vector<std::vector<double>> cols(static_cast<std::size_t>(k),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    for (auto& col : cols)
        for (auto& x : col) x = rng.gaussian();
    for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < k; ++j) {
            auto& cj = cols[static_cast<std::size_t>(j)];
            for (int i = 0; i < j; ++i) {
                const auto& ci = cols[static_cast<std::size_t>(i)];
                double dot = std::inner_product(cj.begin(), cj.end(), ci.begin(), 0.0);
                for (int t = 0; t < n; ++t)
                    cj[static_cast<std::size_t>(t)] -= dot * ci[static_cast<std::size_t>(t)];
            }
            double norm = std::sqrt(std::inner_product(cj.begin(), cj.end(), cj.begin(), 0.0));
            while (norm < 1e-12) { // essentially impossible, but stay deterministic
                for (auto& x : cj) x = rng.gaussian();
                norm = std::sqrt(std::inner_product(cj.begin(), cj.end(), cj.begin(), 0.0));
            }
            for (auto& x : cj) x /= norm;
        }
    }
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(k)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j)
            rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                cols[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    return rows;
}

inline std::vector<std::vector<int>> random_partition(int n, Rng& rng) {
    int nblocks = 1 + rng.uniform_int(n);
    std::vector<std::vector<int>> blocks(static_cast<std::size_t>(nblocks));
    for (int i = 0; i < n; ++i)
        blocks[static_cast<std::size_t>(rng.uniform_int(nblocks))].push_back(i);
    std::vector<std::vector<int>> nonempty;
    for (auto& b : blocks)
        if (!b.empty()) nonempty.push_back(std::move(b));
    return nonempty;
}

} // namespace detail

inline PositiveMap random_map(MapKind kind, int n, std::uint64_t seed) {
    Rng rng(seed);
    switch (kind) {
        case MapKind::Identity:
            return PositiveMap::identity(n);
        case MapKind::TraceNormalized:
            return PositiveMap::trace_normalized(n);
        case MapKind::VectorState: {
            std::vector<double> u = rng.gaussian_vector(n);
            double norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
            while (norm < 1e-12) {
                u = rng.gaussian_vector(n);
                norm = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
            }
            for (auto& x : u) x /= norm;
            return PositiveMap::vector_state(std::move(u));
        }
        case MapKind::IsometryCompression: {
            int k = (n + 1) / 2;
            auto p = PositiveMap::isometry(detail::random_isometry_cols(n, k, rng));
            if (!p.verify_normalized()) throw Error("random_map: isometry failed normalization");
            return p;
        }
        case MapKind::Pinching:
            return PositiveMap::pinching(n, detail::random_partition(n, rng));
        case MapKind::Mixture: {
            std::vector<PositiveMap> parts;
            parts.push_back(PositiveMap::identity(n));
            parts.push_back(PositiveMap::trace_normalized(n));
            parts.push_back(PositiveMap::pinching(n, detail::random_partition(n, rng)));
            std::vector<double> w(3);
            double sum = 0.0;
            for (auto& x : w) {
                x = 0.1 + rng.uniform();
                sum += x;
            }
            for (auto& x : w) x /= sum;
            // re-normalize the rounding remainder onto the last weight
            w[2] = 1.0 - w[0] - w[1];
            return PositiveMap::mixture(std::move(w), std::move(parts));
        }
    }
    throw Error("unreachable");
}

inline std::vector<MapKind> all_map_kinds() {
    return {MapKind::Identity, MapKind::VectorState, MapKind::IsometryCompression,
            MapKind::Pinching, MapKind::TraceNormalized, MapKind::Mixture};
}

inline MapKind map_kind_from_string(const std::string& s) {
    for (MapKind k : all_map_kinds())
        if (s == to_string(k)) return k;
    throw ParseError("unknown map kind '" + s + "'");
}

// Spec strings: "identity", "trace", "vector-state:seed=7", "isometry:k=2,seed=1",
// "pinching:blocks=1|2,3" (1-based indices), "mix:0.5*identity+0.5*trace".
inline PositiveMap parse_map_spec(const std::string& spec, int n);

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

inline long parse_long(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad integer '" + s + "' in " + what);
    }
}

inline double parse_num(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("bad number '" + s + "' in " + what);
    }
}

inline std::string get_arg(const std::string& args, const std::string& key,
                           const std::string& spec) {
    for (const auto& piece : split(args, ',')) {
        auto eq = piece.find('=');
        if (eq != std::string::npos && piece.substr(0, eq) == key) return piece.substr(eq + 1);
    }
    throw ParseError("map spec '" + spec + "': missing " + key + "=");
}

inline bool has_arg(const std::string& args, const std::string& key) {
    for (const auto& piece : split(args, ',')) {
        auto eq = piece.find('=');
        if (eq != std::string::npos && piece.substr(0, eq) == key) return true;
    }
    return false;
}

} // namespace detail

inline PositiveMap parse_map_spec(const std::string& spec, int n) {
    auto colon = spec.find(':');
    std::string head = spec.substr(0, colon);
    std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);

    if (head == "identity") return PositiveMap::identity(n);
    if (head == "trace") return PositiveMap::trace_normalized(n);
    if (head == "vector-state") {
        std::uint64_t seed = static_cast<std::uint64_t>(
            detail::parse_long(detail::get_arg(args, "seed", spec), spec));
        return random_map(MapKind::VectorState, n, seed);
    }
    if (head == "isometry") {
        std::uint64_t seed = static_cast<std::uint64_t>(
            detail::parse_long(detail::get_arg(args, "seed", spec), spec));
        int k = detail::has_arg(args, "k")
                    ? static_cast<int>(detail::parse_long(detail::get_arg(args, "k", spec), spec))
                    : (n + 1) / 2;
        if (k < 1 || k > n) throw ParseError("map spec '" + spec + "': need 1 <= k <= n");
        Rng rng(seed);
        auto p = PositiveMap::isometry(detail::random_isometry_cols(n, k, rng));
        if (!p.verify_normalized()) throw Error("isometry spec failed normalization");
        return p;
    }
    if (head == "pinching") {
        // the block list itself contains commas, so bypass the k=v tokenizer
        if (args.rfind("blocks=", 0) != 0)
            throw ParseError("map spec '" + spec + "': pinching needs blocks=<list>");
        std::string blocks_arg = args.substr(7);
        std::vector<std::vector<int>> blocks;
        for (const auto& grp : detail::split(blocks_arg, '|')) {
            std::vector<int> blk;
            for (const auto& ix : detail::split(grp, ','))
                blk.push_back(static_cast<int>(detail::parse_long(ix, spec)) - 1);
            blocks.push_back(std::move(blk));
        }
        return PositiveMap::pinching(n, std::move(blocks));
    }
    if (head == "mix") {
        std::vector<double> weights;
        std::vector<PositiveMap> parts;
        for (const auto& term : detail::split(args, '+')) {
            auto star = term.find('*');
            if (star == std::string::npos)
                throw ParseError("map spec '" + spec + "': mixture term '" + term +
                                 "' needs w*component");
            weights.push_back(detail::parse_num(term.substr(0, star), spec));
            parts.push_back(parse_map_spec(term.substr(star + 1), n));
        }
        return PositiveMap::mixture(std::move(weights), std::move(parts));
    }
    throw ParseError("unknown map spec '" + spec + "'");
}

inline nlohmann::json to_json(const PositiveMap& p) {
    nlohmann::json j;
    j["kind"] = to_string(p.kind());
    j["n_in"] = p.n_in();
    j["n_out"] = p.n_out();
    switch (p.kind()) {
        case MapKind::VectorState: j["u"] = p.u(); break;
        case MapKind::IsometryCompression: j["v"] = p.v(); break;
        case MapKind::Pinching: j["blocks"] = p.blocks(); break;
        case MapKind::Mixture: {
            j["weights"] = p.weights();
            nlohmann::json comps = nlohmann::json::array();
            for (const auto& part : p.parts()) comps.push_back(to_json(part));
            j["components"] = comps;
            break;
        }
        default: break;
    }
    return j;
}

inline PositiveMap map_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    int n_in = j.at("n_in").get<int>();
    if (kind == "identity") return PositiveMap::identity(n_in);
    if (kind == "trace") return PositiveMap::trace_normalized(n_in);
    if (kind == "vector-state")
        return PositiveMap::vector_state(j.at("u").get<std::vector<double>>());
    if (kind == "isometry")
        return PositiveMap::isometry(j.at("v").get<std::vector<std::vector<double>>>());
    if (kind == "pinching")
        return PositiveMap::pinching(n_in, j.at("blocks").get<std::vector<std::vector<int>>>());
    if (kind == "mixture") {
        auto weights = j.at("weights").get<std::vector<double>>();
        std::vector<PositiveMap> parts;
        for (const auto& c : j.at("components")) parts.push_back(map_from_json(c));
        return PositiveMap::mixture(std::move(weights), std::move(parts));
    }
    throw ParseError("map json: unknown kind '" + kind + "'");
}

} // namespace opbell
