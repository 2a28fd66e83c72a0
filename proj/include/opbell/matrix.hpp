#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opbell/errors.hpp"
#include "opbell/functions.hpp"

namespace opbell {

inline constexpr int kMaxDim = 16;

// Dense real symmetric matrix, row-major, dimension capped at kMaxDim.
// Construction symmetrizes inputs whose asymmetry sits below the noise
// threshold and rejects anything larger.
class SymMatrix {
public:
    explicit SymMatrix(int n) : n_(check_dim(n)), a_(static_cast<std::size_t>(n) * n, 0.0) {}

    static SymMatrix identity(int n) {
        SymMatrix I(n);
        for (int i = 0; i < n; ++i) I.at(i, i) = 1.0;
        return I;
    }

    static SymMatrix diagonal(const std::vector<double>& d) {
        SymMatrix D(static_cast<int>(d.size()));
        for (int i = 0; i < D.n_; ++i) D.at(i, i) = d[static_cast<std::size_t>(i)];
        return D;
    }

    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        int n = check_dim(static_cast<int>(rows.size()));
        for (const auto& r : rows)
            if (static_cast<int>(r.size()) != n)
                throw InvalidArgument("from_rows: ragged rows");
        SymMatrix A(n);
        double max_abs = 0.0, max_asym = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                max_abs = std::max(max_abs, std::abs(rows[i][j]));
                max_asym = std::max(max_asym, std::abs(rows[i][j] - rows[j][i]));
            }
        if (max_asym > 1e-12 * std::max(1.0, max_abs)) {
            std::ostringstream os;
            os << "from_rows: asymmetry " << max_asym << " exceeds threshold";
            throw NonSymmetric(os.str());
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                A.at(i, j) = 0.5 * (rows[i][j] + rows[j][i]);
        return A;
    }

    int dim() const { return n_; }

    double operator()(int i, int j) const { return a_[idx(i, j)]; }

    void set(int i, int j, double v) {
        at(i, j) = v;
        at(j, i) = v;
    }

    SymMatrix operator+(const SymMatrix& o) const {
        require_same_dim(o, "operator+");
        SymMatrix r(n_);
        for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] + o.a_[k];
        return r;
    }

    SymMatrix operator-(const SymMatrix& o) const {
        require_same_dim(o, "operator-");
        SymMatrix r(n_);
        for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = a_[k] - o.a_[k];
        return r;
    }

    SymMatrix operator*(double c) const {
        SymMatrix r(n_);
        for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] = c * a_[k];
        return r;
    }

    friend SymMatrix operator*(double c, const SymMatrix& A) { return A * c; }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < n_; ++i) t += at(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : a_) m = std::max(m, std::abs(x));
        return m;
    }

    double frobenius() const {
        double s = 0.0;
        for (double x : a_) s += x * x;
        return std::sqrt(s);
    }

    bool equals(const SymMatrix& o, double tol) const {
        if (n_ != o.n_) return false;
        for (std::size_t k = 0; k < a_.size(); ++k)
            if (std::abs(a_[k] - o.a_[k]) > tol) return false;
        return true;
    }

    // x^T A x for a plain vector
    double quad_form(const std::vector<double>& x) const {
        if (static_cast<int>(x.size()) != n_)
            throw DimensionMismatch("quad_form: vector length != dim");
        double s = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                s += x[static_cast<std::size_t>(i)] * at(i, j) * x[static_cast<std::size_t>(j)];
        return s;
    }

    void require_same_dim(const SymMatrix& o, const char* where) const {
        if (n_ != o.n_)
            throw DimensionMismatch(std::string(where) + ": dimensions " +
                                    std::to_string(n_) + " vs " + std::to_string(o.n_));
    }

private:
    static int check_dim(int n) {
        if (n < 1 || n > kMaxDim)
            throw InvalidArgument("matrix dimension must be in [1, " +
                                  std::to_string(kMaxDim) + "], got " + std::to_string(n));
        return n;
    }

    std::size_t idx(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_) +
               static_cast<std::size_t>(j);
    }

    double& at(int i, int j) { return a_[idx(i, j)]; }
    double at(int i, int j) const { return a_[idx(i, j)]; }

    int n_;
    std::vector<double> a_;
};

struct SpectralDecomp {
    int n = 0;
    std::vector<double> eigenvalues;   // ascending
    std::vector<double> q;             // orthogonal, columns are eigenvectors

    double q_at(int i, int j) const {
        return q[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
                 static_cast<std::size_t>(j)];
    }
};

// Cyclic Jacobi. Sweeps upper-triangle rotations until the off-diagonal
// Frobenius mass drops below 1e-14 * ||A||_F; hard cap 100 sweeps.
inline SpectralDecomp spectral_decompose(const SymMatrix& A) {
    const int n = A.dim();
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a[static_cast<std::size_t>(i) * n + j] = A(i, j);
    std::vector<double> q(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) q[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto el = [&](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i) * n + j];
    };

    double frob = A.frobenius();
    const double stop = 1e-14 * frob;
    bool converged = (frob == 0.0) || (n == 1);

    for (int sweep = 0; sweep < 100 && !converged; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * el(a, i, j) * el(a, i, j);
        if (std::sqrt(off) <= stop) {
            converged = true;
            break;
        }
        for (int p = 0; p < n - 1; ++p) {
            for (int r = p + 1; r < n; ++r) {
                double apr = el(a, p, r);
                if (apr == 0.0) continue;
                double app = el(a, p, p), arr = el(a, r, r);
                double theta = 0.5 * (arr - app) / apr;
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;

                for (int k = 0; k < n; ++k) {
                    double akp = el(a, k, p), akr = el(a, k, r);
                    el(a, k, p) = c * akp - s * akr;
                    el(a, k, r) = s * akp + c * akr;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = el(a, p, k), ark = el(a, r, k);
                    el(a, p, k) = c * apk - s * ark;
                    el(a, r, k) = s * apk + c * ark;
                }
                for (int k = 0; k < n; ++k) {
                    double qkp = el(q, k, p), qkr = el(q, k, r);
                    el(q, k, p) = c * qkp - s * qkr;
                    el(q, k, r) = s * qkp + c * qkr;
                }
                el(a, p, r) = 0.0;
                el(a, r, p) = 0.0;
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * el(a, i, j) * el(a, i, j);
        if (std::sqrt(off) > stop)
            throw ConvergenceFailure("spectral_decompose: Jacobi did not converge in 100 sweeps");
    }

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int i, int j) {
        return el(a, i, i) < el(a, j, j);
    });

    SpectralDecomp d;
    d.n = n;
    d.eigenvalues.resize(static_cast<std::size_t>(n));
    d.q.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        d.eigenvalues[static_cast<std::size_t>(j)] = el(a, perm[static_cast<std::size_t>(j)],
                                                        perm[static_cast<std::size_t>(j)]);
        for (int i = 0; i < n; ++i)
            d.q[static_cast<std::size_t>(i) * n + j] = el(q, i, perm[static_cast<std::size_t>(j)]);
    }
    return d;
}

// f(A) = Q f(Lambda) Q^T. Eigenvalues that overshoot a closed domain endpoint
// by at most the margin are clamped onto it; anything else raises.
inline SymMatrix apply_function(const SymMatrix& A, const ScalarFunction& f) {
    SpectralDecomp d = spectral_decompose(A);
    const int n = d.n;
    std::vector<double> fv(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double lam = d.eigenvalues[static_cast<std::size_t>(k)];
        if (!f.domain().contains(lam))
            throw DomainViolation("apply_function: eigenvalue " +
                                  ScalarFunction::format_double(lam) + " outside domain " +
                                  f.domain().describe() + " of " + f.spec_string());
        fv[static_cast<std::size_t>(k)] = f.eval(lam);
    }
    SymMatrix B(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += d.q_at(i, k) * fv[static_cast<std::size_t>(k)] * d.q_at(j, k);
            B.set(i, j, s);
        }
    return B;
}

inline double min_eigenvalue(const SymMatrix& A) {
    return spectral_decompose(A).eigenvalues.front();
}

inline double max_eigenvalue(const SymMatrix& A) {
    return spectral_decompose(A).eigenvalues.back();
}

inline double operator_norm(const SymMatrix& A) {
    auto d = spectral_decompose(A);
    return std::max(std::abs(d.eigenvalues.front()), std::abs(d.eigenvalues.back()));
}

inline bool is_psd(const SymMatrix& A, double tol) {
    if (tol < 0) throw InvalidArgument("is_psd: tol must be nonnegative");
    auto d = spectral_decompose(A);
    double norm = std::max(std::abs(d.eigenvalues.front()), std::abs(d.eigenvalues.back()));
    return d.eigenvalues.front() >= -tol * std::max(1.0, norm);
}

inline bool spectrum_in(const SymMatrix& A, double m, double M, double tol) {
    auto d = spectral_decompose(A);
    return d.eigenvalues.front() >= m - tol && d.eigenvalues.back() <= M + tol;
}

enum class Loewner { LessEq, GreaterEq, Equal, Incomparable };

inline const char* to_string(Loewner r) {
    switch (r) {
        case Loewner::LessEq: return "less-equal";
        case Loewner::GreaterEq: return "greater-equal";
        case Loewner::Equal: return "equal";
        default: return "incomparable";
    }
}

struct LoewnerVerdict {
    Loewner relation;
    double min_eig_ba;   // lambda_min(B - A); >= -tol_eff certifies A <= B
    double min_eig_ab;   // lambda_min(A - B)
    double tol_eff;      // requested tol scaled by max(1, ||A||, ||B||)
};

// Order comparison under a relative tolerance: tol is scaled by the operator
// norms of the operands so verdicts do not depend on overall magnitude.
inline LoewnerVerdict loewner_compare(const SymMatrix& A, const SymMatrix& B, double tol) {
    A.require_same_dim(B, "loewner_compare");
    SymMatrix D = B - A;
    auto d = spectral_decompose(D);
    double min_ba = d.eigenvalues.front();
    double min_ab = -d.eigenvalues.back();
    double scale = std::max({1.0, operator_norm(A), operator_norm(B)});
    double eff = tol * scale;
    LoewnerVerdict v{Loewner::Incomparable, min_ba, min_ab, eff};
    bool le = min_ba >= -eff;
    bool ge = min_ab >= -eff;
    if (le && ge) v.relation = Loewner::Equal;
    else if (le) v.relation = Loewner::LessEq;
    else if (ge) v.relation = Loewner::GreaterEq;
    return v;
}

inline nlohmann::json to_json(const SymMatrix& A) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < A.dim(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < A.dim(); ++j) row.push_back(A(i, j));
        rows.push_back(row);
    }
    return nlohmann::json{{"n", A.dim()}, {"rows", rows}};
}

inline SymMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.contains("n") || !j.contains("rows"))
        throw ParseError("matrix json: expected {\"n\", \"rows\"}");
    int n = j.at("n").get<int>();
    auto rows = j.at("rows").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(rows.size()) != n)
        throw ParseError("matrix json: row count != n");
    return SymMatrix::from_rows(rows);
}

} // namespace opbell
