#pragma once

#include <cmath>
#include <vector>

#include "opbell/errors.hpp"
#include "opbell/matrix.hpp"

namespace opbell {

// Mean weight v in [0, 1]; A nabla_v B interpolates from A (v=0) to B (v=1).
struct Weight {
    double v;
    explicit Weight(double v_) : v(v_) {
        if (!(v >= 0.0 && v <= 1.0))
            throw InvalidArgument("Weight: v must lie in [0, 1]");
    }
};

inline SymMatrix arith_mean(const SymMatrix& A, const SymMatrix& B, Weight w) {
    A.require_same_dim(B, "arith_mean");
    return A * (1.0 - w.v) + B * w.v;
}

namespace detail {

using Flat = std::vector<double>;

inline Flat matmul(const Flat& a, const Flat& b, int n) {
    Flat c(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double aik = a[static_cast<std::size_t>(i) * n + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < n; ++j)
                c[static_cast<std::size_t>(i) * n + j] +=
                    aik * b[static_cast<std::size_t>(k) * n + j];
        }
    return c;
}

inline Flat to_flat(const SymMatrix& A) {
    int n = A.dim();
    Flat a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = A(i, j);
    return a;
}

inline SymMatrix sym_from_flat(const Flat& a, int n) {
    SymMatrix S(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            S.set(i, j, 0.5 * (a[static_cast<std::size_t>(i) * n + j] +
                               a[static_cast<std::size_t>(j) * n + i]));
    return S;
}

// Q diag(d) Q^T without going through apply_function's domain machinery.
inline SymMatrix assemble(const SpectralDecomp& dec, const std::vector<double>& d) {
    SymMatrix B(dec.n);
    for (int i = 0; i < dec.n; ++i)
        for (int j = i; j < dec.n; ++j) {
            double s = 0.0;
            for (int k = 0; k < dec.n; ++k)
                s += dec.q_at(i, k) * d[static_cast<std::size_t>(k)] * dec.q_at(j, k);
            B.set(i, j, s);
        }
    return B;
}

} // namespace detail

// Weighted geometric mean A #_v B = A^{1/2} (A^{-1/2} B A^{-1/2})^v A^{1/2}.
// Requires A > 0 and B >= 0. Roundoff in the congruence can push eigenvalues
// of the inner term a hair negative; those are clamped to zero before the
// fractional power.
inline SymMatrix geom_mean(const SymMatrix& A, const SymMatrix& B, Weight w) {
    A.require_same_dim(B, "geom_mean");
    const int n = A.dim();

    auto da = spectral_decompose(A);
    double norm_a = std::max(std::abs(da.eigenvalues.front()), std::abs(da.eigenvalues.back()));
    if (da.eigenvalues.front() <= 1e-10 * norm_a || da.eigenvalues.front() <= 0.0)
        throw NotPositiveDefinite("geom_mean: first argument must be positive definite");
    if (min_eigenvalue(B) < -1e-12 * std::max(1.0, operator_norm(B)))
        throw NotPSD("geom_mean: second argument must be positive semidefinite");

    std::vector<double> half(static_cast<std::size_t>(n)), mhalf(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double lam = da.eigenvalues[static_cast<std::size_t>(k)];
        half[static_cast<std::size_t>(k)] = std::sqrt(lam);
        mhalf[static_cast<std::size_t>(k)] = 1.0 / std::sqrt(lam);
    }
    SymMatrix Ah = detail::assemble(da, half);
    SymMatrix Amh = detail::assemble(da, mhalf);

    auto fa = detail::to_flat(Amh);
    auto fb = detail::to_flat(B);
    SymMatrix C = detail::sym_from_flat(detail::matmul(detail::matmul(fa, fb, n), fa, n), n);

    auto dc = spectral_decompose(C);
    double norm_c = std::max(std::abs(dc.eigenvalues.front()), std::abs(dc.eigenvalues.back()));
    std::vector<double> cv(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        double lam = dc.eigenvalues[static_cast<std::size_t>(k)];
        if (lam < -1e-10 * std::max(1.0, norm_c))
            throw NotPSD("geom_mean: inner congruence lost semidefiniteness");
        cv[static_cast<std::size_t>(k)] = std::pow(std::max(lam, 0.0), w.v);
    }
    SymMatrix Cv = detail::assemble(dc, cv);

    auto fh = detail::to_flat(Ah);
    auto fcv = detail::to_flat(Cv);
    return detail::sym_from_flat(detail::matmul(detail::matmul(fh, fcv, n), fh, n), n);
}

} // namespace opbell
