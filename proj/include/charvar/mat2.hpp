#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>

#include "charvar/errors.hpp"
#include "charvar/rng.hpp"

namespace charvar {

inline constexpr double kTolConstruct = 1e-12; // det drift from closed formulas
inline constexpr double kTolProduct   = 1e-9;  // det drift after long products
inline constexpr double kTolCommute   = 1e-10;

// 2x2 matrix over a commutative scalar ring S. All group elements are kept
// with determinant 1, so the inverse is the adjugate.
template <typename S>
struct Mat2T {
    S a11{}, a12{}, a21{}, a22{};

    static Mat2T identity() { return {S(1), S(0), S(0), S(1)}; }

    S trace() const { return a11 + a22; }
    S det() const { return a11 * a22 - a12 * a21; }

    Mat2T adjugate() const { return {a22, -a12, -a21, a11}; }

    friend Mat2T operator*(const Mat2T& x, const Mat2T& y) {
        return {x.a11 * y.a11 + x.a12 * y.a21, x.a11 * y.a12 + x.a12 * y.a22,
                x.a21 * y.a11 + x.a22 * y.a21, x.a21 * y.a12 + x.a22 * y.a22};
    }
    friend Mat2T operator+(const Mat2T& x, const Mat2T& y) {
        return {x.a11 + y.a11, x.a12 + y.a12, x.a21 + y.a21, x.a22 + y.a22};
    }
    friend Mat2T operator-(const Mat2T& x, const Mat2T& y) {
        return {x.a11 - y.a11, x.a12 - y.a12, x.a21 - y.a21, x.a22 - y.a22};
    }
    Mat2T operator-() const { return {-a11, -a12, -a21, -a22}; }

    friend Mat2T operator*(const S& c, const Mat2T& x) {
        return {c * x.a11, c * x.a12, c * x.a21, c * x.a22};
    }
};

using Mat2 = Mat2T<cplx>;

inline Mat2 mat2(cplx a11, cplx a12, cplx a21, cplx a22) { return {a11, a12, a21, a22}; }

// d(kappa), u(kappa), p(u) and the constants of the group calculus.
inline Mat2 dmat(cplx kappa) { return {kappa, 0.0, 0.0, 1.0 / kappa}; }
inline Mat2 umat(cplx kappa) { return {kappa, 1.0, 0.0, 1.0 / kappa}; }
inline Mat2 pmat(cplx u) { return {1.0, u, 0.0, 1.0}; }
inline Mat2 eye() { return Mat2::identity(); }

inline double norm_inf(const Mat2& x) {
    return std::max(std::max(std::abs(x.a11), std::abs(x.a12)),
                    std::max(std::abs(x.a21), std::abs(x.a22)));
}

inline double dist_inf(const Mat2& x, const Mat2& y) { return norm_inf(x - y); }

inline Mat2 mul(const Mat2& x, const Mat2& y) { return x * y; }

inline Mat2 inv(const Mat2& x, double tol_det = kTolProduct) {
    if (std::abs(x.det() - 1.0) > tol_det)
        throw DetDrift("inv: determinant drifted from 1 beyond tolerance");
    return x.adjugate();
}

// a |> x = a x a^{-1}; the conjugation used in every crossing relation.
template <typename S>
Mat2T<S> conj_by(const Mat2T<S>& c, const Mat2T<S>& x) {
    return c * x * c.adjugate();
}

inline bool is_commuting(const Mat2& a, const Mat2& b, double tol = kTolCommute) {
    return dist_inf(a * b, b * a) <= tol;
}

// kappa + 1/kappa = t, principal branch of (t + sqrt(t^2-4))/2. The branch is
// part of the value so downstream constructions are deterministic.
struct TraceValue {
    cplx t;
    cplx kappa;

    explicit TraceValue(cplx trace) : t(trace) {
        kappa = 0.5 * (t + std::sqrt(t * t - 4.0));
        if (std::abs(kappa) < 0.5) // guard against cancellation for large |t|
            kappa = 1.0 / (0.5 * (t - std::sqrt(t * t - 4.0)));
    }

    bool parabolic(double tol = 1e-9) const {
        return std::abs(t - 2.0) < tol || std::abs(t + 2.0) < tol;
    }
    // sign epsilon with t = 2*eps when parabolic
    double eps() const { return t.real() >= 0.0 ? 1.0 : -1.0; }
};

// omega_k(r) = (mu^k - mu^{-k})/(mu - mu^{-1}) with r = mu + 1/mu. Near the
// branch points r = +-2 the quotient cancels catastrophically, so the
// three-term recurrence (polynomial in r, exact) is used instead.
inline cplx omega(long k, cplx r) {
    bool neg = k < 0;
    unsigned long n = neg ? static_cast<unsigned long>(-k) : static_cast<unsigned long>(k);
    cplx value;
    if (std::abs(r - 2.0) < 1e-6 || std::abs(r + 2.0) < 1e-6 || n <= 1) {
        cplx prev = 0.0, cur = 1.0; // omega_0, omega_1
        if (n == 0) value = prev;
        else {
            for (unsigned long j = 1; j < n; ++j) {
                cplx next = r * cur - prev;
                prev = cur;
                cur = next;
            }
            value = cur;
        }
    } else {
        cplx mu = TraceValue(r).kappa;
        cplx muk = std::pow(mu, static_cast<double>(n));
        value = (muk - 1.0 / muk) / (mu - 1.0 / mu);
    }
    return neg ? -value : value;
}

// x^k = omega_k(r) x - omega_{k-1}(r) e, r = tr(x) (Cayley-Hamilton power).
inline Mat2 power_cayley(const Mat2& x, long k) {
    if (k < 0) return power_cayley(x.adjugate(), -k);
    cplx r = x.trace();
    cplx wk = omega(k, r), wk1 = omega(k - 1, r);
    Mat2 out = wk * x - wk1 * eye();
    return out;
}

// Centralizer parameterization mu*a + nu*e with mu^2 + t*mu*nu + nu^2 = 1.
struct CentralizerBranches {
    Mat2 value[2];
    bool collided; // the two nu roots coincide
};

inline CentralizerBranches centralizer_branches(const Mat2& a, cplx t, cplx mu) {
    cplx disc = t * t * mu * mu - 4.0 * (mu * mu - 1.0);
    cplx root = std::sqrt(disc);
    cplx nu0 = 0.5 * (-t * mu + root);
    cplx nu1 = 0.5 * (-t * mu - root);
    CentralizerBranches out;
    out.value[0] = mu * a + nu0 * eye();
    out.value[1] = mu * a + nu1 * eye();
    out.collided = std::abs(root) < 1e-12;
    return out;
}

inline Mat2 centralizer_element(const Mat2& a, cplx t, cplx mu, int branch) {
    return centralizer_branches(a, t, mu).value[branch ? 1 : 0];
}

// --- eigen frames ----------------------------------------------------------
//
// standard_frame(a) returns g in SL(2,C) with g^{-1} a g = d(kappa) when a is
// non-parabolic, and g^{-1} a g = eps*p(1) when tr(a) = +-2, a != +-e. The
// construction is deterministic in the entries of a.

struct Frame {
    Mat2 g;        // the conjugator: a = g * normal * g^{-1}
    cplx kappa;    // eigenvalue mapped to the (1,1) slot (non-parabolic case)
    bool parabolic;
    double eps;    // +-1 for the parabolic branch
};

namespace detail {

inline void scale_to_det1(Mat2& g) {
    cplx d = g.det();
    if (std::abs(d) < 1e-14)
        throw Error("frame: singular eigenvector matrix");
    cplx s = std::sqrt(d);
    g = (1.0 / s) * g;
}

} // namespace detail

inline Frame standard_frame(const Mat2& a) {
    TraceValue tv(a.trace());
    Frame f;
    if (!tv.parabolic()) {
        cplx k = tv.kappa;
        cplx v1x, v1y, v2x, v2y;
        // eigenvector for kappa and for 1/kappa
        if (std::abs(a.a12) >= std::abs(a.a21) && std::abs(a.a12) > 1e-14) {
            v1x = a.a12; v1y = k - a.a11;
            v2x = a.a12; v2y = 1.0 / k - a.a11;
        } else if (std::abs(a.a21) > 1e-14) {
            v1x = k - a.a22; v1y = a.a21;
            v2x = 1.0 / k - a.a22; v2y = a.a21;
        } else {
            // already diagonal; kappa sits in one of the two slots
            bool kappa_first = std::abs(a.a11 - k) < std::abs(a.a22 - k);
            v1x = kappa_first ? 1.0 : 0.0; v1y = kappa_first ? 0.0 : 1.0;
            v2x = kappa_first ? 0.0 : 1.0; v2y = kappa_first ? 1.0 : 0.0;
        }
        // unit columns keep the conjugation well conditioned
        double n1 = std::hypot(std::abs(v1x), std::abs(v1y));
        double n2 = std::hypot(std::abs(v2x), std::abs(v2y));
        Mat2 g{v1x / n1, v2x / n2, v1y / n1, v2y / n2};
        detail::scale_to_det1(g);
        f.g = g;
        f.kappa = k;
        f.parabolic = false;
        f.eps = 0.0;
        return f;
    }
    double eps = tv.eps();
    Mat2 n = eps * a - eye(); // nilpotent part, rank 1 unless a = +-e
    if (norm_inf(n) < 1e-13)
        throw Error("standard_frame: central element has no parabolic frame");
    // eigenvector v1 spans the image of n (any nonzero column)
    cplx v1x, v1y;
    if (std::max(std::abs(n.a11), std::abs(n.a21)) > 1e-12 * norm_inf(n)) { v1x = n.a11; v1y = n.a21; }
    else { v1x = n.a12; v1y = n.a22; }
    // complete with any v2, then normalize so the off-diagonal entry is eps
    cplx v2x, v2y;
    if (std::abs(v1x) >= std::abs(v1y)) { v2x = 0.0; v2y = 1.0; }
    else { v2x = 1.0; v2y = 0.0; }
    Mat2 g{v1x, v2x, v1y, v2y};
    detail::scale_to_det1(g);
    // n * v2 = c1 * v1; rescale v1 -> s*v1, v2 -> v2/s so that c1/s^2 = 1
    Mat2 gi = g.adjugate();
    Mat2 nf = gi * a * g;
    cplx c1 = nf.a12 * eps; // entry of eps * normal form, want 1
    cplx s = std::sqrt(c1);
    Mat2 scale{s, 0.0, 0.0, 1.0 / s};
    g = g * scale;
    f.g = g;
    f.kappa = eps;
    f.parabolic = true;
    f.eps = eps;
    return f;
}

// Common-eigenvector test for a pair (reducibility in the Lemma sense).
inline bool is_reducible_pair(const Mat2& a, const Mat2& b, double tol = 1e-8) {
    auto invariant_line = [tol](const Mat2& m, cplx vx, cplx vy) {
        cplx wx = m.a11 * vx + m.a12 * vy;
        cplx wy = m.a21 * vx + m.a22 * vy;
        double cross = std::abs(wx * vy - wy * vx);
        double scale = std::hypot(std::abs(vx), std::abs(vy)) *
                       std::hypot(std::abs(wx), std::abs(wy));
        return cross <= tol * std::max(scale, 1e-30);
    };
    // candidate eigenvectors of a
    TraceValue tv(a.trace());
    std::array<std::pair<cplx, cplx>, 2> vs;
    int nv = 0;
    if (!tv.parabolic()) {
        for (cplx k : {tv.kappa, 1.0 / tv.kappa}) {
            if (std::abs(a.a12) > 1e-14) vs[nv++] = {a.a12, k - a.a11};
            else if (std::abs(a.a21) > 1e-14) vs[nv++] = {k - a.a22, a.a21};
            else vs[nv++] = (std::abs(a.a11 - k) < std::abs(a.a22 - k))
                                ? std::pair<cplx, cplx>{1.0, 0.0}
                                : std::pair<cplx, cplx>{0.0, 1.0};
        }
    } else {
        Mat2 n = tv.eps() * a - eye();
        if (norm_inf(n) < 1e-13) return true; // central: everything reducible
        if (std::abs(n.a11) > 1e-14 || std::abs(n.a21) > 1e-14) vs[nv++] = {n.a11, n.a21};
        else vs[nv++] = {n.a12, n.a22};
    }
    for (int i = 0; i < nv; ++i)
        if (invariant_line(b, vs[i].first, vs[i].second)) return true;
    return false;
}

// Random trace-t element: a conjugate of d(kappa) (or eps*p) by a random
// bounded conjugator. Used throughout the property suites.
inline Mat2 random_gt(Rng& rng, cplx t) {
    TraceValue tv(t);
    Mat2 base = tv.parabolic() ? tv.eps() * pmat(1.0) : dmat(tv.kappa);
    for (;;) {
        Mat2 g{rng.disk(1.5) + cplx(1.0, 0.0), rng.disk(1.5), rng.disk(1.5),
               rng.disk(1.5) + cplx(1.0, 0.0)};
        cplx d = g.det();
        if (std::abs(d) < 0.3) continue;
        g = (1.0 / std::sqrt(d)) * g;
        if (norm_inf(g) > 2.5) continue;
        return conj_by(g, base);
    }
}

inline Mat2 random_sl2(Rng& rng) {
    for (;;) {
        Mat2 g{rng.disk(1.5) + cplx(1.0, 0.0), rng.disk(1.5), rng.disk(1.5),
               rng.disk(1.5) + cplx(1.0, 0.0)};
        cplx d = g.det();
        if (std::abs(d) < 0.3) continue;
        g = (1.0 / std::sqrt(d)) * g;
        if (norm_inf(g) > 2.5) continue;
        return g;
    }
}

} // namespace charvar
