#pragma once

#include <Eigen/Dense>
#include <utility>

#include "charvar/fricke.hpp"
#include "charvar/mat2.hpp"

namespace charvar {

// Canonical trace-(t,t,t12) pair. For t != +-2:
//   a1 = d(kappa),  a2 = [ t/2 + m   1          ]
//                        [ q         t/2 - m    ]
// with m = (t12 - t^2/2)/(kappa - 1/kappa) and
// q = (t12 - 2)(t12 - t^2 + 2)/(4 - t^2); det(a2) = 1 identically.
// For t = 2*eps: a1 = eps*p(1), a2 = eps*[1 0; t12-2 1] (a2 = eps*p(-1) when
// t12 = 2, keeping a2 non-central).
inline std::pair<Mat2, Mat2> canonical_pair(cplx t, cplx t12) {
    TraceValue tv(t);
    if (!tv.parabolic()) {
        cplx k = tv.kappa;
        cplx dk = k - 1.0 / k;
        cplx m = (t12 - 0.5 * t * t) / dk;
        cplx q = (t12 - 2.0) * (t12 - t * t + 2.0) / (4.0 - t * t);
        Mat2 a1 = dmat(k);
        Mat2 a2{0.5 * t + m, 1.0, q, 0.5 * t - m};
        return {a1, a2};
    }
    double eps = tv.eps();
    Mat2 a1 = eps * pmat(1.0);
    if (std::abs(t12 - 2.0) < 1e-12) return {a1, eps * pmat(-1.0)};
    cplx c = eps * (t12 - 2.0);
    Mat2 a2{eps, 0.0, c, eps};
    return {a1, a2};
}

// Fiber C_t^r(a) = {x in G(t) : tr(ax) = r}; u is the fiber coordinate
// (u != 0 when t != +-2). Works in the standard frame of a.
inline Mat2 sample_Ctr(const Mat2& a, cplx t, cplx r, cplx u) {
    if (!in_Bt(r, t))
        throw DegenerateTarget("sample_Ctr: r lies in {2, t^2-2}");
    Frame f = standard_frame(a);
    Mat2 x;
    if (!f.parabolic) {
        cplx k = f.kappa;
        cplx m = (r - 0.5 * t * t) / (k - 1.0 / k);
        cplx bc = (r - 2.0) * (r - t * t + 2.0) / (4.0 - t * t);
        if (std::abs(u) < 1e-14)
            throw Error("sample_Ctr: fiber coordinate must be nonzero for t != +-2");
        // scale the fiber coordinate so |b| = |c| at |u| = 1
        cplx b = u * std::sqrt(std::abs(bc));
        x = Mat2{0.5 * t + m, b, bc / b, 0.5 * t - m};
    } else {
        double eps = f.eps;
        cplx c = eps * (r - 2.0);
        x = Mat2{0.5 * t + u, -u * u / c, c, 0.5 * t - u};
    }
    return conj_by(f.g, x);
}

// Unique a3 = alpha*e + beta*a1 + gamma*a2 + delta*a1*a2 with prescribed
// tr(a3) = t, tr(a1 a3) = t13, tr(a2 a3) = t23, tr(a1 a2 a3) = t123.
// Requires the Fricke relation on (tr(a1 a2), t13, t23; t123) and an
// irreducible pair; the solved matrix then has det 1 automatically.
inline Mat2 complete_triple(const Mat2& a1, const Mat2& a2, cplx t, cplx t13,
                            cplx t23, cplx t123, double fricke_tol = 1e-8) {
    cplx t12 = (a1 * a2).trace();
    cplx res = f_t_eval(t, t12, t13, t23, t123);
    if (std::abs(res) > fricke_tol)
        throw InconsistentFricke("complete_triple: |f_t| = " + std::to_string(std::abs(res)));

    Mat2 basis[4] = {eye(), a1, a2, a1 * a2};
    Mat2 tests[4] = {eye(), a1, a2, a1 * a2};
    cplx target[4] = {t, t13, t23, t123};

    Eigen::Matrix4cd M;
    Eigen::Vector4cd rhs;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) M(i, j) = (tests[i] * basis[j]).trace();
        rhs(i) = target[i];
    }
    Eigen::JacobiSVD<Eigen::Matrix4cd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    double cond = svd.singularValues()(0) / std::max(svd.singularValues()(3), 1e-300);
    if (cond > 1e12)
        throw ReduciblePair("complete_triple: basis {e,a1,a2,a1a2} is numerically singular");
    Eigen::Vector4cd coef = svd.solve(rhs);
    for (int round = 0; round < 2; ++round) // iterative refinement
        coef += svd.solve(Eigen::Vector4cd(rhs - M * coef));
    Mat2 a3 = coef(0) * basis[0] + coef(1) * basis[1] + coef(2) * basis[2] + coef(3) * basis[3];
    return a3;
}

// c with c src c^{-1} = dst for irreducible pairs with matching trace data;
// unique up to sign. Solves the 8x4 homogeneous system c*s_i - d_i*c = 0.
inline Mat2 align_pair(const std::pair<Mat2, Mat2>& src, const std::pair<Mat2, Mat2>& dst,
                       double trace_tol = 1e-8) {
    const Mat2 &s1 = src.first, &s2 = src.second;
    const Mat2 &d1 = dst.first, &d2 = dst.second;
    if (std::abs(s1.trace() - d1.trace()) > trace_tol ||
        std::abs(s2.trace() - d2.trace()) > trace_tol ||
        std::abs((s1 * s2).trace() - (d1 * d2).trace()) > trace_tol)
        throw TraceMismatch("align_pair: trace triples disagree");
    if (is_reducible_pair(s1, s2) || is_reducible_pair(d1, d2))
        throw ReduciblePair("align_pair: pair is reducible");

    // rows: entries of c*s - d*c, c flattened as (c11, c12, c21, c22)
    Eigen::Matrix<cplx, 8, 4> A;
    A.setZero();
    auto put = [&A](int row, const Mat2& s, const Mat2& d) {
        // (c*s)_{11} - (d*c)_{11} etc.
        A(row + 0, 0) = s.a11 - d.a11; A(row + 0, 1) = s.a21;        A(row + 0, 2) = -d.a12;
        A(row + 1, 0) = s.a12;         A(row + 1, 1) = s.a22 - d.a11; A(row + 1, 3) = -d.a12;
        A(row + 2, 2) = s.a11 - d.a22; A(row + 2, 3) = s.a21;        A(row + 2, 0) = -d.a21;
        A(row + 3, 2) = s.a12;         A(row + 3, 3) = s.a22 - d.a22; A(row + 3, 1) = -d.a21;
    };
    put(0, s1, d1);
    put(4, s2, d2);
    Eigen::JacobiSVD<Eigen::Matrix<cplx, 8, 4>> svd(A, Eigen::ComputeFullV);
    Eigen::Vector4cd v = svd.matrixV().col(3);
    Mat2 c{v(0), v(1), v(2), v(3)};
    cplx det = c.det();
    if (std::abs(det) < 1e-12)
        throw AlignmentFailure("align_pair: conjugator degenerate");
    c = (1.0 / std::sqrt(det)) * c;
    // deterministic sign: first entry of modulus >= 1e-9 gets Re > 0
    cplx entries[4] = {c.a11, c.a12, c.a21, c.a22};
    for (const cplx& e : entries) {
        if (std::abs(e) >= 1e-9) {
            if (e.real() < 0.0 || (e.real() == 0.0 && e.imag() < 0.0)) c = -c;
            break;
        }
    }
    double res = std::max(dist_inf(conj_by(c, s1), d1), dist_inf(conj_by(c, s2), d2));
    if (res > 1e-6)
        throw AlignmentFailure("align_pair: residual " + std::to_string(res));
    return c;
}

} // namespace charvar
