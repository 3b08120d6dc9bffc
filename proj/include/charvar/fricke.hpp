#pragma once

#include <utility>

#include "charvar/mat2.hpp"

namespace charvar {

// f_t(r1,r2,r3; r) = r^2 + t(t^2-r1-r2-r3) r + t^2(3-r1-r2-r3)
//                    + r1^2 + r2^2 + r3^2 + r1 r2 r3 - 4.
// Vanishes exactly when (r1,r2,r3,r) are the pairwise and triple traces of a
// triple in G(t)^3; symmetric in (r1,r2,r3).
inline cplx f_t_eval(cplx t, cplx r1, cplx r2, cplx r3, cplx r) {
    cplx s = r1 + r2 + r3;
    return r * r + t * (t * t - s) * r + t * t * (3.0 - s) + r1 * r1 + r2 * r2 +
           r3 * r3 + r1 * r2 * r3 - 4.0;
}

// Lexicographic order on (Re, Im); the tie-break rule used for every root
// pair in the library so sampled datasets are reproducible.
inline bool lex_less(const cplx& a, const cplx& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

struct QuadraticRoots {
    cplx first, second;
    bool double_root;
};

// Roots of z^2 + b z + c ordered lexicographically; stable formula.
inline QuadraticRoots solve_monic_quadratic(cplx b, cplx c, double double_tol = 1e-12) {
    cplx disc = b * b - 4.0 * c;
    cplx root = std::sqrt(disc);
    // pick the sign that avoids cancellation in -b -+ root
    cplx q = (std::real(std::conj(b) * root) >= 0.0) ? -0.5 * (b + root) : -0.5 * (b - root);
    cplx z1, z2;
    if (std::abs(q) < 1e-300) { z1 = z2 = -0.5 * b; }
    else { z1 = q; z2 = c / q; }
    if (lex_less(z2, z1)) std::swap(z1, z2);
    return {z1, z2, std::abs(disc) < double_tol};
}

// The two r with f_t(r1,r2,r3; r) = 0.
inline QuadraticRoots solve_f_t(cplx t, cplx r1, cplx r2, cplx r3) {
    cplx s = r1 + r2 + r3;
    cplx b = t * (t * t - s);
    cplx c = t * t * (3.0 - s) + r1 * r1 + r2 * r2 + r3 * r3 + r1 * r2 * r3 - 4.0;
    return solve_monic_quadratic(b, c);
}

inline bool in_Bt(cplx value, cplx t, double margin = 0.0) {
    return std::abs(value - 2.0) > margin && std::abs(value - (t * t - 2.0)) > margin;
}

} // namespace charvar
