#pragma once

#include <Eigen/Dense>

#include "charvar/poly.hpp"
#include "charvar/tanglerep.hpp"

namespace charvar {

inline std::vector<cplx> poly_roots(const Poly& p) {
    // trim trailing near-zero coefficients relative to the largest
    double scale = p.max_coeff();
    if (scale == 0.0) return {};
    int deg = static_cast<int>(p.c.size()) - 1;
    while (deg > 0 && std::abs(p.c[deg]) < 1e-12 * scale) --deg;
    if (deg == 0) return {};
    Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(deg, deg);
    for (int i = 0; i < deg; ++i) {
        companion(i, deg - 1) = -p.c[i] / p.c[deg];
        if (i + 1 < deg) companion(i + 1, i) = 1.0;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(companion, /*computeEigenvectors=*/false);
    std::vector<cplx> roots;
    for (int i = 0; i < deg; ++i) roots.push_back(es.eigenvalues()(i));
    return roots;
}

// Polynomial-in-s arc assignment: canonical pair with the pair trace kept as
// the variable s; determinants stay 1 identically, so the whole propagation
// remains polynomial.
inline std::pair<Mat2T<Poly>, Mat2T<Poly>> canonical_pair_poly(cplx t) {
    TraceValue tv(t);
    if (tv.parabolic()) throw Error("canonical_pair_poly: t = +-2 not supported");
    cplx k = tv.kappa;
    Poly s = Poly::variable();
    Poly m = (1.0 / (k - 1.0 / k)) * Poly(std::vector<cplx>{-0.5 * t * t, 1.0});
    // q = (s-2)(s-t^2+2)/(4-t^2)
    Poly q = (1.0 / (4.0 - t * t)) *
             (Poly(std::vector<cplx>{-2.0, 1.0}) * Poly(std::vector<cplx>{2.0 - t * t, 1.0}));
    Mat2T<Poly> a1{Poly(k), Poly(0.0), Poly(0.0), Poly(1.0 / k)};
    Mat2T<Poly> a2{Poly(0.5 * t) + m, Poly(1.0), q, Poly(0.5 * t) - m};
    return {a1, a2};
}

struct ClosureRoot {
    cplx s;
    double defect;
};

namespace detail {

// numeric rebuild + defect at a specific s
inline double closure_defect_at(const Diagram& d, cplx t, cplx s, ClosureKind closure) {
    auto [m0, m1] = canonical_pair(t, s);
    ArcValues<cplx> vals(d.n_arcs);
    auto ends = canonical_input_ends(d);
    seed_end(vals, ends.first, m0);
    seed_end(vals, ends.second, m1);
    propagate_fixpoint(d, vals);
    if (!vals.complete()) return 1e300;
    TangleRep rep;
    rep.diagram = &d;
    rep.arcs = vals.value;
    rep.t = t;
    return closure_defect(rep, closure);
}

} // namespace detail

// All s inside |s| <= box with vanishing closure defect, excluding the
// reducible locus {2, t^2-2}. The arc entries are propagated as polynomials
// in s; the defect entries' roots are found by companion eigenvalues, then
// polished by Newton iteration and re-validated by a numeric rebuild.
inline std::vector<ClosureRoot> closure_roots(long p, long q, ClosureKind closure, cplx t,
                                              double box = 5.0, double defect_tol = 1e-8) {
    TanglePtr tangle = build_rational_tangle(p, q);
    Diagram d = elaborate(*tangle, std::nullopt);

    auto [m0p, m1p] = canonical_pair_poly(t);
    ArcValues<Poly> vals(d.n_arcs);
    auto ends = canonical_input_ends(d);
    seed_end(vals, ends.first, m0p);
    seed_end(vals, ends.second, m1p);
    propagate_fixpoint(d, vals);
    if (!vals.complete())
        throw PropagationStall("closure_roots: rational tangle did not propagate");

    auto end_poly = [&](Port pt) {
        const Diagram::End& e = d.ends[pt];
        return e.outward ? vals.value[e.arc] : vals.value[e.arc].adjugate();
    };
    Mat2T<Poly> pr1, pr2;
    if (closure == ClosureKind::N) {
        pr1 = end_poly(PORT_NW) * end_poly(PORT_NE);
        pr2 = end_poly(PORT_SW) * end_poly(PORT_SE);
    } else {
        pr1 = end_poly(PORT_NW) * end_poly(PORT_SW);
        pr2 = end_poly(PORT_NE) * end_poly(PORT_SE);
    }
    Poly defect_entries[8] = {
        pr1.a11 - Poly(1.0), pr1.a12, pr1.a21, pr1.a22 - Poly(1.0),
        pr2.a11 - Poly(1.0), pr2.a12, pr2.a21, pr2.a22 - Poly(1.0),
    };

    // random-ish fixed combination to collect candidate roots
    std::vector<cplx> candidates;
    for (int combo = 0; combo < 2; ++combo) {
        Poly mix;
        Rng mixer(911 + combo);
        for (Poly& e : defect_entries) mix = mix + mixer.disk(1.0) * e;
        for (cplx r : poly_roots(mix)) candidates.push_back(r);
    }

    auto full_defect_poly = [&](cplx s) {
        double m = 0.0;
        for (const Poly& e : defect_entries) m = std::max(m, std::abs(e.eval(s)));
        return m;
    };

    std::vector<ClosureRoot> out;
    for (cplx root : candidates) {
        // Newton polish on the entry of largest magnitude gradient
        cplx z = root;
        for (int it = 0; it < 40; ++it) {
            // pick the defect entry with the largest derivative at z
            int best = 0;
            double bg = -1.0;
            for (int i = 0; i < 8; ++i) {
                double g = std::abs(defect_entries[i].derivative().eval(z));
                if (g > bg) { bg = g; best = i; }
            }
            cplx f = defect_entries[best].eval(z);
            cplx df = defect_entries[best].derivative().eval(z);
            if (std::abs(df) < 1e-14 || std::abs(f) < 1e-14) break;
            z -= f / df;
        }
        if (std::abs(z) > box) continue;
        if (!in_Bt(z, t, 1e-6)) continue; // reducible locus excluded
        if (full_defect_poly(z) > defect_tol) continue;
        // deduplicate at distance 1e-6
        bool dup = false;
        for (const ClosureRoot& r : out)
            if (std::abs(r.s - z) < 1e-6) dup = true;
        if (dup) continue;
        // re-validate by building the closed representation numerically
        double numeric = detail::closure_defect_at(d, t, z, closure);
        if (numeric > defect_tol) continue;
        out.push_back({z, numeric});
    }
    std::sort(out.begin(), out.end(),
              [](const ClosureRoot& a, const ClosureRoot& b) { return lex_less(a.s, b.s); });
    return out;
}

// Numeric closure-root scan for arbitrary tangle trees (the polynomial path
// requires clean propagation; general trees may stall and branch instead).
inline std::vector<ClosureRoot> closure_root_scan(const Diagram& d, ClosureKind closure, cplx t,
                                                  double box = 5.0, double defect_tol = 1e-8,
                                                  int grid = 60) {
    auto defect_at = [&](cplx s) -> double {
        if (!in_Bt(s, t, 1e-9)) return 1e300;
        auto [m0, m1] = canonical_pair(t, s);
        ArcValues<cplx> vals(d.n_arcs);
        auto ends = canonical_input_ends(d);
        seed_end(vals, ends.first, m0);
        seed_end(vals, ends.second, m1);
        if (!charvar::detail::propagate_with_branching(d, vals, t, 4)) return 1e300;
        TangleRep rep;
        rep.diagram = &d;
        rep.arcs = vals.value;
        rep.t = t;
        return closure_defect(rep, closure);
    };
    std::vector<ClosureRoot> out;
    const double trigger = 10.0 * 2.0 * box / grid; // generous against steep defects
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            cplx s(-box + 2.0 * box * (i + 0.5) / grid, -box + 2.0 * box * (j + 0.5) / grid);
            double f0 = defect_at(s);
            if (f0 > trigger) continue;
            // local refinement: pattern search on |defect|
            double step = 2.0 * box / grid;
            cplx z = s;
            double fz = f0;
            for (int it = 0; it < 400 && fz > defect_tol / 100; ++it) {
                bool improved = false;
                static const cplx dirs[8] = {cplx(1, 0),  cplx(-1, 0), cplx(0, 1),  cplx(0, -1),
                                             cplx(1, 1),  cplx(1, -1), cplx(-1, 1), cplx(-1, -1)};
                for (const cplx& dir : dirs) {
                    cplx w = z + step * dir;
                    double fw = defect_at(w);
                    if (fw < fz) { z = w; fz = fw; improved = true; break; }
                }
                if (!improved) step *= 0.5;
                if (step < 1e-14) break;
            }
            if (fz > defect_tol) continue;
            if (std::abs(z) > box || !in_Bt(z, t, 1e-6)) continue;
            bool dup = false;
            for (const ClosureRoot& r : out)
                if (std::abs(r.s - z) < 1e-6) dup = true;
            if (!dup) out.push_back({z, fz});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ClosureRoot& a, const ClosureRoot& b) { return lex_less(a.s, b.s); });
    return out;
}

} // namespace charvar
