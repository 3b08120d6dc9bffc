#pragma once

#include <vector>

#include "charvar/diagram.hpp"
#include "charvar/pairs.hpp"

namespace charvar {

// Arc propagation along a twist region: a_{k+2} = (a_{k+1} a_k) |> a_k.
// Returns a_2 ... a_{n+1}.
inline std::vector<Mat2> twist_propagate(const Mat2& a0, const Mat2& a1, long n) {
    std::vector<Mat2> out;
    Mat2 g = a1 * a0; // constant along the region
    Mat2 prev2 = a0, prev1 = a1;
    for (long k = 0; k < n; ++k) {
        Mat2 next = conj_by(g, prev2);
        out.push_back(next);
        prev2 = prev1;
        prev1 = next;
    }
    return out;
}

// Residuals of the two twist-trace formulas
//   tr(a1^{-1} a3) = 2 + (s + 2 - t^2)(s - 2)
//   tr(a0^{-1} a3) = 2 + (t^2 - s - 2)(s - 1)^2
// with s = tr(a0 a1), t the common trace.
inline std::pair<double, double> eq34_check(const Mat2& a0, const Mat2& a1) {
    cplx t = a0.trace();
    cplx s = (a0 * a1).trace();
    std::vector<Mat2> a = twist_propagate(a0, a1, 2); // a2, a3
    const Mat2& a3 = a[1];
    cplx lhs1 = (a1.adjugate() * a3).trace();
    cplx lhs2 = (a0.adjugate() * a3).trace();
    cplx rhs1 = 2.0 + (s + 2.0 - t * t) * (s - 2.0);
    cplx rhs2 = 2.0 + (t * t - s - 2.0) * (s - 1.0) * (s - 1.0);
    return {std::abs(lhs1 - rhs1), std::abs(lhs2 - rhs2)};
}

// --- generic propagation over a diagram -------------------------------------

// Arc assignment for a diagram over scalar ring S. A slot is unset until
// `known` holds true for it.
template <typename S>
struct ArcValues {
    std::vector<Mat2T<S>> value;
    std::vector<char> known;

    explicit ArcValues(int n_arcs) : value(n_arcs), known(n_arcs, 0) {}

    void set(int arc, const Mat2T<S>& v) {
        value[arc] = v;
        known[arc] = 1;
    }
    bool complete() const {
        for (char k : known)
            if (!k) return false;
        return true;
    }
};

// One sweep of crossing deductions; returns true if anything new was learned.
// out = over^e |> in  and  in = over^{-e} |> out.
template <typename S>
bool propagate_sweep(const Diagram& d, ArcValues<S>& vals) {
    bool changed = false;
    for (const Diagram::Crossing& c : d.crossings) {
        if (c.under_in < 0) continue; // circle component passing over only
        if (!vals.known[c.over_arc]) continue;
        const Mat2T<S>& ov = vals.value[c.over_arc];
        Mat2T<S> conj = (c.exp > 0) ? ov : ov.adjugate();
        if (vals.known[c.under_in] && !vals.known[c.under_out]) {
            vals.set(c.under_out, conj_by(conj, vals.value[c.under_in]));
            changed = true;
        } else if (vals.known[c.under_out] && !vals.known[c.under_in]) {
            vals.set(c.under_in, conj_by(conj.adjugate(), vals.value[c.under_out]));
            changed = true;
        }
    }
    return changed;
}

template <typename S>
void propagate_fixpoint(const Diagram& d, ArcValues<S>& vals) {
    while (propagate_sweep(d, vals)) {}
}

// Crossing-relation residual of a complete assignment (numeric only).
inline double relation_residual(const Diagram& d, const std::vector<Mat2>& arcs) {
    double res = 0.0;
    for (const Diagram::Crossing& c : d.crossings) {
        if (c.under_in < 0) continue;
        const Mat2& ov = arcs[c.over_arc];
        Mat2 conj = (c.exp > 0) ? ov : ov.adjugate();
        res = std::max(res, dist_inf(conj_by(conj, arcs[c.under_in]), arcs[c.under_out]));
    }
    return res;
}

// A tangle (or closed-diagram) representation: per-arc matrices in G(t).
struct TangleRep {
    const Diagram* diagram = nullptr;
    std::vector<Mat2> arcs;
    cplx t{};
    double residual = 0.0;

    Mat2 end_value(int which) const { // 0..3 = nw, ne, sw, se, directed outward
        const Diagram::End& e = diagram->ends[which];
        return e.outward ? arcs[e.arc] : arcs[e.arc].adjugate();
    }
    Mat2 node_end_value(const Tangle* node, int which) const {
        const Diagram::End& e = diagram->node_ends.at(node)[which];
        return e.outward ? arcs[e.arc] : arcs[e.arc].adjugate();
    }
};

struct BoundaryData {
    Mat2 g;       // rho(T^nw) rho(T^ne)
    cplx tr_h;    // tr(g)
    cplx tr_v;    // tr(rho(T^sw) rho(T^nw))
};

inline BoundaryData boundary_data(const TangleRep& rep) {
    Mat2 g = rep.end_value(PORT_NW) * rep.end_value(PORT_NE);
    Mat2 gv = rep.end_value(PORT_SW) * rep.end_value(PORT_NW);
    return {g, g.trace(), gv.trace()};
}

// Max mismatch over the arc identifications imposed by a closure.
inline double closure_defect(const TangleRep& rep, ClosureKind closure) {
    Mat2 p1, p2;
    if (closure == ClosureKind::N) {
        p1 = rep.end_value(PORT_NW) * rep.end_value(PORT_NE);
        p2 = rep.end_value(PORT_SW) * rep.end_value(PORT_SE);
    } else {
        p1 = rep.end_value(PORT_NW) * rep.end_value(PORT_SW);
        p2 = rep.end_value(PORT_NE) * rep.end_value(PORT_SE);
    }
    return std::max(dist_inf(p1, eye()), dist_inf(p2, eye()));
}

namespace detail {

// Solve for an unknown over-arc x in G(t) given both under arcs:
// x^e u_in x^{-e} = u_out. Particular conjugator times a centralizer element,
// cut down by the trace condition; at most two candidates.
inline std::vector<Mat2> solve_over_arc(const Mat2& u_in, const Mat2& u_out, cplx t, int e) {
    const Mat2& src = (e > 0) ? u_in : u_out;
    const Mat2& dst = (e > 0) ? u_out : u_in;
    if (std::abs(src.trace() - dst.trace()) > 1e-7) return {};
    Frame fs = standard_frame(src);
    Frame fd = standard_frame(dst);
    Mat2 c0 = fd.g * fs.g.adjugate();
    if (dist_inf(conj_by(c0, src), dst) > 1e-7) {
        // kappa branches disagree; flip via J
        Mat2 J{0.0, -1.0, 1.0, 0.0};
        c0 = fd.g * J * fs.g.adjugate();
        if (dist_inf(conj_by(c0, src), dst) > 1e-7) return {};
    }
    // x = c0 (mu src + nu e): tr(x) = mu tr(c0 src) + nu tr(c0) = t,
    // det: mu^2 + tr(src) mu nu + nu^2 = 1.
    cplx A = (c0 * src).trace(), B = c0.trace(), ts = src.trace();
    std::vector<Mat2> out;
    auto push_candidate = [&](cplx mu, cplx nu) {
        Mat2 x = c0 * (mu * src + nu * eye());
        if (std::abs(x.det() - 1.0) > 1e-8) return;
        if (std::abs(x.trace() - t) > 1e-7) return;
        Mat2 cx = (e > 0) ? x : x.adjugate();
        if (dist_inf(conj_by(cx, u_in), u_out) > 1e-6) return;
        out.push_back(x);
    };
    if (std::abs(A) >= std::abs(B)) {
        // mu = (t - nu B)/A; (t - nu B)^2/A^2 + ts (t - nu B) nu / A + nu^2 = 1
        cplx a2 = B * B / (A * A) - ts * B / A + 1.0;
        cplx a1 = -2.0 * t * B / (A * A) + ts * t / A;
        cplx a0 = t * t / (A * A) - 1.0;
        if (std::abs(a2) < 1e-14) {
            if (std::abs(a1) > 1e-14) {
                cplx nu = -a0 / a1;
                push_candidate((t - nu * B) / A, nu);
            }
        } else {
            QuadraticRoots r = solve_monic_quadratic(a1 / a2, a0 / a2);
            for (cplx nu : {r.first, r.second}) push_candidate((t - nu * B) / A, nu);
        }
    } else {
        // nu = (t - mu A)/B
        cplx a2 = A * A / (B * B) - ts * A / B + 1.0;
        cplx a1 = -2.0 * t * A / (B * B) + ts * t / B;
        cplx a0 = t * t / (B * B) - 1.0;
        if (std::abs(a2) < 1e-14) {
            if (std::abs(a1) > 1e-14) {
                cplx mu = -a0 / a1;
                push_candidate(mu, (t - mu * A) / B);
            }
        } else {
            QuadraticRoots r = solve_monic_quadratic(a1 / a2, a0 / a2);
            for (cplx mu : {r.first, r.second}) push_candidate(mu, (t - mu * A) / B);
        }
    }
    // drop duplicates
    if (out.size() == 2 && dist_inf(out[0], out[1]) < 1e-9) out.pop_back();
    return out;
}

// Residual over the crossings whose three arcs are all assigned.
inline double partial_residual(const Diagram& d, const ArcValues<cplx>& vals) {
    double res = 0.0;
    for (const Diagram::Crossing& c : d.crossings) {
        if (c.under_in < 0) continue;
        if (!vals.known[c.over_arc] || !vals.known[c.under_in] || !vals.known[c.under_out])
            continue;
        const Mat2& ov = vals.value[c.over_arc];
        Mat2 conj = (c.exp > 0) ? ov : ov.adjugate();
        res = std::max(res, dist_inf(conj_by(conj, vals.value[c.under_in]),
                                     vals.value[c.under_out]));
    }
    return res;
}

// Fixpoint propagation with a bounded branching fallback for diagrams whose
// information flow stalls (an unknown over-arc between two known unders).
// Branches that extend inconsistently are rejected.
inline bool propagate_with_branching(const Diagram& d, ArcValues<cplx>& vals, cplx t, int depth,
                                     double tol = 1e-8) {
    propagate_fixpoint(d, vals);
    if (partial_residual(d, vals) > tol) return false;
    if (vals.complete()) return true;
    if (depth <= 0) return false;
    for (const Diagram::Crossing& c : d.crossings) {
        if (c.under_in < 0) continue;
        if (vals.known[c.over_arc] || !vals.known[c.under_in] || !vals.known[c.under_out])
            continue;
        auto cands = solve_over_arc(vals.value[c.under_in], vals.value[c.under_out], t, c.exp);
        for (const Mat2& x : cands) {
            ArcValues<cplx> branch = vals;
            branch.set(c.over_arc, x);
            if (propagate_with_branching(d, branch, t, depth - 1, tol)) {
                vals = branch;
                return true;
            }
        }
        return false;
    }
    return false;
}

} // namespace detail

// The canonical input pair of a tangle: the natural pair of its first-built
// twist region (west arcs of a row, north arcs of a column), ordered so that
// the first value rides over the region's first crossing and the second dies
// under it. With inputs (m0, m1) the region runs the twist recursion with
// (a_1, a_0) = (m0, m1) and parameter s = tr(m0 m1).
inline std::pair<Diagram::End, Diagram::End> canonical_input_ends(const Diagram& d) {
    if (d.leaves.empty()) throw Error("canonical_input_ends: no twist region");
    const Diagram::LeafInfo& leaf = d.leaves.front();
    if (leaf.crossing_ids.empty()) {
        // crossingless region: any two distinct ends
        return {leaf.ends[PORT_NW], leaf.ends[PORT_SW]};
    }
    const Diagram::Crossing& first = d.crossings[leaf.crossing_ids.front()];
    bool positive = first.chirality > 0;
    if (!leaf.node->vertical) {
        // row: over-first sits at nw for positive twists, sw for negative
        return positive ? std::pair{leaf.ends[PORT_NW], leaf.ends[PORT_SW]}
                        : std::pair{leaf.ends[PORT_SW], leaf.ends[PORT_NW]};
    }
    // column: over-first at nw for positive, ne for negative
    return positive ? std::pair{leaf.ends[PORT_NW], leaf.ends[PORT_NE]}
                    : std::pair{leaf.ends[PORT_NE], leaf.ends[PORT_NW]};
}

template <typename S>
void seed_end(ArcValues<S>& vals, const Diagram::End& e, const Mat2T<S>& inward_value) {
    // stored-direction value: the arc equals the inward value when the arc
    // points into the region at this end
    vals.set(e.arc, e.outward ? inward_value.adjugate() : inward_value);
}

// Propagate a representation of `tangle` from values (m0, m1) on its
// canonical input pair. Residual-validated; throws PropagationStall when the
// diagram cannot be completed from these inputs.
inline TangleRep rep_propagate(const Diagram& d, const Mat2& m0, const Mat2& m1, cplx t) {
    ArcValues<cplx> vals(d.n_arcs);
    auto [e0, e1] = canonical_input_ends(d);
    seed_end(vals, e0, m0);
    seed_end(vals, e1, m1);
    if (!detail::propagate_with_branching(d, vals, t, 4))
        throw PropagationStall("rep_propagate: diagram not determined by the input pair");
    TangleRep rep;
    rep.diagram = &d;
    rep.arcs = std::move(vals.value);
    rep.t = t;
    rep.residual = relation_residual(d, rep.arcs);
    return rep;
}

} // namespace charvar
