#pragma once

#include <map>
#include <string>

#include "charvar/chains.hpp"
#include "charvar/tanglerep.hpp"

namespace charvar {

// A closed diagram with a preferred meridian arc and named generator arcs.
struct KnotDiagram {
    std::string name;
    TanglePtr tangle; // owns the tree the diagram's node_ends point into
    Diagram diagram;

    struct GenRef {
        int arc = -1;
        bool stored = true; // generator value equals the stored arc value
    };
    std::map<std::string, GenRef> generators;
    std::string preferred = "x1";

    int writhe() const { return diagram.writhe(); }
};

struct WirtingerRep {
    const KnotDiagram* knot = nullptr;
    std::vector<Mat2> arcs;
    cplx t{};

    Mat2 value(const KnotDiagram::GenRef& g) const {
        return g.stored ? arcs[g.arc] : arcs[g.arc].adjugate();
    }
    Mat2 generator(const std::string& name) const {
        auto it = knot->generators.find(name);
        if (it == knot->generators.end()) throw UnknownGenerator("no generator " + name);
        return value(it->second);
    }
};

inline double validate_rep(const KnotDiagram& d, const WirtingerRep& rep) {
    return relation_residual(d.diagram, rep.arcs);
}

// --- longitude ---------------------------------------------------------------

// Walk the knot strand once starting from `arc` along the stored directions,
// collecting the over-arc generator with exponent -sign at every crossing
// passed under; the walk word is m^w z_1 ... z_n.
inline std::vector<WalkStep> longitude_walk(const Diagram& d, int start_arc) {
    std::map<int, int> crossing_of_under_in;
    for (std::size_t i = 0; i < d.crossings.size(); ++i)
        if (d.crossings[i].under_in >= 0)
            crossing_of_under_in[d.crossings[i].under_in] = static_cast<int>(i);
    std::vector<WalkStep> walk;
    int arc = start_arc;
    for (std::size_t k = 0; k < d.crossings.size(); ++k) {
        auto it = crossing_of_under_in.find(arc);
        if (it == crossing_of_under_in.end())
            throw Error("longitude_walk: strand left the under-chain");
        const Diagram::Crossing& c = d.crossings[it->second];
        walk.push_back({it->second, c.over_arc, -c.sign});
        arc = c.under_out;
    }
    if (arc != start_arc) throw Error("longitude_walk: did not close up");
    return walk;
}

// rho(l) evaluated along the preferred arc's direction. For an abelian
// representation this returns the identity: the m^w prefix cancels the
// walk exponent sum.
inline Mat2 longitude_eval(const KnotDiagram& kd, const WirtingerRep& rep) {
    auto it = kd.generators.find(kd.preferred);
    if (it == kd.generators.end()) throw UnknownGenerator("preferred arc unnamed");
    const KnotDiagram::GenRef& pref = it->second;
    std::vector<WalkStep> walk = longitude_walk(kd.diagram, pref.arc);
    Mat2 m = rep.arcs[pref.arc];
    Mat2 l = power_cayley(m, kd.diagram.writhe());
    for (const WalkStep& st : walk) {
        const Mat2& o = rep.arcs[st.over_arc];
        l = l * (st.exponent > 0 ? o : o.adjugate());
    }
    // preferred direction opposite to the stored one: the peripheral pair
    // reverses, so the longitude inverts
    if (!pref.stored) l = l.adjugate();
    return l;
}

// --- generic seeded assembly -------------------------------------------------

struct Seed {
    const Tangle* node;
    Port end;
    Mat2 value_outward; // value directed out of the subtangle at that end
};

inline WirtingerRep assemble_rep(const KnotDiagram& kd, cplx t, const std::vector<Seed>& seeds,
                                 double tol = 1e-8) {
    ArcValues<cplx> vals(kd.diagram.n_arcs);
    for (const Seed& s : seeds) {
        const Diagram::End& e = kd.diagram.node_ends.at(s.node)[s.end];
        vals.set(e.arc, e.outward ? s.value_outward : s.value_outward.adjugate());
    }
    propagate_fixpoint(kd.diagram, vals);
    if (!vals.complete())
        throw PropagationStall("assemble_rep: seeds do not determine the diagram");
    WirtingerRep rep{&kd, std::move(vals.value), t};
    double res = relation_residual(kd.diagram, rep.arcs);
    if (res > tol) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "assemble_rep: crossing residual %.3e", res);
        throw Error(buf);
    }
    return rep;
}

// --- the three benchmark knots ------------------------------------------------

enum class KnotName { P334, Q1, Q2 };

namespace detail {

struct PretzelNodes {
    TanglePtr root;
    const Tangle *t0, *t1, *t2, *t3;
};

inline PretzelNodes pretzel_tree() {
    TanglePtr r0 = Tangle::row(3), r1 = Tangle::row(3), r2 = Tangle::row(3), r3 = Tangle::row(4);
    PretzelNodes n;
    n.t0 = r0.get(); n.t1 = r1.get(); n.t2 = r2.get(); n.t3 = r3.get();
    n.root = Tangle::star(Tangle::star(Tangle::star(r0, r1), r2), r3);
    return n;
}

struct QNodes {
    TanglePtr root;
    const Tangle *t1, *t2, *t3, *t4;
};

inline QNodes q_tree(bool q2) {
    TanglePtr r1 = Tangle::row(3), r2 = Tangle::row(3);
    TanglePtr c3 = Tangle::col(-3), c4 = q2 ? Tangle::col(3) : Tangle::col(-3);
    QNodes n;
    n.t1 = r1.get(); n.t2 = r2.get(); n.t3 = c3.get(); n.t4 = c4.get();
    n.root = Tangle::star(Tangle::star(r1, r2), Tangle::plus(c3, c4));
    return n;
}

inline KnotDiagram::GenRef gen_into(const Diagram& d, const Tangle* node, Port p) {
    const Diagram::End& e = d.node_ends.at(node)[p];
    return {e.arc, !e.outward}; // generator value directed INTO the subtangle
}
inline KnotDiagram::GenRef gen_out(const Diagram& d, const Tangle* node, Port p) {
    const Diagram::End& e = d.node_ends.at(node)[p];
    return {e.arc, e.outward};
}

} // namespace detail

inline KnotDiagram builtin_diagram(KnotName name) {
    KnotDiagram kd;
    switch (name) {
        case KnotName::P334: {
            auto n = detail::pretzel_tree();
            kd.name = "P334";
            kd.tangle = n.root;
            kd.diagram = elaborate(*n.root, ClosureKind::D);
            // the four west-side interface arcs, directed into the rows they
            // enter from the north-west / south-west
            kd.generators["x1"] = detail::gen_into(kd.diagram, n.t0, PORT_NW);
            kd.generators["x2"] = detail::gen_into(kd.diagram, n.t0, PORT_SW);
            kd.generators["x3"] = detail::gen_into(kd.diagram, n.t2, PORT_NW);
            kd.generators["x4"] = detail::gen_into(kd.diagram, n.t2, PORT_SW);
            kd.preferred = "x1";
            break;
        }
        case KnotName::Q1: {
            auto n = detail::q_tree(false);
            kd.name = "Q1";
            kd.tangle = n.root;
            kd.diagram = elaborate(*n.root, ClosureKind::D);
            kd.generators["x"] = detail::gen_out(kd.diagram, n.t1, PORT_NW);
            kd.generators["y"] = detail::gen_out(kd.diagram, n.t1, PORT_SW);
            kd.generators["z"] = detail::gen_out(kd.diagram, n.t3, PORT_NE);
            kd.preferred = "x";
            break;
        }
        case KnotName::Q2: {
            auto n = detail::q_tree(true);
            kd.name = "Q2";
            kd.tangle = n.root;
            kd.diagram = elaborate(*n.root, ClosureKind::D);
            kd.generators["x"] = detail::gen_out(kd.diagram, n.t1, PORT_NW);
            kd.generators["y"] = detail::gen_out(kd.diagram, n.t1, PORT_SW);
            kd.generators["z"] = detail::gen_out(kd.diagram, n.t3, PORT_NW);
            kd.generators["v"] = detail::gen_out(kd.diagram, n.t3, PORT_NE);
            kd.preferred = "x";
            break;
        }
    }
    return kd;
}

// the leaf nodes of a builtin diagram in build order
inline std::vector<const Tangle*> builtin_leaves(const KnotDiagram& kd) {
    std::vector<const Tangle*> out;
    for (const auto& li : kd.diagram.leaves) out.push_back(li.node);
    return out;
}

// --- chart representation builders --------------------------------------------

namespace detail {

inline void check_pretzel_locus(cplx t, cplx t13, double margin = 1e-6) {
    if (std::abs(t13 - (t * t - 2.0)) < margin)
        throw ExcludedLocus("pretzel chart: t13 = t^2 - 2");
    if (std::abs(t13 - 2.0) < margin &&
        (std::abs(t * t - 1.0) < margin || std::abs(t * t - 2.0) < margin))
        throw ExcludedLocus("pretzel chart: (t^2, t13) in {(1,2),(2,2)}");
}

} // namespace detail

// Quadruple (x1,x2,x3,x4) in G(t)^4 with tr(x1x2)=tr(x2x3)=tr(x3x4)=1,
// tr(x4x1)=0, tr(x1x3)=t13, tr(x1x2x3)=t123, tr(x1x3x4)=t134.
inline std::array<Mat2, 4> pretzel_quadruple(cplx t, cplx t13, cplx t123, cplx t134,
                                             double fricke_tol = 1e-8) {
    detail::check_pretzel_locus(t, t13);
    if (std::abs(f_t_eval(t, 1.0, t13, 1.0, t123)) > fricke_tol ||
        std::abs(f_t_eval(t, 0.0, t13, 1.0, t134)) > fricke_tol)
        throw InconsistentFricke("pretzel chart equations violated");
    if (std::abs(t13 - 2.0) > 1e-6) {
        auto [x1, x2] = canonical_pair(t, 1.0);
        Mat2 x3 = complete_triple(x1, x2, t, t13, 1.0, t123, 10 * fricke_tol);
        Mat2 x4 = complete_triple(x1, x3, t, 0.0, 1.0, t134, 10 * fricke_tol);
        return {x1, x2, x3, x4};
    }
    // t13 = 2 with t^2 not in {1,2}: the pair (x1, x3) is reducible and
    // non-commuting, with two conjugacy classes that pair the t123 roots
    // against opposite t134 roots; only the paired combinations lie on the
    // variety. Build the class realizing the requested t123 and check t134.
    TraceValue tv(t);
    for (int cls = 0; cls < 2; ++cls) {
        cplx k = cls ? 1.0 / tv.kappa : tv.kappa;
        Mat2 x1 = dmat(k);
        Mat2 x3 = umat(1.0 / k); // tr(x1 x3) = 2 exactly
        BridgeSolutions bx2 = solve_bridge(t, x1, x3, 1.0, 1.0);
        BridgeSolutions bx4 = solve_bridge(t, x1, x3, 0.0, 1.0);
        if (bx2.kind != BridgeSolutions::Kind::Isolated ||
            bx4.kind != BridgeSolutions::Kind::Isolated)
            continue;
        const Mat2& x2 = bx2.points.front();
        const Mat2& x4 = bx4.points.front();
        if (std::abs((x1 * x2 * x3).trace() - t123) > 1e-6) continue;
        if (std::abs((x1 * x3 * x4).trace() - t134) > 1e-6)
            throw InconsistentFricke(
                "pretzel chart: (t123, t134) combination not realized on the t13 = 2 slice");
        return {x1, x2, x3, x4};
    }
    throw InconsistentFricke("pretzel chart: no class realizes the requested t123 at t13 = 2");
}

// Full Wirtinger representation of the (3,3,3,4)-pretzel from chart
// coordinates; the quadruple sits on the west-side interface arcs and every
// twist region fills in by propagation.
inline WirtingerRep build_pretzel_rep(const KnotDiagram& kd, cplx t, cplx t13, cplx t123,
                                      cplx t134) {
    auto q = pretzel_quadruple(t, t13, t123, t134);
    auto leaves = builtin_leaves(kd);
    std::vector<Seed> seeds = {
        {leaves[0], PORT_NW, q[0].adjugate()}, // x1 directed into T0
        {leaves[0], PORT_SW, q[1].adjugate()},
        {leaves[2], PORT_NW, q[2].adjugate()},
        {leaves[2], PORT_SW, q[3].adjugate()},
    };
    return assemble_rep(kd, t, seeds, 1e-9);
}

// (x, y, z) with tr(xy) = tr(xz) = 1, tr(yz) = t23, tr(xyz) = t123.
inline std::array<Mat2, 3> q1_triple(cplx t, cplx t23, cplx t123, double fricke_tol = 1e-8) {
    if (std::abs(f_t_eval(t, 1.0, 1.0, t23, t123)) > fricke_tol)
        throw InconsistentFricke("Q1 chart equation violated");
    auto [x, y] = canonical_pair(t, 1.0);
    Mat2 z = complete_triple(x, y, t, 1.0, t23, t123, 10 * fricke_tol);
    return {x, y, z};
}

inline WirtingerRep build_q1_rep(const KnotDiagram& kd, cplx t, cplx t23, cplx t123) {
    auto w = q1_triple(t, t23, t123);
    auto leaves = builtin_leaves(kd);
    std::vector<Seed> seeds = {
        {leaves[0], PORT_NW, w[0]}, // x outward at T1^nw
        {leaves[0], PORT_SW, w[1]}, // y
        {leaves[2], PORT_NW, w[0]}, // x outward at T3^nw
        {leaves[2], PORT_NE, w[2]}, // z
    };
    return assemble_rep(kd, t, seeds, 1e-9);
}

// (x, y, z, v): tr(xy) = tr(yz) = 1, tr(xz) = t13, tr(xyz) = t123, plus the
// auxiliary arc value v with tr(zv) = s, produced by building the twist
// column from (z, v~) and aligning its far output onto x.
inline std::array<Mat2, 4> q2_quadruple(cplx t, cplx t13, cplx t123, cplx s,
                                        double fricke_tol = 1e-8) {
    for (cplx bad : {t13, s})
        if (!in_Bt(bad, t, 1e-6))
            throw ExcludedLocus("Q2 chart: coordinate on {2, t^2-2}");
    if (std::abs(f_t_eval(t, 1.0, 1.0, t13, t123)) > fricke_tol)
        throw InconsistentFricke("Q2 chart equation (Fricke) violated");
    if (std::abs((s + 2.0 - t * t) * (s - 1.0) * (s - 1.0) - (t13 - t * t + 2.0)) > fricke_tol)
        throw InconsistentFricke("Q2 chart equation (twist) violated");
    auto [x, y] = canonical_pair(t, 1.0);
    Mat2 z = complete_triple(x, y, t, t13, 1.0, t123, 10 * fricke_tol);

    // temporary [-1/3] column built in the canonical frame of (z0, v0), far
    // output x0~; the whole frame is then aligned onto the actual (z, x)
    auto [m0, m1] = canonical_pair(t, s); // ne-in, nw-in seeds; tr(m0 m1) = s
    TanglePtr col = Tangle::col(-3);
    Diagram cd = elaborate(*col, std::nullopt);
    ArcValues<cplx> vals(cd.n_arcs);
    seed_end(vals, cd.node_ends.at(col.get())[PORT_NE], m0);
    seed_end(vals, cd.node_ends.at(col.get())[PORT_NW], m1);
    propagate_fixpoint(cd, vals);
    if (!vals.complete()) throw Error("q2_quadruple: column propagation stalled");
    const Diagram::End& sw = cd.node_ends.at(col.get())[PORT_SW];
    Mat2 sw_out = sw.outward ? vals.value[sw.arc] : vals.value[sw.arc].adjugate();
    Mat2 z0 = m1.adjugate();        // the column's z-slot value, outward
    Mat2 x0_tilde = sw_out.adjugate(); // the column wants x^{-1} outward at sw
    Mat2 c = align_pair({z0, x0_tilde}, {z, x});
    Mat2 v = conj_by(c, m0.adjugate()); // transported, outward at ne
    return {x, y, z, v};
}

inline WirtingerRep build_q2_rep(const KnotDiagram& kd, cplx t, cplx t13, cplx t123, cplx s) {
    auto w = q2_quadruple(t, t13, t123, s);
    auto leaves = builtin_leaves(kd);
    std::vector<Seed> seeds = {
        {leaves[0], PORT_NW, w[0]}, // x
        {leaves[0], PORT_SW, w[1]}, // y
        {leaves[2], PORT_NW, w[2]}, // z
        {leaves[2], PORT_NE, w[3]}, // v
    };
    return assemble_rep(kd, t, seeds, 1e-9);
}

// --- Dehn filling --------------------------------------------------------------

struct Slope {
    long a = 0, b = 1;
};

// All t = kappa + 1/kappa with x1^a l^b = e given the longitude identity
// rho(l) = sigma x1^N: kappa^(a+Nb) = sigma^b, kappa != +-1, deduplicated over
// kappa <-> 1/kappa. Enumerated as exact roots of unity.
inline std::vector<cplx> dehn_filling_solutions(long N, int sigma, Slope slope) {
    if (std::gcd(std::labs(slope.a), std::labs(slope.b)) != 1)
        throw Error("dehn_filling_solutions: slope not coprime");
    long M = slope.a + N * slope.b;
    bool rhs_negative = (sigma < 0) && (slope.b % 2 != 0);
    if (M == 0) {
        if (rhs_negative) return {};
        throw EmptySolutionSet("dehn filling degenerates: every kappa solves");
    }
    long aM = std::labs(M);
    if (aM == 1)
        throw EmptySolutionSet("a + Nb = +-1 admits only central solutions");
    const double pi = 3.14159265358979323846;
    std::vector<cplx> out;
    for (long j = 0; j < aM; ++j) {
        double theta = rhs_negative ? pi * (2.0 * j + 1.0) / aM : 2.0 * pi * j / aM;
        cplx kappa = std::polar(1.0, theta);
        if (std::abs(kappa - 1.0) < 1e-12 || std::abs(kappa + 1.0) < 1e-12) continue;
        cplx t = kappa + 1.0 / kappa;
        bool dup = false;
        for (const cplx& u : out)
            if (std::abs(u - t) < 1e-9) dup = true;
        if (!dup) out.push_back(t);
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

} // namespace charvar
