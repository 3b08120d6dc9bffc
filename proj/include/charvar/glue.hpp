#pragma once

#include "charvar/chains.hpp"
#include "charvar/charts.hpp"
#include "charvar/closure_roots.hpp"
#include "charvar/knots.hpp"

namespace charvar {

// --- word characters -----------------------------------------------------------

// Words over named generators: "x1", "x1*x3", "x2^-1*x1". The empty word is
// the identity (trace 2).
inline cplx character_eval_word(const WirtingerRep& rep, const std::string& word) {
    Mat2 acc = eye();
    std::size_t i = 0;
    while (i < word.size()) {
        while (i < word.size() && (word[i] == ' ' || word[i] == '*')) ++i;
        if (i >= word.size()) break;
        std::size_t j = i;
        while (j < word.size() && word[j] != '*' && word[j] != '^' && word[j] != ' ') ++j;
        std::string name = word.substr(i, j - i);
        long exp = 1;
        i = j;
        if (i < word.size() && word[i] == '^') {
            ++i;
            std::size_t k = i;
            if (k < word.size() && (word[k] == '-' || word[k] == '+')) ++k;
            while (k < word.size() && std::isdigit(static_cast<unsigned char>(word[k]))) ++k;
            exp = std::stol(word.substr(i, k - i));
            i = k;
        }
        Mat2 g = rep.generator(name);
        acc = acc * power_cayley(g, exp);
    }
    return acc.trace();
}

inline std::vector<cplx> character_eval(const WirtingerRep& rep,
                                        const std::vector<std::string>& words) {
    std::vector<cplx> out;
    out.reserve(words.size());
    for (const std::string& w : words) out.push_back(character_eval_word(rep, w));
    return out;
}

// Common-eigenvector search over the eigenvectors of one non-central value,
// tested against non-commuting partners.
inline bool is_irreducible_rep(const std::vector<Mat2>& arcs, double tol = 1e-8) {
    const Mat2* a = nullptr;
    for (const Mat2& m : arcs) {
        if (dist_inf(m, eye()) > 1e-6 && dist_inf(m, -eye()) > 1e-6) { a = &m; break; }
    }
    if (!a) return false;
    int partners = 0;
    for (const Mat2& b : arcs) {
        if (&b == a || is_commuting(*a, b, 1e-7)) continue;
        ++partners;
        if (!is_reducible_pair(*a, b, tol)) return true;
        if (partners >= 2) break;
    }
    return false;
}

// --- value transfer -------------------------------------------------------------

namespace detail {

inline void transfer_port_values(const Diagram& comp, std::size_t comp_leaf,
                                 const Diagram& piece, std::size_t piece_leaf,
                                 const std::vector<Mat2>& piece_arcs, ArcValues<cplx>& vals,
                                 double agree_tol) {
    const auto& cl = comp.leaves[comp_leaf];
    const auto& pl = piece.leaves[piece_leaf];
    if (cl.crossing_ids.size() != pl.crossing_ids.size())
        throw Error("transfer: leaf shapes disagree");
    for (std::size_t k = 0; k < cl.crossing_ids.size(); ++k) {
        const Diagram::Crossing& cc = comp.crossings[cl.crossing_ids[k]];
        const Diagram::Crossing& pc = piece.crossings[pl.crossing_ids[k]];
        for (int p = 0; p < 4; ++p) {
            auto [pa, p_in] = pc.port_arc(p);
            auto [ca, c_in] = cc.port_arc(p);
            Mat2 entering = p_in ? piece_arcs[pa] : piece_arcs[pa].adjugate();
            Mat2 stored = c_in ? entering : entering.adjugate();
            if (vals.known[ca]) {
                if (dist_inf(vals.value[ca], stored) > agree_tol)
                    throw AlignmentFailure("transfer: inconsistent values on a shared arc");
            } else {
                vals.set(ca, stored);
            }
        }
    }
}

} // namespace detail

// Conjugate every arc of a tangle representation.
inline TangleRep conj_rep(const TangleRep& rep, const Mat2& c) {
    TangleRep out = rep;
    for (Mat2& m : out.arcs) m = conj_by(c, m);
    return out;
}

// --- the gluing pipeline ---------------------------------------------------------

struct GluePiece {
    TanglePtr tangle;                 // the piece's own tree
    std::shared_ptr<Diagram> diagram; // standalone elaboration of that tree
    TangleRep rep;                    // with g = e
};

struct GlueResult {
    WirtingerRep rep;
    bool commuting_endpoints = false;
    std::vector<cplx> chain_traces;
};

// Glue boundary representations rho_0..rho_n of the pieces of
// K = D(T_0 * ... * T_n) along a sampled chain. The composite diagram must be
// the D-closure of the left-nested star of exactly those piece trees.
inline GlueResult glue_theorem_pipeline(const KnotDiagram& kd, cplx t,
                                        const std::vector<GluePiece>& pieces,
                                        ChainParams chain_params, std::uint64_t seed) {
    std::size_t n1 = pieces.size(); // n + 1 pieces
    if (n1 < 2) throw Error("glue: need at least two pieces");
    for (const GluePiece& p : pieces) {
        BoundaryData bd = boundary_data(p.rep);
        if (dist_inf(bd.g, eye()) > 1e-9)
            throw AlignmentFailure("glue: piece has g != e");
    }
    // chain data
    std::vector<cplx> traces;
    for (std::size_t i = 1; i < n1; ++i) {
        cplx trv = boundary_data(pieces[i].rep).tr_v;
        if (!in_Bt(trv, t, 1e-6))
            throw DegenerateTrace("glue: tr_v on the excluded locus");
        traces.push_back(t * t - trv);
    }
    Mat2 a = pieces[0].rep.end_value(PORT_SE);
    Mat2 b = pieces[0].rep.end_value(PORT_NE).adjugate();
    GlueResult result;
    result.commuting_endpoints = is_commuting(a, b, 1e-8);
    result.chain_traces = traces;

    ChainSpec spec{t, a, b, traces};
    auto chain = chain_sample(spec, std::move(chain_params), seed);
    if (!chain) throw ChainClosureFailure("glue: empty bridge for the drawn parameters");
    if (chain->residual > 1e-8) throw ChainClosureFailure("glue: chain residual too large");

    // align piece i >= 1 so that (ne, se) carries (x_{i-1}^{-1}, x_i)
    auto chain_at = [&](std::size_t i) -> const Mat2& {
        if (i == 0) return a;
        if (i == traces.size()) return b;
        return chain->xs[i - 1];
    };
    ArcValues<cplx> vals(kd.diagram.n_arcs);
    std::size_t leaf_offset = 0;
    for (std::size_t i = 0; i < n1; ++i) {
        TangleRep aligned = pieces[i].rep;
        if (i > 0) {
            std::pair<Mat2, Mat2> src{pieces[i].rep.end_value(PORT_NE),
                                      pieces[i].rep.end_value(PORT_SE)};
            std::pair<Mat2, Mat2> dst{chain_at(i - 1).adjugate(), chain_at(i)};
            Mat2 c = align_pair(src, dst);
            aligned = conj_rep(pieces[i].rep, c);
        }
        for (std::size_t j = 0; j < pieces[i].diagram->leaves.size(); ++j)
            detail::transfer_port_values(kd.diagram, leaf_offset + j, *pieces[i].diagram, j,
                                         aligned.arcs, vals, 1e-7);
        leaf_offset += pieces[i].diagram->leaves.size();
    }
    if (!vals.complete()) throw Error("glue: transfer left arcs unassigned");
    WirtingerRep rep{&kd, std::move(vals.value), t};
    double res = relation_residual(kd.diagram, rep.arcs);
    if (res > 1e-8) throw AlignmentFailure("glue: assembled residual " + std::to_string(res));
    if (!is_irreducible_rep(rep.arcs)) throw Error("glue: assembled representation reducible");
    result.rep = std::move(rep);
    return result;
}

// Piece representation of a rational tangle from its closure root.
inline GluePiece make_rational_piece(long p, long q, ClosureKind closure, cplx t,
                                     std::size_t root_index = 0) {
    GluePiece piece;
    piece.tangle = build_rational_tangle(p, q);
    auto roots = closure_roots(p, q, closure, t);
    if (roots.empty()) throw Error("make_rational_piece: no closure roots");
    cplx s = roots[std::min(root_index, roots.size() - 1)].s;
    piece.diagram = std::make_shared<Diagram>(elaborate(*piece.tangle, std::nullopt));
    auto [m0, m1] = canonical_pair(t, s);
    piece.rep = rep_propagate(*piece.diagram, m0, m1, t);
    return piece;
}

// Build the composite D(T_0 * ... * T_n) diagram from fresh piece trees.
inline KnotDiagram make_montesinos_diagram(const std::vector<TanglePtr>& pieces,
                                           const std::string& name) {
    if (pieces.empty()) throw Error("make_montesinos_diagram: no pieces");
    TanglePtr tree = pieces[0];
    for (std::size_t i = 1; i < pieces.size(); ++i) tree = Tangle::star(tree, pieces[i]);
    KnotDiagram kd;
    kd.name = name;
    kd.tangle = tree;
    kd.diagram = elaborate(*tree, ClosureKind::D);
    return kd;
}

// --- conditional structures ------------------------------------------------------

// Case 1: K = D(T1 * T2 * (T3 + T4)) with matching vertical traces on the
// first pair and horizontal traces on the second.
inline WirtingerRep case1_glue(const KnotDiagram& kd, cplx t,
                               const std::array<GluePiece, 4>& pieces, cplx c_param,
                               cplx r_param) {
    cplx a = boundary_data(pieces[0].rep).tr_v;
    cplx a2 = boundary_data(pieces[1].rep).tr_v;
    if (std::abs(a - a2) > 1e-8) throw TraceMismatch("case1: tr_v mismatch");
    cplx b = boundary_data(pieces[2].rep).tr_h;
    cplx b2 = boundary_data(pieces[3].rep).tr_h;
    if (std::abs(b - b2) > 1e-8) throw TraceMismatch("case1: tr_h mismatch");
    if (std::abs(f_t_eval(t, a, b, c_param, r_param)) > 1e-8)
        throw InconsistentFricke("case1: f_t(a, b, c; r) != 0");

    auto [x, y] = canonical_pair(t, a);
    Mat2 z = complete_triple(x, y, t, b, c_param, r_param, 1e-7);

    auto align_piece = [&](const GluePiece& p, Port e1, Port e2, const Mat2& d1, const Mat2& d2) {
        std::pair<Mat2, Mat2> src{p.rep.end_value(e1), p.rep.end_value(e2)};
        Mat2 c = align_pair(src, {d1, d2});
        return conj_rep(p.rep, c);
    };
    TangleRep r1 = align_piece(pieces[0], PORT_NW, PORT_SW, x, y);
    TangleRep r2 = align_piece(pieces[1], PORT_SE, PORT_NE, x, y);
    TangleRep r3 = align_piece(pieces[2], PORT_NW, PORT_NE, x, z);
    TangleRep r4 = align_piece(pieces[3], PORT_SE, PORT_SW, x, z);

    ArcValues<cplx> vals(kd.diagram.n_arcs);
    const TangleRep* aligned[4] = {&r1, &r2, &r3, &r4};
    std::size_t leaf_offset = 0;
    for (int i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < pieces[i].diagram->leaves.size(); ++j)
            detail::transfer_port_values(kd.diagram, leaf_offset + j, *pieces[i].diagram, j,
                                         aligned[i]->arcs, vals, 1e-7);
        leaf_offset += pieces[i].diagram->leaves.size();
    }
    if (!vals.complete()) throw Error("case1: transfer left arcs unassigned");
    WirtingerRep rep{&kd, std::move(vals.value), t};
    if (relation_residual(kd.diagram, rep.arcs) > 1e-8)
        throw AlignmentFailure("case1: assembled residual too large");
    return rep;
}

// Reflection transport between mirror-image leaves: the directed arc a of the
// source leaf maps to sigma(a)^{-1} in the mirror, value preserved.
inline void reflect_transport(const Diagram& comp, std::size_t src_leaf, std::size_t dst_leaf,
                              const std::vector<Mat2>& src_arcs_by_comp, ArcValues<cplx>& vals,
                              double agree_tol = 1e-7) {
    const auto& sl = comp.leaves[src_leaf];
    const auto& dl = comp.leaves[dst_leaf];
    if (sl.crossing_ids.size() != dl.crossing_ids.size())
        throw Error("reflect_transport: leaf sizes differ");
    auto mirror = [](int p) {
        switch (p) {
            case PORT_NW: return PORT_NE;
            case PORT_NE: return PORT_NW;
            case PORT_SW: return PORT_SE;
            default: return PORT_SW;
        }
    };
    for (std::size_t k = 0; k < sl.crossing_ids.size(); ++k) {
        const Diagram::Crossing& sc = comp.crossings[sl.crossing_ids[k]];
        const Diagram::Crossing& dc = comp.crossings[dl.crossing_ids[k]];
        for (int p = 0; p < 4; ++p) {
            auto [sa, s_in] = sc.port_arc(p);
            auto [da, d_in] = dc.port_arc(mirror(p));
            Mat2 entering = s_in ? src_arcs_by_comp[sa] : src_arcs_by_comp[sa].adjugate();
            // direction reversal: the transported value leaves the mirror port
            Mat2 stored = d_in ? entering.adjugate() : entering;
            if (vals.known[da]) {
                if (dist_inf(vals.value[da], stored) > agree_tol)
                    throw AlignmentFailure("reflect_transport: inconsistent arc value");
            } else {
                vals.set(da, stored);
            }
        }
    }
}

// Case 2: K = D(T1 * T2 * (T3 + T4)) with T4 the reflection of T3; the
// fourth representation is defined by transport, re-validated by the
// assembled residual.
inline WirtingerRep case2_glue(const KnotDiagram& kd, cplx t,
                               const std::array<GluePiece, 3>& pieces, cplx b_param,
                               cplx r_param) {
    cplx a1 = boundary_data(pieces[0].rep).tr_v;
    cplx a2 = boundary_data(pieces[1].rep).tr_v;
    cplx trv3 = boundary_data(pieces[2].rep).tr_v;
    if (std::abs(trv3 - (t * t - b_param)) > 1e-8)
        throw TraceMismatch("case2: T3 vertical trace incompatible with b");
    if (std::abs(f_t_eval(t, a1, a2, b_param, r_param)) > 1e-8)
        throw InconsistentFricke("case2: f_t(a1, a2, b; r) != 0");

    auto [x, y] = canonical_pair(t, a1);
    Mat2 z = complete_triple(x, y, t, b_param, a2, r_param, 1e-7);

    auto align_piece = [&](const GluePiece& p, Port e1, Port e2, const Mat2& d1, const Mat2& d2) {
        std::pair<Mat2, Mat2> src{p.rep.end_value(e1), p.rep.end_value(e2)};
        Mat2 c = align_pair(src, {d1, d2});
        return conj_rep(p.rep, c);
    };
    TangleRep r1 = align_piece(pieces[0], PORT_NW, PORT_SW, x, y);
    TangleRep r2 = align_piece(pieces[1], PORT_NE, PORT_SE, y, z);
    TangleRep r3 = align_piece(pieces[2], PORT_NW, PORT_SW, z, x.adjugate());

    ArcValues<cplx> vals(kd.diagram.n_arcs);
    const TangleRep* aligned[3] = {&r1, &r2, &r3};
    std::size_t leaf_offset = 0;
    for (int i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < pieces[i].diagram->leaves.size(); ++j)
            detail::transfer_port_values(kd.diagram, leaf_offset + j, *pieces[i].diagram, j,
                                         aligned[i]->arcs, vals, 1e-7);
        leaf_offset += pieces[i].diagram->leaves.size();
    }
    // rho_4 by reflection transport from the T3 block onto the T4 block
    reflect_transport(kd.diagram, leaf_offset - 1 + 0, leaf_offset, vals.value, vals);
    if (!vals.complete()) throw Error("case2: transfer left arcs unassigned");
    WirtingerRep rep{&kd, std::move(vals.value), t};
    if (relation_residual(kd.diagram, rep.arcs) > 1e-8)
        throw AlignmentFailure("case2: assembled residual too large");
    return rep;
}

} // namespace charvar
