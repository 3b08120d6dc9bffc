#pragma once

#include <optional>
#include <vector>

#include "charvar/pairs.hpp"

namespace charvar {

// Inner step of the chain moduli: given x1 and b in G(t), all x2 in G(t) with
// tr(x1 x2) = a2 and tr(x2 b) = a3. Three regimes, following the trichotomy
// in the moduli lemma:
//   * (x1, b) irreducible: one or two isolated solutions, one per root of
//     the Fricke quadratic in tr(x1 b x2);
//   * reducible, non-commuting: a single explicit solution or none;
//   * commuting: a one-parameter family C_t^{a3}(b), or none.
struct BridgeSolutions {
    enum class Kind { Isolated, Family, Empty };
    Kind kind = Kind::Empty;
    std::vector<Mat2> points; // Isolated

    // Family data: x2(u) = sample_Ctr(base, t, r, u)
    Mat2 family_base;
    cplx family_t{}, family_r{};

    Mat2 family_at(cplx u) const { return sample_Ctr(family_base, family_t, family_r, u); }

    std::size_t isolated_count() const { return kind == Kind::Isolated ? points.size() : 0; }
};

inline BridgeSolutions solve_bridge(cplx t, const Mat2& x1, const Mat2& b, cplx a2, cplx a3,
                                    double tol = 1e-9) {
    BridgeSolutions out;

    if (is_commuting(x1, b, kTolCommute)) {
        // x1 lies in Cen(b); the two conditions are compatible on a fiber or
        // not at all.
        TraceValue tv(t);
        bool compatible = false;
        if (!tv.parabolic()) {
            // x1 = b or x1 = b^{-1}
            double d_plus = dist_inf(x1, b);
            double d_minus = dist_inf(x1, b.adjugate());
            double eps = (d_plus <= d_minus) ? 1.0 : -1.0;
            cplx want = eps * a3 + (1.0 - eps) * 0.5 * t * t;
            compatible = std::abs(a2 - want) <= 1e-8;
        } else {
            // commuting parabolics share the fixed point: in the frame of b,
            // both are eps*p(u); the conditions pin the same matrix entry.
            Frame f = standard_frame(b);
            Mat2 x1f = f.g.adjugate() * x1 * f.g;
            double e1 = x1f.a11.real() >= 0.0 ? 1.0 : -1.0;
            cplx u1 = e1 * x1f.a12;
            cplx ub = 1.0; // b in its own frame is eps*p(1)
            cplx lhs = (e1 * a2 - t) * ub;
            cplx rhs = (f.eps * a3 - t) * u1;
            compatible = std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs));
        }
        if (compatible && in_Bt(a3, t)) {
            out.kind = BridgeSolutions::Kind::Family;
            out.family_base = b;
            out.family_t = t;
            out.family_r = a3;
        }
        return out;
    }

    if (!is_reducible_pair(x1, b)) {
        QuadraticRoots roots = solve_f_t(t, (x1 * b).trace(), a2, a3);
        out.kind = BridgeSolutions::Kind::Isolated;
        out.points.push_back(complete_triple(x1, b, t, a2, a3, roots.first, 1e-6));
        if (!roots.double_root)
            out.points.push_back(complete_triple(x1, b, t, a2, a3, roots.second, 1e-6));
        // drop numerically coincident solutions
        if (out.points.size() == 2 && dist_inf(out.points[0], out.points[1]) < 1e-8)
            out.points.pop_back();
        return out;
    }

    // Reducible, non-commuting: forces t != +-2. Bring the pair to the
    // normal form x1 = d(kappa), b = u(kappa^eps).
    TraceValue tv(t);
    if (tv.parabolic())
        throw Error("solve_bridge: reducible non-commuting pair at t = +-2 is impossible");
    Frame f = standard_frame(x1);
    Mat2 g = f.g;
    cplx kappa = f.kappa;
    Mat2 bf = g.adjugate() * b * g;
    if (std::abs(bf.a21) > std::abs(bf.a12)) {
        // flip to upper-triangular; J d(k) J^{-1} = d(1/k)
        Mat2 J{0.0, -1.0, 1.0, 0.0};
        g = g * J;
        kappa = 1.0 / kappa;
        bf = g.adjugate() * b * g;
    }
    double eps = (std::abs(bf.a11 - kappa) <= std::abs(bf.a11 - 1.0 / kappa)) ? 1.0 : -1.0;
    cplx beta = bf.a12;
    if (std::abs(beta) < 1e-12)
        throw Error("solve_bridge: pair classified reducible-noncommuting but is diagonal");
    cplx s = std::sqrt(beta);
    g = g * dmat(s); // bf.a12 -> 1
    cplx dk = kappa - 1.0 / kappa;
    cplx y11 = (a2 - t / kappa) / dk;
    cplx y22 = (kappa * t - a2) / dk;
    cplx y21 = a3 - eps * a2 + 0.5 * (eps - 1.0) * t * t;
    cplx off = y11 * y22 - 1.0;
    if (std::abs(y21) < 1e-10) {
        if (std::abs(off) < 1e-10) {
            // degenerate a2 on the reducible locus: a fiber, not expected for
            // a2 in B_t; surface it as a family through b
            if (in_Bt(a3, t)) {
                out.kind = BridgeSolutions::Kind::Family;
                out.family_base = b;
                out.family_t = t;
                out.family_r = a3;
            }
            return out;
        }
        out.kind = BridgeSolutions::Kind::Empty;
        return out;
    }
    Mat2 y{y11, off / y21, y21, y22};
    Mat2 x2 = conj_by(g, y);
    double r1 = std::abs((x1 * x2).trace() - a2);
    double r2 = std::abs((x2 * b).trace() - a3);
    if (r1 > 1e-6 || r2 > 1e-6)
        throw Error("solve_bridge: reducible-case solution failed validation");
    (void)tol;
    out.kind = BridgeSolutions::Kind::Isolated;
    out.points.push_back(x2);
    return out;
}

// ---------------------------------------------------------------------------

struct ChainSpec {
    cplx t;
    Mat2 a, b;                // endpoints x_0 and x_n
    std::vector<cplx> traces; // a_1 .. a_n, n >= 3
};

struct ChainParams {
    std::vector<cplx> fiber; // n-2 fiber coordinates; drawn from seed if empty
    unsigned root_mask = 0;  // selects the bridge solution
};

struct Chain {
    std::vector<Mat2> xs; // x_1 .. x_{n-1}
    double residual = 0.0;
};

inline double chain_residual(const ChainSpec& spec, const std::vector<Mat2>& xs) {
    std::size_t n = spec.traces.size();
    double res = 0.0;
    auto at = [&](std::size_t i) -> const Mat2& {
        if (i == 0) return spec.a;
        if (i == n) return spec.b;
        return xs[i - 1];
    };
    for (std::size_t i = 1; i <= n; ++i)
        res = std::max(res, std::abs((at(i - 1) * at(i)).trace() - spec.traces[i - 1]));
    for (const Mat2& x : xs) {
        res = std::max(res, std::abs(x.trace() - spec.t));
        res = std::max(res, std::abs(x.det() - 1.0));
    }
    return res;
}

// Jacobian of the chain constraint system at a chain, in the flat entry
// coordinates of x_1..x_{n-1} (4 complex entries per matrix). Rows: trace and
// determinant of every free matrix, then the n pairwise-trace constraints.
// Full row rank at a generic chain leaves corank n-2, the moduli dimension.
inline Eigen::MatrixXcd chain_jacobian(const ChainSpec& spec, const std::vector<Mat2>& xs) {
    std::size_t n = spec.traces.size();
    std::size_t vars = 4 * (n - 1);
    std::size_t rows = 2 * (n - 1) + n;
    Eigen::MatrixXcd J = Eigen::MatrixXcd::Zero(rows, vars);
    auto at = [&](std::size_t i) -> const Mat2& {
        if (i == 0) return spec.a;
        if (i == n) return spec.b;
        return xs[i - 1];
    };
    std::size_t r = 0;
    for (std::size_t i = 1; i < n; ++i, r += 2) {
        std::size_t c = 4 * (i - 1);
        const Mat2& x = xs[i - 1];
        J(r, c + 0) = 1.0; // d tr / d entries
        J(r, c + 3) = 1.0;
        J(r + 1, c + 0) = x.a22; // d det
        J(r + 1, c + 1) = -x.a21;
        J(r + 1, c + 2) = -x.a12;
        J(r + 1, c + 3) = x.a11;
    }
    for (std::size_t i = 1; i <= n; ++i, ++r) {
        // tr(x_{i-1} x_i): gradient w.r.t. both factors when they are free
        const Mat2& L = at(i - 1);
        const Mat2& R = at(i);
        if (i - 1 >= 1) {
            std::size_t c = 4 * (i - 2);
            J(r, c + 0) += R.a11;
            J(r, c + 1) += R.a21;
            J(r, c + 2) += R.a12;
            J(r, c + 3) += R.a22;
        }
        if (i <= n - 1) {
            std::size_t c = 4 * (i - 1);
            J(r, c + 0) += L.a11;
            J(r, c + 1) += L.a21;
            J(r, c + 2) += L.a12;
            J(r, c + 3) += L.a22;
        }
    }
    return J;
}

// Sample a point of M_t^{a}(a, b): free fiber steps for x_1..x_{n-2}, then a
// bridge closure for x_{n-1}. Returns nullopt when the drawn parameters land
// in an empty bridge.
inline std::optional<Chain> chain_sample(const ChainSpec& spec, ChainParams params,
                                         std::uint64_t seed) {
    std::size_t n = spec.traces.size();
    if (n < 3) throw Error("chain_sample: need n >= 3");
    for (cplx ai : spec.traces)
        if (!in_Bt(ai, spec.t, 1e-6))
            throw DegenerateTrace("chain_sample: trace target on {2, t^2-2}");

    Rng rng(seed);
    if (params.fiber.empty()) {
        for (std::size_t i = 0; i + 2 < n; ++i) params.fiber.push_back(rng.annulus(0.4, 1.8));
        params.root_mask = static_cast<unsigned>(rng.bits() & 0xffffu);
    }
    if (params.fiber.size() != n - 2)
        throw Error("chain_sample: expected n-2 fiber coordinates");

    std::vector<Mat2> xs;
    Mat2 prev = spec.a;
    for (std::size_t i = 0; i + 2 < n; ++i) {
        Mat2 next = sample_Ctr(prev, spec.t, spec.traces[i], params.fiber[i]);
        xs.push_back(next);
        prev = next;
    }
    BridgeSolutions sols = solve_bridge(spec.t, prev, spec.b, spec.traces[n - 2], spec.traces[n - 1]);
    Mat2 last;
    switch (sols.kind) {
        case BridgeSolutions::Kind::Empty:
            return std::nullopt;
        case BridgeSolutions::Kind::Isolated:
            last = sols.points[params.root_mask % sols.points.size()];
            break;
        case BridgeSolutions::Kind::Family:
            last = sols.family_at(cplx(1.0, 0.37) + 0.1 * static_cast<double>(params.root_mask % 7));
            break;
    }
    xs.push_back(last);
    Chain chain{std::move(xs), 0.0};
    chain.residual = chain_residual(spec, chain.xs);
    return chain;
}

} // namespace charvar
