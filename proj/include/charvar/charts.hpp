#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "charvar/pairs.hpp"
#include "charvar/rng.hpp"

namespace charvar {

// A polynomial constraint on a complex parameter vector, with analytic
// gradient.
struct ChartConstraint {
    std::function<cplx(const std::vector<cplx>&)> value;
    std::function<std::vector<cplx>(const std::vector<cplx>&)> gradient;
};

enum class ChartId { P334, Q1, Q2 };

inline const char* chart_name(ChartId id) {
    switch (id) {
        case ChartId::P334: return "P334";
        case ChartId::Q1: return "Q1";
        default: return "Q2";
    }
}

inline int chart_dimension_vars(ChartId id) { return id == ChartId::Q1 ? 3 : 4; }

// Parameter order: P334 (t, t13, t123, t134); Q1 (t, t23, t123);
// Q2 (t, t13, t123, s).
inline std::vector<ChartConstraint> chart_constraints(ChartId id) {
    std::vector<ChartConstraint> out;
    auto fricke_quadratic = [](int slot23, int slot123) {
        // g = u^2 + t(t^2-2-w) u + w^2 + (1-t^2) w + t^2 - 2,
        // w = v[slot23], u = v[slot123]
        ChartConstraint c;
        c.value = [slot23, slot123](const std::vector<cplx>& v) {
            cplx t = v[0], w = v[slot23], u = v[slot123];
            return u * u + t * (t * t - 2.0 - w) * u + w * w + (1.0 - t * t) * w + t * t - 2.0;
        };
        c.gradient = [slot23, slot123](const std::vector<cplx>& v) {
            cplx t = v[0], w = v[slot23], u = v[slot123];
            std::vector<cplx> g(v.size(), 0.0);
            g[0] = (3.0 * t * t - 2.0 - w) * u - 2.0 * t * w + 2.0 * t;
            g[slot23] = -t * u + 2.0 * w + 1.0 - t * t;
            g[slot123] = 2.0 * u + t * (t * t - 2.0 - w);
            return g;
        };
        return c;
    };
    switch (id) {
        case ChartId::P334: {
            out.push_back(fricke_quadratic(1, 2));
            // g2 = t134^2 + t(t^2-1-t13) t134 + t13^2 - t^2 t13 + 2 t^2 - 3
            ChartConstraint c2;
            c2.value = [](const std::vector<cplx>& v) {
                cplx t = v[0], w = v[1], u = v[3];
                return u * u + t * (t * t - 1.0 - w) * u + w * w - t * t * w + 2.0 * t * t - 3.0;
            };
            c2.gradient = [](const std::vector<cplx>& v) {
                cplx t = v[0], w = v[1], u = v[3];
                std::vector<cplx> g(4, 0.0);
                g[0] = (3.0 * t * t - 1.0 - w) * u - 2.0 * t * w + 4.0 * t;
                g[1] = -t * u + 2.0 * w - t * t;
                g[3] = 2.0 * u + t * (t * t - 1.0 - w);
                return g;
            };
            out.push_back(c2);
            break;
        }
        case ChartId::Q1:
            out.push_back(fricke_quadratic(1, 2));
            break;
        case ChartId::Q2: {
            out.push_back(fricke_quadratic(1, 2));
            // g2 = (s + 2 - t^2)(s - 1)^2 - t13 + t^2 - 2
            ChartConstraint c2;
            c2.value = [](const std::vector<cplx>& v) {
                cplx t = v[0], w = v[1], s = v[3];
                return (s + 2.0 - t * t) * (s - 1.0) * (s - 1.0) - w + t * t - 2.0;
            };
            c2.gradient = [](const std::vector<cplx>& v) {
                cplx t = v[0], w = v[1], s = v[3];
                (void)w;
                std::vector<cplx> g(4, 0.0);
                g[0] = -2.0 * t * (s - 1.0) * (s - 1.0) + 2.0 * t;
                g[1] = -1.0;
                g[3] = (s - 1.0) * (s - 1.0) + 2.0 * (s + 2.0 - t * t) * (s - 1.0);
                return g;
            };
            out.push_back(c2);
            break;
        }
    }
    return out;
}

struct ChartPoint {
    ChartId chart;
    std::vector<cplx> params;
    std::vector<double> residuals;
    double excluded_margin = 0.0;
};

// Meridian traces drawn with kappa near the unit circle: powers like x1^26
// then stay O(1) and the longitude identities can be checked at their stated
// absolute tolerances. Still a subset of the generic trace region.
inline cplx random_chart_trace(Rng& rng, double margin = 1e-3) {
    const double pi = 3.14159265358979323846;
    for (;;) {
        double alpha = rng.uniform(0.05, pi - 0.05);
        double beta = rng.uniform(-0.25, 0.25);
        cplx theta(alpha, beta);
        cplx t = 2.0 * std::cos(theta);
        if (in_generic_trace_region(t, margin)) return t;
    }
}

namespace detail {

inline double chart_excluded_margin(ChartId id, const std::vector<cplx>& v) {
    cplx t = v[0];
    double m = 1e300;
    auto upd = [&m](double d) { m = std::min(m, d); };
    switch (id) {
        case ChartId::P334: {
            cplx t13 = v[1];
            upd(std::abs(t13 - (t * t - 2.0)));
            upd(std::max(std::abs(t * t - 1.0), std::abs(t13 - 2.0)));
            upd(std::max(std::abs(t * t - 2.0), std::abs(t13 - 2.0)));
            break;
        }
        case ChartId::Q1: {
            cplx t23 = v[1];
            upd(std::abs(t23 - 2.0));
            upd(std::abs(t23 - (t * t - 2.0)));
            break;
        }
        case ChartId::Q2: {
            cplx t13 = v[1], s = v[3];
            upd(std::abs(t13 - 2.0));
            upd(std::abs(t13 - (t * t - 2.0)));
            upd(std::abs(s - 2.0));
            upd(std::abs(s - (t * t - 2.0)));
            break;
        }
    }
    return m;
}

// Magnitude of the canonical matrix witness of the point; chart points whose
// witnesses carry large entries are rejected so that every downstream
// identity can be checked at its stated absolute tolerance.
inline double chart_witness_norm(ChartId id, const std::vector<cplx>& v) {
    cplx t = v[0];
    try {
        switch (id) {
            case ChartId::P334: {
                auto [x1, x2] = canonical_pair(t, 1.0);
                Mat2 x3 = complete_triple(x1, x2, t, v[1], 1.0, v[2], 1e-6);
                Mat2 x4 = complete_triple(x1, x3, t, 0.0, 1.0, v[3], 1e-6);
                return std::max(std::max(norm_inf(x1), norm_inf(x2)),
                                std::max(norm_inf(x3), norm_inf(x4)));
            }
            case ChartId::Q1: {
                auto [x, y] = canonical_pair(t, 1.0);
                Mat2 z = complete_triple(x, y, t, 1.0, v[1], v[2], 1e-6);
                return std::max(std::max(norm_inf(x), norm_inf(y)), norm_inf(z));
            }
            case ChartId::Q2: {
                auto [x, y] = canonical_pair(t, 1.0);
                Mat2 z = complete_triple(x, y, t, v[1], 1.0, v[2], 1e-6);
                return std::max(std::max(norm_inf(x), norm_inf(y)), norm_inf(z));
            }
        }
    } catch (const Error&) {
        return 1e300;
    }
    return 1e300;
}

} // namespace detail

// Free coordinates drawn from the generic region, dependent ones solved in
// closed form (quadratic roots; the Q2 twist coordinate s is drawn free and
// t13 solved exactly). Excluded loci rejected with margin; deterministic for
// a fixed seed.
inline std::vector<ChartPoint> sample_chart(ChartId id, int count, std::uint64_t seed) {
    std::vector<ChartPoint> out;
    Rng rng(seed);
    auto constraints = chart_constraints(id);
    const double reject_margin = 1e-3;
    while (static_cast<int>(out.size()) < count) {
        cplx t = random_chart_trace(rng);
        ChartPoint pt;
        pt.chart = id;
        switch (id) {
            case ChartId::P334: {
                cplx t13 = rng.disk(2.5);
                QuadraticRoots r1 = solve_f_t(t, 1.0, t13, 1.0);
                QuadraticRoots r2 = solve_f_t(t, 0.0, t13, 1.0);
                cplx t123 = (rng.bits() & 1) ? r1.second : r1.first;
                cplx t134 = (rng.bits() & 1) ? r2.second : r2.first;
                pt.params = {t, t13, t123, t134};
                break;
            }
            case ChartId::Q1: {
                cplx t23 = rng.disk(2.5);
                QuadraticRoots r1 = solve_f_t(t, 1.0, 1.0, t23);
                cplx t123 = (rng.bits() & 1) ? r1.second : r1.first;
                pt.params = {t, t23, t123};
                break;
            }
            case ChartId::Q2: {
                // draw s, solve t13 linearly, then t123 from the quadratic
                cplx s = rng.disk(2.0);
                cplx t13 = (s + 2.0 - t * t) * (s - 1.0) * (s - 1.0) + t * t - 2.0;
                if (std::abs(t13) > 6.0) continue; // keep parameters bounded
                QuadraticRoots r1 = solve_f_t(t, 1.0, 1.0, t13);
                cplx t123 = (rng.bits() & 1) ? r1.second : r1.first;
                pt.params = {t, t13, t123, s};
                break;
            }
        }
        pt.excluded_margin = detail::chart_excluded_margin(id, pt.params);
        if (pt.excluded_margin < reject_margin) continue;
        if (detail::chart_witness_norm(id, pt.params) > 8.0) continue;
        bool ok = true;
        for (const auto& c : constraints) {
            double r = std::abs(c.value(pt.params));
            pt.residuals.push_back(r);
            if (r > 1e-11) ok = false;
        }
        if (!ok) continue;
        out.push_back(std::move(pt));
    }
    return out;
}

// --- numerical dimension -----------------------------------------------------

struct DimensionReport {
    int variables = 0;
    int constraints = 0;
    std::vector<double> singular_values;
    int rank = 0;
    int dimension = 0; // complex dimension = variables - rank
    double rank_tol = 0.0;
};

// Rank of the constraint Jacobian by SVD; complex dimension = #vars - rank.
// Analytic gradients are cross-checked against central finite differences.
// Refuses to report when singular values cluster around the cut.
inline DimensionReport estimate_local_dimension(const std::vector<ChartConstraint>& constraints,
                                                const std::vector<cplx>& point,
                                                double rank_tol = 1e-8,
                                                bool fd_check = true) {
    int m = static_cast<int>(constraints.size());
    int n = static_cast<int>(point.size());
    DimensionReport rep;
    rep.variables = n;
    rep.constraints = m;
    rep.rank_tol = rank_tol;
    if (m == 0) {
        rep.dimension = n;
        return rep;
    }
    Eigen::MatrixXcd J(m, n);
    for (int i = 0; i < m; ++i) {
        std::vector<cplx> g = constraints[i].gradient(point);
        for (int j = 0; j < n; ++j) J(i, j) = g[j];
        if (fd_check) {
            const double h = 1e-6;
            for (int j = 0; j < n; ++j) {
                std::vector<cplx> plus = point, minus = point;
                plus[j] += h;
                minus[j] -= h;
                cplx fd = (constraints[i].value(plus) - constraints[i].value(minus)) / (2.0 * h);
                if (std::abs(fd - g[j]) > 1e-5 * std::max(1.0, std::abs(g[j])))
                    throw Error("estimate_local_dimension: gradient disagrees with finite differences");
            }
        }
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    auto sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    double cut = rank_tol * std::max(smax, 1e-300);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        rep.singular_values.push_back(sv(i));
        if (sv(i) > cut) ++rank;
        // refuse ambiguous reports
        if (sv(i) > cut / 10.0 && sv(i) < cut * 10.0 && smax > 0.0)
            throw IllConditioned("estimate_local_dimension: singular value near the rank cut");
    }
    rep.rank = rank;
    rep.dimension = n - rank;
    return rep;
}

// Generic Jacobian rank for an explicit complex constraint system given as
// rows of gradients (used by the chain-moduli corank check).
inline DimensionReport rank_report(const Eigen::MatrixXcd& J, double rank_tol) {
    DimensionReport rep;
    rep.variables = static_cast<int>(J.cols());
    rep.constraints = static_cast<int>(J.rows());
    rep.rank_tol = rank_tol;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(J);
    auto sv = svd.singularValues();
    double smax = sv.size() ? sv(0) : 0.0;
    double cut = rank_tol * std::max(smax, 1e-300);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        rep.singular_values.push_back(sv(i));
        if (sv(i) > cut) ++rank;
    }
    rep.rank = rank;
    rep.dimension = rep.variables - rank;
    return rep;
}

} // namespace charvar
