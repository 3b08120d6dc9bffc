#pragma once

#include <vector>

#include "charvar/mat2.hpp"

namespace charvar {

// Univariate polynomial over C, dense coefficients, constant term first.
// Ring operations only; used to propagate tangle representations with the
// pair trace s kept symbolic.
struct Poly {
    std::vector<cplx> c;

    Poly() : c{cplx(0.0)} {}
    Poly(cplx v) : c{v} {} // NOLINT: implicit scalar lift
    Poly(double v) : c{cplx(v)} {}
    static Poly variable() { return Poly(std::vector<cplx>{0.0, 1.0}); }
    explicit Poly(std::vector<cplx> coeffs) : c(std::move(coeffs)) {
        if (c.empty()) c.push_back(0.0);
    }

    int degree() const {
        for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
            if (std::abs(c[i]) != 0.0) return i;
        return 0;
    }

    cplx eval(cplx z) const {
        cplx acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * z + c[i];
        return acc;
    }

    Poly derivative() const {
        if (c.size() <= 1) return Poly();
        std::vector<cplx> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = double(i) * c[i];
        return Poly(std::move(d));
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        std::vector<cplx> r(std::max(a.c.size(), b.c.size()), 0.0);
        for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
        for (std::size_t i = 0; i < b.c.size(); ++i) r[i] += b.c[i];
        return Poly(std::move(r));
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        std::vector<cplx> r(std::max(a.c.size(), b.c.size()), 0.0);
        for (std::size_t i = 0; i < a.c.size(); ++i) r[i] += a.c[i];
        for (std::size_t i = 0; i < b.c.size(); ++i) r[i] -= b.c[i];
        return Poly(std::move(r));
    }
    Poly operator-() const {
        Poly r = *this;
        for (cplx& v : r.c) v = -v;
        return r;
    }
    friend Poly operator*(const Poly& a, const Poly& b) {
        std::vector<cplx> r(a.c.size() + b.c.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c.size(); ++i)
            for (std::size_t j = 0; j < b.c.size(); ++j) r[i + j] += a.c[i] * b.c[j];
        return Poly(std::move(r));
    }

    double max_coeff() const {
        double m = 0.0;
        for (const cplx& v : c) m = std::max(m, std::abs(v));
        return m;
    }
};

inline Poly operator*(double v, const Poly& p) {
    Poly r = p;
    for (cplx& x : r.c) x *= v;
    return r;
}
inline Poly operator*(cplx v, const Poly& p) {
    Poly r = p;
    for (cplx& x : r.c) x *= v;
    return r;
}

} // namespace charvar
