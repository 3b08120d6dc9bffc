#pragma once

#include <cctype>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "charvar/errors.hpp"

namespace charvar {

// Tangle expression tree. Leaves are twist regions: [k] is the horizontal
// composite of |k| crossings (a row), [1/k] the vertical composite (a
// column); k = 0 gives the crossingless row/column. '+' composes side by
// side (horizontal composite), '*' stacks (vertical composite).
struct Tangle {
    enum class Kind { Twist, Plus, Star };
    Kind kind = Kind::Twist;
    bool vertical = false; // twist leaf: row or column
    long count = 0;        // signed crossing count of the leaf
    std::shared_ptr<Tangle> left, right;

    static std::shared_ptr<Tangle> row(long k) {
        auto t = std::make_shared<Tangle>();
        t->kind = Kind::Twist;
        t->vertical = false;
        t->count = k;
        return t;
    }
    static std::shared_ptr<Tangle> col(long k) {
        auto t = std::make_shared<Tangle>();
        t->kind = Kind::Twist;
        t->vertical = true;
        t->count = k;
        return t;
    }
    static std::shared_ptr<Tangle> plus(std::shared_ptr<Tangle> l, std::shared_ptr<Tangle> r) {
        auto t = std::make_shared<Tangle>();
        t->kind = Kind::Plus;
        t->left = std::move(l);
        t->right = std::move(r);
        return t;
    }
    static std::shared_ptr<Tangle> star(std::shared_ptr<Tangle> l, std::shared_ptr<Tangle> r) {
        auto t = std::make_shared<Tangle>();
        t->kind = Kind::Star;
        t->left = std::move(l);
        t->right = std::move(r);
        return t;
    }
};

using TanglePtr = std::shared_ptr<Tangle>;

inline long tangle_crossing_count(const Tangle& t) {
    if (t.kind == Tangle::Kind::Twist) return std::labs(t.count);
    return tangle_crossing_count(*t.left) + tangle_crossing_count(*t.right);
}

// --- exact tangle fraction --------------------------------------------------

// Projective rational p/q (q = 0 encodes the infinity tangle).
struct Frac {
    long long p = 0, q = 1;

    static Frac reduced(long long p, long long q) {
        if (p == 0 && q == 0) throw InvalidFraction("0/0 tangle fraction");
        long long g = std::gcd(p < 0 ? -p : p, q < 0 ? -q : q);
        if (g) { p /= g; q /= g; }
        if (q < 0 || (q == 0 && p < 0)) { p = -p; q = -q; }
        return {p, q};
    }
    bool operator==(const Frac& o) const { return p == o.p && q == o.q; }
};

// F([k]) = k, F([1/k]) = 1/k, F(T1+T2) = F(T1) + F(T2), and the vertical
// composition adds reciprocals.
inline Frac tangle_fraction(const Tangle& t) {
    switch (t.kind) {
        case Tangle::Kind::Twist:
            return t.vertical ? Frac::reduced(1, t.count) : Frac::reduced(t.count, 1);
        case Tangle::Kind::Plus: {
            Frac a = tangle_fraction(*t.left), b = tangle_fraction(*t.right);
            return Frac::reduced(a.p * b.q + b.p * a.q, a.q * b.q);
        }
        case Tangle::Kind::Star: {
            Frac a = tangle_fraction(*t.left), b = tangle_fraction(*t.right);
            return Frac::reduced(a.p * b.p, a.q * b.p + b.q * a.p);
        }
    }
    throw Error("tangle_fraction: bad node");
}

// --- continued fractions ------------------------------------------------------

// Expansion of p/q, innermost term first: the returned list (k_1, ..., k_s)
// satisfies p/q = k_s + 1/(k_{s-1} + 1/(... + 1/k_1)). A proper fraction
// starts the reciprocal way, which surfaces as a trailing k_s = 0.
inline std::vector<long> cf_expand(long p, long q) {
    if (q == 0) throw InvalidFraction("cf_expand: zero denominator");
    if (std::gcd(p < 0 ? -p : p, q < 0 ? -q : q) != 1)
        throw InvalidFraction("cf_expand: fraction not reduced");
    if (q < 0) { p = -p; q = -q; }

    std::vector<long> outer_first;
    bool lead_zero = (p != 0) && (std::labs(p) < q);
    if (lead_zero) {
        outer_first.push_back(0);
        long np = q, nq = p; // reciprocal
        if (nq < 0) { np = -np; nq = -nq; }
        p = np; q = nq;
    }
    while (true) {
        long k = p >= 0 ? p / q : -((-p + q - 1) / q); // floor division
        long r = p - k * q;
        outer_first.push_back(k);
        if (r == 0) break;
        p = q;
        q = r;
    }
    return {outer_first.rbegin(), outer_first.rend()};
}

// Exact reconstruction of the value of an innermost-first expansion.
inline Frac cf_value(const std::vector<long>& ks) {
    long long p = ks.front(), q = 1;
    for (std::size_t j = 1; j < ks.size(); ++j) {
        long long np = ks[j] * p + q;
        q = p;
        p = np;
    }
    return Frac::reduced(p, q);
}

// [p/q] built through the parity form [k1]*[1/k2]+[k3]*... : a '+' always
// attaches a row at the east side and a '*' always stacks a column below the
// partial tangle. A trailing zero term is dropped (it is the identity
// attachment for its slot).
inline TanglePtr build_rational_tangle(long p, long q) {
    std::vector<long> ks = cf_expand(p, q);
    std::size_t s = ks.size();
    std::size_t last = s;
    if (s >= 2 && ks[s - 1] == 0) last = s - 1;
    auto term_vertical = [s](std::size_t j) { // j is 1-based
        return (j % 2) != (s % 2);
    };
    TanglePtr t = term_vertical(1) ? Tangle::col(ks[0]) : Tangle::row(ks[0]);
    for (std::size_t j = 2; j <= last; ++j) {
        long k = ks[j - 1];
        if (term_vertical(j)) t = Tangle::star(t, Tangle::col(k));
        else t = Tangle::plus(t, Tangle::row(k));
    }
    return t;
}

// --- mini-language parser ----------------------------------------------------
// expr := term (('+'|'*') term)*     (left associative, equal precedence)
// term := '[' int ']' | '[' int '/' int ']' | '[p/q:' int '/' int ']'
//       | '(' expr ')'

namespace detail {

class TangleParser {
public:
    explicit TangleParser(std::string text) : s_(normalize(std::move(text))) {}

    TanglePtr parse() {
        TanglePtr t = expr();
        skip_ws();
        if (pos_ != s_.size()) throw ParseError("trailing input", pos_);
        return t;
    }

private:
    static std::string normalize(std::string in) {
        std::string out;
        for (std::size_t i = 0; i < in.size();) {
            // U+2212 (minus sign) -> '-'
            if (i + 2 < in.size() && static_cast<unsigned char>(in[i]) == 0xE2 &&
                static_cast<unsigned char>(in[i + 1]) == 0x88 &&
                static_cast<unsigned char>(in[i + 2]) == 0x92) {
                out.push_back('-');
                i += 3;
            } else {
                out.push_back(in[i]);
                ++i;
            }
        }
        return out;
    }

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    long integer() {
        skip_ws();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (pos_ == digits) throw ParseError("expected integer", start);
        return std::stol(s_.substr(start, pos_ - start));
    }

    TanglePtr term() {
        skip_ws();
        if (eat('(')) {
            TanglePtr t = expr();
            if (!eat(')')) throw ParseError("expected ')'", pos_);
            return t;
        }
        if (!eat('[')) throw ParseError("expected '[' or '('", pos_);
        skip_ws();
        if (s_.compare(pos_, 4, "p/q:") == 0) pos_ += 4;
        long a = integer();
        if (eat('/')) {
            long b = integer();
            if (!eat(']')) throw ParseError("expected ']'", pos_);
            if (b == 0) {
                if (a != 1) throw ParseError("only [1/0] may carry a zero denominator", pos_);
                return Tangle::col(0);
            }
            return build_rational_tangle(a, b);
        }
        if (!eat(']')) throw ParseError("expected ']'", pos_);
        return Tangle::row(a);
    }

    TanglePtr expr() {
        TanglePtr t = term();
        for (;;) {
            skip_ws();
            if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '*')) {
                char op = s_[pos_++];
                TanglePtr r = term();
                t = (op == '+') ? Tangle::plus(t, r) : Tangle::star(t, r);
            } else {
                return t;
            }
        }
    }

    std::string s_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline TanglePtr parse_tangle(const std::string& text) {
    return detail::TangleParser(text).parse();
}

} // namespace charvar
