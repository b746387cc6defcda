#pragma once

#include "cma/appl/ast.hpp"
#include "cma/rational.hpp"
#include "cma/semiring.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cma {

// Sparse exponent list sorted by variable index; no zero exponents.
struct Monomial {
    std::vector<std::pair<int, int>> e;

    Monomial() = default;
    explicit Monomial(std::vector<std::pair<int, int>> ex) : e(std::move(ex)) {
        std::sort(e.begin(), e.end());
        std::vector<std::pair<int, int>> c;
        for (auto& [v, k] : e) {
            if (k == 0) continue;
            if (!c.empty() && c.back().first == v)
                c.back().second += k;
            else
                c.emplace_back(v, k);
        }
        e = std::move(c);
    }
    static Monomial var(int v, int k = 1) { return Monomial({{v, k}}); }

    int degree() const {
        int d = 0;
        for (auto& [v, k] : e) d += k;
        return d;
    }
    int exponent(int v) const {
        for (auto& [u, k] : e)
            if (u == v) return k;
        return 0;
    }
    Monomial without(int v) const {
        Monomial m;
        for (auto& p : e)
            if (p.first != v) m.e.push_back(p);
        return m;
    }
    friend Monomial operator*(const Monomial& a, const Monomial& b) {
        Monomial m;
        std::size_t i = 0, j = 0;
        while (i < a.e.size() || j < b.e.size()) {
            if (j == b.e.size() || (i < a.e.size() && a.e[i].first < b.e[j].first)) {
                m.e.push_back(a.e[i++]);
            } else if (i == a.e.size() || b.e[j].first < a.e[i].first) {
                m.e.push_back(b.e[j++]);
            } else {
                m.e.emplace_back(a.e[i].first, a.e[i].second + b.e[j].second);
                ++i;
                ++j;
            }
        }
        return m;
    }
    friend bool operator==(const Monomial& a, const Monomial& b) { return a.e == b.e; }

    std::string str(const std::vector<std::string>& names) const {
        if (e.empty()) return "1";
        std::string s;
        for (auto& [v, k] : e) {
            if (!s.empty()) s += "*";
            s += names.at(static_cast<std::size_t>(v));
            if (k > 1) s += "^" + std::to_string(k);
        }
        return s;
    }
    // identifier-safe form, e.g. "d.x.x"
    std::string ident(const std::vector<std::string>& names) const {
        if (e.empty()) return "1";
        std::string s;
        for (auto& [v, k] : e)
            for (int i = 0; i < k; ++i) {
                if (!s.empty()) s += ".";
                s += names.at(static_cast<std::size_t>(v));
            }
        return s;
    }
};

// Graded lexicographic: lower degree first; within a degree, the monomial
// with the larger exponent on the first differing variable is greater.
struct GradedLex {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        std::size_t i = 0, j = 0;
        while (i < a.e.size() && j < b.e.size()) {
            if (a.e[i] == b.e[j]) {
                ++i;
                ++j;
                continue;
            }
            if (a.e[i].first != b.e[j].first) return a.e[i].first > b.e[j].first;
            return a.e[i].second < b.e[j].second;
        }
        return i == a.e.size() && j < b.e.size();
    }
};

// c0 + sum_j a_j * q_j over LP unknowns q_j.
struct AffineForm {
    Rational c0 = 0;
    std::vector<std::pair<int, Rational>> terms;  // sorted by variable, nonzero

    AffineForm() = default;
    AffineForm(const Rational& c) : c0(c) {}
    AffineForm(long c) : c0(c) {}
    static AffineForm var(int v, Rational coef = 1) {
        AffineForm f;
        if (coef != 0) f.terms.emplace_back(v, std::move(coef));
        return f;
    }

    bool is_zero() const { return c0 == 0 && terms.empty(); }
    bool is_constant() const { return terms.empty(); }
    Rational coef(int v) const {
        for (auto& [u, a] : terms)
            if (u == v) return a;
        return 0;
    }

    AffineForm& add_term(int v, const Rational& a) { return axpy(a, var(v)); }
    AffineForm& operator+=(const AffineForm& o) { return axpy(Rational(1), o); }
    AffineForm& operator-=(const AffineForm& o) { return axpy(Rational(-1), o); }
    // this += s * o
    AffineForm& axpy(const Rational& s, const AffineForm& o) {
        if (s == 0) return *this;
        c0 += s * o.c0;
        if (o.terms.empty()) return *this;
        std::vector<std::pair<int, Rational>> r;
        r.reserve(terms.size() + o.terms.size());
        std::size_t i = 0, j = 0;
        while (i < terms.size() || j < o.terms.size()) {
            if (j == o.terms.size() || (i < terms.size() && terms[i].first < o.terms[j].first)) {
                r.push_back(std::move(terms[i++]));
            } else if (i == terms.size() || o.terms[j].first < terms[i].first) {
                r.emplace_back(o.terms[j].first, s * o.terms[j].second);
                ++j;
            } else {
                Rational v = terms[i].second + s * o.terms[j].second;
                if (v != 0) r.emplace_back(terms[i].first, std::move(v));
                ++i;
                ++j;
            }
        }
        terms = std::move(r);
        return *this;
    }
    AffineForm& operator*=(const Rational& s) {
        if (s == 0) {
            c0 = 0;
            terms.clear();
            return *this;
        }
        c0 *= s;
        for (auto& t : terms) t.second *= s;
        return *this;
    }
    friend AffineForm operator+(AffineForm a, const AffineForm& b) { return a += b; }
    friend AffineForm operator-(AffineForm a, const AffineForm& b) { return a -= b; }
    friend AffineForm operator-(AffineForm a) { return a *= Rational(-1); }
    friend AffineForm operator*(AffineForm a, const Rational& s) { return a *= s; }
    friend AffineForm operator*(const Rational& s, AffineForm a) { return a *= s; }
    friend bool operator==(const AffineForm& a, const AffineForm& b) { return a.c0 == b.c0 && a.terms == b.terms; }

    Rational eval(const std::vector<Rational>& x) const {
        Rational r = c0;
        for (auto& [v, a] : terms) r += a * x.at(static_cast<std::size_t>(v));
        return r;
    }
    std::string str(const std::function<std::string(int)>& name) const {
        std::string s;
        for (auto& [v, a] : terms) {
            if (!s.empty()) s += a < 0 ? " - " : " + ";
            else if (a < 0) s += "-";
            Rational m = abs(a);
            if (m != 1) s += m.get_str() + " ";
            s += name(v);
        }
        if (c0 != 0 || s.empty()) {
            if (!s.empty()) s += c0 < 0 ? " - " + Rational(abs(c0)).get_str() : " + " + c0.get_str();
            else s = c0.get_str();
        }
        return s;
    }
};

inline bool coef_is_zero(const Rational& r) { return r == 0; }
inline bool coef_is_zero(const AffineForm& f) { return f.is_zero(); }

struct DegreeOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <class C>
class Polynomial {
public:
    using Map = std::map<Monomial, C, GradedLex>;

    Polynomial() = default;
    Polynomial(const C& c) { add_term(Monomial(), c); }
    static Polynomial var(int v) {
        Polynomial p;
        p.add_term(Monomial::var(v), C(Rational(1)));
        return p;
    }
    static Polynomial term(const Monomial& m, const C& c) {
        Polynomial p;
        p.add_term(m, c);
        return p;
    }

    const Map& terms() const { return t_; }
    bool is_zero() const { return t_.empty(); }
    int degree() const { return t_.empty() ? 0 : t_.rbegin()->first.degree(); }
    C coef(const Monomial& m) const {
        auto it = t_.find(m);
        return it == t_.end() ? C(Rational(0)) : it->second;
    }

    void add_term(const Monomial& m, const C& c) {
        if (coef_is_zero(c)) return;
        auto [it, inserted] = t_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (coef_is_zero(it->second)) t_.erase(it);
        }
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (auto& [m, c] : o.t_) add_term(m, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (auto& [m, c] : o.t_) add_term(m, C(c) * Rational(-1));
        return *this;
    }
    Polynomial& operator*=(const Rational& s) {
        if (s == 0) {
            t_.clear();
            return *this;
        }
        for (auto& [m, c] : t_) c *= s;
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Rational& s) { return a *= s; }
    friend Polynomial operator*(const Rational& s, Polynomial a) { return a *= s; }
    friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.t_ == b.t_; }

private:
    Map t_;
};

using RPoly = Polynomial<Rational>;
using APoly = Polynomial<AffineForm>;

template <class C>
Polynomial<C> operator*(const RPoly& a, const Polynomial<C>& b) {
    Polynomial<C> r;
    for (auto& [ma, ca] : a.terms())
        for (auto& [mb, cb] : b.terms()) r.add_term(ma * mb, C(cb) * ca);
    return r;
}

inline RPoly poly_pow(const RPoly& p, int k) {
    RPoly r(Rational(1));
    for (int i = 0; i < k; ++i) r = p * r;
    return r;
}

inline Rational poly_eval(const RPoly& p, const std::vector<Rational>& g) {
    Rational r = 0;
    for (auto& [m, c] : p.terms()) {
        Rational t = c;
        for (auto& [v, k] : m.e) {
            if (static_cast<std::size_t>(v) >= g.size()) throw std::out_of_range("valuation misses variable " + std::to_string(v));
            t *= rpow(g[static_cast<std::size_t>(v)], static_cast<unsigned>(k));
        }
        r += t;
    }
    return r;
}

// evaluates program variables, leaving LP unknowns symbolic
inline AffineForm poly_eval(const APoly& p, const std::vector<Rational>& g) {
    AffineForm r;
    for (auto& [m, c] : p.terms()) {
        Rational t = 1;
        for (auto& [v, k] : m.e) {
            if (static_cast<std::size_t>(v) >= g.size()) throw std::out_of_range("valuation misses variable " + std::to_string(v));
            t *= rpow(g[static_cast<std::size_t>(v)], static_cast<unsigned>(k));
        }
        r.axpy(t, c);
    }
    return r;
}

// fixes LP unknowns, producing a rational polynomial
inline RPoly instantiate(const APoly& p, const std::vector<Rational>& lp) {
    RPoly r;
    for (auto& [m, c] : p.terms()) r.add_term(m, c.eval(lp));
    return r;
}

inline APoly lift(const RPoly& p) {
    APoly r;
    for (auto& [m, c] : p.terms()) r.add_term(m, AffineForm(c));
    return r;
}

template <class C>
Polynomial<C> poly_subst(const Polynomial<C>& p, int x, const RPoly& e, int cap = -1) {
    std::vector<RPoly> pw{RPoly(Rational(1))};
    Polynomial<C> r;
    for (auto& [m, c] : p.terms()) {
        int k = m.exponent(x);
        if (k == 0) {
            r.add_term(m, c);
            continue;
        }
        while (static_cast<int>(pw.size()) <= k) pw.push_back(e * pw.back());
        Polynomial<C> part = pw[static_cast<std::size_t>(k)] * Polynomial<C>::term(m.without(x), c);
        r += part;
    }
    if (cap >= 0)
        for (auto& [m, c] : r.terms())
            if (m.degree() > cap)
                throw DegreeOverflow("degree cap " + std::to_string(cap) + " exceeded by a monomial of degree " + std::to_string(m.degree()));
    return r;
}

inline std::vector<Rational> dist_raw_moments(const appl::Dist& d, int up_to) {
    std::vector<Rational> out;
    for (int i = 0; i <= up_to; ++i) {
        if (d.kind == appl::Dist::Kind::Uniform) {
            Rational num = rpow(d.b, static_cast<unsigned>(i + 1)) - rpow(d.a, static_cast<unsigned>(i + 1));
            Rational r = num / (Rational(i + 1) * (d.b - d.a));
            r.canonicalize();
            out.push_back(r);
        } else {
            Rational s = 0;
            for (auto& [v, p] : d.items) s += p * rpow(v, static_cast<unsigned>(i));
            out.push_back(s);
        }
    }
    return out;
}

template <class C>
Polynomial<C> poly_expect(const Polynomial<C>& p, int x, const std::vector<Rational>& moments) {
    Polynomial<C> r;
    for (auto& [m, c] : p.terms()) {
        int k = m.exponent(x);
        if (k >= static_cast<int>(moments.size())) throw std::invalid_argument("insufficient moments for x^" + std::to_string(k));
        C cc = c;
        cc *= moments[static_cast<std::size_t>(k)];
        r.add_term(m.without(x), cc);
    }
    return r;
}

// Expression to polynomial over program-variable indices.
inline RPoly expr_to_poly(const appl::ExprP& e, const std::function<int(const std::string&)>& index) {
    using K = appl::Expr::Kind;
    switch (e->kind) {
        case K::Var: {
            int i = index(e->name);
            if (i < 0) throw std::invalid_argument("unknown variable '" + e->name + "'");
            return RPoly::var(i);
        }
        case K::Const: return RPoly(e->value);
        case K::Add: return expr_to_poly(e->a, index) + expr_to_poly(e->b, index);
        case K::Mul: return expr_to_poly(e->a, index) * expr_to_poly(e->b, index);
    }
    return RPoly();
}

inline std::string poly_str(const RPoly& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    std::string s;
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
        const Rational& c = it->second;
        bool constant = it->first.e.empty();
        if (!s.empty()) s += c < 0 ? " - " : " + ";
        else if (c < 0) s += "-";
        Rational a = abs(c);
        if (constant) {
            s += a.get_str();
        } else {
            if (a != 1) s += a.get_str() + "*";
            s += it->first.str(names);
        }
    }
    return s;
}

// all monomials over n variables with degree <= d, graded-lex ascending
inline std::vector<Monomial> monomials_upto(int n, int d) {
    std::vector<Monomial> out;
    std::vector<int> ex(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int var, int left) {
        if (var == n) {
            std::vector<std::pair<int, int>> e;
            for (int i = 0; i < n; ++i)
                if (ex[static_cast<std::size_t>(i)]) e.emplace_back(i, ex[static_cast<std::size_t>(i)]);
            out.push_back(Monomial(std::move(e)));
            return;
        }
        for (int k = 0; k <= left; ++k) {
            ex[static_cast<std::size_t>(var)] = k;
            rec(var + 1, left - k);
        }
        ex[static_cast<std::size_t>(var)] = 0;
    };
    rec(0, d);
    std::sort(out.begin(), out.end(), GradedLex());
    return out;
}

// ---------------------------------------------------------------------------
// Symbolic intervals and potential annotations.

struct SymInterval {
    APoly lo, hi;
};

struct Annotation {
    int level = 0;  // components below this index are [0,0]
    std::vector<SymInterval> c;

    int m() const { return static_cast<int>(c.size()) - 1; }
    static Annotation zero(int m, int level = 0) {
        Annotation a;
        a.level = level;
        a.c.resize(static_cast<std::size_t>(m + 1));
        return a;
    }
    // <[1,1],[0,0],...>
    static Annotation one(int m) {
        Annotation a = zero(m, 0);
        a.c[0].lo = APoly(AffineForm(1));
        a.c[0].hi = APoly(AffineForm(1));
        return a;
    }
    static Annotation point(const std::vector<RPoly>& comps) {
        Annotation a = zero(static_cast<int>(comps.size()) - 1);
        for (std::size_t k = 0; k < comps.size(); ++k) {
            a.c[k].lo = lift(comps[k]);
            a.c[k].hi = lift(comps[k]);
        }
        return a;
    }
};

inline Annotation ann_add(const Annotation& a, const Annotation& b) {
    if (a.c.size() != b.c.size()) throw std::invalid_argument("annotation order mismatch");
    Annotation r = a;
    r.level = std::min(a.level, b.level);
    for (std::size_t k = 0; k < a.c.size(); ++k) {
        r.c[k].lo += b.c[k].lo;
        r.c[k].hi += b.c[k].hi;
    }
    return r;
}

// s * [lo, hi]; endpoints swap when s < 0
inline SymInterval interval_scale(const SymInterval& i, const Rational& s) {
    SymInterval r;
    if (s >= 0) {
        r.lo = i.lo * s;
        r.hi = i.hi * s;
    } else {
        r.lo = i.hi * s;
        r.hi = i.lo * s;
    }
    return r;
}

inline Annotation ann_scale(const Annotation& a, const Rational& s) {
    Annotation r = a;
    for (auto& ci : r.c) ci = interval_scale(ci, s);
    return r;
}

// <[c^k, c^k]>_k (x) a
inline Annotation ann_tick(const Rational& c, const Annotation& a) {
    int m = a.m();
    Annotation r = Annotation::zero(m, a.level);
    std::vector<Rational> pw{Rational(1)};
    for (int i = 1; i <= m; ++i) pw.push_back(pw.back() * c);
    for (int k = 0; k <= m; ++k) {
        for (int i = 0; i <= k; ++i) {
            const SymInterval& q = a.c[static_cast<std::size_t>(k - i)];
            if (q.lo.is_zero() && q.hi.is_zero()) continue;
            Rational s = Rational(binomial(static_cast<unsigned>(k), static_cast<unsigned>(i))) * pw[static_cast<std::size_t>(i)];
            SymInterval t = interval_scale(q, s);
            r.c[static_cast<std::size_t>(k)].lo += t.lo;
            r.c[static_cast<std::size_t>(k)].hi += t.hi;
        }
    }
    return r;
}

inline Annotation ann_subst(const Annotation& a, int x, const RPoly& e, int d) {
    Annotation r = a;
    for (std::size_t k = 0; k < a.c.size(); ++k) {
        int cap = static_cast<int>(k) * d;
        r.c[k].lo = poly_subst(a.c[k].lo, x, e, cap);
        r.c[k].hi = poly_subst(a.c[k].hi, x, e, cap);
    }
    return r;
}

inline Annotation ann_expect(const Annotation& a, int x, const std::vector<Rational>& moments) {
    Annotation r = a;
    for (auto& ci : r.c) {
        ci.lo = poly_expect(ci.lo, x, moments);
        ci.hi = poly_expect(ci.hi, x, moments);
    }
    return r;
}

// Template with fresh unknowns: component k < h is [0,0]; component k >= h
// has full polynomials of degree <= k*d on both ends. alloc(k, side, monomial)
// returns a fresh LP unknown.
inline Annotation fresh_annotation(int m, int d, int nvars, int h,
                                   const std::function<int(int, bool, const Monomial&)>& alloc,
                                   bool upper_only = false) {
    Annotation a = Annotation::zero(m, h);
    for (int k = h; k <= m; ++k) {
        for (const Monomial& mono : monomials_upto(nvars, k * d)) {
            if (!upper_only) a.c[static_cast<std::size_t>(k)].lo.add_term(mono, AffineForm::var(alloc(k, false, mono)));
            a.c[static_cast<std::size_t>(k)].hi.add_term(mono, AffineForm::var(alloc(k, true, mono)));
        }
    }
    return a;
}

}  // namespace cma
