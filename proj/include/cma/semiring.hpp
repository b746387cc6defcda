#pragma once

#include "cma/rational.hpp"

#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cma {

// Pascal triangle rows up to n, exact.
inline const std::vector<mpz_class>& binomial_row(unsigned n) {
    static thread_local std::vector<std::vector<mpz_class>> rows{{mpz_class(1)}};
    while (rows.size() <= n) {
        const auto& prev = rows.back();
        std::vector<mpz_class> next(prev.size() + 1);
        next.front() = 1;
        next.back() = 1;
        for (std::size_t i = 1; i + 1 < next.size(); ++i) next[i] = prev[i - 1] + prev[i];
        rows.push_back(std::move(next));
    }
    return rows[n];
}

inline mpz_class binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    return binomial_row(n)[k];
}

struct Interval {
    ExtRational lo{0L}, hi{0L};

    Interval() = default;
    Interval(ExtRational l, ExtRational h) : lo(std::move(l)), hi(std::move(h)) {
        if (hi < lo) throw std::invalid_argument("interval requires lo <= hi");
    }
    static Interval point(const Rational& r) { return Interval(r, r); }

    friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
    std::string str() const { return "[" + lo.str() + ", " + hi.str() + "]"; }
};

inline std::ostream& operator<<(std::ostream& os, const Interval& i) { return os << i.str(); }

inline Interval interval_add(const Interval& a, const Interval& b) { return Interval(a.lo + b.lo, a.hi + b.hi); }

inline Interval interval_mul(const Interval& a, const Interval& b) {
    ExtRational p[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    ExtRational lo = p[0], hi = p[0];
    for (int i = 1; i < 4; ++i) {
        lo = ext_min(lo, p[i]);
        hi = ext_max(hi, p[i]);
    }
    return Interval(lo, hi);
}

// containment order
inline bool interval_le(const Interval& a, const Interval& b) { return b.lo <= a.lo && a.hi <= b.hi; }

struct NonnegUpper {
    ExtRational v{0L};

    NonnegUpper() = default;
    explicit NonnegUpper(ExtRational x) : v(std::move(x)) {
        if (v.sign() < 0) throw std::invalid_argument("NonnegUpper requires a value >= 0");
    }
    friend bool operator==(const NonnegUpper& a, const NonnegUpper& b) { return a.v == b.v; }
    std::string str() const { return v.str(); }
};

// Semiring operations for a carrier; specializations below.
template <class T>
struct SemiringOps;

template <>
struct SemiringOps<Rational> {
    static Rational zero() { return 0; }
    static Rational one() { return 1; }
    static Rational add(const Rational& a, const Rational& b) { return a + b; }
    static Rational mul(const Rational& a, const Rational& b) { return a * b; }
    static bool le(const Rational& a, const Rational& b) { return a <= b; }
    static bool eq(const Rational& a, const Rational& b) { return a == b; }
    static Rational of_natural(const mpz_class& n) { return Rational(n); }
};

template <>
struct SemiringOps<Interval> {
    static Interval zero() { return Interval::point(0); }
    static Interval one() { return Interval::point(1); }
    static Interval add(const Interval& a, const Interval& b) { return interval_add(a, b); }
    static Interval mul(const Interval& a, const Interval& b) { return interval_mul(a, b); }
    static bool le(const Interval& a, const Interval& b) { return interval_le(a, b); }
    static bool eq(const Interval& a, const Interval& b) { return a == b; }
    static Interval of_natural(const mpz_class& n) { return Interval::point(Rational(n)); }
};

template <>
struct SemiringOps<NonnegUpper> {
    static NonnegUpper zero() { return NonnegUpper(0L); }
    static NonnegUpper one() { return NonnegUpper(1L); }
    static NonnegUpper add(const NonnegUpper& a, const NonnegUpper& b) { return NonnegUpper(a.v + b.v); }
    static NonnegUpper mul(const NonnegUpper& a, const NonnegUpper& b) { return NonnegUpper(a.v * b.v); }
    static bool le(const NonnegUpper& a, const NonnegUpper& b) { return a.v <= b.v; }
    static bool eq(const NonnegUpper& a, const NonnegUpper& b) { return a == b; }
    static NonnegUpper of_natural(const mpz_class& n) { return NonnegUpper(Rational(n)); }
};

// Element of the m-th order moment semiring over carrier T.
template <class T>
struct MomentVector {
    std::vector<T> c;

    MomentVector() = default;
    explicit MomentVector(std::vector<T> comps) : c(std::move(comps)) {}

    std::size_t order() const { return c.empty() ? 0 : c.size() - 1; }
    const T& operator[](std::size_t k) const { return c[k]; }
    T& operator[](std::size_t k) { return c[k]; }

    static MomentVector zero(std::size_t m) { return MomentVector(std::vector<T>(m + 1, SemiringOps<T>::zero())); }
    static MomentVector one(std::size_t m) {
        MomentVector r = zero(m);
        r.c[0] = SemiringOps<T>::one();
        return r;
    }

    friend bool operator==(const MomentVector& a, const MomentVector& b) {
        if (a.c.size() != b.c.size()) return false;
        for (std::size_t i = 0; i < a.c.size(); ++i)
            if (!SemiringOps<T>::eq(a.c[i], b.c[i])) return false;
        return true;
    }
};

template <class T>
inline void check_same_order(const MomentVector<T>& a, const MomentVector<T>& b) {
    if (a.c.size() != b.c.size()) throw std::invalid_argument("moment vector length mismatch");
}

template <class T>
MomentVector<T> mv_combine(const MomentVector<T>& a, const MomentVector<T>& b) {
    check_same_order(a, b);
    MomentVector<T> r;
    r.c.reserve(a.c.size());
    for (std::size_t k = 0; k < a.c.size(); ++k) r.c.push_back(SemiringOps<T>::add(a.c[k], b.c[k]));
    return r;
}

// r_k = sum_i C(k,i) * (u_i * v_{k-i})
template <class T>
MomentVector<T> mv_compose(const MomentVector<T>& a, const MomentVector<T>& b) {
    using Ops = SemiringOps<T>;
    check_same_order(a, b);
    MomentVector<T> r;
    r.c.reserve(a.c.size());
    for (std::size_t k = 0; k < a.c.size(); ++k) {
        T acc = Ops::zero();
        for (std::size_t i = 0; i <= k; ++i) {
            T term = Ops::mul(a.c[i], b.c[k - i]);
            acc = Ops::add(acc, Ops::mul(Ops::of_natural(binomial(static_cast<unsigned>(k), static_cast<unsigned>(i))), term));
        }
        r.c.push_back(std::move(acc));
    }
    return r;
}

template <class T>
bool mv_le(const MomentVector<T>& a, const MomentVector<T>& b) {
    check_same_order(a, b);
    for (std::size_t k = 0; k < a.c.size(); ++k)
        if (!SemiringOps<T>::le(a.c[k], b.c[k])) return false;
    return true;
}

// <c^0, c^1, ..., c^m>
template <class T>
MomentVector<T> mv_of_scalar(const T& c, std::size_t m) {
    using Ops = SemiringOps<T>;
    MomentVector<T> r;
    r.c.reserve(m + 1);
    T p = Ops::one();
    for (std::size_t k = 0; k <= m; ++k) {
        r.c.push_back(p);
        p = Ops::mul(p, c);
    }
    return r;
}

inline MomentVector<Interval> mv_point_powers(const Rational& c, std::size_t m) {
    MomentVector<Interval> r;
    Rational p = 1;
    for (std::size_t k = 0; k <= m; ++k) {
        r.c.push_back(Interval::point(p));
        p *= c;
    }
    return r;
}

}  // namespace cma
