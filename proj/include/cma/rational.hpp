#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace cma {

using Rational = mpq_class;

inline Rational make_rational(long num, long den = 1) {
    Rational r(num, den);
    r.canonicalize();
    return r;
}

// Accepts "3", "-2", "0.25", "1/3", "-7/2", "1.5e-3".
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    std::string s = text;
    bool neg = false;
    std::size_t i = 0;
    if (s[0] == '+' || s[0] == '-') {
        neg = s[0] == '-';
        i = 1;
    }
    std::string body = s.substr(i);
    Rational r;
    auto slash = body.find('/');
    if (slash != std::string::npos) {
        Rational n = parse_rational(body.substr(0, slash));
        Rational d = parse_rational(body.substr(slash + 1));
        if (d == 0) throw std::invalid_argument("zero denominator in '" + text + "'");
        r = n / d;
    } else {
        long exp10 = 0;
        auto e = body.find_first_of("eE");
        if (e != std::string::npos) {
            exp10 = std::stol(body.substr(e + 1));
            body = body.substr(0, e);
        }
        auto dot = body.find('.');
        std::string digits = body;
        if (dot != std::string::npos) {
            digits = body.substr(0, dot) + body.substr(dot + 1);
            exp10 -= static_cast<long>(body.size() - dot - 1);
        }
        if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("malformed rational literal '" + text + "'");
        mpz_class num(digits, 10);
        mpz_class p10;
        mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
        if (exp10 >= 0)
            r = Rational(num * p10);
        else
            r = Rational(num, p10);
        r.canonicalize();
    }
    return neg ? Rational(-r) : r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

inline long double mpz_to_ldouble(const mpz_class& z) {
    if (z == 0) return 0.0L;
    mpz_class a = abs(z);
    std::size_t bits = mpz_sizeinbase(a.get_mpz_t(), 2);
    long double out;
    if (bits <= 64) {
        out = static_cast<long double>(mpz_get_ui(a.get_mpz_t()));
    } else {
        std::size_t shift = bits - 64;
        mpz_class top = a >> shift;
        out = std::ldexp(static_cast<long double>(mpz_get_ui(top.get_mpz_t())), static_cast<int>(shift));
    }
    return sgn(z) < 0 ? -out : out;
}

inline long double to_ldouble(const Rational& r) {
    const mpz_class& n = r.get_num();
    const mpz_class& d = r.get_den();
    if (n == 0) return 0.0L;
    long nb = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2));
    long db = static_cast<long>(mpz_sizeinbase(d.get_mpz_t(), 2));
    long s = std::max(0L, 66 + db - nb);
    mpz_class q = (n << s) / d;
    return std::ldexp(mpz_to_ldouble(q), static_cast<int>(-s));
}

inline bool is_integer(const Rational& r) { return r.get_den() == 1; }

inline Rational rpow(const Rational& b, unsigned e) {
    Rational out = 1;
    for (unsigned i = 0; i < e; ++i) out *= b;
    return out;
}

inline Rational from_double(double v) {
    Rational r(v);
    r.canonicalize();
    return r;
}

// Best rational approximation of v with denominator at most max_den,
// from the continued-fraction convergents of v.
inline Rational rationalize(long double v, const mpz_class& max_den) {
    if (!std::isfinite(static_cast<double>(v))) throw std::domain_error("cannot rationalize non-finite value");
    bool neg = v < 0;
    if (neg) v = -v;
    long double ip = std::floor(v);
    mpz_class whole = 0;
    {
        long double rest = ip;
        while (rest >= 1.0L) {
            int e = 0;
            long double m = std::frexp(rest, &e);
            long double chunk = std::ldexp(std::floor(std::ldexp(m, 53)), e - 53);
            if (chunk <= 0) break;
            double cd = static_cast<double>(chunk);
            whole += mpz_class(cd);
            rest -= cd;
        }
    }
    long double x = v - ip;
    mpz_class hp = 0, kp = 1, hpp = 1, kpp = 0;
    Rational best(whole);
    for (int iter = 0; iter < 64 && x > 0; ++iter) {
        long double inv = 1.0L / x;
        long double a = std::floor(inv);
        if (a > 1e18L) break;
        mpz_class az(static_cast<double>(a));
        mpz_class h = az * hp + hpp;
        mpz_class k = az * kp + kpp;
        if (k > max_den) break;
        hpp = hp; kpp = kp; hp = h; kp = k;
        best = Rational(whole) + Rational(hp, kp);
        x = inv - a;
        if (x < 1e-30L) break;
    }
    best.canonicalize();
    return neg ? Rational(-best) : best;
}

// Rational extended with +inf and -inf, used for interval endpoints.
struct ExtRational {
    int inf = 0;  // -1, 0, +1
    Rational v = 0;

    ExtRational() = default;
    ExtRational(const Rational& r) : inf(0), v(r) {}
    ExtRational(long n) : inf(0), v(n) {}
    static ExtRational pos_inf() { ExtRational e; e.inf = 1; return e; }
    static ExtRational neg_inf() { ExtRational e; e.inf = -1; return e; }

    bool finite() const { return inf == 0; }
    int sign() const { return inf != 0 ? inf : sgn(v); }

    friend bool operator==(const ExtRational& a, const ExtRational& b) {
        if (a.inf != b.inf) return false;
        return a.inf != 0 || a.v == b.v;
    }
    friend bool operator<(const ExtRational& a, const ExtRational& b) {
        if (a.inf != b.inf) return a.inf < b.inf;
        if (a.inf != 0) return false;
        return a.v < b.v;
    }
    friend bool operator<=(const ExtRational& a, const ExtRational& b) { return !(b < a); }
    friend bool operator>(const ExtRational& a, const ExtRational& b) { return b < a; }
    friend bool operator>=(const ExtRational& a, const ExtRational& b) { return !(a < b); }

    friend ExtRational operator+(const ExtRational& a, const ExtRational& b) {
        if (a.inf != 0 && b.inf != 0 && a.inf != b.inf)
            throw std::domain_error("inf - inf is undefined");
        if (a.inf != 0) return a;
        if (b.inf != 0) return b;
        return ExtRational(Rational(a.v + b.v));
    }
    friend ExtRational operator-(const ExtRational& a) {
        ExtRational r = a;
        r.inf = -a.inf;
        r.v = -a.v;
        return r;
    }
    // 0 * inf = 0
    friend ExtRational operator*(const ExtRational& a, const ExtRational& b) {
        int sa = a.sign(), sb = b.sign();
        if (sa == 0 || sb == 0) return ExtRational(0L);
        if (a.inf != 0 || b.inf != 0) {
            ExtRational r;
            r.inf = sa * sb;
            return r;
        }
        return ExtRational(Rational(a.v * b.v));
    }

    std::string str() const {
        if (inf > 0) return "inf";
        if (inf < 0) return "-inf";
        return v.get_str();
    }
    double to_double() const {
        if (inf > 0) return std::numeric_limits<double>::infinity();
        if (inf < 0) return -std::numeric_limits<double>::infinity();
        return v.get_d();
    }
};

inline const ExtRational& ext_min(const ExtRational& a, const ExtRational& b) { return b < a ? b : a; }
inline const ExtRational& ext_max(const ExtRational& a, const ExtRational& b) { return a < b ? b : a; }

}  // namespace cma
