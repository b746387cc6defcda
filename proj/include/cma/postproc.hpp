#pragma once

#include "cma/poly.hpp"
#include "cma/rational.hpp"
#include "cma/semiring.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cma {

// Numeric raw-moment enclosures at one valuation; index 0 is [1,1].
struct MomentBounds {
    std::vector<Rational> lo, hi;
    int m() const { return static_cast<int>(hi.size()) - 1; }
};

namespace pp {

// value of sum c_i mu^i
inline Rational horner(const std::vector<Rational>& c, const Rational& mu) {
    Rational r = 0;
    for (std::size_t i = c.size(); i-- > 0;) r = r * mu + c[i];
    return r;
}

inline std::vector<Rational> derivative(const std::vector<Rational>& c) {
    std::vector<Rational> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * Rational(static_cast<long>(i)));
    return d;
}

inline bool all_zero(const std::vector<Rational>& c) {
    for (auto& v : c)
        if (v != 0) return false;
    return true;
}

// sign-change brackets of the polynomial on [a, b], refined to width eps
inline std::vector<std::pair<Rational, Rational>> root_brackets(const std::vector<Rational>& c, const Rational& a,
                                                                const Rational& b, const Rational& eps) {
    std::vector<std::pair<Rational, Rational>> out;
    if (all_zero(c) || !(a < b)) return out;
    // split [a,b] at the critical points of c so each piece is monotone
    std::vector<Rational> cuts{a};
    auto dc = derivative(c);
    if (dc.size() > 1)
        for (auto& [l, r] : root_brackets(dc, a, b, eps)) cuts.push_back((l + r) / 2);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Rational l = cuts[i], r = cuts[i + 1];
        Rational fl = horner(c, l), fr = horner(c, r);
        if (fl == 0) {
            out.emplace_back(l, l);
            continue;
        }
        if (sgn(fl) == sgn(fr)) continue;
        while (r - l > eps) {
            Rational mid = (l + r) / 2;
            Rational fm = horner(c, mid);
            if (fm == 0) {
                l = r = mid;
                break;
            }
            if (sgn(fm) == sgn(fl))
                l = mid;
            else
                r = mid;
        }
        out.emplace_back(l, r);
    }
    return out;
}

// sound upper bound of the polynomial over [a, b]
inline Rational max_on(const std::vector<Rational>& c, const Rational& a, const Rational& b) {
    Rational best = std::max(horner(c, a), horner(c, b));
    if (a == b) return best;
    Rational eps = (b - a) / Rational(mpz_class(1) << 80);
    for (auto& [l, r] : root_brackets(derivative(c), a, b, eps)) {
        Rational v = std::max(horner(c, l), horner(c, r));
        if (l != r) {
            // Lipschitz slack over the bracket
            Rational R = std::max(abs(l), abs(r));
            Rational lip = 0, pw = 1;
            for (std::size_t i = 1; i < c.size(); ++i) {
                lip += abs(c[i]) * Rational(static_cast<long>(i)) * pw;
                pw *= R;
            }
            v += lip * (r - l);
        }
        best = std::max(best, v);
    }
    return best;
}

}  // namespace pp

// Upper bound of E[(X - E X)^k] over the raw-moment box.
inline Rational central_upper(const MomentBounds& b, int k) {
    if (k < 2 || k > b.m()) throw std::invalid_argument("central moment order out of range");
    if (k > 4) throw std::invalid_argument("central moments above 4 are not supported");
    const Rational L1 = b.lo[1], U1 = b.hi[1];
    std::optional<Rational> best;
    int free = k - 1;  // raw moments 2..k
    for (int mask = 0; mask < (1 << free); ++mask) {
        // f(mu) = sum_j C(k,j) (-1)^(k-j) e_j mu^(k-j), with e_0 = 1 and e_1 = mu
        std::vector<Rational> c(static_cast<std::size_t>(k + 1), Rational(0));
        for (int j = 0; j <= k; ++j) {
            Rational coef = Rational(binomial(static_cast<unsigned>(k), static_cast<unsigned>(j))) * ((k - j) % 2 ? Rational(-1) : Rational(1));
            if (j == 0) {
                c[static_cast<std::size_t>(k)] += coef;
            } else if (j == 1) {
                c[static_cast<std::size_t>(k)] += coef;
            } else {
                bool up = (mask >> (j - 2)) & 1;
                Rational e = up ? b.hi[static_cast<std::size_t>(j)] : b.lo[static_cast<std::size_t>(j)];
                c[static_cast<std::size_t>(k - j)] += coef * e;
            }
        }
        Rational v = pp::max_on(c, L1, U1);
        if (!best || v > *best) best = v;
    }
    if (k % 2 == 0 && *best < 0) return 0;
    return *best;
}

// U2 - L1^2 as a polynomial; valid where L1 >= 0
inline RPoly central2_poly(const RPoly& U2, const RPoly& L1) { return U2 - L1 * L1; }

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

inline Rational clamp01(const Rational& v) {
    if (v < 0) return 0;
    if (v > 1) return 1;
    return v;
}

// P[X >= a] <= E[X^k] / a^k for nonnegative X
inline Rational tail_markov(const Rational& Uk, const Rational& a, int k) {
    if (a <= 0) throw std::invalid_argument("markov bound requires a > 0");
    return clamp01(Uk / rpow(a, static_cast<unsigned>(k)));
}

// P[X >= a_raw] <= V / (V + (a_raw - U1)^2) when a_raw > U1
inline std::optional<Rational> tail_cantelli(const Rational& U1, const Rational& V, const Rational& a_raw) {
    Rational a = a_raw - U1;
    if (a <= 0) return std::nullopt;
    Rational v = V < 0 ? Rational(0) : V;
    if (v == 0) return Rational(0);
    return clamp01(v / (v + a * a));
}

// P[|X - E X| >= a] <= C / a^order for even order
inline Rational tail_chebyshev(const Rational& C, const Rational& a, int order) {
    if (order % 2 != 0) throw std::invalid_argument("chebyshev bound needs an even central moment");
    if (a <= 0) throw std::invalid_argument("chebyshev bound requires a > 0");
    Rational c = C < 0 ? Rational(0) : C;
    return clamp01(c / rpow(a, static_cast<unsigned>(order)));
}

struct TailRow {
    Rational a;
    std::vector<std::optional<Rational>> markov;  // k = 1..m
    std::optional<Rational> cantelli, chebyshev4;
    std::optional<Rational> min;
};

struct TailCurve {
    int m = 0;
    std::vector<TailRow> rows;

    std::string csv() const {
        std::ostringstream os;
        os << "a";
        for (int k = 1; k <= m; ++k) os << ",markov" << k;
        os << ",cantelli,chebyshev4,min\n";
        auto cell = [&](const std::optional<Rational>& v) {
            if (!v) return std::string();
            std::ostringstream s;
            s.precision(10);
            s << v->get_d();
            return s.str();
        };
        for (auto& r : rows) {
            std::ostringstream a;
            a.precision(10);
            a << r.a.get_d();
            os << a.str();
            for (auto& mk : r.markov) os << "," << cell(mk);
            os << "," << cell(r.cantelli) << "," << cell(r.chebyshev4) << "," << cell(r.min) << "\n";
        }
        return os.str();
    }
};

// central: upper bounds on central moments 2..4 where available
inline TailCurve tail_curve(const MomentBounds& b, const std::vector<std::optional<Rational>>& central, bool nonneg_cost,
                            const Rational& start, const Rational& stop, const Rational& step) {
    if (!(start > 0) || stop < start) throw std::invalid_argument("tail range must satisfy 0 < start <= stop");
    if (!(step > 0)) throw std::invalid_argument("tail step must be positive");
    TailCurve c;
    c.m = b.m();
    auto central_at = [&](int k) -> std::optional<Rational> {
        if (static_cast<std::size_t>(k) < central.size()) return central[static_cast<std::size_t>(k)];
        return std::nullopt;
    };
    for (Rational a = start; a <= stop; a += step) {
        TailRow r;
        r.a = a;
        auto take = [&](const std::optional<Rational>& v) {
            if (v && (!r.min || *v < *r.min)) r.min = v;
        };
        for (int k = 1; k <= c.m; ++k) {
            std::optional<Rational> v;
            if (nonneg_cost) v = tail_markov(b.hi[static_cast<std::size_t>(k)], a, k);
            r.markov.push_back(v);
            take(v);
        }
        if (auto v2 = central_at(2)) r.cantelli = tail_cantelli(b.hi[1], *v2, a);
        if (auto v4 = central_at(4); v4 && a > b.hi[1]) r.chebyshev4 = tail_chebyshev(*v4, a - b.hi[1], 4);
        take(r.cantelli);
        take(r.chebyshev4);
        c.rows.push_back(std::move(r));
        if (c.rows.size() > 100000) throw std::invalid_argument("tail range has too many points");
    }
    return c;
}

}  // namespace cma
