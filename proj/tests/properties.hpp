#pragma once

// Randomized property suites shared by the unit tests and the acceptance binary.

#include "cma/interp.hpp"
#include "cma/lp.hpp"
#include "cma/poly.hpp"
#include "cma/semiring.hpp"
#include "cma/appl/parser.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace cma::check {

struct PropResult {
    std::string name;
    int checked = 0;
    int failed = 0;
    std::string first_failure;

    bool ok() const { return checked > 0 && failed == 0; }
    void expect(bool cond, const std::string& what) {
        ++checked;
        if (cond) return;
        if (failed++ == 0) first_failure = what;
    }
    std::string summary() const {
        std::ostringstream os;
        os << name << ": " << checked - failed << "/" << checked;
        if (failed) os << " (first failure: " << first_failure << ")";
        return os.str();
    }
};

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    Rational rational(int range = 9, int maxden = 5) {
        Rational r(integer(-range, range), integer(1, maxden));
        r.canonicalize();
        return r;
    }
    Rational nonneg(int range = 9, int maxden = 5) {
        Rational r(integer(0, range), integer(1, maxden));
        r.canonicalize();
        return r;
    }
    Interval interval(bool nonneg_only = false) {
        Rational a = nonneg_only ? nonneg() : rational(), b = nonneg_only ? nonneg() : rational();
        if (b < a) std::swap(a, b);
        return Interval(a, b);
    }
    // an interval containing i
    Interval widen(const Interval& i) { return Interval(i.lo + ExtRational(-nonneg()), i.hi + ExtRational(nonneg())); }
    template <class T>
    MomentVector<T> vec(std::size_t m, const std::function<T()>& elem) {
        MomentVector<T> v;
        for (std::size_t k = 0; k <= m; ++k) v.c.push_back(elem());
        return v;
    }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

template <class T>
std::string mv_str(const MomentVector<T>& v) {
    std::ostringstream os;
    os << "<";
    for (std::size_t k = 0; k < v.c.size(); ++k) {
        if (k) os << ", ";
        if constexpr (std::is_same_v<T, Rational>)
            os << v.c[k].get_str();
        else
            os << v.c[k].str();
    }
    os << ">";
    return os.str();
}

// Semiring laws over rationals and nonnegative intervals (exact), the
// subdistributive law over arbitrary intervals, and the laws over [0, inf].
inline PropResult semiring_laws(int n, std::uint64_t seed) {
    PropResult r{"semiring laws"};
    Gen g(seed);
    auto laws = [&](auto a, auto b, auto c, const std::string& label) {
        using V = decltype(a);
        std::size_t m = a.order();
        V z = V::zero(m), o = V::one(m);
        auto tag = [&](const char* law) { return label + " " + law + " at " + mv_str(a) + ", " + mv_str(b) + ", " + mv_str(c); };
        r.expect(mv_combine(mv_combine(a, b), c) == mv_combine(a, mv_combine(b, c)), tag("combine assoc"));
        r.expect(mv_combine(a, b) == mv_combine(b, a), tag("combine comm"));
        r.expect(mv_combine(a, z) == a, tag("combine unit"));
        r.expect(mv_compose(mv_compose(a, b), c) == mv_compose(a, mv_compose(b, c)), tag("compose assoc"));
        r.expect(mv_compose(a, o) == a && mv_compose(o, a) == a, tag("compose unit"));
        r.expect(mv_compose(a, mv_combine(b, c)) == mv_combine(mv_compose(a, b), mv_compose(a, c)), tag("left distrib"));
        r.expect(mv_compose(mv_combine(a, b), c) == mv_combine(mv_compose(a, c), mv_compose(b, c)), tag("right distrib"));
        r.expect(mv_compose(a, z) == z && mv_compose(z, a) == z, tag("absorb"));
    };
    for (int i = 0; i < n; ++i) {
        std::size_t m = static_cast<std::size_t>(g.integer(1, 4));
        std::function<Rational()> rq = [&] { return g.rational(); };
        laws(g.vec(m, rq), g.vec(m, rq), g.vec(m, rq), "rational");
        std::function<Interval()> ri = [&] { return g.interval(true); };
        laws(g.vec(m, ri), g.vec(m, ri), g.vec(m, ri), "nonneg interval");
        std::function<NonnegUpper()> ru = [&] {
            return g.integer(0, 9) == 0 ? NonnegUpper(ExtRational::pos_inf()) : NonnegUpper(g.nonneg());
        };
        laws(g.vec(m, ru), g.vec(m, ru), g.vec(m, ru), "nonneg upper");

        std::function<Interval()> ai = [&] { return g.interval(); };
        auto a = g.vec(m, ai), b = g.vec(m, ai), c = g.vec(m, ai);
        auto z = MomentVector<Interval>::zero(m), o = MomentVector<Interval>::one(m);
        r.expect(mv_combine(mv_combine(a, b), c) == mv_combine(a, mv_combine(b, c)), "interval combine assoc");
        r.expect(mv_combine(a, b) == mv_combine(b, a), "interval combine comm");
        r.expect(mv_combine(a, z) == a && mv_compose(a, o) == a && mv_compose(o, a) == a, "interval units");
        r.expect(mv_compose(a, z) == z, "interval absorb");
        r.expect(mv_le(mv_compose(a, mv_combine(b, c)), mv_combine(mv_compose(a, b), mv_compose(a, c))),
                 "interval subdistributivity at " + mv_str(a) + ", " + mv_str(b) + ", " + mv_str(c));
    }
    return r;
}

// <(u+v)^k>_k = <u^k>_k (x) <v^k>_k
inline PropResult binomial_compose(int n, std::uint64_t seed) {
    PropResult r{"power-vector composition"};
    Gen g(seed);
    for (int i = 0; i < n; ++i) {
        Rational u = g.rational(20, 7), v = g.rational(20, 7);
        for (std::size_t m = 0; m <= 6; ++m) {
            auto lhs = mv_of_scalar<Rational>(Rational(u + v), m);
            auto rhs = mv_compose(mv_of_scalar<Rational>(u, m), mv_of_scalar<Rational>(v, m));
            r.expect(lhs == rhs, "u=" + u.get_str() + " v=" + v.get_str() + " m=" + std::to_string(m));
        }
    }
    return r;
}

// a <= a' implies a (x) b <= a' (x) b and a (+) b <= a' (+) b; interval product is
// monotone under containment.
inline PropResult monotonicity(int n, std::uint64_t seed) {
    PropResult r{"monotonicity"};
    Gen g(seed);
    for (int i = 0; i < n; ++i) {
        std::size_t m = static_cast<std::size_t>(g.integer(1, 4));
        std::function<Interval()> ai = [&] { return g.interval(); };
        auto a = g.vec(m, ai), b = g.vec(m, ai);
        MomentVector<Interval> wide;
        for (auto& x : a.c) wide.c.push_back(g.widen(x));
        r.expect(mv_le(a, wide), "widen");
        r.expect(mv_le(mv_compose(a, b), mv_compose(wide, b)), "compose left at " + mv_str(a));
        r.expect(mv_le(mv_compose(b, a), mv_compose(b, wide)), "compose right at " + mv_str(a));
        r.expect(mv_le(mv_combine(a, b), mv_combine(wide, b)), "combine at " + mv_str(a));
        Interval x = g.interval(), y = g.interval();
        Interval x2 = g.widen(x), y2 = g.widen(y);
        r.expect(interval_le(interval_mul(x, y), interval_mul(x2, y2)), "interval mul at " + x.str() + " " + y.str());
        r.expect(interval_le(interval_add(x, y), interval_add(x2, y2)), "interval add at " + x.str() + " " + y.str());
    }
    return r;
}

// poly_expect against adaptive Gauss-Kronrod quadrature of E[p] over x ~ uniform(a, b).
inline PropResult expectation_vs_quadrature(int n, std::uint64_t seed) {
    PropResult r{"expectation vs quadrature"};
    Gen g(seed);
    const int nv = 3;  // x is variable 0
    for (int i = 0; i < n; ++i) {
        RPoly p;
        for (const Monomial& mono : monomials_upto(nv, 3))
            if (g.integer(0, 2) != 0) p.add_term(mono, g.rational());
        Rational a = g.rational(), b = a + g.nonneg(6, 3) + Rational(1, 4);
        auto moments = dist_raw_moments(appl::Dist::uniform(a, b), 3);
        RPoly e = poly_expect(p, 0, moments);
        for (int t = 0; t < 3; ++t) {
            std::vector<Rational> gam(nv);
            for (int v = 1; v < nv; ++v) gam[static_cast<std::size_t>(v)] = g.rational();
            double exact = poly_eval(e, gam).get_d();
            auto f = [&](double x) {
                double s = 0;
                for (auto& [mono, c] : p.terms()) {
                    double t2 = c.get_d();
                    for (auto& [v, k] : mono.e) t2 *= std::pow(v == 0 ? x : gam[static_cast<std::size_t>(v)].get_d(), k);
                    s += t2;
                }
                return s;
            };
            double width = Rational(b - a).get_d();
            double quad = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a.get_d(), b.get_d(), 5, 1e-12) / width;
            double tol = 1e-6 * std::max(1.0, std::abs(exact));
            r.expect(std::abs(quad - exact) <= tol, "quadrature " + std::to_string(quad) + " vs " + std::to_string(exact));
        }
    }
    return r;
}

// Small dense LP for the vertex-enumeration oracle: rows a.x (<= or >=) b.
struct SmallLP {
    int nv = 0;
    std::vector<std::vector<Rational>> a;
    std::vector<Rational> b;
    std::vector<bool> ge;
    std::vector<Rational> c;  // minimize c.x
};

inline LPProblem to_problem(const SmallLP& s) {
    LPProblem p;
    for (int j = 0; j < s.nv; ++j) p.add_var("x" + std::to_string(j));
    for (std::size_t i = 0; i < s.a.size(); ++i) {
        AffineForm f(-s.b[i]);
        for (int j = 0; j < s.nv; ++j) f.axpy(s.a[i][static_cast<std::size_t>(j)], AffineForm::var(j));
        p.add(f, s.ge[i] ? Rel::GE : Rel::LE);
    }
    AffineForm obj;
    for (int j = 0; j < s.nv; ++j) obj.axpy(s.c[static_cast<std::size_t>(j)], AffineForm::var(j));
    p.objective = obj;
    p.minimize = true;
    return p;
}

// exact solve of a square system; nullopt when singular
inline std::optional<std::vector<Rational>> solve_square(std::vector<std::vector<Rational>> m, std::vector<Rational> rhs) {
    std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        while (piv < n && m[piv][col] == 0) ++piv;
        if (piv == n) return std::nullopt;
        std::swap(m[piv], m[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || m[r][col] == 0) continue;
            Rational f = m[r][col] / m[col][col];
            for (std::size_t k = col; k < n; ++k) m[r][k] -= f * m[col][k];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<Rational> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rhs[i] / m[i][i];
    return x;
}

// minimum over all feasible basic points; nullopt when none is feasible
inline std::optional<Rational> vertex_minimum(const SmallLP& s) {
    std::size_t rows = s.a.size(), n = static_cast<std::size_t>(s.nv);
    std::optional<Rational> best;
    std::vector<std::size_t> pick;
    std::function<void(std::size_t)> rec = [&](std::size_t from) {
        if (pick.size() == n) {
            std::vector<std::vector<Rational>> m;
            std::vector<Rational> rhs;
            for (auto i : pick) {
                m.push_back(s.a[i]);
                rhs.push_back(s.b[i]);
            }
            auto x = solve_square(m, rhs);
            if (!x) return;
            for (std::size_t i = 0; i < rows; ++i) {
                Rational lhs = 0;
                for (std::size_t j = 0; j < n; ++j) lhs += s.a[i][j] * (*x)[j];
                if (s.ge[i] ? lhs < s.b[i] : lhs > s.b[i]) return;
            }
            Rational v = 0;
            for (std::size_t j = 0; j < n; ++j) v += s.c[j] * (*x)[j];
            if (!best || v < *best) best = v;
            return;
        }
        for (std::size_t i = from; i < rows; ++i) {
            pick.push_back(i);
            rec(i + 1);
            pick.pop_back();
        }
    };
    rec(0);
    return best;
}

inline SmallLP random_lp(Gen& g) {
    SmallLP s;
    s.nv = g.integer(2, 4);
    int extra = g.integer(1, 10 - 2 * s.nv > 1 ? 10 - 2 * s.nv : 1);
    auto row = [&](std::vector<Rational> a, Rational b, bool ge) {
        s.a.push_back(std::move(a));
        s.b.push_back(std::move(b));
        s.ge.push_back(ge);
    };
    // box -5 <= x_j <= 5 keeps the region bounded
    for (int j = 0; j < s.nv; ++j) {
        std::vector<Rational> e(static_cast<std::size_t>(s.nv), Rational(0));
        e[static_cast<std::size_t>(j)] = 1;
        row(e, Rational(-5), true);
        row(e, Rational(5), false);
    }
    for (int i = 0; i < extra; ++i) {
        std::vector<Rational> a;
        for (int j = 0; j < s.nv; ++j) a.push_back(Rational(g.integer(-6, 6)));
        row(a, Rational(g.integer(-8, 8)), g.integer(0, 1) == 1);
    }
    for (int j = 0; j < s.nv; ++j) s.c.push_back(g.rational(6, 3));
    return s;
}

// Built-in simplex against brute-force vertex enumeration.
inline PropResult simplex_vs_vertices(int n, std::uint64_t seed) {
    PropResult r{"simplex vs vertex enumeration"};
    Gen g(seed);
    for (int i = 0; i < n; ++i) {
        SmallLP s = random_lp(g);
        auto want = vertex_minimum(s);
        LPSolution sol = solve(to_problem(s));
        if (!want) {
            r.expect(sol.status == LPStatus::Infeasible, "instance " + std::to_string(i) + " should be infeasible, got " + to_string(sol.status));
            continue;
        }
        bool ok = sol.status == LPStatus::Optimal && std::abs(Rational(sol.objective - *want).get_d()) <= 1e-9;
        r.expect(ok, "instance " + std::to_string(i) + ": " + to_string(sol.status) + " " + sol.objective.get_str() + " vs " + want->get_str());
    }
    return r;
}

// Trace determinism, branch frequency, sampler support and moments.
inline PropResult interpreter_checks(std::uint64_t seed) {
    PropResult r{"interpreter"};
    appl::Program walk = appl::parse_program(
        "@pre(d > 0)\n"
        "func rdwalk() begin if x < d then t ~ uniform(-1, 2); x := x + t; call rdwalk; tick(1) fi end\n"
        "func main() begin x := 0; call rdwalk end\n");
    std::map<std::string, Rational> init{{"d", Rational(10)}};
    for (std::uint64_t s = 0; s < 20; ++s) {
        CounterRng a(seed, s), b(seed, s);
        TraceResult ta = run_trace(walk, a, 1000000, init), tb = run_trace(walk, b, 1000000, init);
        r.expect(ta.cost == tb.cost && ta.steps == tb.steps && ta.terminated == tb.terminated, "trace determinism");
        r.expect(ta.terminated && ta.cost >= 5, "rdwalk needs at least 5 moves");
    }
    auto e1 = estimate_moments(walk, 2, 2000, seed, 1000000, init);
    auto e2 = estimate_moments(walk, 2, 2000, seed, 1000000, init);
    r.expect(e1.raw == e2.raw, "estimate determinism");

    for (Rational p : {Rational(1, 2), Rational(1, 10), Rational(9, 10)}) {
        appl::Program coin = appl::parse_program("func main() begin if prob(" + p.get_str() + ") then tick(1) else skip fi end");
        const std::uint64_t N = 100000;
        auto e = estimate_moments(coin, 1, N, seed, 100);
        double pd = p.get_d(), tol = 4 * std::sqrt(pd * (1 - pd) / static_cast<double>(N));
        r.expect(std::abs(e.raw[1] - pd) <= tol, "branch frequency at p=" + p.get_str() + ": " + std::to_string(e.raw[1]));
    }

    appl::Dist u = appl::Dist::uniform(-1, 2);
    const int N = 100000;
    double s1 = 0, s2 = 0, s4 = 0;
    bool inside = true;
    for (int i = 0; i < N; ++i) {
        CounterRng rng(seed, static_cast<std::uint64_t>(i));
        double x = sample_exact(u, rng).get_d();
        inside = inside && x >= -1 && x <= 2;
        s1 += x;
        s2 += x * x;
        s4 += x * x * x * x;
    }
    r.expect(inside, "uniform sample outside support");
    double m1 = s1 / N, m2 = s2 / N;
    double se1 = std::sqrt((m2 - m1 * m1) / N), se2 = std::sqrt((s4 / N - m2 * m2) / N);
    r.expect(std::abs(m1 - 0.5) <= 4 * se1, "uniform first moment " + std::to_string(m1));
    r.expect(std::abs(m2 - 1.0) <= 4 * se2, "uniform second moment " + std::to_string(m2));
    return r;
}

}  // namespace cma::check
