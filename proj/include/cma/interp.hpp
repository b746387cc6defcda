#pragma once

#include "cma/appl/ast.hpp"
#include "cma/rational.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cma {

using appl::CondP;
using appl::ExprP;
using appl::Program;
using appl::StmtP;

struct RandomSource {
    virtual ~RandomSource() = default;
    virtual std::uint64_t next_u64() = 0;
    // uniform double in [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
};

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based stream keyed by (seed, stream): the i-th draw is a pure
// function of (seed, stream, i), so trials are order independent.
class CounterRng : public RandomSource {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL))) {}
    std::uint64_t next_u64() override { return splitmix64(key_ + 0x9E3779B97F4A7C15ULL * (++ctr_)); }
    std::uint64_t draws() const { return ctr_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

// ---------------------------------------------------------------------------
// Exact small-step semantics over rational states.

struct Kont;
using KontP = std::shared_ptr<const Kont>;

struct Kont {
    enum class Kind { Stop, Loop, Seq };
    Kind kind = Kind::Stop;
    CondP cond;
    StmtP stmt;  // loop body or the pending statement
    KontP rest;

    static KontP stop() { return std::make_shared<Kont>(); }
    static KontP loop(CondP c, StmtP body, KontP k) {
        auto r = std::make_shared<Kont>();
        r->kind = Kind::Loop;
        r->cond = std::move(c);
        r->stmt = std::move(body);
        r->rest = std::move(k);
        return r;
    }
    static KontP seq(StmtP s, KontP k) {
        auto r = std::make_shared<Kont>();
        r->kind = Kind::Seq;
        r->stmt = std::move(s);
        r->rest = std::move(k);
        return r;
    }
};

struct Config {
    std::vector<Rational> gamma;
    StmtP S;
    KontP K;
    Rational alpha = 0;

    bool terminal() const { return S->kind == appl::Stmt::Kind::Skip && K->kind == Kont::Kind::Stop; }
};

inline Rational eval_expr(const Program& p, const ExprP& e, const std::vector<Rational>& g) {
    using K = appl::Expr::Kind;
    switch (e->kind) {
        case K::Var: {
            int i = p.var_index(e->name);
            if (i < 0) throw std::invalid_argument("unknown variable '" + e->name + "'");
            return g[static_cast<std::size_t>(i)];
        }
        case K::Const: return e->value;
        case K::Add: return eval_expr(p, e->a, g) + eval_expr(p, e->b, g);
        case K::Mul: return eval_expr(p, e->a, g) * eval_expr(p, e->b, g);
    }
    return 0;
}

inline bool eval_cond(const Program& p, const CondP& c, const std::vector<Rational>& g) {
    using K = appl::Cond::Kind;
    switch (c->kind) {
        case K::True: return true;
        case K::Not: return !eval_cond(p, c->a, g);
        case K::And: return eval_cond(p, c->a, g) && eval_cond(p, c->b, g);
        case K::Le: return eval_expr(p, c->l, g) <= eval_expr(p, c->r, g);
    }
    return false;
}

inline Rational sample_exact(const appl::Dist& d, RandomSource& rng) {
    double u = rng.uniform01();
    if (d.kind == appl::Dist::Kind::Uniform) {
        double a = d.a.get_d(), b = d.b.get_d();
        Rational r = from_double(a + u * (b - a));
        if (r < d.a) r = d.a;
        if (r > d.b) r = d.b;
        return r;
    }
    double acc = 0;
    for (auto& [v, pr] : d.items) {
        acc += pr.get_d();
        if (u < acc) return v;
    }
    return d.items.back().first;
}

inline std::vector<Rational> initial_valuation(const Program& p, const std::map<std::string, Rational>& overrides = {}) {
    std::vector<Rational> g(p.vars.size(), Rational(0));
    for (auto& [k, v] : overrides) {
        int i = p.var_index(k);
        if (i >= 0) g[static_cast<std::size_t>(i)] = v;
    }
    return g;
}

inline Config initial_config(const Program& p, const std::map<std::string, Rational>& overrides = {}) {
    return Config{initial_valuation(p, overrides), p.main, Kont::stop(), Rational(0)};
}

// One evaluation rule; terminal configurations step to themselves.
inline Config step(const Program& p, const Config& c, RandomSource& rng) {
    using K = appl::Stmt::Kind;
    Config n = c;
    const StmtP& s = c.S;
    switch (s->kind) {
        case K::Skip:
            switch (c.K->kind) {
                case Kont::Kind::Stop: return n;
                case Kont::Kind::Loop:
                    if (eval_cond(p, c.K->cond, c.gamma)) {
                        n.S = c.K->stmt;
                    } else {
                        n.K = c.K->rest;
                    }
                    return n;
                case Kont::Kind::Seq:
                    n.S = c.K->stmt;
                    n.K = c.K->rest;
                    return n;
            }
            return n;
        case K::Tick:
            n.alpha += s->value;
            n.S = appl::skip();
            return n;
        case K::Assign:
            n.gamma[static_cast<std::size_t>(p.var_index(s->name))] = eval_expr(p, s->expr, c.gamma);
            n.S = appl::skip();
            return n;
        case K::Sample:
            n.gamma[static_cast<std::size_t>(p.var_index(s->name))] = sample_exact(s->dist, rng);
            n.S = appl::skip();
            return n;
        case K::Call: n.S = p.decls.at(s->name); return n;
        case K::While:
            n.S = appl::skip();
            n.K = Kont::loop(s->cond, s->s1, c.K);
            return n;
        case K::Prob: n.S = rng.uniform01() < s->value.get_d() ? s->s1 : s->s2; return n;
        case K::If: n.S = eval_cond(p, s->cond, c.gamma) ? s->s1 : s->s2; return n;
        case K::Seq:
            n.S = s->s1;
            n.K = Kont::seq(s->s2, c.K);
            return n;
    }
    return n;
}

struct TraceResult {
    Rational cost = 0;
    std::uint64_t steps = 0;
    bool terminated = true;
};

inline TraceResult run_trace_exact(const Program& p, RandomSource& rng, std::uint64_t step_limit,
                                   const std::map<std::string, Rational>& init = {}) {
    Config c = initial_config(p, init);
    TraceResult r;
    while (!c.terminal()) {
        if (r.steps >= step_limit) {
            r.terminated = false;
            break;
        }
        c = step(p, c, rng);
        ++r.steps;
    }
    r.cost = c.alpha;
    return r;
}

// ---------------------------------------------------------------------------
// Compiled interpreter for Monte-Carlo estimation. Same rules and step count
// as step(); states are doubles and the cost is kept exactly as an integer
// multiple of 1/L where L is the lcm of all tick denominators.

class CompiledProgram {
public:
    explicit CompiledProgram(const Program& p) : prog_(p) {
        mpz_class l = 1;
        auto scan = [&](const StmtP& b) {
            appl::for_each_stmt(b, [&](const StmtP& s) {
                if (s->kind == appl::Stmt::Kind::Tick) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), s->value.get_den().get_mpz_t());
            });
        };
        scan(p.main);
        for (auto& [f, b] : p.decls) scan(b);
        if (!l.fits_slong_p()) throw std::overflow_error("tick denominators too large");
        lcm_ = l;
        main_ = compile(p.main);
        for (auto& [f, b] : p.decls) bodies_[f] = -1;
        for (auto& [f, b] : p.decls) bodies_[f] = compile(b);
        for (auto& n : nodes_)
            if (n.kind == appl::Stmt::Kind::Call) n.a = bodies_.at(n.callee);
    }

    struct Result {
        __int128 units = 0;
        std::uint64_t steps = 0;
        bool terminated = true;
    };

    Result run(RandomSource& rng, std::uint64_t step_limit, std::vector<double>& g) const {
        using K = appl::Stmt::Kind;
        Result r;
        struct Frame {
            bool loop;
            int node;
        };
        std::vector<Frame> stack;
        stack.reserve(64);
        int cur = main_;
        for (;;) {
            const Node& n = nodes_[static_cast<std::size_t>(cur)];
            if (n.kind == K::Skip && stack.empty()) break;
            if (r.steps >= step_limit) {
                r.terminated = false;
                break;
            }
            ++r.steps;
            switch (n.kind) {
                case K::Skip: {
                    Frame f = stack.back();
                    if (f.loop) {
                        const Node& w = nodes_[static_cast<std::size_t>(f.node)];
                        if (cond(w.cond, g)) {
                            cur = w.a;
                        } else {
                            stack.pop_back();
                            cur = skip_;
                        }
                    } else {
                        stack.pop_back();
                        cur = f.node;
                    }
                    break;
                }
                case K::Tick:
                    r.units += n.units;
                    cur = skip_;
                    break;
                case K::Assign:
                    g[static_cast<std::size_t>(n.var)] = expr(n.expr, g);
                    cur = skip_;
                    break;
                case K::Sample: {
                    double u = rng.uniform01();
                    if (n.uniform) {
                        double v = n.lo + u * (n.hi - n.lo);
                        g[static_cast<std::size_t>(n.var)] = v < n.lo ? n.lo : (v > n.hi ? n.hi : v);
                    } else {
                        std::size_t j = 0;
                        while (j + 1 < n.cum.size() && !(u < n.cum[j])) ++j;
                        g[static_cast<std::size_t>(n.var)] = n.vals[j];
                    }
                    cur = skip_;
                    break;
                }
                case K::Call: cur = n.a; break;
                case K::While:
                    stack.push_back({true, cur});
                    cur = skip_;
                    break;
                case K::Prob: cur = rng.uniform01() < n.p ? n.a : n.b; break;
                case K::If: cur = cond(n.cond, g) ? n.a : n.b; break;
                case K::Seq:
                    stack.push_back({false, n.b});
                    cur = n.a;
                    break;
            }
        }
        return r;
    }

    const mpz_class& lcm() const { return lcm_; }
    const Program& program() const { return prog_; }

private:
    struct ENode {
        appl::Expr::Kind kind;
        int var = -1;
        double value = 0;
        int a = -1, b = -1;
    };
    struct CNode {
        appl::Cond::Kind kind;
        int a = -1, b = -1;  // subconditions
        int l = -1, r = -1;  // expressions
    };
    struct Node {
        appl::Stmt::Kind kind;
        int a = -1, b = -1;
        int var = -1;
        int expr = -1;
        int cond = -1;
        long units = 0;
        double p = 0;
        bool uniform = true;
        double lo = 0, hi = 0;
        std::vector<double> cum, vals;
        std::string callee;
    };

    const Program& prog_;
    mpz_class lcm_;
    std::vector<Node> nodes_;
    std::vector<ENode> enodes_;
    std::vector<CNode> cnodes_;
    std::map<std::string, int> bodies_;
    int main_ = -1;
    int skip_ = -1;

    int compile_expr(const ExprP& e) {
        ENode n{e->kind};
        if (e->kind == appl::Expr::Kind::Var) n.var = prog_.var_index(e->name);
        if (e->kind == appl::Expr::Kind::Const) n.value = e->value.get_d();
        if (e->a) n.a = compile_expr(e->a);
        if (e->b) n.b = compile_expr(e->b);
        enodes_.push_back(n);
        return static_cast<int>(enodes_.size()) - 1;
    }
    int compile_cond(const CondP& c) {
        CNode n{c->kind};
        if (c->a) n.a = compile_cond(c->a);
        if (c->b) n.b = compile_cond(c->b);
        if (c->l) n.l = compile_expr(c->l);
        if (c->r) n.r = compile_expr(c->r);
        cnodes_.push_back(n);
        return static_cast<int>(cnodes_.size()) - 1;
    }
    int compile(const StmtP& s) {
        using K = appl::Stmt::Kind;
        if (skip_ < 0) {
            nodes_.push_back(Node{K::Skip});
            skip_ = 0;
        }
        Node n{s->kind};
        switch (s->kind) {
            case K::Skip: return skip_;
            case K::Tick: {
                Rational scaled = s->value * Rational(lcm_);
                if (!scaled.get_num().fits_slong_p()) throw std::overflow_error("tick too large");
                n.units = scaled.get_num().get_si();
                break;
            }
            case K::Assign:
                n.var = prog_.var_index(s->name);
                n.expr = compile_expr(s->expr);
                break;
            case K::Sample:
                n.var = prog_.var_index(s->name);
                n.uniform = s->dist.kind == appl::Dist::Kind::Uniform;
                if (n.uniform) {
                    n.lo = s->dist.a.get_d();
                    n.hi = s->dist.b.get_d();
                } else {
                    double acc = 0;
                    for (auto& [v, pr] : s->dist.items) {
                        acc += pr.get_d();
                        n.cum.push_back(acc);
                        n.vals.push_back(v.get_d());
                    }
                }
                break;
            case K::Call: n.callee = s->name; break;
            case K::While:
                n.cond = compile_cond(s->cond);
                n.a = compile(s->s1);
                break;
            case K::Prob:
                n.p = s->value.get_d();
                n.a = compile(s->s1);
                n.b = compile(s->s2);
                break;
            case K::If:
                n.cond = compile_cond(s->cond);
                n.a = compile(s->s1);
                n.b = compile(s->s2);
                break;
            case K::Seq:
                n.a = compile(s->s1);
                n.b = compile(s->s2);
                break;
        }
        nodes_.push_back(std::move(n));
        return static_cast<int>(nodes_.size()) - 1;
    }

    double expr(int i, const std::vector<double>& g) const {
        const ENode& e = enodes_[static_cast<std::size_t>(i)];
        switch (e.kind) {
            case appl::Expr::Kind::Var: return g[static_cast<std::size_t>(e.var)];
            case appl::Expr::Kind::Const: return e.value;
            case appl::Expr::Kind::Add: return expr(e.a, g) + expr(e.b, g);
            case appl::Expr::Kind::Mul: return expr(e.a, g) * expr(e.b, g);
        }
        return 0;
    }
    bool cond(int i, const std::vector<double>& g) const {
        const CNode& c = cnodes_[static_cast<std::size_t>(i)];
        switch (c.kind) {
            case appl::Cond::Kind::True: return true;
            case appl::Cond::Kind::Not: return !cond(c.a, g);
            case appl::Cond::Kind::And: return cond(c.a, g) && cond(c.b, g);
            case appl::Cond::Kind::Le: return expr(c.l, g) <= expr(c.r, g);
        }
        return false;
    }
};

inline Rational int128_to_rational(__int128 v) {
    bool negative = v < 0;
    unsigned __int128 u = negative ? static_cast<unsigned __int128>(-(v + 1)) + 1 : static_cast<unsigned __int128>(v);
    mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(u >> 64)));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    mpz_class z = (hi << 64) + lo;
    return Rational(negative ? mpz_class(-z) : z);
}

// Fast trace for one trial; the cost is exact.
inline TraceResult run_trace(const CompiledProgram& cp, RandomSource& rng, std::uint64_t step_limit,
                             const std::vector<Rational>& init) {
    std::vector<double> g(init.size());
    for (std::size_t i = 0; i < init.size(); ++i) g[i] = init[i].get_d();
    auto r = cp.run(rng, step_limit, g);
    TraceResult t;
    t.cost = int128_to_rational(r.units) / Rational(cp.lcm());
    t.cost.canonicalize();
    t.steps = r.steps;
    t.terminated = r.terminated;
    return t;
}

inline TraceResult run_trace(const Program& p, RandomSource& rng, std::uint64_t step_limit,
                             const std::map<std::string, Rational>& init = {}) {
    CompiledProgram cp(p);
    return run_trace(cp, rng, step_limit, initial_valuation(p, init));
}

struct SimulationSamples {
    std::vector<double> costs;  // terminated traces only
    std::uint64_t trials = 0;
    std::uint64_t nonterminated = 0;
};

inline SimulationSamples simulate_costs(const Program& p, std::uint64_t trials, std::uint64_t seed,
                                        std::uint64_t step_limit = 10000000,
                                        const std::map<std::string, Rational>& init = {}) {
    CompiledProgram cp(p);
    auto g0 = initial_valuation(p, init);
    std::vector<double> g(g0.size());
    SimulationSamples out;
    out.trials = trials;
    out.costs.reserve(trials);
    long double inv = 1.0L / to_ldouble(Rational(cp.lcm()));
    for (std::uint64_t t = 0; t < trials; ++t) {
        CounterRng rng(seed, t);
        for (std::size_t i = 0; i < g0.size(); ++i) g[i] = g0[i].get_d();
        auto r = cp.run(rng, step_limit, g);
        if (!r.terminated) {
            ++out.nonterminated;
            continue;
        }
        out.costs.push_back(static_cast<double>(static_cast<long double>(r.units) * inv));
    }
    return out;
}

struct EmpiricalMoments {
    std::uint64_t trials = 0;
    std::uint64_t nonterminated = 0;
    bool biased = false;            // some trace hit the step limit
    std::vector<double> raw;        // index k = 0..m
    std::vector<double> raw_se;
    std::vector<double> central;    // index k = 0..m (0 and 1 are trivial)
    std::vector<double> central_se;
};

inline EmpiricalMoments moments_of(const std::vector<double>& xs, unsigned m) {
    EmpiricalMoments e;
    std::size_t n = xs.size();
    e.raw.assign(m + 1, 0.0);
    e.raw_se.assign(m + 1, 0.0);
    e.central.assign(m + 1, 0.0);
    e.central_se.assign(m + 1, 0.0);
    if (n == 0) return e;
    std::vector<long double> s1(m + 1, 0.0L), s2(m + 1, 0.0L);
    for (double x : xs) {
        long double p = 1;
        for (unsigned k = 0; k <= m; ++k) {
            s1[k] += p;
            s2[k] += p * p;
            p *= x;
        }
    }
    long double nn = static_cast<long double>(n);
    for (unsigned k = 0; k <= m; ++k) {
        long double mean = s1[k] / nn;
        long double var = n > 1 ? (s2[k] - nn * mean * mean) / (nn - 1) : 0.0L;
        e.raw[k] = static_cast<double>(mean);
        e.raw_se[k] = static_cast<double>(std::sqrt(std::max(0.0L, var) / nn));
    }
    long double mu = s1.size() > 1 ? s1[1] / nn : 0.0L;
    std::vector<long double> c1(m + 1, 0.0L), c2(m + 1, 0.0L);
    for (double x : xs) {
        long double d = static_cast<long double>(x) - mu, p = 1;
        for (unsigned k = 0; k <= m; ++k) {
            c1[k] += p;
            c2[k] += p * p;
            p *= d;
        }
    }
    for (unsigned k = 0; k <= m; ++k) {
        long double mean = c1[k] / nn;
        long double var = n > 1 ? (c2[k] - nn * mean * mean) / (nn - 1) : 0.0L;
        e.central[k] = static_cast<double>(mean);
        e.central_se[k] = static_cast<double>(std::sqrt(std::max(0.0L, var) / nn));
    }
    e.central[0] = 1;
    if (m >= 1) e.central[1] = 0;
    return e;
}

inline EmpiricalMoments estimate_moments(const Program& p, unsigned m, std::uint64_t trials, std::uint64_t seed,
                                         std::uint64_t step_limit = 10000000,
                                         const std::map<std::string, Rational>& init = {}) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    auto s = simulate_costs(p, trials, seed, step_limit, init);
    EmpiricalMoments e = moments_of(s.costs, m);
    e.trials = trials;
    e.nonterminated = s.nonterminated;
    e.biased = s.nonterminated > 0;
    return e;
}

}  // namespace cma
