#pragma once

#include "cma/rational.hpp"

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace cma::appl {

struct SrcLoc {
    int line = 0;
    int col = 0;
};

struct Expr;
struct Cond;
struct Stmt;
using ExprP = std::shared_ptr<const Expr>;
using CondP = std::shared_ptr<const Cond>;
using StmtP = std::shared_ptr<const Stmt>;

struct Expr {
    enum class Kind { Var, Const, Add, Mul };
    Kind kind = Kind::Const;
    std::string name;
    Rational value = 0;
    ExprP a, b;
};

inline ExprP var(std::string name) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->name = std::move(name);
    return e;
}
inline ExprP cst(Rational v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Const;
    e->value = std::move(v);
    return e;
}
inline ExprP add(ExprP a, ExprP b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Add;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}
inline ExprP mul(ExprP a, ExprP b) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Mul;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}
// a - b  ==>  a + (-1) * b
inline ExprP sub(ExprP a, ExprP b) { return add(std::move(a), mul(cst(-1), std::move(b))); }
inline ExprP neg(ExprP a) {
    if (a->kind == Expr::Kind::Const) return cst(-a->value);
    return mul(cst(-1), std::move(a));
}

struct Cond {
    enum class Kind { True, Not, And, Le };
    Kind kind = Kind::True;
    CondP a, b;
    ExprP l, r;
};

inline CondP ctrue() { return std::make_shared<Cond>(); }
inline CondP cnot(CondP a) {
    auto c = std::make_shared<Cond>();
    c->kind = Cond::Kind::Not;
    c->a = std::move(a);
    return c;
}
inline CondP cand(CondP a, CondP b) {
    auto c = std::make_shared<Cond>();
    c->kind = Cond::Kind::And;
    c->a = std::move(a);
    c->b = std::move(b);
    return c;
}
inline CondP cle(ExprP l, ExprP r) {
    auto c = std::make_shared<Cond>();
    c->kind = Cond::Kind::Le;
    c->l = std::move(l);
    c->r = std::move(r);
    return c;
}
inline CondP clt(ExprP l, ExprP r) { return cnot(cle(std::move(r), std::move(l))); }
inline CondP cge(ExprP l, ExprP r) { return cle(std::move(r), std::move(l)); }
inline CondP cgt(ExprP l, ExprP r) { return cnot(cle(std::move(l), std::move(r))); }
inline CondP cor(CondP a, CondP b) { return cnot(cand(cnot(std::move(a)), cnot(std::move(b)))); }

struct Dist {
    enum class Kind { Uniform, Discrete };
    Kind kind = Kind::Uniform;
    Rational a = 0, b = 1;
    std::vector<std::pair<Rational, Rational>> items;  // (value, probability)

    static Dist uniform(Rational lo, Rational hi) {
        Dist d;
        d.kind = Kind::Uniform;
        d.a = std::move(lo);
        d.b = std::move(hi);
        return d;
    }
    static Dist discrete(std::vector<std::pair<Rational, Rational>> it) {
        Dist d;
        d.kind = Kind::Discrete;
        d.items = std::move(it);
        return d;
    }
    Rational support_min() const {
        if (kind == Kind::Uniform) return a;
        Rational m = items.front().first;
        for (auto& [v, p] : items)
            if (v < m) m = v;
        return m;
    }
    Rational support_max() const {
        if (kind == Kind::Uniform) return b;
        Rational m = items.front().first;
        for (auto& [v, p] : items)
            if (v > m) m = v;
        return m;
    }
};

struct Stmt {
    enum class Kind { Skip, Tick, Assign, Sample, Call, While, Prob, If, Seq };
    Kind kind = Kind::Skip;
    int id = -1;
    SrcLoc loc;
    Rational value = 0;  // tick cost or branch probability
    std::string name;    // assigned/sampled variable or callee
    ExprP expr;
    Dist dist;
    CondP cond;
    StmtP s1, s2;
};

namespace detail {
inline std::shared_ptr<Stmt> mk(Stmt::Kind k, SrcLoc loc) {
    auto s = std::make_shared<Stmt>();
    s->kind = k;
    s->loc = loc;
    return s;
}
}  // namespace detail

inline StmtP skip(SrcLoc loc = {}) { return detail::mk(Stmt::Kind::Skip, loc); }
inline StmtP tick(Rational c, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::Tick, loc);
    s->value = std::move(c);
    return s;
}
inline StmtP assign(std::string x, ExprP e, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::Assign, loc);
    s->name = std::move(x);
    s->expr = std::move(e);
    return s;
}
inline StmtP sample(std::string x, Dist d, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::Sample, loc);
    s->name = std::move(x);
    s->dist = std::move(d);
    return s;
}
inline StmtP call(std::string f, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::Call, loc);
    s->name = std::move(f);
    return s;
}
inline StmtP while_loop(CondP c, StmtP body, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::While, loc);
    s->cond = std::move(c);
    s->s1 = std::move(body);
    return s;
}
inline StmtP prob(Rational p, StmtP a, StmtP b, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::Prob, loc);
    s->value = std::move(p);
    s->s1 = std::move(a);
    s->s2 = std::move(b);
    return s;
}
inline StmtP ite(CondP c, StmtP a, StmtP b, SrcLoc loc = {}) {
    auto s = detail::mk(Stmt::Kind::If, loc);
    s->cond = std::move(c);
    s->s1 = std::move(a);
    s->s2 = std::move(b);
    return s;
}
// kept right-nested: (a; b); c becomes a; (b; c)
inline StmtP seq(StmtP a, StmtP b, SrcLoc loc = {}) {
    if (a->kind == Stmt::Kind::Seq) return seq(a->s1, seq(a->s2, std::move(b), a->s2->loc), loc);
    auto s = detail::mk(Stmt::Kind::Seq, loc);
    s->s1 = std::move(a);
    s->s2 = std::move(b);
    return s;
}
// right-nested sequence of a statement list
inline StmtP seq_of(const std::vector<StmtP>& xs) {
    if (xs.empty()) return skip();
    StmtP acc = xs.back();
    for (std::size_t i = xs.size() - 1; i-- > 0;) acc = seq(xs[i], acc, xs[i]->loc);
    return acc;
}

struct Program {
    std::map<std::string, StmtP> decls;
    std::vector<std::string> func_order;  // declaration order of decls
    StmtP main;
    std::vector<std::string> vars;  // first-appearance order
    CondP pre = ctrue();

    int var_index(const std::string& v) const {
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (vars[i] == v) return static_cast<int>(i);
        return -1;
    }
    const StmtP& body(const std::string& f) const {
        if (f == "main") return main;
        return decls.at(f);
    }
};

// structural equality; ids and locations are ignored
inline bool equal(const ExprP& x, const ExprP& y) {
    if (!x || !y) return x == y;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case Expr::Kind::Var: return x->name == y->name;
        case Expr::Kind::Const: return x->value == y->value;
        default: return equal(x->a, y->a) && equal(x->b, y->b);
    }
}

inline bool equal(const CondP& x, const CondP& y) {
    if (!x || !y) return x == y;
    if (x->kind != y->kind) return false;
    switch (x->kind) {
        case Cond::Kind::True: return true;
        case Cond::Kind::Not: return equal(x->a, y->a);
        case Cond::Kind::And: return equal(x->a, y->a) && equal(x->b, y->b);
        case Cond::Kind::Le: return equal(x->l, y->l) && equal(x->r, y->r);
    }
    return false;
}

inline bool equal(const Dist& x, const Dist& y) {
    if (x.kind != y.kind) return false;
    if (x.kind == Dist::Kind::Uniform) return x.a == y.a && x.b == y.b;
    return x.items == y.items;
}

inline bool equal(const StmtP& x, const StmtP& y) {
    if (!x || !y) return x == y;
    if (x->kind != y->kind) return false;
    using K = Stmt::Kind;
    switch (x->kind) {
        case K::Skip: return true;
        case K::Tick: return x->value == y->value;
        case K::Assign: return x->name == y->name && equal(x->expr, y->expr);
        case K::Sample: return x->name == y->name && equal(x->dist, y->dist);
        case K::Call: return x->name == y->name;
        case K::While: return equal(x->cond, y->cond) && equal(x->s1, y->s1);
        case K::Prob: return x->value == y->value && equal(x->s1, y->s1) && equal(x->s2, y->s2);
        case K::If: return equal(x->cond, y->cond) && equal(x->s1, y->s1) && equal(x->s2, y->s2);
        case K::Seq: return equal(x->s1, y->s1) && equal(x->s2, y->s2);
    }
    return false;
}

inline bool equal(const Program& x, const Program& y) {
    if (x.decls.size() != y.decls.size()) return false;
    for (auto& [f, s] : x.decls) {
        auto it = y.decls.find(f);
        if (it == y.decls.end() || !equal(s, it->second)) return false;
    }
    return equal(x.main, y.main) && equal(x.pre, y.pre);
}

template <class F>
void for_each_stmt(const StmtP& s, F&& f) {
    if (!s) return;
    f(s);
    for_each_stmt(s->s1, f);
    for_each_stmt(s->s2, f);
}

template <class F>
void for_each_var(const ExprP& e, F&& f) {
    if (!e) return;
    if (e->kind == Expr::Kind::Var) f(e->name);
    for_each_var(e->a, f);
    for_each_var(e->b, f);
}

template <class F>
void for_each_var(const CondP& c, F&& f) {
    if (!c) return;
    for_each_var(c->a, f);
    for_each_var(c->b, f);
    for_each_var(c->l, f);
    for_each_var(c->r, f);
}

}  // namespace cma::appl
