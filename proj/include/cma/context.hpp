#pragma once

#include "cma/appl/ast.hpp"
#include "cma/lp.hpp"
#include "cma/poly.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cma {

// a.x + c >= 0, or > 0 when strict
struct LinCons {
    std::vector<Rational> a;
    Rational c = 0;
    bool strict = false;

    bool is_constant() const {
        for (auto& v : a)
            if (v != 0) return false;
        return true;
    }
    friend bool operator==(const LinCons& x, const LinCons& y) { return x.a == y.a && x.c == y.c && x.strict == y.strict; }

    RPoly poly() const {
        RPoly p(c);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != 0) p.add_term(Monomial::var(static_cast<int>(i)), a[i]);
        return p;
    }
    std::string str(const std::vector<std::string>& names) const {
        return poly_str(poly(), names) + (strict ? " > 0" : " >= 0");
    }
};

class Context {
public:
    int n = 0;
    bool bottom = false;
    std::vector<LinCons> cons;

    static Context top(int nv) {
        Context c;
        c.n = nv;
        return c;
    }
    static Context bot(int nv) {
        Context c;
        c.n = nv;
        c.bottom = true;
        return c;
    }
    std::string str(const std::vector<std::string>& names) const {
        if (bottom) return "false";
        if (cons.empty()) return "true";
        std::string s;
        for (auto& c : cons) {
            if (!s.empty()) s += "; ";
            s += c.str(names);
        }
        return s;
    }
};

namespace ctxd {

inline Rational gcd_r(const Rational& a, const Rational& b) {
    // gcd of numerators over lcm of denominators
    mpz_class n, d;
    mpz_gcd(n.get_mpz_t(), a.get_num_mpz_t(), b.get_num_mpz_t());
    mpz_lcm(d.get_mpz_t(), a.get_den_mpz_t(), b.get_den_mpz_t());
    return Rational(n, d);
}

inline Rational floor_r(const Rational& r) {
    mpz_class q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return Rational(q);
}
inline Rational ceil_r(const Rational& r) {
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), r.get_num_mpz_t(), r.get_den_mpz_t());
    return Rational(q);
}

}  // namespace ctxd

// Scales to primitive integer coefficients; tightens when every variable is integral.
// Returns false when the constraint is constant and false.
inline std::optional<LinCons> normalize(LinCons k, const std::vector<bool>& intvar) {
    Rational g = 0;
    for (auto& v : k.a)
        if (v != 0) g = g == 0 ? abs(v) : ctxd::gcd_r(g, v);
    if (g == 0) {
        bool ok = k.strict ? k.c > 0 : k.c >= 0;
        if (!ok) return std::nullopt;
        k.c = 0;
        k.strict = false;
        return k;
    }
    for (auto& v : k.a) v /= g;
    k.c /= g;
    bool integral = true;
    for (std::size_t i = 0; i < k.a.size(); ++i)
        if (k.a[i] != 0 && !intvar[i]) integral = false;
    if (integral) {
        if (k.strict) {
            k.c = ctxd::ceil_r(k.c) - 1;
            k.strict = false;
        } else {
            k.c = ctxd::floor_r(k.c);
        }
    }
    return k;
}

class ContextOps {
public:
    explicit ContextOps(int nv, std::vector<bool> intvar = {}) : n_(nv), int_(std::move(intvar)) {
        if (int_.empty()) int_.assign(static_cast<std::size_t>(nv), false);
    }
    int n() const { return n_; }
    const std::vector<bool>& intvars() const { return int_; }
    std::size_t lp_calls() const { return lp_calls_; }

    bool feasible(const Context& g) {
        if (g.bottom) return false;
        if (g.cons.empty()) return true;
        return feasible_list(g.cons);
    }

    // closure minimum of a.x + c over g
    ExtRational minimize(const Context& g, const std::vector<Rational>& a, const Rational& c) {
        if (g.bottom) return ExtRational::pos_inf();
        ++lp_calls_;
        LPProblem p;
        for (int i = 0; i < n_; ++i) p.add_var("x" + std::to_string(i));
        for (auto& k : g.cons) p.add(form(k.a, k.c), Rel::GE);
        LPSession s(p);
        auto r = s.exact_fallback(form(a, c), true);
        if (r.status == LPStatus::Unbounded) return ExtRational::neg_inf();
        if (r.status != LPStatus::Optimal) return ExtRational::pos_inf();
        return ExtRational(r.objective);
    }
    ExtRational maximize(const Context& g, const std::vector<Rational>& a, const Rational& c) {
        std::vector<Rational> na(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) na[i] = -a[i];
        return -minimize(g, na, -c);
    }
    std::pair<ExtRational, ExtRational> var_bounds(const Context& g, int v) {
        std::vector<Rational> a(static_cast<std::size_t>(n_), Rational(0));
        a[static_cast<std::size_t>(v)] = 1;
        return {minimize(g, a, 0), maximize(g, a, 0)};
    }

    bool entails(const Context& g, const LinCons& k) {
        if (g.bottom) return true;
        LinCons neg;
        neg.a.resize(k.a.size());
        for (std::size_t i = 0; i < k.a.size(); ++i) neg.a[i] = -k.a[i];
        neg.c = -k.c;
        neg.strict = !k.strict;
        auto nn = normalize(neg, int_);
        if (!nn) return true;
        std::vector<LinCons> list = g.cons;
        list.push_back(*nn);
        return !feasible_list(list);
    }

    // g1 below g2: every constraint of g2 holds on g1
    bool leq(const Context& g1, const Context& g2) {
        if (g1.bottom) return true;
        if (g2.bottom) return !feasible(g1);
        for (auto& k : g2.cons) {
            bool syntactic = false;
            for (auto& h : g1.cons)
                if (h == k) syntactic = true;
            if (!syntactic && !entails(g1, k)) return false;
        }
        return true;
    }
    bool same(const Context& a, const Context& b) { return leq(a, b) && leq(b, a); }

    Context add(Context g, const LinCons& k) {
        if (g.bottom) return g;
        auto nk = normalize(k, int_);
        if (!nk) return Context::bot(n_);
        if (nk->is_constant()) return g;
        g.cons.push_back(*nk);
        return simplify(std::move(g));
    }
    Context meet(Context a, const Context& b) {
        if (a.bottom) return a;
        if (b.bottom) return b;
        for (auto& k : b.cons) a.cons.push_back(k);
        return simplify(std::move(a));
    }

    Context simplify(Context g) {
        if (g.bottom) return g;
        // keep the tightest constraint per direction
        std::vector<LinCons> out;
        for (auto& k : g.cons) {
            auto nk = normalize(k, int_);
            if (!nk) return Context::bot(n_);
            if (nk->is_constant()) continue;
            bool merged = false;
            for (auto& o : out)
                if (o.a == nk->a) {
                    if (nk->c < o.c || (nk->c == o.c && nk->strict)) o = *nk;
                    merged = true;
                    break;
                }
            if (!merged) out.push_back(*nk);
        }
        g.cons = std::move(out);
        if (!feasible(g)) return Context::bot(n_);
        for (std::size_t i = 0; i < g.cons.size();) {
            Context rest = g;
            rest.cons.erase(rest.cons.begin() + static_cast<long>(i));
            if (entails(rest, g.cons[i]))
                g.cons = std::move(rest.cons);
            else
                ++i;
        }
        return g;
    }

    Context project(const Context& g, int v) {
        if (g.bottom) return g;
        std::vector<LinCons> pos, neg, keep;
        for (auto& k : g.cons) {
            const Rational& a = k.a[static_cast<std::size_t>(v)];
            if (a > 0) pos.push_back(k);
            else if (a < 0) neg.push_back(k);
            else keep.push_back(k);
        }
        for (auto& p : pos)
            for (auto& q : neg) {
                Rational ap = p.a[static_cast<std::size_t>(v)], aq = -q.a[static_cast<std::size_t>(v)];
                LinCons r;
                r.a.resize(static_cast<std::size_t>(n_));
                for (int i = 0; i < n_; ++i) r.a[static_cast<std::size_t>(i)] = aq * p.a[static_cast<std::size_t>(i)] + ap * q.a[static_cast<std::size_t>(i)];
                r.a[static_cast<std::size_t>(v)] = 0;
                r.c = aq * p.c + ap * q.c;
                r.strict = p.strict || q.strict;
                keep.push_back(r);
            }
        Context out = Context::top(n_);
        out.cons = std::move(keep);
        return simplify(std::move(out));
    }

    // x := e
    Context assign(const Context& g, int x, const RPoly& e) {
        if (g.bottom) return g;
        auto lin = linear_of(e);
        if (lin) {
            auto& [a, c] = *lin;
            Rational ax = a[static_cast<std::size_t>(x)];
            if (ax != 0) {
                // x_old = (x_new - c - sum_{i != x} a_i x_i) / ax
                Context out = Context::top(n_);
                for (auto& k : g.cons) {
                    LinCons r = k;
                    Rational kx = k.a[static_cast<std::size_t>(x)];
                    if (kx != 0) {
                        Rational f = kx / ax;
                        for (int i = 0; i < n_; ++i) {
                            if (i == x) continue;
                            r.a[static_cast<std::size_t>(i)] -= f * a[static_cast<std::size_t>(i)];
                        }
                        r.a[static_cast<std::size_t>(x)] = f;
                        r.c -= f * c;
                    }
                    out.cons.push_back(r);
                }
                return simplify(std::move(out));
            }
            Context out = project(g, x);
            LinCons up, lo;
            up.a = a;
            lo.a = a;
            for (auto& v : lo.a) v = -v;
            up.a[static_cast<std::size_t>(x)] = -1;
            lo.a[static_cast<std::size_t>(x)] = 1;
            up.c = c;
            lo.c = -c;
            out = add(std::move(out), up);
            return add(std::move(out), lo);
        }
        auto [lo, hi] = interval_of(g, e);
        Context out = project(g, x);
        return bound_var(std::move(out), x, lo, hi);
    }

    Context sample(const Context& g, int x, const appl::Dist& d) {
        if (g.bottom) return g;
        return bound_var(project(g, x), x, ExtRational(d.support_min()), ExtRational(d.support_max()));
    }

    Context assume(const Context& g, const appl::CondP& c, bool positive, const std::function<int(const std::string&)>& index) {
        using K = appl::Cond::Kind;
        if (g.bottom) return g;
        switch (c->kind) {
            case K::True: return positive ? g : Context::bot(n_);
            case K::Not: return assume(g, c->a, !positive, index);
            case K::And:
                if (positive) return assume(assume(g, c->a, true, index), c->b, true, index);
                return join(assume(g, c->a, false, index), assume(g, c->b, false, index));
            case K::Le: {
                RPoly diff = expr_to_poly(c->r, index) - expr_to_poly(c->l, index);
                auto lin = linear_of(diff);
                if (!lin) return g;
                LinCons k;
                k.a = lin->first;
                k.c = lin->second;
                if (!positive) {
                    for (auto& v : k.a) v = -v;
                    k.c = -k.c;
                    k.strict = true;
                }
                return add(g, k);
            }
        }
        return g;
    }

    Context join(const Context& a, const Context& b) {
        if (a.bottom) return b;
        if (b.bottom) return a;
        Context out = Context::top(n_);
        for (auto& k : a.cons)
            if (entails(b, k)) out.cons.push_back(k);
        for (auto& k : b.cons)
            if (entails(a, k)) out.cons.push_back(k);
        for (int v = 0; v < n_; ++v) {
            auto [la, ha] = var_bounds(a, v);
            auto [lb, hb] = var_bounds(b, v);
            ExtRational lo = ext_min(la, lb), hi = ext_max(ha, hb);
            out = bound_var(std::move(out), v, lo, hi, false);
        }
        return simplify(std::move(out));
    }

    // constraints of old that still hold on next
    Context widen(const Context& old, const Context& next) {
        if (old.bottom) return next;
        if (next.bottom) return old;
        Context out = Context::top(n_);
        for (auto& k : old.cons)
            if (entails(next, k)) out.cons.push_back(k);
        return simplify(std::move(out));
    }

    // interval of a polynomial over the context by variable bounds
    std::pair<ExtRational, ExtRational> interval_of(const Context& g, const RPoly& e) {
        if (auto lin = linear_of(e)) return {minimize(g, lin->first, lin->second), maximize(g, lin->first, lin->second)};
        std::map<int, std::pair<ExtRational, ExtRational>> vb;
        ExtRational lo(0L), hi(0L);
        for (auto& [mono, coef] : e.terms()) {
            ExtRational tl(coef), th(coef);
            for (auto& [v, k] : mono.e) {
                if (!vb.count(v)) vb[v] = var_bounds(g, v);
                auto [bl, bh] = vb[v];
                for (int i = 0; i < k; ++i) {
                    ExtRational c1 = tl * bl, c2 = tl * bh, c3 = th * bl, c4 = th * bh;
                    tl = ext_min(ext_min(c1, c2), ext_min(c3, c4));
                    th = ext_max(ext_max(c1, c2), ext_max(c3, c4));
                }
            }
            lo = lo + tl;
            hi = hi + th;
        }
        return {lo, hi};
    }

    std::optional<std::pair<std::vector<Rational>, Rational>> linear_of(const RPoly& e) const {
        std::vector<Rational> a(static_cast<std::size_t>(n_), Rational(0));
        Rational c = 0;
        for (auto& [mono, coef] : e.terms()) {
            int deg = mono.degree();
            if (deg == 0) c = coef;
            else if (deg == 1) a[static_cast<std::size_t>(mono.e[0].first)] = coef;
            else return std::nullopt;
        }
        return std::make_pair(a, c);
    }

private:
    int n_;
    std::vector<bool> int_;
    std::size_t lp_calls_ = 0;

    AffineForm form(const std::vector<Rational>& a, const Rational& c) const {
        AffineForm f(c);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != 0) f.add_term(static_cast<int>(i), a[i]);
        return f;
    }

    bool feasible_list(const std::vector<LinCons>& list) {
        ++lp_calls_;
        LPProblem p;
        for (int i = 0; i < n_; ++i) p.add_var("x" + std::to_string(i));
        bool any_strict = false;
        for (auto& k : list) any_strict = any_strict || k.strict;
        int eps = -1;
        if (any_strict) {
            eps = p.add_var("eps", true);
            p.add(AffineForm(1) - AffineForm::var(eps), Rel::GE);
        }
        for (auto& k : list) {
            AffineForm f = form(k.a, k.c);
            if (k.strict) f -= AffineForm::var(eps);
            p.add(std::move(f), Rel::GE);
        }
        LPSession s(p);
        AffineForm obj = any_strict ? AffineForm::var(eps) : AffineForm(0);
        auto r = s.exact_fallback(obj, false);
        if (r.status != LPStatus::Optimal) return false;
        return !any_strict || r.objective > 0;
    }

    Context bound_var(Context g, int x, const ExtRational& lo, const ExtRational& hi, bool simplify_after = true) {
        if (g.bottom) return g;
        if (lo.finite()) {
            LinCons k;
            k.a.assign(static_cast<std::size_t>(n_), Rational(0));
            k.a[static_cast<std::size_t>(x)] = 1;
            k.c = -lo.v;
            g.cons.push_back(k);
        }
        if (hi.finite()) {
            LinCons k;
            k.a.assign(static_cast<std::size_t>(n_), Rational(0));
            k.a[static_cast<std::size_t>(x)] = -1;
            k.c = hi.v;
            g.cons.push_back(k);
        }
        return simplify_after ? simplify(std::move(g)) : g;
    }
};

// ---------------------------------------------------------------------------
// Interprocedural forward inference.

struct ContextMap {
    std::vector<Context> pre, post;  // indexed by statement id
    std::map<std::string, Context> entry, exit;
    std::map<int, Context> loop_head;  // by while-statement id
    std::vector<bool> intvar;
    Context init;
    std::size_t lp_calls = 0;

    const Context& before(const appl::StmtP& s) const { return pre.at(static_cast<std::size_t>(s->id)); }
    const Context& after(const appl::StmtP& s) const { return post.at(static_cast<std::size_t>(s->id)); }
};

inline int max_stmt_id(const appl::Program& p) {
    int m = -1;
    auto f = [&](const appl::StmtP& s) { m = std::max(m, s->id); };
    appl::for_each_stmt(p.main, f);
    for (auto& [g, s] : p.decls) appl::for_each_stmt(s, f);
    return m;
}

// Variables that are integral on every execution: not in the precondition and
// only ever written with integer-valued expressions or integer samples.
inline std::vector<bool> infer_integral(const appl::Program& p) {
    using K = appl::Stmt::Kind;
    std::size_t n = p.vars.size();
    std::vector<bool> iv(n, true);
    appl::for_each_var(p.pre, [&](const std::string& v) { iv[static_cast<std::size_t>(p.var_index(v))] = false; });
    auto index = [&](const std::string& v) { return p.var_index(v); };
    bool changed = true;
    while (changed) {
        changed = false;
        auto visit = [&](const appl::StmtP& s) {
            if (s->kind == K::Assign) {
                std::size_t x = static_cast<std::size_t>(p.var_index(s->name));
                if (!iv[x]) return;
                RPoly e = expr_to_poly(s->expr, index);
                for (auto& [mono, c] : e.terms()) {
                    bool ok = is_integer(c);
                    for (auto& [v, k] : mono.e) ok = ok && iv[static_cast<std::size_t>(v)];
                    if (!ok) {
                        iv[x] = false;
                        changed = true;
                        return;
                    }
                }
            } else if (s->kind == K::Sample) {
                std::size_t x = static_cast<std::size_t>(p.var_index(s->name));
                if (!iv[x]) return;
                bool ok = s->dist.kind == appl::Dist::Kind::Discrete;
                if (ok)
                    for (auto& [v, pr] : s->dist.items) ok = ok && is_integer(v);
                if (!ok) {
                    iv[x] = false;
                    changed = true;
                }
            }
        };
        appl::for_each_stmt(p.main, visit);
        for (auto& [f, s] : p.decls) appl::for_each_stmt(s, visit);
    }
    return iv;
}

// Variables written by each function, transitively through calls.
inline std::map<std::string, std::set<int>> modified_vars(const appl::Program& p) {
    using K = appl::Stmt::Kind;
    std::map<std::string, std::set<int>> mod;
    std::map<std::string, std::set<std::string>> calls;
    auto scan = [&](const std::string& f, const appl::StmtP& body) {
        appl::for_each_stmt(body, [&](const appl::StmtP& s) {
            if (s->kind == K::Assign || s->kind == K::Sample) mod[f].insert(p.var_index(s->name));
            if (s->kind == K::Call) calls[f].insert(s->name);
        });
    };
    scan("main", p.main);
    for (auto& [f, s] : p.decls) scan(f, s);
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& [f, cs] : calls)
            for (auto& g : cs)
                for (int v : mod[g])
                    if (mod[f].insert(v).second) changed = true;
    }
    return mod;
}

class ContextInference {
public:
    explicit ContextInference(const appl::Program& p)
        : p_(p), ops_(static_cast<int>(p.vars.size()), infer_integral(p)), mod_(modified_vars(p)) {}

    ContextMap run() {
        int n = static_cast<int>(p_.vars.size());
        ContextMap out;
        out.intvar = ops_.intvars();
        Context init = Context::top(n);
        init = ops_.assume(init, p_.pre, true, index());
        std::set<int> in_pre;
        appl::for_each_var(p_.pre, [&](const std::string& v) { in_pre.insert(p_.var_index(v)); });
        for (int v = 0; v < n; ++v)
            if (!in_pre.count(v)) {
                LinCons a, b;
                a.a.assign(static_cast<std::size_t>(n), Rational(0));
                b.a = a.a;
                a.a[static_cast<std::size_t>(v)] = 1;
                b.a[static_cast<std::size_t>(v)] = -1;
                init = ops_.add(init, a);
                init = ops_.add(init, b);
            }
        out.init = init;
        entry_["main"] = init;
        for (auto& [f, s] : p_.decls) {
            entry_[f] = Context::bot(n);
            exit_[f] = Context::bot(n);
        }
        exit_["main"] = Context::bot(n);
        for (int round = 0;; ++round) {
            sites_.clear();
            std::map<std::string, Context> new_exit;
            new_exit["main"] = exec(p_.main, entry_["main"]);
            for (auto& f : p_.func_order) new_exit[f] = exec(p_.decls.at(f), entry_[f]);
            bool changed = false;
            for (auto& f : p_.func_order) {
                Context e = sites_.count(f) ? ops_.join(entry_[f], sites_[f]) : entry_[f];
                if (!ops_.leq(e, entry_[f])) {
                    entry_[f] = round >= 3 ? ops_.widen(entry_[f], e) : e;
                    changed = true;
                }
            }
            for (auto& [f, x] : new_exit) {
                Context e = ops_.join(exit_[f], x);
                if (!ops_.leq(e, exit_[f])) {
                    exit_[f] = round >= 3 ? ops_.widen(exit_[f], e) : e;
                    changed = true;
                }
            }
            if (!changed) break;
        }
        int ns = max_stmt_id(p_) + 1;
        pre_.assign(static_cast<std::size_t>(ns), Context::bot(n));
        post_.assign(static_cast<std::size_t>(ns), Context::bot(n));
        recording_ = true;
        exec(p_.main, entry_["main"]);
        for (auto& f : p_.func_order) exec(p_.decls.at(f), entry_[f]);
        recording_ = false;
        out.pre = std::move(pre_);
        out.post = std::move(post_);
        out.entry = entry_;
        out.exit = exit_;
        out.loop_head = loop_head_;
        out.lp_calls = ops_.lp_calls();
        return out;
    }

    ContextOps& ops() { return ops_; }

private:
    const appl::Program& p_;
    ContextOps ops_;
    std::map<std::string, std::set<int>> mod_;
    std::map<std::string, Context> entry_, exit_, sites_;
    std::vector<Context> pre_, post_;
    std::map<int, Context> loop_head_;
    bool recording_ = false;

    std::function<int(const std::string&)> index() const {
        return [this](const std::string& v) { return p_.var_index(v); };
    }

    Context exec(const appl::StmtP& s, const Context& in) {
        using K = appl::Stmt::Kind;
        if (recording_) pre_[static_cast<std::size_t>(s->id)] = in;
        Context out = in;
        if (!in.bottom) {
            switch (s->kind) {
                case K::Skip:
                case K::Tick: break;
                case K::Assign:
                    out = ops_.assign(in, p_.var_index(s->name), expr_to_poly(s->expr, index()));
                    break;
                case K::Sample: out = ops_.sample(in, p_.var_index(s->name), s->dist); break;
                case K::Call: {
                    auto it = sites_.find(s->name);
                    if (it == sites_.end())
                        sites_.emplace(s->name, in);
                    else
                        it->second = ops_.join(it->second, in);
                    Context proj = in;
                    for (int v : mod_[s->name]) proj = ops_.project(proj, v);
                    out = ops_.meet(proj, exit_[s->name]);
                    break;
                }
                case K::While: {
                    Context head = in;
                    bool rec = recording_;
                    recording_ = false;
                    for (int it = 0;; ++it) {
                        Context body_out = exec(s->s1, ops_.assume(head, s->cond, true, index()));
                        Context next = ops_.join(head, body_out);
                        if (ops_.leq(next, head)) break;
                        head = it >= 3 ? ops_.widen(head, next) : next;
                    }
                    recording_ = rec;
                    if (recording_) exec(s->s1, ops_.assume(head, s->cond, true, index()));
                    out = ops_.assume(head, s->cond, false, index());
                    if (recording_) loop_head_[s->id] = head;
                    break;
                }
                case K::Prob: out = ops_.join(exec(s->s1, in), exec(s->s2, in)); break;
                case K::If:
                    out = ops_.join(exec(s->s1, ops_.assume(in, s->cond, true, index())),
                                    exec(s->s2, ops_.assume(in, s->cond, false, index())));
                    break;
                case K::Seq: out = exec(s->s2, exec(s->s1, in)); break;
            }
        } else if (recording_) {
            mark_bottom(s);
        }
        if (recording_) post_[static_cast<std::size_t>(s->id)] = out;
        return out;
    }

    void mark_bottom(const appl::StmtP& s) {
        int n = static_cast<int>(p_.vars.size());
        appl::for_each_stmt(s, [&](const appl::StmtP& t) {
            pre_[static_cast<std::size_t>(t->id)] = Context::bot(n);
            post_[static_cast<std::size_t>(t->id)] = Context::bot(n);
        });
    }
};

inline ContextMap infer_contexts(const appl::Program& p) {
    ContextInference ci(p);
    return ci.run();
}

}  // namespace cma
