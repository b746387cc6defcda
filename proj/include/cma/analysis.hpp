#pragma once

#include "cma/appl/ast.hpp"
#include "cma/context.hpp"
#include "cma/lp.hpp"
#include "cma/poly.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace cma {

struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AnalysisOptions {
    int m = 2;
    int d = 1;
    bool termination = false;  // unit cost per step, upper bounds only
    bool weaken_calls = true;
};

struct SpecInstance {
    int family = 0;
    std::string func;
    int level = 0;
    Annotation pre, post;
    std::string tag;
};

struct TemplateRecord {
    std::string tag;
    Annotation ann;
};

// pre-annotation of one statement within one spec instance (or main)
struct PointRecord {
    std::string frame;
    int stmt = 0;
    Annotation pre;
};

struct AnalysisResult {
    LPProblem lp;
    Annotation root;  // pre-annotation of main
    std::vector<SpecInstance> instances;
    std::vector<TemplateRecord> templates;  // fresh templates by tag
    std::vector<PointRecord> points;
    int weakenings = 0;
};

// Strongly connected components of the call graph over declared functions.
inline std::map<std::string, int> call_sccs(const appl::Program& p) {
    std::map<std::string, std::set<std::string>> g;
    for (auto& [f, s] : p.decls)
        appl::for_each_stmt(s, [&](const appl::StmtP& t) {
            if (t->kind == appl::Stmt::Kind::Call) g[f].insert(t->name);
        });
    std::map<std::string, int> index, low, comp;
    std::vector<std::string> stack;
    std::set<std::string> on;
    int counter = 0, ncomp = 0;
    std::function<void(const std::string&)> strong = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on.insert(v);
        for (auto& w : g[v]) {
            if (!index.count(w)) {
                strong(w);
                low[v] = std::min(low[v], low[w]);
            } else if (on.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            while (true) {
                std::string w = stack.back();
                stack.pop_back();
                on.erase(w);
                comp[w] = ncomp;
                if (w == v) break;
            }
            ++ncomp;
        }
    };
    for (auto& f : p.func_order)
        if (!index.count(f)) strong(f);
    return comp;
}

class Analyzer {
public:
    Analyzer(const appl::Program& p, const ContextMap& cm, AnalysisOptions o)
        : p_(p), cm_(cm), o_(o), nv_(static_cast<int>(p.vars.size())), scc_(call_sccs(p)) {
        index_ = [this](const std::string& v) { return p_.var_index(v); };
    }

    AnalysisResult run() {
        Annotation one = Annotation::one(o_.m);
        Annotation root = transfer(p_.main, one, Frame{0, "main", 0, "main"});
        while (!work_.empty()) {
            int i = work_.back();
            work_.pop_back();
            SpecInstance inst = res_.instances[static_cast<std::size_t>(i)];
            Annotation body = transfer(p_.body(inst.func), inst.post, Frame{inst.family, inst.func, inst.level, inst.tag});
            weaken(cm_.entry.at(inst.func), inst.pre, body, inst.tag + " body");
        }
        // the root potential has termination probability one
        const SymInterval& c0 = root.c[0];
        if (!o_.termination) emit(c0.lo - APoly(AffineForm(1)), Rel::EQ, "root lo0");
        emit(c0.hi - APoly(AffineForm(1)), Rel::EQ, "root hi0");
        res_.root = root;
        return std::move(res_);
    }

    // affine objective: endpoint k of the root evaluated at g0
    static AffineForm objective(const Annotation& root, int k, bool upper, const std::vector<Rational>& g0) {
        const SymInterval& c = root.c.at(static_cast<std::size_t>(k));
        return poly_eval(upper ? c.hi : c.lo, g0);
    }

private:
    struct Frame {
        int family;
        std::string func;
        int level;
        std::string tag;
    };

    const appl::Program& p_;
    const ContextMap& cm_;
    AnalysisOptions o_;
    int nv_;
    std::map<std::string, int> scc_;
    std::function<int(const std::string&)> index_;
    AnalysisResult res_;
    std::map<std::tuple<int, std::string, int>, int> inst_of_;
    std::map<std::pair<int, int>, int> child_family_;
    int families_ = 1;
    std::vector<int> work_;
    int slack_counter_ = 0;
    std::map<std::pair<const Context*, int>, std::vector<RPoly>> gen_cache_;

    Annotation fresh(int level, const std::string& loc) {
        auto alloc = [&](int k, bool hi, const Monomial& mono) {
            std::string name = "q_" + loc + "_" + std::to_string(k) + "_" + mono.ident(p_.vars) + (hi ? "_hi" : "_lo");
            return res_.lp.add_var(std::move(name));
        };
        Annotation a = fresh_annotation(o_.m, o_.d, nv_, level, alloc, o_.termination);
        res_.templates.push_back({loc, a});
        return a;
    }

    void emit(const APoly& diff, Rel rel, const std::string& tag) {
        for (auto& [mono, c] : diff.terms()) {
            if (c.is_constant()) {
                bool ok = rel == Rel::EQ ? c.c0 == 0 : (rel == Rel::GE ? c.c0 >= 0 : c.c0 <= 0);
                if (ok) continue;
            }
            res_.lp.add(c, rel, tag);
        }
    }

    void equate(const Annotation& a, const Annotation& b, const std::string& tag) {
        for (std::size_t k = 0; k < a.c.size(); ++k) {
            if (!o_.termination) emit(a.c[k].lo - b.c[k].lo, Rel::EQ, tag);
            emit(a.c[k].hi - b.c[k].hi, Rel::EQ, tag);
        }
    }

    // products of up to `deg` context constraints, the empty product included
    const std::vector<RPoly>& generators(const Context& g, int deg) {
        auto key = std::make_pair(&g, deg);
        auto it = gen_cache_.find(key);
        if (it != gen_cache_.end()) return it->second;
        std::vector<RPoly> base;
        for (auto& k : g.cons) base.push_back(k.poly());
        std::vector<RPoly> out{RPoly(Rational(1))};
        std::vector<std::pair<RPoly, std::size_t>> layer{{RPoly(Rational(1)), 0}};
        for (int dgr = 1; dgr <= deg; ++dgr) {
            std::vector<std::pair<RPoly, std::size_t>> next;
            for (auto& [poly, start] : layer)
                for (std::size_t i = start; i < base.size(); ++i) {
                    RPoly q = base[i] * poly;
                    out.push_back(q);
                    next.emplace_back(std::move(q), i);
                }
            layer = std::move(next);
        }
        return gen_cache_.emplace(key, std::move(out)).first->second;
    }

    // diff = sum_j lambda_j * g_j with fresh lambda_j >= 0
    void conical(const Context& g, const APoly& diff, int deg, const std::string& tag) {
        const auto& gens = generators(g, deg);
        APoly rhs;
        for (auto& gen : gens) {
            int lam = res_.lp.add_var("w_" + std::to_string(slack_counter_++), true);
            rhs += gen * APoly(AffineForm::var(lam));
        }
        emit(diff - rhs, Rel::EQ, tag);
    }

    // g entails wide contains narrow
    void weaken(const Context& g, const Annotation& wide, const Annotation& narrow, const std::string& tag) {
        if (g.bottom) return;
        ++res_.weakenings;
        for (std::size_t k = 0; k < wide.c.size(); ++k) {
            int deg = static_cast<int>(k) * o_.d;
            const SymInterval& w = wide.c[k];
            const SymInterval& n = narrow.c[k];
            if (!o_.termination) {
                APoly dl = n.lo - w.lo;
                if (!dl.is_zero()) conical(g, dl, deg, tag + " lo" + std::to_string(k));
            }
            APoly dh = w.hi - n.hi;
            if (!dh.is_zero()) conical(g, dh, deg, tag + " hi" + std::to_string(k));
        }
    }

    // termination mode: templates take values in [0, inf]
    void nonneg(const Context& g, const Annotation& a, const std::string& tag) {
        if (!o_.termination || g.bottom) return;
        for (std::size_t k = 0; k < a.c.size(); ++k)
            if (!a.c[k].hi.is_zero()) conical(g, a.c[k].hi, static_cast<int>(k) * o_.d, tag + " nonneg" + std::to_string(k));
    }

    int instance(int family, const std::string& f, int level) {
        auto key = std::make_tuple(family, f, level);
        auto it = inst_of_.find(key);
        if (it != inst_of_.end()) return it->second;
        SpecInstance s;
        s.family = family;
        s.func = f;
        s.level = level;
        s.tag = f + "." + std::to_string(family) + "." + std::to_string(level);
        s.pre = fresh(level, s.tag + ".pre");
        s.post = fresh(level, s.tag + ".post");
        const Context& entry = cm_.entry.at(f);
        const Context& exit = cm_.exit.at(f);
        nonneg(entry, s.pre, s.tag + " pre");
        nonneg(exit, s.post, s.tag + " post");
        int idx = static_cast<int>(res_.instances.size());
        res_.instances.push_back(s);
        inst_of_[key] = idx;
        work_.push_back(idx);
        return idx;
    }

    Annotation unit_tick(const Annotation& a) const { return o_.termination ? ann_tick(Rational(1), a) : a; }

    Annotation transfer(const appl::StmtP& s, const Annotation& post, const Frame& fr) {
        using K = appl::Stmt::Kind;
        Annotation pre;
        switch (s->kind) {
            case K::Skip: pre = post; break;
            case K::Tick: pre = o_.termination ? post : ann_tick(s->value, post); break;
            case K::Assign: {
                RPoly e = expr_to_poly(s->expr, index_);
                try {
                    pre = ann_subst(post, p_.var_index(s->name), e, o_.d);
                } catch (const DegreeOverflow& ex) {
                    throw AnalysisError(std::string("degree overflow at line ") + std::to_string(s->loc.line) + ": " + ex.what());
                }
                break;
            }
            case K::Sample:
                pre = ann_expect(post, p_.var_index(s->name), dist_raw_moments(s->dist, o_.m * o_.d));
                break;
            case K::Prob: {
                Annotation a = transfer(s->s1, post, fr);
                Annotation b = transfer(s->s2, post, fr);
                pre = ann_add(ann_scale(a, s->value), ann_scale(b, Rational(1) - s->value));
                break;
            }
            case K::If: {
                Annotation a = transfer(s->s1, post, fr);
                Annotation b = transfer(s->s2, post, fr);
                std::string loc = fr.tag + ".s" + std::to_string(s->id);
                Annotation q = fresh(fr.level, loc);
                const Context& g = cm_.before(s);
                nonneg(g, q, loc);
                weaken(cm_.before(s->s1), q, a, loc + " then");
                weaken(cm_.before(s->s2), q, b, loc + " else");
                pre = q;
                break;
            }
            case K::While: {
                std::string loc = fr.tag + ".s" + std::to_string(s->id);
                Annotation q = fresh(fr.level, loc);
                auto hit = cm_.loop_head.find(s->id);
                const Context& head = hit != cm_.loop_head.end() ? hit->second : cm_.before(s);
                nonneg(head, q, loc);
                weaken(cm_.after(s), q, post, loc + " exit");
                Annotation body = transfer(s->s1, unit_tick(q), fr);
                weaken(cm_.before(s->s1), q, body, loc + " invariant");
                pre = unit_tick(q);
                break;
            }
            case K::Seq: return transfer(s->s1, transfer(s->s2, post, fr), fr);
            case K::Call: pre = call(s, post, fr); break;
        }
        if (!o_.termination) res_.points.push_back({fr.tag, s->id, pre});
        return unit_tick(pre);
    }

    Annotation call(const appl::StmtP& s, const Annotation& post, const Frame& fr) {
        const std::string& g = s->name;
        bool same_scc = fr.func != "main" && scc_.at(fr.func) == scc_.at(g);
        int family = fr.family;
        if (!same_scc) {
            auto key = std::make_pair(fr.family, s->id);
            auto it = child_family_.find(key);
            if (it == child_family_.end()) it = child_family_.emplace(key, families_++).first;
            family = it->second;
        }
        std::string loc = fr.tag + ".s" + std::to_string(s->id);
        int l = fr.level;
        Annotation spec_pre, spec_post;
        if (fr.func == "main" || l == o_.m) {
            const SpecInstance& a = res_.instances[static_cast<std::size_t>(instance(family, g, l))];
            spec_pre = a.pre;
            spec_post = a.post;
        } else {
            int ia = instance(family, g, l);
            int ib = instance(family, g, l + 1);
            const SpecInstance& a = res_.instances[static_cast<std::size_t>(ia)];
            const SpecInstance& b = res_.instances[static_cast<std::size_t>(ib)];
            spec_pre = ann_add(a.pre, b.pre);
            spec_post = ann_add(a.post, b.post);
        }
        if (o_.weaken_calls)
            weaken(cm_.after(s), spec_post, post, loc + " call");
        else
            equate(spec_post, post, loc + " call");
        return spec_pre;
    }
};

inline AnalysisResult analyze_program(const appl::Program& p, const ContextMap& cm, const AnalysisOptions& o) {
    Analyzer a(p, cm, o);
    return a.run();
}

}  // namespace cma
