#pragma once

#include "cma/appl/ast.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace cma::appl {

struct Diagnostic {
    std::string kind;
    std::string message;
    SrcLoc loc;
};

namespace detail {

inline StmtP renumber(const StmtP& s, int& next) {
    auto c = std::make_shared<Stmt>(*s);
    c->id = next++;
    if (s->s1) c->s1 = renumber(s->s1, next);
    if (s->s2) c->s2 = renumber(s->s2, next);
    return c;
}

inline void note_var(std::vector<std::string>& vars, const std::string& v) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
}

inline void collect_vars(const StmtP& s, std::vector<std::string>& vars) {
    for_each_stmt(s, [&](const StmtP& t) {
        if (t->kind == Stmt::Kind::Assign || t->kind == Stmt::Kind::Sample) note_var(vars, t->name);
        if (t->expr) for_each_var(t->expr, [&](const std::string& v) { note_var(vars, v); });
        if (t->cond) for_each_var(t->cond, [&](const std::string& v) { note_var(vars, v); });
    });
}

}  // namespace detail

// Assigns statement ids in preorder (main first) and recomputes the variable set.
inline void finalize(Program& p) {
    int next = 0;
    if (p.main) p.main = detail::renumber(p.main, next);
    if (p.func_order.size() != p.decls.size()) {
        p.func_order.clear();
        for (auto& [f, s] : p.decls) p.func_order.push_back(f);
    }
    for (auto& f : p.func_order) p.decls[f] = detail::renumber(p.decls[f], next);
    std::vector<std::string> vars;
    if (p.pre) for_each_var(p.pre, [&](const std::string& v) { detail::note_var(vars, v); });
    if (p.main) detail::collect_vars(p.main, vars);
    for (auto& f : p.func_order) detail::collect_vars(p.decls[f], vars);
    p.vars = std::move(vars);
}

inline std::vector<Diagnostic> validate(const Program& p) {
    std::vector<Diagnostic> out;
    std::set<std::string> vars(p.vars.begin(), p.vars.end());
    auto check_var = [&](const std::string& v, SrcLoc loc) {
        if (!vars.count(v)) out.push_back({"UnknownVariable", "variable '" + v + "' is not in the program variable set", loc});
    };
    if (!p.main) out.push_back({"MissingMain", "program has no main function", {}});
    if (p.pre) for_each_var(p.pre, [&](const std::string& v) { check_var(v, {}); });
    auto visit = [&](const StmtP& body) {
        for_each_stmt(body, [&](const StmtP& s) {
            switch (s->kind) {
                case Stmt::Kind::Call:
                    if (!p.decls.count(s->name))
                        out.push_back({"UndefinedFunction", "call to undefined function '" + s->name + "'", s->loc});
                    break;
                case Stmt::Kind::Prob:
                    if (s->value < 0 || s->value > 1)
                        out.push_back({"ProbabilityOutOfRange", "branch probability " + s->value.get_str() + " is outside [0,1]", s->loc});
                    break;
                case Stmt::Kind::Sample: {
                    check_var(s->name, s->loc);
                    const Dist& d = s->dist;
                    if (d.kind == Dist::Kind::Uniform) {
                        if (!(d.a < d.b)) out.push_back({"UniformBounds", "uniform requires a < b", s->loc});
                    } else {
                        if (d.items.empty()) {
                            out.push_back({"DiscreteEmpty", "discrete distribution has empty support", s->loc});
                            break;
                        }
                        Rational sum = 0;
                        bool negative = false;
                        for (auto& [v, pr] : d.items) {
                            if (pr < 0) negative = true;
                            sum += pr;
                        }
                        if (negative) out.push_back({"DiscreteNegative", "discrete probabilities must be nonnegative", s->loc});
                        if (sum != 1) out.push_back({"DiscreteSum", "discrete probabilities sum to " + sum.get_str() + ", not 1", s->loc});
                    }
                    break;
                }
                case Stmt::Kind::Assign:
                    check_var(s->name, s->loc);
                    for_each_var(s->expr, [&](const std::string& v) { check_var(v, s->loc); });
                    break;
                case Stmt::Kind::While:
                case Stmt::Kind::If:
                    for_each_var(s->cond, [&](const std::string& v) { check_var(v, s->loc); });
                    break;
                default: break;
            }
        });
    };
    if (p.main) visit(p.main);
    for (auto& [f, s] : p.decls) visit(s);
    return out;
}

}  // namespace cma::appl
