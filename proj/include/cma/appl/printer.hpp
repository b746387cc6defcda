#pragma once

#include "cma/appl/ast.hpp"

#include <sstream>
#include <string>

namespace cma::appl {

inline std::string print(const ExprP& e) {
    switch (e->kind) {
        case Expr::Kind::Var: return e->name;
        case Expr::Kind::Const: return e->value.get_str();
        case Expr::Kind::Add: return "(" + print(e->a) + " + " + print(e->b) + ")";
        case Expr::Kind::Mul: return "(" + print(e->a) + " * " + print(e->b) + ")";
    }
    return "";
}

inline std::string print(const CondP& c) {
    switch (c->kind) {
        case Cond::Kind::True: return "true";
        case Cond::Kind::Not: return "not " + print(c->a);
        case Cond::Kind::And: return "(" + print(c->a) + " and " + print(c->b) + ")";
        case Cond::Kind::Le: return "(" + print(c->l) + " <= " + print(c->r) + ")";
    }
    return "";
}

inline std::string print(const Dist& d) {
    if (d.kind == Dist::Kind::Uniform) return "uniform(" + d.a.get_str() + ", " + d.b.get_str() + ")";
    std::string s = "discrete(";
    for (std::size_t i = 0; i < d.items.size(); ++i) {
        if (i) s += ", ";
        s += "(" + d.items[i].first.get_str() + " : " + d.items[i].second.get_str() + ")";
    }
    return s + ")";
}

namespace detail {
inline void print_stmt(std::ostringstream& os, const StmtP& s, int ind) {
    std::string pad(static_cast<std::size_t>(ind) * 2, ' ');
    using K = Stmt::Kind;
    switch (s->kind) {
        case K::Skip: os << pad << "skip"; break;
        case K::Tick: os << pad << "tick(" << s->value.get_str() << ")"; break;
        case K::Assign: os << pad << s->name << " := " << print(s->expr); break;
        case K::Sample: os << pad << s->name << " ~ " << print(s->dist); break;
        case K::Call: os << pad << "call " << s->name; break;
        case K::While:
            os << pad << "while " << print(s->cond) << " do\n";
            print_stmt(os, s->s1, ind + 1);
            os << "\n" << pad << "od";
            break;
        case K::Prob:
            os << pad << "if prob(" << s->value.get_str() << ") then\n";
            print_stmt(os, s->s1, ind + 1);
            os << "\n" << pad << "else\n";
            print_stmt(os, s->s2, ind + 1);
            os << "\n" << pad << "fi";
            break;
        case K::If:
            os << pad << "if " << print(s->cond) << " then\n";
            print_stmt(os, s->s1, ind + 1);
            os << "\n" << pad << "else\n";
            print_stmt(os, s->s2, ind + 1);
            os << "\n" << pad << "fi";
            break;
        case K::Seq:
            print_stmt(os, s->s1, ind);
            os << ";\n";
            print_stmt(os, s->s2, ind);
            break;
    }
}
}  // namespace detail

inline std::string print(const StmtP& s, int indent = 0) {
    std::ostringstream os;
    detail::print_stmt(os, s, indent);
    return os.str();
}

inline std::string print(const Program& p) {
    std::ostringstream os;
    if (p.pre && p.pre->kind != Cond::Kind::True) os << "@pre(" << print(p.pre) << ")\n";
    os << "func main() begin\n" << print(p.main, 1) << "\nend\n";
    for (auto& f : p.func_order) os << "\nfunc " << f << "() begin\n" << print(p.decls.at(f), 1) << "\nend\n";
    return os.str();
}

}  // namespace cma::appl
