#pragma once

#include "cma/appl/ast.hpp"
#include "cma/appl/validate.hpp"

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

namespace cma::appl {

struct ParseError : std::runtime_error {
    SrcLoc loc;
    ParseError(const std::string& msg, SrcLoc l)
        : std::runtime_error(std::to_string(l.line) + ":" + std::to_string(l.col) + ": " + msg), loc(l) {}
};

namespace detail {

struct Token {
    enum class T { Ident, Number, Sym, Directive, End };
    T type = T::End;
    std::string text;
    SrcLoc loc;
};

inline std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        SrcLoc loc{line, col};
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Token::T::Ident, src.substr(i, j - i), loc});
            advance(j - i);
            continue;
        }
        if (c == '@') {
            std::size_t j = i + 1;
            while (j < src.size() && std::isalpha(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Token::T::Directive, src.substr(i, j - i), loc});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
            std::size_t j = i;
            auto digits = [&] {
                while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            };
            digits();
            if (j < src.size() && src[j] == '.') {
                ++j;
                digits();
            }
            if (j + 1 < src.size() && (src[j] == 'e' || src[j] == 'E') &&
                (std::isdigit(static_cast<unsigned char>(src[j + 1])) || ((src[j + 1] == '-' || src[j + 1] == '+') && j + 2 < src.size() && std::isdigit(static_cast<unsigned char>(src[j + 2]))))) {
                j += 2;
                digits();
            }
            if (j + 1 < src.size() && src[j] == '/' && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
                ++j;
                digits();
            }
            out.push_back({Token::T::Number, src.substr(i, j - i), loc});
            advance(j - i);
            continue;
        }
        static const char* two[] = {":=", "<=", ">=", "==", "!="};
        bool matched = false;
        for (const char* t : two) {
            if (src.compare(i, 2, t) == 0) {
                out.push_back({Token::T::Sym, t, loc});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string("();,:~+-*<>").find(c) != std::string::npos) {
            out.push_back({Token::T::Sym, std::string(1, c), loc});
            advance(1);
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", loc);
    }
    out.push_back({Token::T::End, "", {line, col}});
    return out;
}

inline bool is_keyword(const std::string& s) {
    static const char* kws[] = {"func", "begin", "end", "while", "do", "od", "if", "prob", "then", "else", "fi",
                                "tick", "call", "skip", "true", "false", "not", "and", "or", "uniform", "discrete"};
    for (const char* k : kws)
        if (s == k) return true;
    return false;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

    Program program() {
        Program p;
        CondP pre;
        while (peek().type == Token::T::Directive) {
            Token d = next();
            if (d.text != "@pre") throw ParseError("unknown directive '" + d.text + "'", d.loc);
            expect("(");
            CondP c = cond();
            expect(")");
            pre = pre ? cand(pre, c) : c;
        }
        p.pre = pre ? pre : ctrue();
        while (peek().type != Token::T::End) {
            Token f = peek();
            expect_kw("func");
            Token name = ident();
            expect("(");
            expect(")");
            expect_kw("begin");
            StmtP body = stmts({"end"});
            expect_kw("end");
            if (name.text == "main") {
                if (p.main) throw ParseError("duplicate function 'main'", name.loc);
                p.main = body;
            } else {
                if (p.decls.count(name.text)) throw ParseError("duplicate function '" + name.text + "'", name.loc);
                p.decls[name.text] = body;
                p.func_order.push_back(name.text);
            }
            (void)f;
        }
        if (!p.main) throw ParseError("program has no main function", peek().loc);
        return p;
    }

private:
    std::vector<Token> t_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t k = 0) const { return t_[std::min(pos_ + k, t_.size() - 1)]; }
    Token next() { return t_[pos_ < t_.size() - 1 ? pos_++ : pos_]; }
    bool at_sym(const char* s) const { return peek().type == Token::T::Sym && peek().text == s; }
    bool at_kw(const char* s) const { return peek().type == Token::T::Ident && peek().text == s; }
    void expect(const char* s) {
        if (!at_sym(s)) throw ParseError(std::string("expected '") + s + "' but found '" + peek().text + "'", peek().loc);
        next();
    }
    void expect_kw(const char* s) {
        if (!at_kw(s)) throw ParseError(std::string("expected '") + s + "' but found '" + peek().text + "'", peek().loc);
        next();
    }
    Token ident() {
        if (peek().type != Token::T::Ident || is_keyword(peek().text))
            throw ParseError("expected identifier but found '" + peek().text + "'", peek().loc);
        return next();
    }

    Rational signed_number() {
        bool negative = false;
        while (at_sym("-") || at_sym("+")) {
            if (next().text == "-") negative = !negative;
        }
        if (peek().type != Token::T::Number) throw ParseError("expected number but found '" + peek().text + "'", peek().loc);
        Rational r = parse_rational(next().text);
        return negative ? Rational(-r) : r;
    }

    StmtP stmts(std::initializer_list<const char*> terminators) {
        std::vector<StmtP> xs;
        auto at_term = [&] {
            for (const char* t : terminators)
                if (at_kw(t)) return true;
            return false;
        };
        xs.push_back(stmt());
        while (at_sym(";")) {
            next();
            if (at_term()) break;
            xs.push_back(stmt());
        }
        return seq_of(xs);
    }

    StmtP stmt() {
        Token t = peek();
        SrcLoc loc = t.loc;
        if (at_kw("skip")) {
            next();
            return skip(loc);
        }
        if (at_kw("tick")) {
            next();
            expect("(");
            Rational c = signed_number();
            expect(")");
            return tick(c, loc);
        }
        if (at_kw("call")) {
            next();
            return call(ident().text, loc);
        }
        if (at_kw("while")) {
            next();
            CondP c = cond();
            expect_kw("do");
            StmtP body = stmts({"od"});
            expect_kw("od");
            return while_loop(c, body, loc);
        }
        if (at_kw("if")) {
            next();
            if (at_kw("prob")) {
                next();
                expect("(");
                Rational p = signed_number();
                expect(")");
                expect_kw("then");
                StmtP a = stmts({"else", "fi"});
                StmtP b = skip(peek().loc);
                if (at_kw("else")) {
                    next();
                    b = stmts({"fi"});
                }
                expect_kw("fi");
                return prob(p, a, b, loc);
            }
            CondP c = cond();
            expect_kw("then");
            StmtP a = stmts({"else", "fi"});
            StmtP b = skip(peek().loc);
            if (at_kw("else")) {
                next();
                b = stmts({"fi"});
            }
            expect_kw("fi");
            return ite(c, a, b, loc);
        }
        if (peek().type == Token::T::Ident && !is_keyword(peek().text)) {
            std::string x = next().text;
            if (at_sym(":=")) {
                next();
                return assign(x, expr(), loc);
            }
            if (at_sym("~")) {
                next();
                return sample(x, dist(), loc);
            }
            throw ParseError("expected ':=' or '~' after '" + x + "'", peek().loc);
        }
        throw ParseError("expected statement but found '" + t.text + "'", loc);
    }

    Dist dist() {
        if (at_kw("uniform")) {
            next();
            expect("(");
            Rational a = signed_number();
            expect(",");
            Rational b = signed_number();
            expect(")");
            return Dist::uniform(a, b);
        }
        if (at_kw("discrete")) {
            next();
            expect("(");
            std::vector<std::pair<Rational, Rational>> items;
            if (!at_sym(")")) {
                for (;;) {
                    bool paren = at_sym("(");
                    if (paren) next();
                    Rational v = signed_number();
                    expect(":");
                    Rational p = signed_number();
                    if (paren) expect(")");
                    items.emplace_back(v, p);
                    if (!at_sym(",")) break;
                    next();
                }
            }
            expect(")");
            return Dist::discrete(std::move(items));
        }
        throw ParseError("expected distribution but found '" + peek().text + "'", peek().loc);
    }

    CondP cond() {
        CondP c = conj();
        while (at_kw("or")) {
            next();
            c = cor(c, conj());
        }
        return c;
    }
    CondP conj() {
        CondP c = unary_cond();
        while (at_kw("and")) {
            next();
            c = cand(c, unary_cond());
        }
        return c;
    }
    CondP unary_cond() {
        if (at_kw("not")) {
            next();
            return cnot(unary_cond());
        }
        if (at_kw("true")) {
            next();
            return ctrue();
        }
        if (at_kw("false")) {
            next();
            return cnot(ctrue());
        }
        if (at_sym("(")) {
            std::size_t save = pos_;
            try {
                next();
                CondP c = cond();
                expect(")");
                if (!is_relop()) return c;
            } catch (const ParseError&) {
            }
            pos_ = save;
        }
        ExprP l = expr();
        if (!is_relop()) throw ParseError("expected comparison operator but found '" + peek().text + "'", peek().loc);
        std::string op = next().text;
        ExprP r = expr();
        if (op == "<=") return cle(l, r);
        if (op == "<") return clt(l, r);
        if (op == ">=") return cge(l, r);
        if (op == ">") return cgt(l, r);
        if (op == "==") return cand(cle(l, r), cle(r, l));
        return cnot(cand(cle(l, r), cle(r, l)));
    }
    bool is_relop() const {
        return at_sym("<=") || at_sym("<") || at_sym(">=") || at_sym(">") || at_sym("==") || at_sym("!=");
    }

    ExprP expr() {
        ExprP e = term();
        for (;;) {
            if (at_sym("+")) {
                next();
                e = add(e, term());
            } else if (at_sym("-")) {
                next();
                e = sub(e, term());
            } else {
                return e;
            }
        }
    }
    ExprP term() {
        ExprP e = factor();
        while (at_sym("*")) {
            next();
            e = mul(e, factor());
        }
        return e;
    }
    ExprP factor() {
        if (at_sym("-")) {
            next();
            return neg(factor());
        }
        if (at_sym("(")) {
            next();
            ExprP e = expr();
            expect(")");
            return e;
        }
        if (peek().type == Token::T::Number) return cst(parse_rational(next().text));
        return var(ident().text);
    }
};

}  // namespace detail

// Parses without semantic validation; statement ids and vars are assigned.
inline Program parse_program_unchecked(const std::string& text) {
    detail::Parser ps(detail::lex(text));
    Program p = ps.program();
    finalize(p);
    return p;
}

inline Program parse_program(const std::string& text) {
    Program p = parse_program_unchecked(text);
    auto diags = validate(p);
    if (!diags.empty()) throw ParseError(diags.front().message, diags.front().loc);
    return p;
}

}  // namespace cma::appl
