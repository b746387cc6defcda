#pragma once

#include "cma/analysis.hpp"
#include "cma/appl/printer.hpp"
#include "cma/context.hpp"
#include "cma/lp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cma {

struct TerminationVerdict {
    bool pass = false;
    int degree = 0;                 // target moment of the stopping time
    std::optional<Rational> bound;  // upper bound on E[T^degree] at the valuation
    RPoly bound_poly;
    std::string note;
};

struct BoundedUpdateVerdict {
    bool pass = true;
    std::string witness;
    appl::SrcLoc loc;
    Rational max_change = 0;  // largest finite |E - x| seen
};

struct SoundnessVerdict {
    TerminationVerdict termination;
    BoundedUpdateVerdict bounded_update;
    int required_degree = 0;
    bool pass() const { return termination.pass && bounded_update.pass; }
};

// Bounds E[T^k] with unit cost per evaluation step; passes iff the LP is feasible.
inline TerminationVerdict check_termination_moment(const appl::Program& p, const ContextMap& cm, int k, int d,
                                                   const std::vector<Rational>& g0) {
    TerminationVerdict v;
    v.degree = k;
    AnalysisOptions o;
    o.m = k;
    o.d = d;
    o.termination = true;
    AnalysisResult r;
    try {
        r = analyze_program(p, cm, o);
    } catch (const std::exception& e) {
        v.note = e.what();
        return v;
    }
    LPSession s(r.lp);
    auto sol = s.solve(Analyzer::objective(r.root, k, true, g0), true);
    if (sol.status == LPStatus::Optimal) {
        v.pass = true;
        v.bound = sol.objective;
        v.bound_poly = instantiate(r.root.c[static_cast<std::size_t>(k)].hi, sol.x);
    } else if (sol.status == LPStatus::Unbounded) {
        v.pass = true;
        v.note = "feasible";
    } else {
        v.note = std::string("no stopping-time bound at this template degree (") + to_string(sol.status) + ")";
    }
    return v;
}

inline BoundedUpdateVerdict check_bounded_update(const appl::Program& p, const ContextMap& cm) {
    BoundedUpdateVerdict v;
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    auto index = [&](const std::string& x) { return p.var_index(x); };
    auto visit = [&](const appl::StmtP& s) {
        if (!v.pass || s->kind != appl::Stmt::Kind::Assign) return;
        const Context& g = cm.before(s);
        if (g.bottom) return;
        int x = p.var_index(s->name);
        RPoly change = expr_to_poly(s->expr, index) - RPoly::var(x);
        auto [lo, hi] = ops.interval_of(g, change);
        if (!lo.finite() || !hi.finite()) {
            v.pass = false;
            v.loc = s->loc;
            v.witness = "line " + std::to_string(s->loc.line) + ": " + s->name + " := " + appl::print(s->expr) +
                        ", E - x = " + poly_str(change, p.vars) + " unbounded";
            return;
        }
        Rational m = std::max(abs(lo.v), abs(hi.v));
        if (m > v.max_change) v.max_change = m;
    };
    appl::for_each_stmt(p.main, visit);
    for (auto& f : p.func_order) appl::for_each_stmt(p.decls.at(f), visit);
    return v;
}

inline SoundnessVerdict check_soundness(const appl::Program& p, const ContextMap& cm, int m, int d,
                                        const std::vector<Rational>& g0) {
    SoundnessVerdict s;
    s.required_degree = m * d;
    s.termination = check_termination_moment(p, cm, m * d, d, g0);
    s.bounded_update = check_bounded_update(p, cm);
    return s;
}

}  // namespace cma
