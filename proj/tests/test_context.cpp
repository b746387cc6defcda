#include "cma/appl/parser.hpp"
#include "cma/context.hpp"
#include "cma/pipeline.hpp"

#include <gtest/gtest.h>

using namespace cma;

namespace {

appl::Program corpus(const std::string& name) { return load_program(std::string(CMA_CORPUS_DIR) + "/" + name); }

// sum coef * var + c (> or >=) 0
LinCons fact(const appl::Program& p, std::initializer_list<std::pair<const char*, long>> terms, long c, bool strict) {
    LinCons k;
    k.a.assign(p.vars.size(), Rational(0));
    for (auto& [v, a] : terms) k.a[static_cast<std::size_t>(p.var_index(v))] = a;
    k.c = c;
    k.strict = strict;
    return k;
}

appl::StmtP find(const appl::StmtP& body, appl::Stmt::Kind kind, int nth = 0) {
    appl::StmtP out;
    appl::for_each_stmt(body, [&](const appl::StmtP& s) {
        if (s->kind == kind && nth-- == 0) out = s;
    });
    return out;
}

}  // namespace

TEST(Contexts, RandomWalkAfterMove) {
    appl::Program p = corpus("rdwalk.appl");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    const appl::StmtP& body = p.body("rdwalk");
    appl::StmtP move = find(body, appl::Stmt::Kind::Assign);
    ASSERT_TRUE(move);
    // x < d + 2
    EXPECT_TRUE(ops.entails(cm.after(move), fact(p, {{"d", 1}, {"x", -1}}, 2, true)));
    // inside the guard: x < d
    appl::StmtP sample = find(body, appl::Stmt::Kind::Sample);
    EXPECT_TRUE(ops.entails(cm.before(sample), fact(p, {{"d", 1}, {"x", -1}}, 0, true)));
    // the sample adds its support
    EXPECT_TRUE(ops.entails(cm.after(sample), fact(p, {{"t", 1}}, 1, false)));
    EXPECT_TRUE(ops.entails(cm.after(sample), fact(p, {{"t", -1}}, 2, false)));
    EXPECT_FALSE(ops.entails(cm.after(sample), fact(p, {{"t", 1}}, 0, false)));
}

TEST(Contexts, PreconditionEverywhere) {
    appl::Program p = appl::parse_program("@pre(d > 0)\nfunc main() begin x := d + 1; y := x * 2; tick(1) end");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    LinCons dpos = fact(p, {{"d", 1}}, 0, true);
    appl::for_each_stmt(p.main, [&](const appl::StmtP& s) {
        EXPECT_TRUE(ops.entails(cm.before(s), dpos));
        EXPECT_TRUE(ops.entails(cm.after(s), dpos));
    });
    appl::StmtP last = find(p.main, appl::Stmt::Kind::Tick);
    // x = d + 1
    EXPECT_TRUE(ops.entails(cm.before(last), fact(p, {{"x", 1}, {"d", -1}}, -1, false)));
    EXPECT_TRUE(ops.entails(cm.before(last), fact(p, {{"x", -1}, {"d", 1}}, 1, false)));
}

TEST(Contexts, LoopBodyEntailsGuard) {
    appl::Program p = corpus("count.appl");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    appl::StmtP loop = find(p.main, appl::Stmt::Kind::While);
    ASSERT_TRUE(loop);
    EXPECT_TRUE(ops.entails(cm.before(loop->s1), fact(p, {{"n", 1}, {"x", -1}}, 0, true)));
    // x >= 0 survives widening
    EXPECT_TRUE(ops.entails(cm.before(loop->s1), fact(p, {{"x", 1}}, 0, false)));
    // at exit x >= n
    EXPECT_TRUE(ops.entails(cm.after(loop), fact(p, {{"x", 1}, {"n", -1}}, 0, false)));
}

TEST(Contexts, UninitializedVariablesStartAtZero) {
    appl::Program p = corpus("rdwalk.appl");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    auto [lo, hi] = ops.var_bounds(cm.init, p.var_index("x"));
    EXPECT_EQ(lo, ExtRational(0L));
    EXPECT_EQ(hi, ExtRational(0L));
    auto [dlo, dhi] = ops.var_bounds(cm.init, p.var_index("d"));
    EXPECT_EQ(dlo, ExtRational(0L));
    EXPECT_FALSE(dhi.finite());
}

TEST(Contexts, NonterminatingLoopExitIsUnreachable) {
    appl::Program p = corpus("spin.appl");
    ContextMap cm = infer_contexts(p);
    appl::StmtP loop = find(p.main, appl::Stmt::Kind::While);
    EXPECT_TRUE(cm.after(loop).bottom);
    EXPECT_FALSE(cm.before(loop->s1).bottom);
}

TEST(Contexts, InfeasibleBranchIsBottom) {
    appl::Program p = appl::parse_program("@pre(x >= 1)\nfunc main() begin if x < 0 then tick(1) else skip fi end");
    ContextMap cm = infer_contexts(p);
    appl::StmtP branch = find(p.main, appl::Stmt::Kind::If);
    EXPECT_TRUE(cm.before(branch->s1).bottom);
    EXPECT_FALSE(cm.before(branch->s2).bottom);
}

TEST(Contexts, FunctionEntryJoinsCallSites) {
    appl::Program p = corpus("geo.appl");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    // x grows by one per round from 0: entry has x >= 0
    EXPECT_TRUE(ops.entails(cm.entry.at("geo"), fact(p, {{"x", 1}}, 0, false)));
    EXPECT_FALSE(ops.entails(cm.entry.at("geo"), fact(p, {{"x", -1}}, 5, false)));
}

TEST(ContextOps, IntervalOfExpression) {
    appl::Program p = appl::parse_program("@pre(x >= 1 and x <= 3 and y >= 0)\nfunc main() begin skip end");
    ContextMap cm = infer_contexts(p);
    ContextOps ops(static_cast<int>(p.vars.size()), cm.intvar);
    RPoly e = RPoly::var(p.var_index("x")) * Rational(2) - RPoly(Rational(1));
    auto [lo, hi] = ops.interval_of(cm.init, e);
    EXPECT_EQ(lo, ExtRational(Rational(1)));
    EXPECT_EQ(hi, ExtRational(Rational(5)));
    auto [ylo, yhi] = ops.interval_of(cm.init, RPoly::var(p.var_index("y")));
    EXPECT_EQ(ylo, ExtRational(0L));
    EXPECT_FALSE(yhi.finite());
}
