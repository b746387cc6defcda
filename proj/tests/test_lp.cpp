#include "cma/lp.hpp"
#include "cma/pipeline.hpp"
#include "properties.hpp"

#include <gtest/gtest.h>

using namespace cma;

namespace {

AffineForm X(int v, long c = 1) { return AffineForm::var(v, Rational(c)); }
AffineForm K(long c) { return AffineForm(Rational(c)); }

}  // namespace

TEST(Solve, LowerBound) {
    LPProblem p;
    int x = p.add_var("x");
    p.add(X(x) - K(3), Rel::GE);
    p.objective = X(x);
    LPSolution s = solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_EQ(s.x[0], 3);
    EXPECT_EQ(s.objective, 3);
    EXPECT_TRUE(s.exact);
}

TEST(Solve, Infeasible) {
    LPProblem p;
    int x = p.add_var("x");
    p.add(X(x) - K(1), Rel::GE);
    p.add(X(x), Rel::LE);
    EXPECT_EQ(solve(p).status, LPStatus::Infeasible);
    EXPECT_EQ(solve_exact(p).status, LPStatus::Infeasible);
}

TEST(Solve, Unbounded) {
    LPProblem p;
    int x = p.add_var("x"), y = p.add_var("y", true);
    p.add(X(x) - X(y), Rel::LE);
    p.objective = X(x);
    EXPECT_EQ(solve(p).status, LPStatus::Unbounded);
    p.minimize = false;
    p.objective = X(y);
    EXPECT_EQ(solve(p).status, LPStatus::Unbounded);
}

TEST(Solve, EqualityAndMaximize) {
    // max 3a + 2b s.t. a + b = 4, a - b <= 2, b >= 0 -> a = 3, b = 1, value 11
    LPProblem p;
    int a = p.add_var("a"), b = p.add_var("b", true);
    p.add(X(a) + X(b) - K(4), Rel::EQ);
    p.add(X(a) - X(b) - K(2), Rel::LE);
    p.objective = X(a, 3) + X(b, 2);
    p.minimize = false;
    LPSolution s = solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_EQ(s.objective, 11);
    EXPECT_EQ(s.x[0], 3);
    EXPECT_EQ(s.x[1], 1);
    LPSolution e = solve_exact(p);
    EXPECT_EQ(e.objective, 11);
}

TEST(Solve, FractionalOptimumIsExact) {
    // min x + y s.t. 3x + y >= 2, x + 3y >= 2 -> x = y = 1/2
    LPProblem p;
    int x = p.add_var("x"), y = p.add_var("y");
    p.add(X(x, 3) + X(y) - K(2), Rel::GE);
    p.add(X(x) + X(y, 3) - K(2), Rel::GE);
    p.objective = X(x) + X(y);
    LPSolution s = solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_EQ(s.objective, 1);
    EXPECT_EQ(s.x[0], Rational(1, 2));
    EXPECT_TRUE(s.exact);
    EXPECT_EQ(max_violation(p, s.x), 0);
}

TEST(Solve, DegenerateCyclingExample) {
    // max 10a - 57b - 9c - 24d s.t. a/2 - 11b/2 - 5c/2 + 9d <= 0, a/2 - 3b/2 - c/2 + d <= 0, a <= 1;
    // cycles under the textbook largest-coefficient rule
    LPProblem p;
    for (const char* n : {"a", "b", "c", "d"}) p.add_var(n, true);
    auto row = [](std::vector<Rational> c, Rational k) {
        AffineForm f(k);
        for (int j = 0; j < 4; ++j) f.axpy(c[static_cast<std::size_t>(j)], AffineForm::var(j));
        return f;
    };
    p.add(row({Rational(1, 2), Rational(-11, 2), Rational(-5, 2), 9}, 0), Rel::LE);
    p.add(row({Rational(1, 2), Rational(-3, 2), Rational(-1, 2), 1}, 0), Rel::LE);
    p.add(row({1, 0, 0, 0}, -1), Rel::LE);
    p.objective = row({10, -57, -9, -24}, 0);
    p.minimize = false;
    LPSolution s = solve(p);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    EXPECT_EQ(s.objective, 1);
    EXPECT_EQ(solve_exact(p).objective, 1);
}

TEST(Solve, AddingConstraintNeverImproves) {
    check::Gen g(31);
    int compared = 0;
    for (int i = 0; i < 100; ++i) {
        check::SmallLP s = check::random_lp(g);
        LPSolution base = solve(check::to_problem(s));
        if (base.status != LPStatus::Optimal) continue;
        std::vector<Rational> a;
        for (int j = 0; j < s.nv; ++j) a.push_back(Rational(g.integer(-4, 4)));
        s.a.push_back(a);
        s.b.push_back(Rational(g.integer(-4, 4)));
        s.ge.push_back(true);
        LPSolution more = solve(check::to_problem(s));
        if (more.status == LPStatus::Infeasible) continue;
        ASSERT_EQ(more.status, LPStatus::Optimal);
        EXPECT_GE(more.objective, base.objective);
        ++compared;
    }
    EXPECT_GT(compared, 30);
}

TEST(Solve, AgreesWithVertexEnumeration) {
    auto r = check::simplex_vs_vertices(200, 5);
    EXPECT_TRUE(r.ok()) << r.summary();
}

TEST(Presolve, EliminatesFreeEqualities) {
    LPProblem p;
    int x = p.add_var("x"), y = p.add_var("y"), z = p.add_var("z", true);
    p.add(X(x) - X(y) - K(2), Rel::EQ);
    p.add(X(y) + X(z) - K(1), Rel::EQ);
    p.add(X(z) - K(5), Rel::LE);
    p.objective = X(x);
    LPSession session(p);
    EXPECT_FALSE(session.presolved().elim.empty());
    LPSolution s = session.solve(p.objective, true);
    ASSERT_EQ(s.status, LPStatus::Optimal);
    // x = y + 2 = 3 - z, minimized at z = 5
    EXPECT_EQ(s.objective, -2);
    EXPECT_EQ(max_violation(p, s.x), 0);
}

TEST(Export, Format) {
    LPProblem p;
    int x = p.add_var("x");
    p.add(X(x) - K(3), Rel::GE);
    p.objective = X(x);
    std::string text = export_lp(p);
    EXPECT_NE(text.find("Minimize"), std::string::npos);
    EXPECT_NE(text.find("Subject To"), std::string::npos);
    EXPECT_NE(text.find("x >= 3"), std::string::npos);
    EXPECT_NE(text.find("x free"), std::string::npos);
    EXPECT_NE(text.find("End"), std::string::npos);

    LPProblem empty;
    std::string e = export_lp(empty);
    EXPECT_NE(e.find("obj: 0"), std::string::npos);
    EXPECT_NE(e.find("Subject To\nBounds"), std::string::npos);
}

TEST(Export, KeepsViolatedConstantRows) {
    LPProblem p;
    p.add_var("x");
    p.add(K(-1), Rel::GE);
    EXPECT_NE(export_lp(p).find("0 x >= 1"), std::string::npos);
}

TEST(RunningExample, FirstMomentSystem) {
    appl::Program prog = load_program(std::string(CMA_CORPUS_DIR) + "/rdwalk.appl");
    AnalyzeOptions o;
    o.m = 1;
    o.d = 1;
    o.eval = std::map<std::string, Rational>{{"d", Rational(1)}, {"x", Rational(0)}};
    o.soundness = false;
    AnalysisReport r = run_analyze(prog, o);
    ASSERT_TRUE(r.upper[1].ok());
    EXPECT_LE(r.upper[1].value, 6);
    int d = prog.var_index("d");
    for (long dv : {1L, 10L, 100L}) {
        std::vector<Rational> g(prog.vars.size());
        g[static_cast<std::size_t>(d)] = dv;
        EXPECT_LE(poly_eval(r.upper[1].poly, g), 2 * dv + 4);
    }

    // the floating-point pivoting and the exact rational simplex agree
    LPProblem lp = build_lp(prog, o, 1, true);
    LPSolution fast = solve(lp), exact = solve_exact(lp);
    ASSERT_EQ(fast.status, LPStatus::Optimal);
    ASSERT_EQ(exact.status, LPStatus::Optimal);
    EXPECT_EQ(fast.objective, exact.objective);
    EXPECT_EQ(max_violation(lp, fast.x), 0);
}

TEST(RunningExample, SecondMomentAtTwo) {
    appl::Program prog = load_program(std::string(CMA_CORPUS_DIR) + "/rdwalk.appl");
    AnalyzeOptions o;
    o.m = 2;
    o.d = 1;
    o.eval = std::map<std::string, Rational>{{"d", Rational(2)}, {"x", Rational(0)}};
    o.soundness = false;
    AnalysisReport r = run_analyze(prog, o);
    ASSERT_TRUE(r.upper[2].ok());
    EXPECT_LE(r.upper[2].value, 88);
}
