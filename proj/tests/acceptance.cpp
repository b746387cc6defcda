#include "cma/pipeline.hpp"
#include "chain.hpp"
#include "properties.hpp"
#include "rdwalk_witness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>

using namespace cma;

namespace {

const Rational kTol(1, 1000000);

std::string corpus(const std::string& name) { return std::string(CMA_CORPUS_DIR) + "/" + name; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

AnalysisReport analyze(const appl::Program& p, int m, std::optional<std::map<std::string, Rational>> eval,
                       bool soundness = false) {
    AnalyzeOptions o;
    o.m = m;
    o.d = 1;
    o.eval = std::move(eval);
    o.soundness = soundness;
    return run_analyze(p, o);
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (cond) return;
        if (pass) detail = what;
        pass = false;
    }
};

std::string str(const Rational& r) { return r.get_str(); }

Outcome running_example() {
    Outcome o;
    appl::Program p = load_program(corpus("rdwalk.appl"));
    double worst = 0;
    for (long d : {1L, 10L, 100L}) {
        auto t0 = std::chrono::steady_clock::now();
        AnalysisReport r = analyze(p, 2, std::map<std::string, Rational>{{"d", Rational(d)}, {"x", Rational(0)}});
        worst = std::max(worst, seconds_since(t0));
        std::string at = " at d=" + std::to_string(d);
        if (!r.has_bounds() || !r.central[2]) {
            o.require(false, "no bounds" + at);
            continue;
        }
        o.require(r.upper[1].value <= Rational(2 * d + 4) + kTol, "hi1 = " + str(r.upper[1].value) + at);
        o.require(r.upper[2].value <= Rational(4 * d * d + 22 * d + 28) + kTol, "hi2 = " + str(r.upper[2].value) + at);
        o.require(r.lower[1].value >= Rational(2 * d) - kTol, "lo1 = " + str(r.lower[1].value) + at);
        o.require(*r.central[2] <= Rational(22 * d + 28) + kTol, "variance = " + str(*r.central[2]) + at);
    }
    o.require(worst < 5.0, "slowest analysis " + std::to_string(worst) + " s");
    if (o.pass) o.detail = "bounds hold at d = 1, 10, 100; slowest " + std::to_string(worst) + " s";
    return o;
}

Outcome witness() {
    Outcome o;
    std::string src = read_file(corpus("rdwalk.appl"));
    auto w = check::rdwalk_witness(src);
    o.require(w.status == LPStatus::Optimal, "hand annotations rejected: " + w.detail);
    o.require(w.exact, "feasibility not certified in exact arithmetic");
    o.require(check::rdwalk_witness(src, 1).status == LPStatus::Infeasible, "perturbed annotations accepted");
    if (o.pass) o.detail = std::to_string(w.pinned) + " annotations pinned, all constraints hold exactly";
    return o;
}

Outcome benchmarks() {
    Outcome o;
    struct Want {
        const char* file;
        std::vector<std::pair<int, long>> raw, central;
    };
    std::vector<Want> wants{{"coupon2.appl", {{2, 201}, {3, 3829}, {4, 90705}}, {{2, 32}, {4, 9728}}},
                            {"walk21.appl", {{2, 2320}}, {{2, 1920}, {4, 289873920}}}};
    std::string got;
    for (auto& w : wants) {
        appl::Program p = load_program(corpus(w.file));
        auto t0 = std::chrono::steady_clock::now();
        AnalysisReport r = analyze(p, 4, std::nullopt);
        double secs = seconds_since(t0);
        o.require(secs < 10.0, std::string(w.file) + " took " + std::to_string(secs) + " s");
        if (!r.has_bounds()) {
            o.require(false, std::string(w.file) + ": no bounds");
            continue;
        }
        for (auto& [k, v] : w.raw)
            o.require(r.upper[static_cast<std::size_t>(k)].value <= Rational(v) + kTol,
                      std::string(w.file) + " raw " + std::to_string(k) + " = " + str(r.upper[static_cast<std::size_t>(k)].value));
        for (auto& [k, v] : w.central) {
            auto c = r.central[static_cast<std::size_t>(k)];
            o.require(c && *c <= Rational(v) + kTol, std::string(w.file) + " central " + std::to_string(k));
        }
        got += std::string(got.empty() ? "" : "; ") + w.file + " in " + std::to_string(secs) + " s";
    }
    if (o.pass) o.detail = got;
    return o;
}

Outcome oracle() {
    Outcome o;
    const std::uint64_t trials = 1000000;
    int checked = 0;
    std::vector<std::filesystem::path> files;
    for (auto& e : std::filesystem::directory_iterator(CMA_CORPUS_DIR))
        if (e.path().extension() == ".appl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (auto& f : files) {
        auto side = f;
        side.replace_extension(".expect.json");
        json expect = json::parse(read_file(side.string()));
        int m = expect.value("m", 2);
        std::optional<std::map<std::string, Rational>> eval;
        if (expect.contains("eval")) {
            std::map<std::string, Rational> ev;
            for (auto& [k, v] : expect["eval"].items()) ev[k] = parse_rational(v.get<std::string>());
            eval = ev;
        }
        appl::Program p = load_program(f.string());
        AnalysisReport r = analyze(p, m, eval, true);
        std::string name = f.filename().string();
        if (!r.soundness.pass() || !r.has_bounds()) continue;
        ++checked;

        auto s = simulate_costs(p, trials, 20240601, 10000000, r.valuation());
        o.require(s.nonterminated == 0, name + ": traces hit the step limit");
        EmpiricalMoments e = moments_of(s.costs, static_cast<unsigned>(m));
        for (int k = 1; k <= m; ++k) {
            auto K = static_cast<std::size_t>(k);
            double slack = 4 * e.raw_se[K] + 1e-9 * std::max(1.0, std::fabs(e.raw[K]));
            o.require(e.raw[K] <= r.upper[K].value.get_d() + slack, name + ": raw " + std::to_string(k) + " above upper bound");
            o.require(e.raw[K] >= r.lower[K].value.get_d() - slack, name + ": raw " + std::to_string(k) + " below lower bound");
        }

        MomentBounds b = r.bounds();
        Rational base = b.hi[1] > 1 ? b.hi[1] : Rational(1);
        Rational step = base * 3 / 30;
        TailCurve curve = tail_curve(b, r.central, r.nonneg_cost, base, base * 4, step);
        std::vector<double> sorted = s.costs;
        std::sort(sorted.begin(), sorted.end());
        double n = static_cast<double>(sorted.size());
        for (auto& row : curve.rows) {
            if (!row.min) continue;
            double a = row.a.get_d();
            double tail = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), a - 1e-9)) / n;
            double se = std::sqrt(tail * (1 - tail) / n);
            o.require(tail <= row.min->get_d() + 4 * se + 1e-12, name + ": tail frequency above bound at a=" + std::to_string(a));
        }
    }
    o.require(checked >= 5, "only " + std::to_string(checked) + " sound programs");
    if (o.pass) o.detail = std::to_string(checked) + " sound corpus programs, 10^6 traces each";
    return o;
}

Outcome geo_guard() {
    Outcome o;
    appl::Program p = load_program(corpus("geo.appl"));
    AnalysisReport r = analyze(p, 2, std::nullopt, true);
    o.require(r.soundness.termination.pass, "termination check failed");
    o.require(r.has_bounds(), "no bounds");
    if (!o.pass) return o;
    EmpiricalMoments e = estimate_moments(p, 1, 1000000, 99);
    double cap = 1.0 + 4 * e.raw_se[1];
    o.require(std::fabs(e.raw[1] - 1.0) <= 4 * e.raw_se[1], "simulated mean " + std::to_string(e.raw[1]));
    o.require(r.lower[1].value.get_d() <= cap, "lower bound " + str(r.lower[1].value) + " exceeds the mean");
    // the certified lower polynomial must hold from every starting state
    int x = p.var_index("x");
    for (long start = -50; start <= 50; ++start) {
        std::vector<Rational> g(p.vars.size());
        g[static_cast<std::size_t>(x)] = start;
        o.require(poly_eval(r.lower[1].poly, g).get_d() <= cap, "lower bound exceeds the mean at x=" + std::to_string(start));
    }
    if (o.pass) o.detail = "lower " + str(r.lower[1].value) + " <= simulated " + std::to_string(e.raw[1]);
    return o;
}

Outcome crossover() {
    Outcome o;
    appl::Program p = load_program(corpus("rdwalk.appl"));
    int dv = p.var_index("d");
    auto cmp = [&](long d, const Rational& U1, const Rational& U2, const Rational& V) {
        Rational a(4 * d);
        auto c = tail_cantelli(U1, V, a);
        o.require(c.has_value(), "Cantelli undefined at d=" + std::to_string(d));
        if (!c) return;
        if (d >= 15) o.require(*c < tail_markov(U1, a, 1), "Cantelli not below Markov-1 at d=" + std::to_string(d));
        if (d >= 20) o.require(*c < tail_markov(U2, a, 2), "Cantelli not below Markov-2 at d=" + std::to_string(d));
    };
    // direct analyses at sampled distances
    for (long d : {15L, 20L, 30L, 50L, 100L}) {
        AnalysisReport r = analyze(p, 2, std::map<std::string, Rational>{{"d", Rational(d)}, {"x", Rational(0)}});
        if (!r.has_bounds() || !r.central[2]) {
            o.require(false, "no bounds at d=" + std::to_string(d));
            continue;
        }
        cmp(d, r.upper[1].value, r.upper[2].value, *r.central[2]);
    }
    // the symbolic bounds from one analysis, swept over a dense range
    AnalysisReport r = analyze(p, 2, std::map<std::string, Rational>{{"d", Rational(15)}, {"x", Rational(0)}});
    if (r.has_bounds()) {
        for (long d = 15; d <= 2000; ++d) {
            std::vector<Rational> g(p.vars.size());
            g[static_cast<std::size_t>(dv)] = d;
            Rational U1 = poly_eval(r.upper[1].poly, g), U2 = poly_eval(r.upper[2].poly, g);
            cmp(d, U1, U2, poly_eval(central2_poly(r.upper[2].poly, r.lower[1].poly), g));
        }
    }
    if (o.pass) o.detail = "threshold a = 4d, d in [15, 2000]";
    return o;
}

Outcome properties() {
    Outcome o;
    std::vector<check::PropResult> rs{check::semiring_laws(1000, 101),  check::binomial_compose(1000, 102),
                                      check::monotonicity(1000, 103),   check::expectation_vs_quadrature(300, 104),
                                      check::simplex_vs_vertices(200, 105), check::interpreter_checks(106)};
    std::string all;
    for (auto& r : rs) {
        o.require(r.ok(), r.summary());
        all += std::string(all.empty() ? "" : "; ") + r.summary();
    }
    if (o.pass) o.detail = all;
    return o;
}

Outcome scalability() {
    Outcome o;
    std::vector<double> ns, ts;
    for (int n : {10, 50, 100}) {
        appl::Program p = appl::parse_program(coupon_chain(n));
        auto t0 = std::chrono::steady_clock::now();
        AnalysisReport r = analyze(p, 2, std::nullopt);
        double secs = seconds_since(t0);
        o.require(r.has_bounds(), "no bounds at N=" + std::to_string(n));
        ns.push_back(std::log(n));
        ts.push_back(std::log(std::max(secs, 1e-4)));
        if (n == 100) o.require(secs < 60.0, "N=100 took " + std::to_string(secs) + " s");
    }
    // least-squares slope of log time against log size
    double mx = (ns[0] + ns[1] + ns[2]) / 3, my = (ts[0] + ts[1] + ts[2]) / 3, sxy = 0, sxx = 0;
    for (int i = 0; i < 3; ++i) {
        sxy += (ns[static_cast<std::size_t>(i)] - mx) * (ts[static_cast<std::size_t>(i)] - my);
        sxx += (ns[static_cast<std::size_t>(i)] - mx) * (ns[static_cast<std::size_t>(i)] - mx);
    }
    double slope = sxy / sxx;
    o.require(slope <= 2.0, "growth exponent " + std::to_string(slope));
    std::ostringstream os;
    os.precision(3);
    os << "times " << std::exp(ts[0]) << " / " << std::exp(ts[1]) << " / " << std::exp(ts[2]) << " s, exponent " << slope;
    if (o.pass) o.detail = os.str();
    return o;
}

}  // namespace

int main() {
    std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"running example bounds", running_example},
        {"hand annotations feasible", witness},
        {"benchmark moments", benchmarks},
        {"simulation inside bounds", oracle},
        {"geo lower bound guard", geo_guard},
        {"tail-bound crossover", crossover},
        {"property suites", properties},
        {"scalability", scalability},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
