#pragma once

#include "cma/analysis.hpp"
#include "cma/appl/parser.hpp"
#include "cma/context.hpp"
#include "cma/interp.hpp"
#include "cma/lp.hpp"
#include "cma/postproc.hpp"
#include "cma/soundness.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cma {

using json = nlohmann::ordered_json;

struct StageError : std::runtime_error {
    std::string stage;
    StageError(std::string st, const std::string& msg) : std::runtime_error(st + ": " + msg), stage(std::move(st)) {}
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw StageError("io", "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline appl::Program load_program(const std::string& path) {
    try {
        return appl::parse_program(read_file(path));
    } catch (const appl::ParseError& e) {
        throw StageError("parse", e.what());
    }
}

// "d=10,x=0"
inline std::map<std::string, Rational> parse_valuation(const std::string& text) {
    std::map<std::string, Rational> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("expected name=value in '" + item + "'");
        out[item.substr(0, eq)] = parse_rational(item.substr(eq + 1));
    }
    return out;
}

struct AnalyzeOptions {
    int m = 2;
    int d = 1;
    std::optional<std::map<std::string, Rational>> eval;
    bool soundness = true;
    bool weaken_calls = true;
};

struct MomentEndpoint {
    LPStatus status = LPStatus::Infeasible;
    Rational value = 0;
    RPoly poly;
    bool exact = false;
    bool ok() const { return status == LPStatus::Optimal; }
};

struct AnalysisReport {
    std::string program;
    int m = 0, d = 0;
    std::vector<std::string> vars;
    std::vector<Rational> g0;
    std::vector<MomentEndpoint> lower, upper;  // index k = 0..m
    std::vector<std::optional<Rational>> central;  // index k; set for 2..min(m,4)
    std::optional<RPoly> variance_poly;
    SoundnessVerdict soundness;
    bool soundness_checked = false;
    bool nonneg_cost = true;
    std::size_t lp_vars = 0, lp_cons = 0, reduced_rows = 0, reduced_cols = 0;
    double time_ms = 0;
    std::string error;

    bool has_bounds() const {
        if (upper.empty()) return false;
        for (int k = 0; k <= m; ++k)
            if (!lower[static_cast<std::size_t>(k)].ok() || !upper[static_cast<std::size_t>(k)].ok()) return false;
        return true;
    }
    MomentBounds bounds() const {
        MomentBounds b;
        for (int k = 0; k <= m; ++k) {
            b.lo.push_back(lower[static_cast<std::size_t>(k)].value);
            b.hi.push_back(upper[static_cast<std::size_t>(k)].value);
        }
        return b;
    }
    std::map<std::string, Rational> valuation() const {
        std::map<std::string, Rational> v;
        for (std::size_t i = 0; i < vars.size(); ++i) v[vars[i]] = g0[i];
        return v;
    }
};

inline bool nonnegative_costs(const appl::Program& p) {
    bool ok = true;
    auto f = [&](const appl::StmtP& s) {
        if (s->kind == appl::Stmt::Kind::Tick && s->value < 0) ok = false;
    };
    appl::for_each_stmt(p.main, f);
    for (auto& [g, s] : p.decls) appl::for_each_stmt(s, f);
    return ok;
}

// A point of the initial context, preferring an interior one.
inline std::vector<Rational> pick_valuation(const appl::Program& p, const ContextMap& cm) {
    std::size_t n = p.vars.size();
    std::vector<Rational> g(n, Rational(0));
    if (cm.init.bottom) throw StageError("eval", "precondition is unsatisfiable");
    LPProblem lp;
    for (std::size_t i = 0; i < n; ++i) lp.add_var(p.vars[i]);
    int eps = lp.add_var("eps", true);
    lp.add(AffineForm(1) - AffineForm::var(eps), Rel::GE);
    for (auto& k : cm.init.cons) {
        AffineForm f(k.c);
        for (std::size_t i = 0; i < n; ++i)
            if (k.a[i] != 0) f.add_term(static_cast<int>(i), k.a[i]);
        if (k.strict) f -= AffineForm::var(eps);
        lp.add(std::move(f), Rel::GE);
    }
    LPSession s(lp);
    auto r = s.exact_fallback(AffineForm::var(eps), false);
    if (r.status != LPStatus::Optimal) throw StageError("eval", "no valuation satisfies the precondition");
    for (std::size_t i = 0; i < n; ++i) g[i] = r.x[i];
    return g;
}

inline std::vector<Rational> check_valuation(const appl::Program& p, const std::map<std::string, Rational>& eval) {
    for (auto& [k, v] : eval)
        if (p.var_index(k) < 0) throw StageError("eval", "unknown variable '" + k + "'");
    auto g = initial_valuation(p, eval);
    if (!eval_cond(p, p.pre, g)) throw StageError("eval", "valuation violates the precondition");
    return g;
}

inline AnalysisReport run_analyze(const appl::Program& p, const AnalyzeOptions& o, std::string id = "") {
    auto t0 = std::chrono::steady_clock::now();
    AnalysisReport rep;
    rep.program = std::move(id);
    rep.m = o.m;
    rep.d = o.d;
    rep.vars = p.vars;
    rep.nonneg_cost = nonnegative_costs(p);
    if (o.m < 1) throw StageError("options", "moment must be >= 1");
    if (o.d < 0) throw StageError("options", "degree must be >= 0");
    ContextMap cm = infer_contexts(p);
    rep.g0 = o.eval ? check_valuation(p, *o.eval) : pick_valuation(p, cm);
    AnalysisOptions ao;
    ao.m = o.m;
    ao.d = o.d;
    ao.weaken_calls = o.weaken_calls;
    AnalysisResult ar;
    try {
        ar = analyze_program(p, cm, ao);
    } catch (const AnalysisError& e) {
        throw StageError("analysis", e.what());
    }
    rep.lp_vars = ar.lp.num_vars();
    rep.lp_cons = ar.lp.cons.size();
    LPSession session(ar.lp);
    rep.reduced_rows = session.reduced_rows();
    rep.reduced_cols = session.reduced_cols();
    rep.lower.resize(static_cast<std::size_t>(o.m + 1));
    rep.upper.resize(static_cast<std::size_t>(o.m + 1));
    for (int k = 0; k <= o.m; ++k)
        for (int side = 0; side < 2; ++side) {
            bool up = side == 1;
            auto sol = session.solve(Analyzer::objective(ar.root, k, up, rep.g0), up);
            MomentEndpoint e;
            e.status = sol.status;
            if (sol.status == LPStatus::Optimal) {
                e.value = sol.objective;
                e.exact = sol.exact;
                const SymInterval& c = ar.root.c[static_cast<std::size_t>(k)];
                e.poly = instantiate(up ? c.hi : c.lo, sol.x);
            }
            (up ? rep.upper : rep.lower)[static_cast<std::size_t>(k)] = std::move(e);
        }
    rep.central.assign(static_cast<std::size_t>(o.m + 1), std::nullopt);
    if (rep.has_bounds()) {
        MomentBounds b = rep.bounds();
        for (int k = 2; k <= std::min(o.m, 4); ++k) rep.central[static_cast<std::size_t>(k)] = central_upper(b, k);
        if (o.m >= 2 && b.lo[1] >= 0) rep.variance_poly = central2_poly(rep.upper[2].poly, rep.lower[1].poly);
    } else {
        rep.error = "no bound at this template degree";
    }
    if (o.soundness) {
        rep.soundness = check_soundness(p, cm, o.m, o.d, rep.g0);
        rep.soundness_checked = true;
    }
    rep.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline json rational_json(const Rational& r) {
    if (is_integer(r) && r.get_num().fits_slong_p()) return json(r.get_num().get_si());
    return json(r.get_d());
}

// {"d": 2, "1": 4}
inline json poly_json(const RPoly& p, const std::vector<std::string>& names) {
    json j = json::object();
    for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) j[it->first.str(names)] = rational_json(it->second);
    return j;
}

inline json endpoint_json(const MomentEndpoint& e, const std::vector<std::string>& names) {
    json j;
    j["status"] = to_string(e.status);
    if (e.ok()) {
        j["value"] = rational_json(e.value);
        j["exact"] = e.value.get_str();
        j["poly"] = poly_json(e.poly, names);
        j["certified"] = e.exact;
    }
    return j;
}

inline json report_json(const AnalysisReport& r) {
    json j;
    j["program"] = r.program;
    j["m"] = r.m;
    j["d"] = r.d;
    json ev = json::object();
    for (std::size_t i = 0; i < r.vars.size(); ++i) ev[r.vars[i]] = rational_json(r.g0[i]);
    j["eval"] = ev;
    j["status"] = r.error.empty() ? "ok" : r.error;
    json ms = json::array();
    for (int k = 0; k <= r.m; ++k) {
        json mk;
        mk["k"] = k;
        mk["lower"] = endpoint_json(r.lower[static_cast<std::size_t>(k)], r.vars);
        mk["upper"] = endpoint_json(r.upper[static_cast<std::size_t>(k)], r.vars);
        ms.push_back(mk);
    }
    j["moments"] = ms;
    json cs = json::array();
    for (int k = 2; k <= std::min(r.m, 4); ++k)
        if (auto& c = r.central[static_cast<std::size_t>(k)]) {
            json ck;
            ck["k"] = k;
            ck["upper"] = rational_json(*c);
            ck["exact"] = c->get_str();
            cs.push_back(ck);
        }
    j["central"] = cs;
    if (r.variance_poly) j["variance_poly"] = poly_json(*r.variance_poly, r.vars);
    json s;
    if (r.soundness_checked) {
        s["sound"] = r.soundness.pass();
        json t;
        t["pass"] = r.soundness.termination.pass;
        t["degree"] = r.soundness.termination.degree;
        if (r.soundness.termination.bound) {
            t["bound"] = rational_json(*r.soundness.termination.bound);
            t["poly"] = poly_json(r.soundness.termination.bound_poly, r.vars);
        }
        if (!r.soundness.termination.note.empty()) t["note"] = r.soundness.termination.note;
        s["termination"] = t;
        json b;
        b["pass"] = r.soundness.bounded_update.pass;
        if (!r.soundness.bounded_update.pass) b["witness"] = r.soundness.bounded_update.witness;
        s["bounded_update"] = b;
        s["required_degree"] = r.soundness.required_degree;
    } else {
        s["sound"] = false;
        s["note"] = "not checked";
    }
    j["soundness"] = s;
    j["nonnegative_cost"] = r.nonneg_cost;
    json lp;
    lp["variables"] = r.lp_vars;
    lp["constraints"] = r.lp_cons;
    lp["reduced_rows"] = r.reduced_rows;
    lp["reduced_cols"] = r.reduced_cols;
    j["lp"] = lp;
    j["time_ms"] = r.time_ms;
    return j;
}

inline json simulation_json(const EmpiricalMoments& e) {
    json j;
    j["trials"] = e.trials;
    json ms = json::array();
    for (std::size_t k = 1; k < e.raw.size(); ++k) {
        json mk;
        mk["k"] = k;
        mk["raw"] = e.raw[k];
        mk["central"] = e.central[k];
        mk["stderr"] = e.raw_se[k];
        mk["central_stderr"] = e.central_se[k];
        ms.push_back(mk);
    }
    j["moments"] = ms;
    j["nonterminated"] = e.nonterminated;
    if (e.biased) j["warning"] = "some traces hit the step limit; estimates are biased";
    return j;
}

// ---------------------------------------------------------------------------
// Constraint dump and LP export for a chosen endpoint.

inline std::string dump_constraints(const LPProblem& p) {
    std::ostringstream os;
    for (auto& c : p.cons) {
        std::string s;
        for (auto& [v, a] : c.f.terms) {
            if (!s.empty()) s += " + ";
            s += a.get_str() + "*" + p.names[static_cast<std::size_t>(v)];
        }
        if (c.f.c0 != 0 || s.empty()) s += (s.empty() ? "" : " + ") + c.f.c0.get_str();
        const char* op = c.rel == Rel::EQ ? " = 0" : (c.rel == Rel::GE ? " >= 0" : " <= 0");
        os << s << op << "    [" << c.tag << "]\n";
    }
    return os.str();
}

inline LPProblem build_lp(const appl::Program& p, const AnalyzeOptions& o, int k, bool upper) {
    ContextMap cm = infer_contexts(p);
    std::vector<Rational> g0 = o.eval ? check_valuation(p, *o.eval) : pick_valuation(p, cm);
    AnalysisOptions ao;
    ao.m = o.m;
    ao.d = o.d;
    ao.weaken_calls = o.weaken_calls;
    AnalysisResult ar = analyze_program(p, cm, ao);
    ar.lp.objective = Analyzer::objective(ar.root, k, upper, g0);
    ar.lp.minimize = upper;
    return ar.lp;
}

// ---------------------------------------------------------------------------
// Bench: programs with .expect.json sidecars.

struct BenchRow {
    std::string program;
    bool skipped = false;
    bool pass = false;
    std::vector<std::string> failures;
    double time_ms = 0;
    json detail;
};

inline BenchRow bench_one(const std::filesystem::path& appl, const json& expect) {
    BenchRow row;
    row.program = appl.filename().string();
    try {
        appl::Program p = load_program(appl.string());
        AnalyzeOptions o;
        o.m = expect.value("m", 2);
        o.d = expect.value("d", 1);
        if (expect.contains("eval")) {
            std::map<std::string, Rational> ev;
            for (auto& [k, v] : expect["eval"].items()) ev[k] = v.is_string() ? parse_rational(v.get<std::string>()) : from_double(v.get<double>());
            o.eval = ev;
        }
        double tol = expect.value("tolerance", 1e-6);
        AnalysisReport r = run_analyze(p, o, row.program);
        row.time_ms = r.time_ms;
        row.detail = report_json(r);
        auto num = [](const json& v) { return v.is_string() ? to_double(parse_rational(v.get<std::string>())) : v.get<double>(); };
        auto check = [&](const char* key, bool is_upper, const std::vector<MomentEndpoint>& eps) {
            if (!expect.contains(key)) return;
            for (auto& [ks, v] : expect[key].items()) {
                int k = std::stoi(ks);
                if (k > r.m || !eps[static_cast<std::size_t>(k)].ok()) {
                    row.failures.push_back(std::string(key) + "[" + ks + "] missing");
                    continue;
                }
                double got = to_double(eps[static_cast<std::size_t>(k)].value), want = num(v);
                if (is_upper ? got > want + tol : got < want - tol)
                    row.failures.push_back(std::string(key) + "[" + ks + "] = " + std::to_string(got) + " vs " + std::to_string(want));
            }
        };
        check("upper", true, r.upper);
        check("lower", false, r.lower);
        if (expect.contains("central_upper"))
            for (auto& [ks, v] : expect["central_upper"].items()) {
                int k = std::stoi(ks);
                auto& c = r.central.at(static_cast<std::size_t>(k));
                if (!c || to_double(*c) > num(v) + tol)
                    row.failures.push_back("central_upper[" + ks + "]" + (c ? " = " + std::to_string(to_double(*c)) : " missing"));
            }
        if (expect.contains("sound") && expect["sound"].get<bool>() != r.soundness.pass())
            row.failures.push_back(std::string("soundness verdict ") + (r.soundness.pass() ? "pass" : "fail"));
        if (expect.contains("max_ms") && r.time_ms > expect["max_ms"].get<double>())
            row.failures.push_back("time " + std::to_string(r.time_ms) + " ms");
        if (expect.contains("simulate") && r.has_bounds()) {
            auto sim = expect["simulate"];
            auto e = estimate_moments(p, static_cast<unsigned>(r.m), sim.value("trials", 100000), sim.value("seed", 1), 10000000, r.valuation());
            for (int k = 1; k <= r.m; ++k) {
                double lo = to_double(r.lower[static_cast<std::size_t>(k)].value), hi = to_double(r.upper[static_cast<std::size_t>(k)].value);
                double se = e.raw_se[static_cast<std::size_t>(k)], x = e.raw[static_cast<std::size_t>(k)];
                double slack = 4 * se + 1e-9 * std::max(1.0, std::abs(x));
                if (x < lo - slack || x > hi + slack)
                    row.failures.push_back("simulated raw moment " + std::to_string(k) + " = " + std::to_string(x) + " outside bounds");
            }
            row.detail["simulation"] = simulation_json(e);
        }
        row.pass = row.failures.empty();
    } catch (const std::exception& ex) {
        row.failures.push_back(ex.what());
    }
    return row;
}

inline std::vector<BenchRow> run_bench(const std::string& dir, std::ostream* warn = nullptr) {
    namespace fs = std::filesystem;
    std::vector<fs::path> files;
    for (auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".appl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<std::future<BenchRow>> jobs;
    std::vector<BenchRow> rows;
    for (auto& f : files) {
        fs::path side = f;
        side.replace_extension(".expect.json");
        if (!fs::exists(side)) {
            if (warn) *warn << "warning: " << f.filename().string() << " has no sidecar, skipped\n";
            BenchRow r;
            r.program = f.filename().string();
            r.skipped = true;
            rows.push_back(r);
            continue;
        }
        json expect = json::parse(read_file(side.string()));
        jobs.push_back(std::async(std::launch::async, bench_one, f, expect));
    }
    for (auto& j : jobs) rows.push_back(j.get());
    std::sort(rows.begin(), rows.end(), [](const BenchRow& a, const BenchRow& b) { return a.program < b.program; });
    return rows;
}

inline json bench_json(const std::vector<BenchRow>& rows) {
    json j = json::array();
    for (auto& r : rows) {
        json x;
        x["program"] = r.program;
        x["status"] = r.skipped ? "skipped" : (r.pass ? "pass" : "fail");
        if (!r.failures.empty()) x["failures"] = r.failures;
        if (!r.skipped) x["time_ms"] = r.time_ms;
        j.push_back(x);
    }
    return j;
}

}  // namespace cma
