#include "cma/pipeline.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void write_out(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw cma::StageError("io", "cannot write " + path);
    out << text;
}

struct Common {
    std::string file;
    int m = 2;
    int d = 1;
    std::string eval;
    std::string json_path;
    bool no_call_weaken = false;

    cma::AnalyzeOptions options() const {
        cma::AnalyzeOptions o;
        o.m = m;
        o.d = d;
        if (!eval.empty()) o.eval = cma::parse_valuation(eval);
        o.weaken_calls = !no_call_weaken;
        return o;
    }
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("file", c.file, "APPL program")->required()->check(CLI::ExistingFile);
    app->add_option("--moment", c.m, "highest moment m")->check(CLI::Range(1, 8));
    app->add_option("--degree", c.d, "template degree d per moment order")->check(CLI::Range(0, 6));
    app->add_option("--eval", c.eval, "objective valuation, e.g. d=10,x=0");
}

// "start:stop:step"
std::array<cma::Rational, 3> parse_range(const std::string& s) {
    std::array<cma::Rational, 3> r;
    std::stringstream ss(s);
    std::string part;
    int i = 0;
    while (std::getline(ss, part, ':')) {
        if (i >= 3) throw std::invalid_argument("range is start:stop:step");
        r[static_cast<std::size_t>(i++)] = cma::parse_rational(part);
    }
    if (i != 3) throw std::invalid_argument("range is start:stop:step");
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Moment-bound analyzer for probabilistic programs"};
    app.require_subcommand(1);

    Common an;
    std::string solver = "builtin";
    std::uint64_t an_trials = 0, an_seed = 1;
    bool dump = false;
    auto* analyze = app.add_subcommand("analyze", "infer interval bounds on raw moments of the accumulated cost");
    add_common(analyze, an);
    analyze->add_option("--solver", solver, "builtin or export")->check(CLI::IsMember({"builtin", "export"}));
    analyze->add_option("--json", an.json_path, "write the report here instead of stdout");
    analyze->add_option("--trials", an_trials, "attach a simulation with this many trials");
    analyze->add_option("--seed", an_seed, "simulation seed");
    analyze->add_flag("--dump-constraints", dump, "print the generated constraints to stderr");
    analyze->add_flag("--no-call-weakening", an.no_call_weaken, "equate call-site posts instead of weakening");

    Common sm;
    std::uint64_t trials = 100000, seed = 1, limit = 10000000;
    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimate of cost moments");
    add_common(simulate, sm);
    simulate->add_option("--trials", trials, "number of traces")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed, "random seed");
    simulate->add_option("--step-limit", limit, "evaluation steps per trace")->check(CLI::PositiveNumber);
    simulate->add_option("--json", sm.json_path, "write the result here instead of stdout");

    Common tl;
    std::string csv_path, range;
    auto* tail = app.add_subcommand("tail", "tail-probability bounds as CSV");
    add_common(tail, tl);
    tail->add_option("--csv", csv_path, "write the CSV here instead of stdout");
    tail->add_option("--range", range, "thresholds start:stop:step");
    tail->add_option("--json", tl.json_path, "also write the analysis report");

    std::string bench_dir, bench_json;
    auto* bench = app.add_subcommand("bench", "check a corpus directory against its sidecar expectations");
    bench->add_option("dir", bench_dir, "directory of .appl files")->required()->check(CLI::ExistingDirectory);
    bench->add_option("--json", bench_json, "write the summary here instead of stdout");

    Common ex;
    int target = -1;
    std::string side = "upper", out_path;
    auto* exportlp = app.add_subcommand("export-lp", "write the constraint system in LP text format");
    add_common(exportlp, ex);
    exportlp->add_option("--target", target, "moment whose endpoint is the objective (default m)");
    exportlp->add_option("--side", side, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    exportlp->add_option("-o,--output", out_path, "output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            auto p = cma::load_program(an.file);
            auto o = an.options();
            if (solver == "export" || dump) {
                auto lp = cma::build_lp(p, o, o.m, true);
                if (dump) std::cerr << cma::dump_constraints(lp);
                if (solver == "export") {
                    write_out(an.json_path, cma::export_lp(lp));
                    return 0;
                }
            }
            auto r = cma::run_analyze(p, o, an.file);
            auto j = cma::report_json(r);
            if (an_trials > 0) j["simulation"] = cma::simulation_json(cma::estimate_moments(p, static_cast<unsigned>(o.m), an_trials, an_seed, 10000000, r.valuation()));
            write_out(an.json_path, j.dump(2) + "\n");
            return r.error.empty() ? 0 : 2;
        }
        if (*simulate) {
            auto p = cma::load_program(sm.file);
            std::map<std::string, cma::Rational> init;
            if (!sm.eval.empty()) init = cma::parse_valuation(sm.eval);
            cma::check_valuation(p, init);
            auto e = cma::estimate_moments(p, static_cast<unsigned>(sm.m), trials, seed, limit, init);
            if (e.biased) std::cerr << "warning: " << e.nonterminated << " traces hit the step limit\n";
            write_out(sm.json_path, cma::simulation_json(e).dump(2) + "\n");
            return 0;
        }
        if (*tail) {
            auto p = cma::load_program(tl.file);
            auto r = cma::run_analyze(p, tl.options(), tl.file);
            if (!r.has_bounds()) {
                std::cerr << "error: no bound at this template degree\n";
                return 2;
            }
            auto b = r.bounds();
            cma::Rational start, stop, step;
            if (!range.empty()) {
                auto rr = parse_range(range);
                start = rr[0];
                stop = rr[1];
                step = rr[2];
            } else {
                cma::Rational base = b.hi[1] > 1 ? b.hi[1] : cma::Rational(1);
                start = base;
                stop = base * 4;
                step = (stop - start) / 30;
            }
            auto curve = cma::tail_curve(b, r.central, r.nonneg_cost, start, stop, step);
            write_out(csv_path, curve.csv());
            if (!tl.json_path.empty()) write_out(tl.json_path, cma::report_json(r).dump(2) + "\n");
            return 0;
        }
        if (*bench) {
            auto rows = cma::run_bench(bench_dir, &std::cerr);
            write_out(bench_json, cma::bench_json(rows).dump(2) + "\n");
            for (auto& r : rows)
                if (!r.skipped && !r.pass) return 1;
            return 0;
        }
        if (*exportlp) {
            auto p = cma::load_program(ex.file);
            auto o = ex.options();
            auto lp = cma::build_lp(p, o, target < 0 ? o.m : target, side == "upper");
            write_out(out_path, cma::export_lp(lp));
            return 0;
        }
    } catch (const cma::StageError& e) {
        std::cerr << "error [" << e.stage << "]: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
