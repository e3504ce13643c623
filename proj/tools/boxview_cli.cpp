#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "boxview/boxview.hpp"
#include "boxview/report.hpp"
#include "boxview/verify.hpp"

#ifndef BOXVIEW_BENCH_DIR
#define BOXVIEW_BENCH_DIR "bench"
#endif

using namespace boxview;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("BOXVIEW_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw UsageError("BOXVIEW_SEED is not an unsigned integer");
        }
    }
    return 1;
}

ModelVariant variant_arg(const std::string& s) {
    auto v = parse_variant(s);
    if (!v) throw UsageError("unknown variant '" + s + "'");
    return *v;
}

Brancher brancher_arg(const std::string& s) {
    static const std::map<std::string, Brancher> table = {
        {"input-min", {{}, VarSelect::InputOrder, ValueSelect::MinValue}},
        {"input-bisect", {{}, VarSelect::InputOrder, ValueSelect::Bisect}},
        {"ff-min", {{}, VarSelect::FirstFail, ValueSelect::MinValue}},
        {"ff-bisect", {{}, VarSelect::FirstFail, ValueSelect::Bisect}}};
    auto it = table.find(s);
    if (it == table.end()) throw UsageError("unknown brancher '" + s + "'");
    return it->second;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string item; std::getline(in, item, sep);)
        if (!item.empty()) out.push_back(item);
    return out;
}

struct SolveArgs {
    std::string problem;
    int n = 0, d = 0, c = 0, a = 0, a1 = 0, a2 = 0;
    int w = 0, g = 0, s = 0, m = 0, length = 0, l = 0;
    std::string metric = "hamming";
    std::optional<std::uint64_t> seed;
    std::string variant = "views-static";
    std::string brancher = "input-min";
    double time_limit = 0;
    bool dump_views = false;
    bool dump_model = false;
    bool all = false;
};

InstanceSpec spec_of(const SolveArgs& a) {
    json j = {{"problem", a.problem}, {"seed", a.seed.value_or(default_seed())}};
    auto put = [&](const char* k, int v) { j[k] = v; };
    if (a.problem == "linear") {
        put("n", a.n), put("d", a.d), put("c", a.c), put("a", a.a);
    } else if (a.problem == "nonlinear") {
        put("n", a.n), put("d", a.d), put("c", a.c), put("a1", a.a1), put("a2", a.a2);
    } else if (a.problem == "golfers") {
        put("w", a.w), put("g", a.g), put("s", a.s);
    } else if (a.problem == "golomb") {
        put("m", a.m), put("length", a.length);
    } else if (a.problem == "labs") {
        put("n", a.n);
    } else if (a.problem == "ecc") {
        put("a", a.a), put("n", a.n), put("l", a.l), put("d", a.d);
        j["metric"] = a.metric;
    }
    try {
        return spec_from_json(j);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
}

int run_solve(const SolveArgs& a) {
    InstanceSpec sp = spec_of(a);
    ModelVariant v = variant_arg(a.variant);
    if (!supports(sp, v)) throw UsageError(std::string(problem_name(sp)) + " does not support " + a.variant);
    RunOptions ro;
    ro.brancher_template = brancher_arg(a.brancher);
    ro.limits.time_limit_ms = a.time_limit;
    Model m = build_model(sp, v);
    if (a.dump_model) std::cout << m.dump();
    if (a.dump_views)
        for (const auto& line : m.dump_views()) std::cout << line << '\n';
    RunRecord r;
    if (a.all && !m.optimization()) {
        Brancher b = m.brancher(ro.brancher_template.var_select, ro.brancher_template.value_select);
        SearchResult res = solve(m, b, ro.limits, true);
        r.problem = m.problem;
        r.instance = m.instance;
        r.variant = to_string(v);
        r.stats = res.stats;
        r.status = res.status == SearchStatus::Timeout ? RunStatus::Timeout
                   : res.stats.solutions            ? RunStatus::Sat
                                                    : RunStatus::Unsat;
    } else {
        r = run_model(m, ro);
    }
    std::cout << to_json(r).dump() << std::endl;
    return 0;
}

struct BenchArgs {
    std::string suite;
    std::string variants;
    int repeats = 10;
    int max_repeats = 50;
    int jobs = 1;
    std::string out;
    double threshold = 0.02;
    double time_limit = 0;
    bool full = false;
    bool median = false;
};

int run_bench_cmd(const BenchArgs& a) {
    std::string path = a.suite;
    if (path.empty()) path = std::string(BOXVIEW_BENCH_DIR) + (a.full ? "/suite_full.json" : "/suite.json");
    std::vector<SuiteEntry> suite;
    try {
        suite = load_suite(path);
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    BenchOptions bo;
    if (!a.variants.empty()) {
        bo.variants.clear();
        for (const auto& v : split(a.variants, ',')) bo.variants.push_back(variant_arg(v));
    }
    if (a.repeats < 1 || a.jobs < 1 || a.threshold <= 0) throw UsageError("repeats, jobs and threshold must be positive");
    bo.repeats = a.repeats;
    bo.max_repeats = std::max(a.repeats, a.max_repeats);
    bo.threshold = a.threshold;
    bo.median = a.median;
    bo.jobs = a.jobs;
    bo.run.limits.time_limit_ms = a.time_limit;
    std::ofstream jsonl, csv;
    if (!a.out.empty()) {
        jsonl.open(a.out + ".jsonl");
        csv.open(a.out + ".csv");
        if (!jsonl || !csv) throw UsageError("cannot write to " + a.out);
        csv << csv_header() << '\n';
    }
    auto rows = run_bench(suite, bo, [&](const RunRecord& r) { std::cerr << to_json(r).dump() << '\n'; });
    for (const auto& r : rows) {
        std::cout << to_json(r).dump() << '\n';
        if (jsonl) jsonl << to_json(r).dump() << '\n';
        if (csv) csv << to_csv(r) << '\n';
    }
    json tables = json::array();
    for (const auto& t : standard_tables(rows)) {
        std::cout << '\n' << format_table(t);
        json jt = {{"title", t.title}, {"rows", json::array()}};
        for (const auto& s : t.rows) jt["rows"].push_back(to_json(s));
        tables.push_back(jt);
    }
    if (!a.out.empty()) std::ofstream(a.out + "_ratios.json") << tables.dump(2) << '\n';
    std::size_t errors = std::count_if(rows.begin(), rows.end(), [](const RunRecord& r) { return r.status == RunStatus::Error; });
    return errors ? 2 : 0;
}

struct VerifyArgs {
    int bound = 5;
    std::optional<std::uint64_t> seed;
    std::size_t random_cases = 10'000;
    std::string inject_fault;
    std::string suites;
};

int run_verify(const VerifyArgs& a) {
    if (a.bound < 1 || a.bound > 6) throw UsageError("--exhaustive-bound must be within 1..6");
    if (!a.inject_fault.empty() && a.inject_fault != "mul") throw UsageError("unknown fault '" + a.inject_fault + "'");
    verify::Options opt;
    opt.exhaustive_bound = a.bound;
    opt.seed = a.seed.value_or(default_seed());
    opt.random_cases = a.random_cases;
    opt.inject_fault = a.inject_fault;
    using Suite = std::function<verify::SuiteResult(const verify::Options&)>;
    std::vector<std::pair<std::string, Suite>> all = {
        {"approx-laws", verify::approx_laws},
        {"taxonomy", verify::taxonomy},
        {"view-conformance", verify::view_conformance},
        {"box-view-example", verify::box_view_example},
        {"completeness-matrix", verify::completeness_matrix},
        {"idempotency-audit", verify::idempotency_audit},
        {"dispatch-equivalence", verify::dispatch_equivalence},
        {"variant-equivalence", [](const verify::Options& o) { return verify::variant_equivalence(o); }}};
    std::vector<std::string> wanted = split(a.suites, ',');
    for (const auto& w : wanted)
        if (std::none_of(all.begin(), all.end(), [&](const auto& p) { return p.first == w; }))
            throw UsageError("unknown suite '" + w + "'");
    int failing = 0;
    for (const auto& [name, run] : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), name) == wanted.end()) continue;
        verify::SuiteResult r = run(opt);
        for (const auto& rec : r.records) {
            json j = rec;
            j["suite"] = r.name;
            std::cout << j.dump() << '\n';
        }
        json summary = {{"suite", r.name},
                        {"passed", r.passed()},
                        {"checks", r.checks},
                        {"failures", r.failures},
                        {"time_ms", r.time_ms}};
        std::cout << summary.dump() << std::endl;
        if (!r.passed()) ++failing;
    }
    return std::min(failing, 100);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"boxview: bounds propagation through box views"};
    app.require_subcommand(1);

    SolveArgs sa;
    auto* solve_cmd = app.add_subcommand("solve", "Build and solve one instance; prints one JSON record");
    solve_cmd->add_option("problem", sa.problem, "linear | nonlinear | golfers | golomb | labs | ecc")
        ->required()
        ->check(CLI::IsMember({"linear", "nonlinear", "golfers", "golomb", "labs", "ecc"}));
    solve_cmd->add_option("--n", sa.n, "variables, sequence length or number of codewords");
    solve_cmd->add_option("--d", sa.d, "domain size or minimum distance");
    solve_cmd->add_option("--c", sa.c, "number of constraints");
    solve_cmd->add_option("--a", sa.a, "terms per constraint or alphabet size");
    solve_cmd->add_option("--a1", sa.a1, "terms per constraint");
    solve_cmd->add_option("--a2", sa.a2, "factors per term");
    solve_cmd->add_option("--w", sa.w, "weeks");
    solve_cmd->add_option("--g", sa.g, "groups");
    solve_cmd->add_option("--s", sa.s, "group size");
    solve_cmd->add_option("--m", sa.m, "marks");
    solve_cmd->add_option("--length", sa.length, "ruler length");
    solve_cmd->add_option("--l", sa.l, "codeword length");
    solve_cmd->add_option("--metric", sa.metric, "hamming | lee")->check(CLI::IsMember({"hamming", "lee"}));
    solve_cmd->add_option("--seed", sa.seed, "instance seed (default: BOXVIEW_SEED or 1)");
    solve_cmd->add_option("--variant", sa.variant, "vars | vars-global | views-static | views-dynamic | "
                                                   "views-static-global | views-dynamic-global");
    solve_cmd->add_option("--brancher", sa.brancher, "input-min | input-bisect | ff-min | ff-bisect");
    solve_cmd->add_option("--time-limit", sa.time_limit, "milliseconds, 0 = none");
    solve_cmd->add_flag("--dump-views", sa.dump_views, "print the view expressions in prefix form");
    solve_cmd->add_flag("--dump-model", sa.dump_model, "print the model");
    solve_cmd->add_flag("--all", sa.all, "enumerate all solutions");

    BenchArgs ba;
    auto* bench_cmd = app.add_subcommand("bench", "Run a benchmark suite across variants");
    bench_cmd->add_option("--suite", ba.suite, "suite file (JSON array of instance specs)");
    bench_cmd->add_option("--variants", ba.variants, "comma-separated variants (default: all)");
    bench_cmd->add_option("--repeats", ba.repeats, "initial repetitions per run");
    bench_cmd->add_option("--max-repeats", ba.max_repeats, "cap on repetitions");
    bench_cmd->add_option("--jobs", ba.jobs, "parallel instances");
    bench_cmd->add_option("--out", ba.out, "output prefix for .jsonl, .csv and _ratios.json");
    bench_cmd->add_option("--threshold", ba.threshold, "relative standard deviation target");
    bench_cmd->add_option("--time-limit", ba.time_limit, "milliseconds per run, 0 = none");
    bench_cmd->add_flag("--full", ba.full, "use the full-size suite");
    bench_cmd->add_flag("--median", ba.median, "report the median time instead of the minimum");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle verification suites");
    verify_cmd->add_option("--exhaustive-bound", va.bound, "value bound for exhaustive checks");
    verify_cmd->add_option("--seed", va.seed, "seed (default: BOXVIEW_SEED or 1)");
    verify_cmd->add_option("--random-cases", va.random_cases, "randomized cases per suite");
    verify_cmd->add_option("--inject-fault", va.inject_fault, "mul: faulty product inverse");
    verify_cmd->add_option("--suites", va.suites, "comma-separated subset of suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        if (*solve_cmd) return run_solve(sa);
        if (*bench_cmd) return run_bench_cmd(ba);
        return run_verify(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
}
